#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace foodpair {

struct Hyperparams {
  int input_dim = 64;
  int hidden_i = 64;
  int hidden_j = 64;
  bool symmetrize = false;
  bool use_wide = true;

  int wide_size() const { return use_wide ? hidden_j * hidden_j : 0; }
  int head_size() const { return wide_size() + hidden_j; }
  // Throws InputError on non-positive sizes.
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

// Siamese encoder (W1, b1, W2, b2) shared by both ingredients, deep tower
// (W3, b3, W4, b4) and the affine head W5 over (wide, deep), wide first.
struct ModelParams {
  Eigen::MatrixXd W1;     // i x input_dim
  Eigen::VectorXd b1;     // i
  Eigen::MatrixXd W2;     // j x i
  Eigen::VectorXd b2;     // j
  Eigen::MatrixXd W3;     // j x 2j
  Eigen::VectorXd b3;     // j
  Eigen::MatrixXd W4;     // j x j
  Eigen::VectorXd b4;     // j
  Eigen::RowVectorXd W5;  // 1 x (j^2 + j), or 1 x j without the wide part
  double b5 = 0.0;

  static constexpr std::size_t kTensorCount = 10;
  static constexpr std::array<const char*, kTensorCount> kTensorNames = {
      "W1", "b1", "W2", "b2", "W3", "b3", "W4", "b4", "W5", "b5"};

  // All-zero parameters with the shapes `hp` implies.
  static ModelParams zeros(const Hyperparams& hp);

  // Flat views over each tensor's storage (column-major for matrices), in
  // kTensorNames order.
  std::array<std::span<double>, kTensorCount> tensors();
  std::array<std::span<const double>, kTensorCount> tensors() const;

  std::size_t parameter_count() const;
  bool matches(const Hyperparams& hp) const;
  bool all_finite() const;

  friend bool operator==(const ModelParams& l, const ModelParams& r);
};

// He initialization: N(0, 2 / fan_in) weights, zero biases.
ModelParams init_params(const Hyperparams& hp, std::uint64_t seed);

Eigen::VectorXd encode(const ModelParams& params, const Eigen::VectorXd& x);

double forward(const ModelParams& params, const Hyperparams& hp,
               const Eigen::VectorXd& xa, const Eigen::VectorXd& xb);

// Column n of `xa`/`xb` is one input pair; returns one score per column.
Eigen::VectorXd forward_batch(const ModelParams& params, const Hyperparams& hp,
                              const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb);

// Checkpoint JSON: format_version 1, hyperparams, one nested array per tensor.
void save_checkpoint(std::ostream& out, const Hyperparams& hp, const ModelParams& params);
struct Checkpoint {
  Hyperparams hp;
  ModelParams params;
};
Checkpoint load_checkpoint(std::istream& in);

}  // namespace foodpair
