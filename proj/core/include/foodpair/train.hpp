#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "foodpair/embedding.hpp"
#include "foodpair/model.hpp"
#include "foodpair/pairscore.hpp"

namespace foodpair {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 512;
  int max_epochs = 200;
  int patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Columns of xa/xb are the two (canonically ordered) ingredient vectors of one
// example; y holds the target scores.
struct Examples {
  Eigen::MatrixXd xa;
  Eigen::MatrixXd xb;
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  Examples select(std::span<const std::size_t> columns) const;
};

// Inputs for every pair in `pairs`, a (key-smaller token) first.
Examples make_examples(const std::vector<PairStats>& pairs, const EmbeddingTable& embeddings);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

// Gradient of the batch MSE with respect to every parameter. Same shapes as
// the parameters; the ReLU derivative at exactly 0 is 0.
ModelParams gradients(const ModelParams& params, const Hyperparams& hp, const Examples& batch);

struct TrainState {
  ModelParams params;
  ModelParams adam_m;
  ModelParams adam_v;
  std::int64_t step = 0;
  double best_val_rmse = 0.0;
  int epochs_since_best = 0;

  static TrainState start(ModelParams params, const Hyperparams& hp);
};

// One bias-corrected Adam update in place. Throws NumericError on a
// non-finite gradient component, leaving the state untouched.
void adam_step(TrainState& state, const ModelParams& grads, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double val_rmse = 0.0;
  double elapsed_seconds = 0.0;
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  int best_epoch = 0;
  double best_val_rmse = 0.0;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train_loop(const Examples& train, const Examples& val, const Hyperparams& hp,
                       const TrainConfig& config,
                       const std::optional<ModelParams>& initial = std::nullopt,
                       const EpochCallback& on_epoch = {});

// Trains on the dataset's train split and early-stops on its val split.
// Throws InputError before training if any dataset token lacks a vector.
TrainResult train_loop(const ScoreDataset& dataset, const EmbeddingTable& embeddings,
                       const Hyperparams& hp, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

// CSV: epoch,train_mse,val_rmse,elapsed_seconds
void write_training_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace foodpair
