#include "foodpair/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "network.hpp"

namespace foodpair {

void Hyperparams::validate() const {
  if (input_dim < 1 || hidden_i < 1 || hidden_j < 1) {
    throw InputError("input_dim, hidden_i and hidden_j must be positive");
  }
}

ModelParams ModelParams::zeros(const Hyperparams& hp) {
  hp.validate();
  const int i = hp.hidden_i;
  const int j = hp.hidden_j;
  ModelParams p;
  p.W1 = Eigen::MatrixXd::Zero(i, hp.input_dim);
  p.b1 = Eigen::VectorXd::Zero(i);
  p.W2 = Eigen::MatrixXd::Zero(j, i);
  p.b2 = Eigen::VectorXd::Zero(j);
  p.W3 = Eigen::MatrixXd::Zero(j, 2 * j);
  p.b3 = Eigen::VectorXd::Zero(j);
  p.W4 = Eigen::MatrixXd::Zero(j, j);
  p.b4 = Eigen::VectorXd::Zero(j);
  p.W5 = Eigen::RowVectorXd::Zero(hp.head_size());
  p.b5 = 0.0;
  return p;
}

namespace {

template <typename T>
std::span<T> view(T* data, Eigen::Index size) {
  return {data, static_cast<std::size_t>(size)};
}

}  // namespace

std::array<std::span<double>, ModelParams::kTensorCount> ModelParams::tensors() {
  return {view(W1.data(), W1.size()), view(b1.data(), b1.size()), view(W2.data(), W2.size()),
          view(b2.data(), b2.size()), view(W3.data(), W3.size()), view(b3.data(), b3.size()),
          view(W4.data(), W4.size()), view(b4.data(), b4.size()), view(W5.data(), W5.size()),
          view(&b5, 1)};
}

std::array<std::span<const double>, ModelParams::kTensorCount> ModelParams::tensors() const {
  return {view(W1.data(), W1.size()), view(b1.data(), b1.size()), view(W2.data(), W2.size()),
          view(b2.data(), b2.size()), view(W3.data(), W3.size()), view(b3.data(), b3.size()),
          view(W4.data(), W4.size()), view(b4.data(), b4.size()), view(W5.data(), W5.size()),
          view(&b5, 1)};
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.size();
  return n;
}

bool ModelParams::matches(const Hyperparams& hp) const {
  const int i = hp.hidden_i;
  const int j = hp.hidden_j;
  return W1.rows() == i && W1.cols() == hp.input_dim && b1.size() == i && W2.rows() == j &&
         W2.cols() == i && b2.size() == j && W3.rows() == j && W3.cols() == 2 * j &&
         b3.size() == j && W4.rows() == j && W4.cols() == j && b4.size() == j &&
         W5.size() == hp.head_size();
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (const double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool operator==(const ModelParams& l, const ModelParams& r) {
  const auto lt = l.tensors();
  const auto rt = r.tensors();
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    if (!std::equal(lt[k].begin(), lt[k].end(), rt[k].begin(), rt[k].end())) return false;
  }
  return l.W1.rows() == r.W1.rows() && l.W2.rows() == r.W2.rows() && l.W3.rows() == r.W3.rows();
}

ModelParams init_params(const Hyperparams& hp, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(hp);
  std::mt19937_64 rng(seed);
  const auto he_fill = [&rng](auto& weights) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(weights.cols())));
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = normal(rng);
    }
  };
  he_fill(p.W1);
  he_fill(p.W2);
  he_fill(p.W3);
  he_fill(p.W4);
  he_fill(p.W5);
  return p;
}

namespace detail {

void check_inputs(const ModelParams& params, const Hyperparams& hp, const Eigen::MatrixXd& xa,
                  const Eigen::MatrixXd& xb) {
  if (!params.matches(hp)) throw ShapeError("parameters do not match the hyperparameters");
  if (xa.rows() != hp.input_dim || xb.rows() != hp.input_dim) {
    throw ShapeError("input vectors must have " + std::to_string(hp.input_dim) + " entries");
  }
  if (xa.cols() != xb.cols()) throw ShapeError("input batches differ in size");
}

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// Zeroes gradient entries where the pre-activation was not strictly positive.
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& upstream, const Eigen::MatrixXd& z) {
  return (z.array() > 0.0).select(upstream, 0.0);
}

}  // namespace

void forward_pass(const ModelParams& p, const Hyperparams& hp, const Eigen::MatrixXd& xa,
                  const Eigen::MatrixXd& xb, PassCache& c) {
  const int j = hp.hidden_j;
  c.xa = xa;
  c.xb = xb;
  c.z1a = (p.W1 * xa).colwise() + p.b1;
  c.h1a = relu(c.z1a);
  c.z2a = (p.W2 * c.h1a).colwise() + p.b2;
  c.ha = relu(c.z2a);
  c.z1b = (p.W1 * xb).colwise() + p.b1;
  c.h1b = relu(c.z1b);
  c.z2b = (p.W2 * c.h1b).colwise() + p.b2;
  c.hb = relu(c.z2b);

  c.concat.resize(2 * j, xa.cols());
  c.concat.topRows(j) = c.ha;
  c.concat.bottomRows(j) = c.hb;
  c.z3 = (p.W3 * c.concat).colwise() + p.b3;
  c.h3 = relu(c.z3);
  c.z4 = (p.W4 * c.h3).colwise() + p.b4;
  c.d = relu(c.z4);

  const auto deep_weights = p.W5.tail(j);
  c.y = (deep_weights * c.d).array() + p.b5;
  if (hp.use_wide) {
    // W5's wide block flattens the outer product row-major, so entry p*j + q
    // multiplies ha[p] * hb[q]. Mapping it column-major yields M^T.
    const Eigen::Map<const Eigen::MatrixXd> wide_t(p.W5.data(), j, j);
    c.wide_mix = wide_t.transpose() * c.hb;
    c.y += c.ha.cwiseProduct(c.wide_mix).colwise().sum();
  }
}

void backward_pass(const ModelParams& p, const Hyperparams& hp, const PassCache& c,
                   const Eigen::RowVectorXd& dy, ModelParams& g) {
  const int j = hp.hidden_j;
  g.b5 += dy.sum();
  g.W5.tail(j) += dy * c.d.transpose();

  Eigen::MatrixXd dha = Eigen::MatrixXd::Zero(j, c.ha.cols());
  Eigen::MatrixXd dhb = Eigen::MatrixXd::Zero(j, c.hb.cols());
  if (hp.use_wide) {
    const Eigen::Map<const Eigen::MatrixXd> wide_t(p.W5.data(), j, j);
    const Eigen::MatrixXd ha_scaled = c.ha * dy.asDiagonal();
    // dM = sum_n dy_n ha_n hb_n^T; stored row-major, i.e. as dM^T column-major.
    Eigen::Map<Eigen::MatrixXd> dwide_t(g.W5.data(), j, j);
    dwide_t += c.hb * ha_scaled.transpose();
    dha += c.wide_mix * dy.asDiagonal();
    dhb += wide_t * ha_scaled;
  }

  const Eigen::MatrixXd dz4 = relu_backward(p.W5.tail(j).transpose() * dy, c.z4);
  g.W4 += dz4 * c.h3.transpose();
  g.b4 += dz4.rowwise().sum();
  const Eigen::MatrixXd dz3 = relu_backward(p.W4.transpose() * dz4, c.z3);
  g.W3 += dz3 * c.concat.transpose();
  g.b3 += dz3.rowwise().sum();
  const Eigen::MatrixXd dconcat = p.W3.transpose() * dz3;
  dha += dconcat.topRows(j);
  dhb += dconcat.bottomRows(j);

  const auto encoder_backward = [&](const Eigen::MatrixXd& dh, const Eigen::MatrixXd& z2,
                                    const Eigen::MatrixXd& h1, const Eigen::MatrixXd& z1,
                                    const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd dz2 = relu_backward(dh, z2);
    g.W2 += dz2 * h1.transpose();
    g.b2 += dz2.rowwise().sum();
    const Eigen::MatrixXd dz1 = relu_backward(p.W2.transpose() * dz2, z1);
    g.W1 += dz1 * x.transpose();
    g.b1 += dz1.rowwise().sum();
  };
  encoder_backward(dha, c.z2a, c.h1a, c.z1a, c.xa);
  encoder_backward(dhb, c.z2b, c.h1b, c.z1b, c.xb);
}

}  // namespace detail

Eigen::VectorXd encode(const ModelParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.W1.cols()) {
    throw ShapeError("input vector must have " + std::to_string(params.W1.cols()) + " entries");
  }
  const Eigen::VectorXd h1 = (params.W1 * x + params.b1).cwiseMax(0.0);
  return (params.W2 * h1 + params.b2).cwiseMax(0.0);
}

Eigen::VectorXd forward_batch(const ModelParams& params, const Hyperparams& hp,
                              const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb) {
  detail::check_inputs(params, hp, xa, xb);
  detail::PassCache forward_order;
  detail::forward_pass(params, hp, xa, xb, forward_order);
  if (!hp.symmetrize) return forward_order.y.transpose();
  detail::PassCache swapped;
  detail::forward_pass(params, hp, xb, xa, swapped);
  return ((forward_order.y + swapped.y) * 0.5).transpose();
}

double forward(const ModelParams& params, const Hyperparams& hp, const Eigen::VectorXd& xa,
               const Eigen::VectorXd& xb) {
  return forward_batch(params, hp, xa, xb)[0];
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

template <typename Matrix>
void read_matrix(const nlohmann::json& j, const char* name, Matrix& target) {
  const auto& rows = j.at(name);
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != target.rows()) {
    throw ShapeError(std::string("checkpoint tensor ") + name + " has the wrong row count");
  }
  for (Eigen::Index r = 0; r < target.rows(); ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != target.cols()) {
      throw ShapeError(std::string("checkpoint tensor ") + name + " has the wrong column count");
    }
    for (Eigen::Index c = 0; c < target.cols(); ++c) {
      target(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
}

void read_vector(const nlohmann::json& j, const char* name, Eigen::VectorXd& target) {
  const auto& values = j.at(name);
  if (!values.is_array() || static_cast<Eigen::Index>(values.size()) != target.size()) {
    throw ShapeError(std::string("checkpoint tensor ") + name + " has the wrong length");
  }
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    target[k] = values[static_cast<std::size_t>(k)].get<double>();
  }
}

}  // namespace

void save_checkpoint(std::ostream& out, const Hyperparams& hp, const ModelParams& params) {
  if (!params.matches(hp)) throw ShapeError("parameters do not match the hyperparameters");
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["hyperparams"] = {{"input_dim", hp.input_dim}, {"hidden_i", hp.hidden_i},
                      {"hidden_j", hp.hidden_j},   {"symmetrize", hp.symmetrize},
                      {"use_wide", hp.use_wide}};
  j["W1"] = matrix_json(params.W1);
  j["b1"] = vector_json(params.b1);
  j["W2"] = matrix_json(params.W2);
  j["b2"] = vector_json(params.b2);
  j["W3"] = matrix_json(params.W3);
  j["b3"] = vector_json(params.b3);
  j["W4"] = matrix_json(params.W4);
  j["b4"] = vector_json(params.b4);
  j["W5"] = matrix_json(params.W5);
  j["b5"] = nlohmann::ordered_json::array({params.b5});
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    const int version = j.at("format_version").get<int>();
    if (version != 1) throw InputError("unsupported checkpoint format_version " + std::to_string(version));
    const auto& h = j.at("hyperparams");
    Checkpoint ck;
    ck.hp.input_dim = h.at("input_dim").get<int>();
    ck.hp.hidden_i = h.at("hidden_i").get<int>();
    ck.hp.hidden_j = h.at("hidden_j").get<int>();
    ck.hp.symmetrize = h.at("symmetrize").get<bool>();
    ck.hp.use_wide = h.at("use_wide").get<bool>();
    ck.params = ModelParams::zeros(ck.hp);
    read_matrix(j, "W1", ck.params.W1);
    read_vector(j, "b1", ck.params.b1);
    read_matrix(j, "W2", ck.params.W2);
    read_vector(j, "b2", ck.params.b2);
    read_matrix(j, "W3", ck.params.W3);
    read_vector(j, "b3", ck.params.b3);
    read_matrix(j, "W4", ck.params.W4);
    read_vector(j, "b4", ck.params.b4);
    read_matrix(j, "W5", ck.params.W5);
    const auto& b5 = j.at("b5");
    if (!b5.is_array() || b5.size() != 1) throw ShapeError("checkpoint tensor b5 must hold one value");
    ck.params.b5 = b5[0].get<double>();
    if (!ck.params.all_finite()) throw InputError("checkpoint contains non-finite values");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint JSON: ") + e.what());
  }
}

}  // namespace foodpair
