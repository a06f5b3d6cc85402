#include "foodpair/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "foodpair/error.hpp"
#include "foodpair/random.hpp"
#include "foodpair/text_format.hpp"
#include "network.hpp"

namespace foodpair {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InputError("Adam betas must lie strictly between 0 and 1");
  }
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (batch_size < 1 || max_epochs < 1 || patience < 1) {
    throw InputError("batch_size, max_epochs and patience must be positive");
  }
}

Examples Examples::select(std::span<const std::size_t> columns) const {
  Examples out;
  const auto n = static_cast<Eigen::Index>(columns.size());
  out.xa.resize(xa.rows(), n);
  out.xb.resize(xb.rows(), n);
  out.y.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = static_cast<Eigen::Index>(columns[static_cast<std::size_t>(k)]);
    out.xa.col(k) = xa.col(src);
    out.xb.col(k) = xb.col(src);
    out.y[k] = y[src];
  }
  return out;
}

Examples make_examples(const std::vector<PairStats>& pairs, const EmbeddingTable& embeddings) {
  Examples out;
  const auto n = static_cast<Eigen::Index>(pairs.size());
  out.xa.resize(embeddings.dim(), n);
  out.xb.resize(embeddings.dim(), n);
  out.y.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& p = pairs[static_cast<std::size_t>(k)];
    out.xa.col(k) = embeddings.at(p.a);
    out.xb.col(k) = embeddings.at(p.b);
    out.y[k] = p.score;
  }
  return out;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw InputError("mse_loss of an empty sequence");
  if (predictions.size() != targets.size()) throw ShapeError("mse_loss length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double diff = predictions[k] - targets[k];
    sum += diff * diff;
  }
  return sum / static_cast<double>(predictions.size());
}

namespace {

double mse_of(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
  return mse_loss({predictions.data(), static_cast<std::size_t>(predictions.size())},
                  {targets.data(), static_cast<std::size_t>(targets.size())});
}

// Returns the batch MSE before the update; writes gradients into `grads`.
double loss_and_gradients(const ModelParams& params, const Hyperparams& hp, const Examples& batch,
                          ModelParams& grads) {
  if (batch.size() == 0) throw InputError("gradient of an empty batch");
  detail::check_inputs(params, hp, batch.xa, batch.xb);
  if (batch.y.size() != batch.xa.cols()) throw ShapeError("targets do not match the batch size");

  grads = ModelParams::zeros(hp);
  const double n = static_cast<double>(batch.size());
  detail::PassCache forward_order;
  detail::forward_pass(params, hp, batch.xa, batch.xb, forward_order);
  if (!hp.symmetrize) {
    const Eigen::RowVectorXd residual = forward_order.y - batch.y.transpose();
    detail::backward_pass(params, hp, forward_order, residual * (2.0 / n), grads);
    return residual.squaredNorm() / n;
  }
  detail::PassCache swapped;
  detail::forward_pass(params, hp, batch.xb, batch.xa, swapped);
  const Eigen::RowVectorXd residual = (forward_order.y + swapped.y) * 0.5 - batch.y.transpose();
  // Each order contributes half of the symmetrized output.
  const Eigen::RowVectorXd dy = residual * (1.0 / n);
  detail::backward_pass(params, hp, forward_order, dy, grads);
  detail::backward_pass(params, hp, swapped, dy, grads);
  return residual.squaredNorm() / n;
}

}  // namespace

ModelParams gradients(const ModelParams& params, const Hyperparams& hp, const Examples& batch) {
  ModelParams grads;
  loss_and_gradients(params, hp, batch, grads);
  return grads;
}

TrainState TrainState::start(ModelParams params, const Hyperparams& hp) {
  if (!params.matches(hp)) throw ShapeError("parameters do not match the hyperparameters");
  TrainState state;
  state.params = std::move(params);
  state.adam_m = ModelParams::zeros(hp);
  state.adam_v = ModelParams::zeros(hp);
  state.best_val_rmse = std::numeric_limits<double>::infinity();
  return state;
}

void adam_step(TrainState& state, const ModelParams& grads, const TrainConfig& config) {
  auto theta = state.params.tensors();
  auto m = state.adam_m.tensors();
  auto v = state.adam_v.tensors();
  const auto g = grads.tensors();
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    if (g[k].size() != theta[k].size() || m[k].size() != theta[k].size() ||
        v[k].size() != theta[k].size()) {
      throw ShapeError(std::string("gradient shape mismatch for ") + ModelParams::kTensorNames[k]);
    }
    for (const double value : g[k]) {
      if (!std::isfinite(value)) {
        throw NumericError(std::string("non-finite gradient in ") + ModelParams::kTensorNames[k]);
      }
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double m_correction = 1.0 - std::pow(config.beta1, t);
  const double v_correction = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    for (std::size_t e = 0; e < theta[k].size(); ++e) {
      const double grad = g[k][e];
      m[k][e] = config.beta1 * m[k][e] + (1.0 - config.beta1) * grad;
      v[k][e] = config.beta2 * v[k][e] + (1.0 - config.beta2) * grad * grad;
      const double m_hat = m[k][e] / m_correction;
      const double v_hat = v[k][e] / v_correction;
      theta[k][e] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainResult train_loop(const Examples& train, const Examples& val, const Hyperparams& hp,
                       const TrainConfig& config, const std::optional<ModelParams>& initial,
                       const EpochCallback& on_epoch) {
  hp.validate();
  config.validate();
  if (train.size() == 0 || val.size() == 0) throw InputError("train and val sets must be nonempty");
  if (train.xa.rows() != hp.input_dim || val.xa.rows() != hp.input_dim) {
    throw ShapeError("example vectors do not match input_dim");
  }

  const auto started = std::chrono::steady_clock::now();
  TrainState state = TrainState::start(initial ? *initial : init_params(hp, config.seed), hp);
  // A separate stream from initialization so changing the data order never
  // perturbs the initial weights.
  Rng order_rng(config.seed ^ 0xa0761d6478bd642fULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  TrainResult result;
  result.best = state.params;
  result.best_val_rmse = state.best_val_rmse;
  ModelParams grads;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span(order), order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      const Examples minibatch = train.select(std::span(order).subspan(start, count));
      loss_sum += loss_and_gradients(state.params, hp, minibatch, grads) * static_cast<double>(count);
      adam_step(state, grads, config);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_mse = loss_sum / static_cast<double>(order.size());
    entry.val_rmse = std::sqrt(mse_of(forward_batch(state.params, hp, val.xa, val.xb), val.y));
    entry.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (entry.val_rmse < state.best_val_rmse) {
      state.best_val_rmse = entry.val_rmse;
      state.epochs_since_best = 0;
      result.best = state.params;
      result.best_epoch = epoch;
    } else if (++state.epochs_since_best >= config.patience) {
      break;
    }
  }
  result.best_val_rmse = state.best_val_rmse;
  result.last = std::move(state.params);
  return result;
}

TrainResult train_loop(const ScoreDataset& dataset, const EmbeddingTable& embeddings,
                       const Hyperparams& hp, const TrainConfig& config,
                       const EpochCallback& on_epoch) {
  std::string missing;
  std::size_t missing_count = 0;
  for (const auto& token : dataset.tokens()) {
    if (embeddings.contains(token)) continue;
    missing += (missing_count++ ? ", " : "") + token;
  }
  if (missing_count > 0) {
    throw InputError("no embedding for " + std::to_string(missing_count) +
                     " dataset token(s): " + missing);
  }
  if (embeddings.dim() != hp.input_dim) {
    throw ShapeError("embedding dim " + std::to_string(embeddings.dim()) +
                     " does not match input_dim " + std::to_string(hp.input_dim));
  }
  const Examples train = make_examples(dataset.subset(Split::kTrain), embeddings);
  const Examples val = make_examples(dataset.subset(Split::kVal), embeddings);
  return train_loop(train, val, hp, config, std::nullopt, on_epoch);
}

void write_training_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,train_mse,val_rmse,elapsed_seconds\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << format_shortest(e.train_mse) << ',' << format_shortest(e.val_rmse)
        << ',' << format_fixed(e.elapsed_seconds, 3) << '\n';
  }
}

}  // namespace foodpair
