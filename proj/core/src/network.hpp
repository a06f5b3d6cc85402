#pragma once

// Batched forward/backward passes over the Siamese wide&deep network. Shared
// by model.cpp (inference) and train.cpp (gradients).

#include <Eigen/Dense>

#include "foodpair/model.hpp"

namespace foodpair::detail {

// Activations for one pass in one input order. Columns are examples.
struct PassCache {
  Eigen::MatrixXd xa, xb;
  Eigen::MatrixXd z1a, h1a, z2a, ha;
  Eigen::MatrixXd z1b, h1b, z2b, hb;
  Eigen::MatrixXd concat, z3, h3, z4, d;
  Eigen::MatrixXd wide_mix;  // M * hb, M the j x j view of the wide weights
  Eigen::RowVectorXd y;
};

void check_inputs(const ModelParams& params, const Hyperparams& hp, const Eigen::MatrixXd& xa,
                  const Eigen::MatrixXd& xb);

// Single-order pass (no symmetrization).
void forward_pass(const ModelParams& params, const Hyperparams& hp, const Eigen::MatrixXd& xa,
                  const Eigen::MatrixXd& xb, PassCache& cache);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/dy per column.
void backward_pass(const ModelParams& params, const Hyperparams& hp, const PassCache& cache,
                   const Eigen::RowVectorXd& dy, ModelParams& grads);

}  // namespace foodpair::detail
