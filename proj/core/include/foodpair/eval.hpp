#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foodpair/embedding.hpp"
#include "foodpair/model.hpp"
#include "foodpair/pairscore.hpp"

namespace foodpair {

inline constexpr std::array<int, 6> kNdcgCutoffs = {10, 20, 50, 100, 500, 1000};

struct RegressionMetrics {
  double rmse = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double corr = 0.0;
  double r2 = 0.0;
};

struct MetricsReport {
  double rmse = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double corr = 0.0;
  double r2 = 0.0;
  std::map<int, double> ndcg_at;
  double roc_auc = 0.0;
  std::int64_t n_examples = 0;
};

RegressionMetrics regression_metrics(std::span<const double> predictions,
                                     std::span<const double> targets);

// DCG with gain max(s, 0) and log2(rank + 1) discount over the first k items.
double dcg_at_k(std::span<const double> ranked_true_scores, int k);

// `ranked` and `ideal` must hold the same multiset; `ideal` need not be
// sorted. Returns 1 when the ideal DCG is 0.
double ndcg_at_k(std::span<const double> ranked_true_scores,
                 std::span<const double> ideal_true_scores, int k);

// Mann-Whitney estimate; ties count one half.
double roc_auc(std::span<const double> predictions, std::span<const std::uint8_t> labels);

// Cosine of the two ingredient vectors per pair (0 when either is all-zero).
std::vector<double> cosine_baseline(const EmbeddingTable& embeddings,
                                    std::span<const std::pair<std::string, std::string>> pairs);

// Full report over aligned predictions and true scores. NDCG ranks by
// prediction (stable, so ties keep input order); ROC labels are
// `target >= threshold`.
MetricsReport evaluate(std::span<const double> predictions, std::span<const double> targets,
                       double threshold);

std::vector<double> predict_pairs(const ModelParams& params, const Hyperparams& hp,
                                  const EmbeddingTable& embeddings,
                                  const std::vector<PairStats>& pairs);

MetricsReport evaluate_model(const ModelParams& params, const Hyperparams& hp,
                             const EmbeddingTable& embeddings,
                             const std::vector<PairStats>& split, double threshold);
MetricsReport evaluate_cosine(const EmbeddingTable& embeddings,
                              const std::vector<PairStats>& split, double threshold);

void write_report_json(std::ostream& out, const MetricsReport& report);
MetricsReport read_report_json(std::istream& in);

// One comparison row per predictor: predictor,n_examples,rmse,mse,mae,corr,r2,roc_auc,ndcg@10,...
std::string report_csv_header();
std::string report_csv_row(std::string_view predictor, const MetricsReport& report);

}  // namespace foodpair
