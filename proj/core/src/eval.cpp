#include "foodpair/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "foodpair/text_format.hpp"
#include "foodpair/train.hpp"

namespace foodpair {

RegressionMetrics regression_metrics(std::span<const double> predictions,
                                     std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ShapeError("prediction/target length mismatch");
  const std::size_t n = targets.size();
  if (n < 2) throw InputError("regression metrics need at least 2 examples");
  const double count = static_cast<double>(n);

  double pred_mean = 0.0;
  double target_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    pred_mean += predictions[k];
    target_mean += targets[k];
  }
  pred_mean /= count;
  target_mean /= count;

  double squared = 0.0;
  double absolute = 0.0;
  double ss_tot = 0.0;
  double ss_pred = 0.0;
  double cross = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double err = predictions[k] - targets[k];
    squared += err * err;
    absolute += std::abs(err);
    const double dt = targets[k] - target_mean;
    const double dp = predictions[k] - pred_mean;
    ss_tot += dt * dt;
    ss_pred += dp * dp;
    cross += dp * dt;
  }
  if (ss_tot == 0.0) throw InputError("targets are all identical: corr and r2 are undefined");

  RegressionMetrics m;
  m.mse = squared / count;
  m.rmse = std::sqrt(m.mse);
  m.mae = absolute / count;
  // A constant predictor has no correlation; report 0 rather than NaN.
  m.corr = ss_pred == 0.0 ? 0.0 : cross / std::sqrt(ss_pred * ss_tot);
  m.r2 = 1.0 - squared / ss_tot;
  return m;
}

double dcg_at_k(std::span<const double> ranked_true_scores, int k) {
  double dcg = 0.0;
  const std::size_t limit = std::min(ranked_true_scores.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < limit; ++r) {
    dcg += std::max(ranked_true_scores[r], 0.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(std::span<const double> ranked_true_scores,
                 std::span<const double> ideal_true_scores, int k) {
  if (k < 1) throw InputError("NDCG cutoff must be at least 1");
  std::vector<double> ranked(ranked_true_scores.begin(), ranked_true_scores.end());
  std::vector<double> ideal(ideal_true_scores.begin(), ideal_true_scores.end());
  {
    std::vector<double> a = ranked;
    std::vector<double> b = ideal;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InputError("NDCG inputs are not permutations of the same scores");
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double ideal_dcg = dcg_at_k(ideal, k);
  if (ideal_dcg == 0.0) return 1.0;
  return std::clamp(dcg_at_k(ranked, k) / ideal_dcg, 0.0, 1.0);
}

double roc_auc(std::span<const double> predictions, std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction/label length mismatch");
  const std::size_t n = predictions.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return predictions[l] < predictions[r]; });

  // Sum of positive ranks with midranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && predictions[order[end]] == predictions[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + end + 1);
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw InputError("ROC-AUC needs at least one positive and one negative label");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

std::vector<double> cosine_baseline(const EmbeddingTable& embeddings,
                                    std::span<const std::pair<std::string, std::string>> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const auto& u = embeddings.at(a);
    const auto& v = embeddings.at(b);
    if (u.squaredNorm() == 0.0 || v.squaredNorm() == 0.0) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(cosine(u, v));
  }
  return out;
}

MetricsReport evaluate(std::span<const double> predictions, std::span<const double> targets,
                       double threshold) {
  if (predictions.empty()) throw InputError("cannot evaluate an empty split");
  const RegressionMetrics reg = regression_metrics(predictions, targets);
  MetricsReport report;
  report.rmse = reg.rmse;
  report.mse = reg.mse;
  report.mae = reg.mae;
  report.corr = reg.corr;
  report.r2 = reg.r2;
  report.n_examples = static_cast<std::int64_t>(targets.size());

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return predictions[l] > predictions[r]; });
  std::vector<double> ranked;
  ranked.reserve(order.size());
  for (const auto k : order) ranked.push_back(targets[k]);
  for (const int k : kNdcgCutoffs) report.ndcg_at[k] = ndcg_at_k(ranked, targets, k);

  std::vector<std::uint8_t> labels;
  labels.reserve(targets.size());
  for (const double t : targets) {
    labels.push_back(classify_pair(t, threshold) == PairClass::kComplementary ? 1 : 0);
  }
  const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw InputError("ROC-AUC is undefined: " + std::string(positives == 0 ? "no" : "every") +
                     " pair scores at or above the threshold " + format_shortest(threshold) +
                     " (choose another threshold)");
  }
  report.roc_auc = roc_auc(predictions, labels);
  return report;
}

std::vector<double> predict_pairs(const ModelParams& params, const Hyperparams& hp,
                                  const EmbeddingTable& embeddings,
                                  const std::vector<PairStats>& pairs) {
  const Examples examples = make_examples(pairs, embeddings);
  const Eigen::VectorXd scores = forward_batch(params, hp, examples.xa, examples.xb);
  return {scores.data(), scores.data() + scores.size()};
}

namespace {

std::vector<double> targets_of(const std::vector<PairStats>& split) {
  std::vector<double> out;
  out.reserve(split.size());
  for (const auto& p : split) out.push_back(p.score);
  return out;
}

}  // namespace

MetricsReport evaluate_model(const ModelParams& params, const Hyperparams& hp,
                             const EmbeddingTable& embeddings,
                             const std::vector<PairStats>& split, double threshold) {
  return evaluate(predict_pairs(params, hp, embeddings, split), targets_of(split), threshold);
}

MetricsReport evaluate_cosine(const EmbeddingTable& embeddings,
                              const std::vector<PairStats>& split, double threshold) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(split.size());
  for (const auto& p : split) pairs.emplace_back(p.a, p.b);
  return evaluate(cosine_baseline(embeddings, pairs), targets_of(split), threshold);
}

void write_report_json(std::ostream& out, const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["rmse"] = report.rmse;
  j["mse"] = report.mse;
  j["mae"] = report.mae;
  j["corr"] = report.corr;
  j["r2"] = report.r2;
  nlohmann::ordered_json ndcg = nlohmann::ordered_json::object();
  for (const auto& [k, value] : report.ndcg_at) ndcg[std::to_string(k)] = value;
  j["ndcg_at"] = std::move(ndcg);
  j["roc_auc"] = report.roc_auc;
  j["n_examples"] = report.n_examples;
  out << j.dump(2) << '\n';
}

MetricsReport read_report_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    MetricsReport r;
    r.rmse = j.at("rmse").get<double>();
    r.mse = j.at("mse").get<double>();
    r.mae = j.at("mae").get<double>();
    r.corr = j.at("corr").get<double>();
    r.r2 = j.at("r2").get<double>();
    for (const auto& [k, value] : j.at("ndcg_at").items()) {
      r.ndcg_at[static_cast<int>(parse_int(k))] = value.get<double>();
    }
    r.roc_auc = j.at("roc_auc").get<double>();
    r.n_examples = j.at("n_examples").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report JSON: ") + e.what());
  }
}

std::string report_csv_header() {
  std::string header = "predictor,n_examples,rmse,mse,mae,corr,r2,roc_auc";
  for (const int k : kNdcgCutoffs) header += ",ndcg@" + std::to_string(k);
  return header;
}

std::string report_csv_row(std::string_view predictor, const MetricsReport& report) {
  std::string row(predictor);
  row += "," + std::to_string(report.n_examples);
  for (const double v : {report.rmse, report.mse, report.mae, report.corr, report.r2, report.roc_auc}) {
    row += "," + format_shortest(v);
  }
  for (const int k : kNdcgCutoffs) {
    const auto it = report.ndcg_at.find(k);
    row += "," + (it == report.ndcg_at.end() ? std::string() : format_shortest(it->second));
  }
  return row;
}

}  // namespace foodpair
