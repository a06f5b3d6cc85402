#include "foodpair/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "foodpair/error.hpp"

namespace foodpair {
namespace {

double brute_force_auc(const std::vector<double>& pred, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  double total = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!labels[p]) continue;
    for (std::size_t q = 0; q < pred.size(); ++q) {
      if (labels[q]) continue;
      total += 1.0;
      if (pred[p] > pred[q]) wins += 1.0;
      if (pred[p] == pred[q]) wins += 0.5;
    }
  }
  return wins / total;
}

TEST(RegressionMetrics, PerfectPrediction) {
  const std::vector<double> v{1, 2, 3};
  const auto m = regression_metrics(v, v);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.corr, 1.0);
  EXPECT_EQ(m.r2, 1.0);
}

TEST(RegressionMetrics, NegativeR2HandExample) {
  const auto m = regression_metrics(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6});
  EXPECT_NEAR(m.corr, 1.0, 1e-15);
  EXPECT_EQ(m.r2, -0.75);
}

TEST(RegressionMetrics, Errors) {
  EXPECT_THROW(regression_metrics(std::vector<double>{1, 2}, std::vector<double>{3, 3}), InputError);
  EXPECT_THROW(regression_metrics(std::vector<double>{1}, std::vector<double>{3}), InputError);
  EXPECT_THROW(regression_metrics(std::vector<double>{1, 2}, std::vector<double>{3}), ShapeError);
}

TEST(RegressionMetrics, RandomProperties) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> p(n), t(n);
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = normal(rng);
      t[k] = normal(rng);
    }
    const auto m = regression_metrics(p, t);
    EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-12);
    EXPECT_LE(m.mae, m.rmse * (1 + 1e-15));
    // Positive affine transforms of the predictions keep the correlation.
    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) q[k] = 3.0 * p[k] + 1.5;
    EXPECT_NEAR(regression_metrics(q, t).corr, m.corr, 1e-12);
  }
}

TEST(Ndcg, HandExample) {
  const std::vector<double> ranked{0.3, 0.5, 0.0};
  const double dcg = 0.3 + 0.5 / std::log2(3.0);
  const double idcg = 0.5 + 0.3 / std::log2(3.0);
  EXPECT_NEAR(dcg_at_k(ranked, 3), dcg, 1e-15);
  EXPECT_NEAR(ndcg_at_k(ranked, ranked, 3), dcg / idcg, 1e-15);
  EXPECT_NEAR(ndcg_at_k(ranked, ranked, 3), 0.8929, 1e-4);
}

TEST(Ndcg, IdealOrderingIsTheOnlyMaximumByEnumeration) {
  std::vector<double> scores{0.0, 0.3, 0.5};
  int perfect = 0;
  do {
    const double v = ndcg_at_k(scores, scores, 3);
    EXPECT_LE(v, 1.0);
    if (v == 1.0) {
      ++perfect;
      EXPECT_EQ(scores, (std::vector<double>{0.5, 0.3, 0.0}));
    }
  } while (std::next_permutation(scores.begin(), scores.end()));
  EXPECT_EQ(perfect, 1);
}

TEST(Ndcg, VacuousAndErrors) {
  const std::vector<double> nonpositive{-0.2, 0.0, -0.5};
  EXPECT_EQ(ndcg_at_k(nonpositive, nonpositive, 2), 1.0);
  EXPECT_THROW(ndcg_at_k(std::vector<double>{1, 2}, std::vector<double>{1, 3}, 2), InputError);
  EXPECT_THROW(ndcg_at_k(nonpositive, nonpositive, 0), InputError);
}

TEST(Ndcg, LargeCutoffEqualsFullList) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<double> s(30);
  for (auto& v : s) v = normal(rng);
  EXPECT_EQ(ndcg_at_k(s, s, 30), ndcg_at_k(s, s, 1000));
}

TEST(RocAuc, Cases) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.5, 0.5}, std::vector<std::uint8_t>{1, 0}), 0.5);
  EXPECT_THROW(roc_auc(std::vector<double>{0.5, 0.4}, std::vector<std::uint8_t>{1, 1}), InputError);
}

TEST(RocAuc, MatchesBruteForceAndMonotoneInvariance) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(50);
    std::vector<std::uint8_t> labels(50);
    for (std::size_t k = 0; k < 50; ++k) {
      // Coarse rounding creates ties.
      p[k] = std::round(normal(rng) * 4.0) / 4.0;
      labels[k] = static_cast<std::uint8_t>(rng() % 2);
    }
    labels[0] = 1;
    labels[1] = 0;
    const double auc = roc_auc(p, labels);
    EXPECT_NEAR(auc, brute_force_auc(p, labels), 1e-12);
    std::vector<double> q(50);
    for (std::size_t k = 0; k < 50; ++k) q[k] = std::exp(p[k]) + 7.0;
    EXPECT_NEAR(roc_auc(q, labels), auc, 1e-12);
  }
}

TEST(CosineBaseline, AgreesWithEmbeddingCosine) {
  EmbeddingTable emb(3);
  emb.insert("a", Eigen::Vector3d(1, 0, 0));
  emb.insert("b", Eigen::Vector3d(0, 1, 0));
  emb.insert("c", Eigen::Vector3d(0.3, -2, 1));
  emb.insert("z", Eigen::Vector3d(0, 0, 0));
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"a", "a"}, {"a", "b"}, {"a", "c"}, {"b", "c"}, {"a", "z"}};
  const auto out = cosine_baseline(emb, pairs);
  EXPECT_EQ(out[0], 1.0);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[2], cosine(emb.at("a"), emb.at("c")));
  EXPECT_EQ(out[3], cosine(emb.at("b"), emb.at("c")));
  EXPECT_EQ(out[4], 0.0);
  const std::vector<std::pair<std::string, std::string>> missing{{"a", "q"}};
  EXPECT_THROW(cosine_baseline(emb, missing), UnknownIngredientError);
}

TEST(Evaluate, OraclePredictor) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> t(300);
  for (auto& v : t) v = u(rng);
  const auto r = evaluate(t, t, 0.5);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_NEAR(r.corr, 1.0, 1e-12);
  EXPECT_EQ(r.r2, 1.0);
  EXPECT_EQ(r.roc_auc, 1.0);
  EXPECT_EQ(r.n_examples, 300);
  for (const int k : kNdcgCutoffs) EXPECT_EQ(r.ndcg_at.at(k), 1.0);
}

TEST(Evaluate, ConstantPredictor) {
  const std::vector<double> t{0.9, -0.2, 0.4, 0.1};
  const std::vector<double> c(4, 0.0);
  const auto r = evaluate(c, t, 0.3);
  EXPECT_EQ(r.roc_auc, 0.5);
  EXPECT_EQ(r.corr, 0.0);
}

TEST(Evaluate, SingleClassSplitNamesThreshold) {
  const std::vector<double> t{0.1, 0.2, 0.3};
  try {
    evaluate(t, t, 0.9);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("0.9"), std::string::npos) << e.what();
  }
}

TEST(Evaluate, NdcgDependsOnlyOnOrder) {
  const std::vector<double> t{0.9, -0.2, 0.4, 0.1, 0.6};
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> q(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) q[k] = p[k] * p[k] * 10.0;
  const auto a = evaluate(p, t, 0.3);
  const auto b = evaluate(q, t, 0.3);
  EXPECT_EQ(a.ndcg_at, b.ndcg_at);
  EXPECT_EQ(a.roc_auc, b.roc_auc);
}

TEST(Report, JsonRoundTrip) {
  const std::vector<double> t{0.9, -0.2, 0.4, 0.1, 0.6};
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto a = evaluate(p, t, 0.3);
  std::ostringstream out;
  write_report_json(out, a);
  std::istringstream in(out.str());
  const auto b = read_report_json(in);
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.r2, b.r2);
  EXPECT_EQ(a.ndcg_at, b.ndcg_at);
  EXPECT_EQ(a.n_examples, b.n_examples);
  EXPECT_NE(report_csv_header().find("ndcg@1000"), std::string::npos);
}

}  // namespace
}  // namespace foodpair
