// Scoring, counting and metric criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "criteria.hpp"
#include "foodpair/corpus.hpp"
#include "foodpair/eval.hpp"
#include "foodpair/pairscore.hpp"
#include "foodpair/synthetic.hpp"

namespace foodpair::acceptance {
namespace {

std::string fmt(const char* pattern, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, pattern, value);
  return buffer;
}

struct PublishedRow {
  const char* partner;
  std::int64_t partner_count;
  std::int64_t cooc;
  double printed;
  bool required;
};

// Vanilla [51,756] against its five best and five worst partners.
constexpr PublishedRow kPublishedVanilla[] = {
    {"baking_soda", 58931, 14657, 0.376, true},
    {"cocoa", 6520, 2759, 0.360, false},
    {"powdered_sugar", 26729, 6558, 0.314, false},
    {"nut", 9090, 2865, 0.312, false},
    {"chocolate_chips", 9172, 2821, 0.307, false},
    {"onion", 191691, 12, -0.589, true},
    {"soy_sauce", 40518, 6, -0.483, false},
    {"salt_and_pepper", 46534, 14, -0.479, false},
    {"garlic", 46534, 9, -0.477, false},
    {"pepper", 68984, 26, -0.462, false},
};

Outcome published_counts_oracle() {
  constexpr std::int64_t kRecipes = 1029720;
  constexpr std::int64_t kVanilla = 51756;
  Outcome out;
  out.pass = true;
  int reproduced = 0;
  int discrepancies = 0;
  for (const auto& row : kPublishedVanilla) {
    const double score = npmi(row.cooc, kVanilla, row.partner_count, kRecipes);
    const double diff = std::abs(score - row.printed);
    if (diff <= 0.001) {
      ++reproduced;
      continue;
    }
    if (row.required) out.pass = false;
    ++discrepancies;
    out.notes.push_back(std::string(row.required ? "MISMATCH " : "DISCREPANCY ") + "vanilla&" +
                        row.partner + ": computed " + fmt("%.4f", score) + ", printed " +
                        fmt("%.3f", row.printed) + " (|diff| " + fmt("%.4f", diff) + ")");
  }
  out.detail = std::to_string(reproduced) + "/10 rows within +-0.001 (both required rows " +
               (out.pass ? "reproduce" : "DO NOT reproduce") + "), " +
               std::to_string(discrepancies) + " discrepancy(ies) logged";
  return out;
}

Outcome npmi_properties() {
  std::mt19937_64 rng(20240601);
  const auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  int out_of_range = 0;
  int asymmetric = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::int64_t n = uniform(2, 2000000);
    const std::int64_t occ_a = uniform(1, n);
    // Valid tuples need occ_a + occ_b - cooc <= n.
    const std::int64_t occ_b = uniform(1, n);
    const std::int64_t min_cooc = std::max<std::int64_t>(1, occ_a + occ_b - n);
    const std::int64_t cooc = uniform(min_cooc, std::min(occ_a, occ_b));
    const double s = npmi(cooc, occ_a, occ_b, n);
    if (!(s >= -1.0 && s <= 1.0)) ++out_of_range;
    if (s != npmi(cooc, occ_b, occ_a, n)) ++asymmetric;
  }

  int not_one = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::int64_t n = uniform(1, 2000000);
    const std::int64_t together = uniform(1, n);
    if (npmi(together, together, together, n) != 1.0) ++not_one;
  }

  double worst_independent = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    // p(a) = 1/s, p(b) = 1/t, p(a,b) = 1/(s t).
    const std::int64_t s = uniform(2, 40);
    const std::int64_t t = uniform(2, 40);
    const std::int64_t base = uniform(1, 5000);
    const std::int64_t n = s * t * base;
    worst_independent = std::max(worst_independent, std::abs(npmi(base, t * base, s * base, n)));
  }

  Outcome out;
  out.pass = out_of_range == 0 && asymmetric == 0 && not_one == 0 && worst_independent < 1e-12;
  out.detail = "10000 tuples: " + std::to_string(out_of_range) + " outside [-1,1], " +
               std::to_string(asymmetric) + " asymmetric; complete co-occurrence != 1: " +
               std::to_string(not_one) + "/1000; max |independent| " + fmt("%.3g", worst_independent);
  return out;
}

Outcome counting_oracle() {
  SyntheticCorpusSpec spec;
  spec.recipes = 1000;
  spec.seed = 77;
  const auto recipes = synthetic_corpus(spec);
  const CountTable serial = count_corpus(recipes);
  const CountTable sharded = count_corpus_sharded(recipes, 4);

  // Brute force: every token, every unordered token pair, scan every recipe.
  std::set<std::string> tokens;
  for (const auto& r : recipes) tokens.insert(r.ingredients.begin(), r.ingredients.end());
  const std::vector<std::string> vocab(tokens.begin(), tokens.end());
  const auto has = [](const RecipeRecord& r, const std::string& t) {
    return std::find(r.ingredients.begin(), r.ingredients.end(), t) != r.ingredients.end();
  };
  CountTable brute;
  brute.recipe_count = static_cast<std::int64_t>(recipes.size());
  for (const auto& t : vocab) {
    std::int64_t c = 0;
    for (const auto& r : recipes) c += has(r, t) ? 1 : 0;
    brute.occurrence.emplace(t, c);
  }
  for (std::size_t x = 0; x < vocab.size(); ++x) {
    for (std::size_t y = x + 1; y < vocab.size(); ++y) {
      std::int64_t c = 0;
      for (const auto& r : recipes) c += (has(r, vocab[x]) && has(r, vocab[y])) ? 1 : 0;
      if (c > 0) brute.cooccurrence.emplace(PairKey::of(vocab[x], vocab[y]), c);
    }
  }

  Outcome out;
  out.pass = serial == sharded && serial == brute;
  out.detail = std::string("serial ") + (serial == sharded ? "==" : "!=") + " 4-shard, serial " +
               (serial == brute ? "==" : "!=") + " brute force (" + std::to_string(vocab.size()) +
               " tokens, " + std::to_string(serial.cooccurrence.size()) + " pairs)";
  return out;
}

Outcome metric_suite() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  int identity_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    std::vector<double> p(n), t(n);
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = normal(rng);
      t[k] = normal(rng);
    }
    const auto m = regression_metrics(p, t);
    if (std::abs(m.rmse * m.rmse - m.mse) > 1e-12 || m.mae > m.rmse) ++identity_failures;
  }

  const std::vector<double> hand{0.3, 0.5, 0.0};
  const double hand_ndcg = ndcg_at_k(hand, hand, 3);
  const std::vector<double> ideal{0.5, 0.3, 0.0};
  const double ideal_ndcg = ndcg_at_k(ideal, hand, 3);

  double worst_auc = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(50);
    std::vector<std::uint8_t> labels(50);
    for (std::size_t k = 0; k < 50; ++k) {
      p[k] = std::round(normal(rng) * 3.0) / 3.0;
      labels[k] = static_cast<std::uint8_t>(rng() % 2);
    }
    labels[0] = 1;
    labels[1] = 0;
    double wins = 0.0;
    double total = 0.0;
    for (std::size_t a = 0; a < 50; ++a) {
      for (std::size_t b = 0; b < 50; ++b) {
        if (!labels[a] || labels[b]) continue;
        total += 1.0;
        wins += p[a] > p[b] ? 1.0 : (p[a] == p[b] ? 0.5 : 0.0);
      }
    }
    worst_auc = std::max(worst_auc, std::abs(roc_auc(p, labels) - wins / total));
  }

  const double r2 = regression_metrics(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}).r2;

  Outcome out;
  out.pass = identity_failures == 0 && std::abs(hand_ndcg - 0.8929) <= 1e-4 && ideal_ndcg == 1.0 &&
             worst_auc <= 1e-12 && r2 == -0.75;
  out.detail = "rmse/mse/mae identity failures " + std::to_string(identity_failures) +
               "/1000; NDCG hand " + fmt("%.6f", hand_ndcg) + ", ideal " + fmt("%.17g", ideal_ndcg) +
               "; max |AUC - brute force| " + fmt("%.3g", worst_auc) + "; r2 " + fmt("%.17g", r2);
  return out;
}

}  // namespace

std::vector<Criterion> score_criteria() {
  return {
      {"npmi_published_counts", 1.0, published_counts_oracle},
      {"npmi_properties", 0.0, npmi_properties},
      {"counting_oracle", 5.0, counting_oracle},
      {"metric_suite", 0.0, metric_suite},
  };
}

}  // namespace foodpair::acceptance
