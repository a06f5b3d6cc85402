#include "foodpair/pairscore.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "foodpair/random.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair {

namespace {

void check_counts(std::int64_t cooc, std::int64_t occ_a, std::int64_t occ_b,
                  std::int64_t n_recipes) {
  if (cooc <= 0) throw InputError("pair with zero co-occurrence has no score");
  if (occ_a <= 0 || occ_b <= 0 || n_recipes <= 0) {
    throw InputError("occurrence and recipe counts must be positive");
  }
  if (cooc > std::min(occ_a, occ_b)) {
    throw InputError("co-occurrence exceeds an occurrence count");
  }
  if (occ_a > n_recipes || occ_b > n_recipes) {
    throw InputError("occurrence exceeds the recipe count");
  }
}

}  // namespace

double pmi(std::int64_t cooc, std::int64_t occ_a, std::int64_t occ_b, std::int64_t n_recipes) {
  check_counts(cooc, occ_a, occ_b, n_recipes);
  const auto n = static_cast<double>(n_recipes);
  const double p_ab = static_cast<double>(cooc) / n;
  const double p_a = static_cast<double>(occ_a) / n;
  const double p_b = static_cast<double>(occ_b) / n;
  // Summing the marginals first keeps the result exactly symmetric in (a, b).
  return std::log(p_ab) - (std::log(p_a) + std::log(p_b));
}

double npmi(std::int64_t cooc, std::int64_t occ_a, std::int64_t occ_b, std::int64_t n_recipes) {
  const double value = pmi(cooc, occ_a, occ_b, n_recipes);
  if (cooc == n_recipes) return 1.0;
  const double h = -std::log(static_cast<double>(cooc) / static_cast<double>(n_recipes));
  return std::clamp(value / h, -1.0, 1.0);
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw InputError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

ScoreDataset::ScoreDataset(std::vector<PairStats> pairs, std::vector<Split> splits,
                           ScoreStats stats)
    : pairs_(std::move(pairs)), splits_(std::move(splits)), stats_(stats) {
  if (pairs_.size() != splits_.size()) throw InputError("every pair needs exactly one split");
  index_.reserve(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (!(p.a < p.b)) throw InputError("pair not in canonical order: " + p.a + ", " + p.b);
    if (!index_.emplace(PairKey{p.a, p.b}, i).second) {
      throw InputError("duplicate pair: " + p.a + ", " + p.b);
    }
  }
}

std::optional<std::size_t> ScoreDataset::find(std::string_view a, std::string_view b) const {
  if (a == b) return std::nullopt;
  const auto it = index_.find(PairKey::of(a, b));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<PairStats> ScoreDataset::subset(Split split) const {
  std::vector<PairStats> out;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (splits_[i] == split) out.push_back(pairs_[i]);
  }
  return out;
}

std::vector<std::string> ScoreDataset::tokens() const {
  std::set<std::string> unique;
  for (const auto& p : pairs_) {
    unique.insert(p.a);
    unique.insert(p.b);
  }
  return {unique.begin(), unique.end()};
}

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios ratios) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
    throw InputError("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InputError("split ratios must sum to 1");
  }
  const auto train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(n)));
  return {train, val, n - train - val};
}

ScoreStats score_stats(const std::vector<PairStats>& pairs) {
  ScoreStats stats;
  stats.n_pairs = static_cast<std::int64_t>(pairs.size());
  if (pairs.empty()) return stats;
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.score;
  stats.mean = sum / static_cast<double>(pairs.size());
  double squares = 0.0;
  for (const auto& p : pairs) squares += (p.score - stats.mean) * (p.score - stats.mean);
  stats.std = std::sqrt(squares / static_cast<double>(pairs.size()));
  stats.top_threshold = stats.mean + 2.0 * stats.std;
  return stats;
}

ScoreDataset build_dataset(const CountTable& filtered, std::uint64_t seed, SplitRatios ratios) {
  const auto sorted = filtered.sorted_pairs();
  if (sorted.empty()) throw InputError("no known pairs to score");
  const auto sizes = split_sizes(sorted.size(), ratios);

  std::vector<PairStats> pairs;
  pairs.reserve(sorted.size());
  for (const auto& [key, cooc] : sorted) {
    PairStats p;
    p.a = key.first;
    p.b = key.second;
    p.occ_a = filtered.occurrence_of(key.first);
    p.occ_b = filtered.occurrence_of(key.second);
    p.cooc = cooc;
    p.score = npmi(cooc, p.occ_a, p.occ_b, filtered.recipe_count);
    pairs.push_back(std::move(p));
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span(order), rng);

  std::vector<Split> splits(pairs.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    splits[order[rank]] = rank < sizes[0]              ? Split::kTrain
                          : rank < sizes[0] + sizes[1] ? Split::kVal
                                                       : Split::kTest;
  }
  const ScoreStats stats = score_stats(pairs);
  return ScoreDataset(std::move(pairs), std::move(splits), stats);
}

PairClass classify_pair(double score, double threshold) {
  return score >= threshold ? PairClass::kComplementary : PairClass::kNonComplementary;
}

void write_scores(std::ostream& out, const ScoreDataset& dataset) {
  out << "ingredient_a\tingredient_b\tocc_a\tocc_b\tcooc\tnpmi\tsplit\n";
  const auto& pairs = dataset.pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out << p.a << '\t' << p.b << '\t' << p.occ_a << '\t' << p.occ_b << '\t' << p.cooc << '\t'
        << format_fixed(p.score, 6) << '\t' << to_string(dataset.splits()[i]) << '\n';
  }
}

void write_stats(std::ostream& out, const ScoreStats& stats) {
  nlohmann::ordered_json j;
  j["n_pairs"] = stats.n_pairs;
  j["mean"] = stats.mean;
  j["std"] = stats.std;
  j["top_threshold"] = stats.top_threshold;
  out << j.dump(2) << '\n';
}

ScoreStats read_stats(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    ScoreStats stats;
    stats.n_pairs = j.at("n_pairs").get<std::int64_t>();
    stats.mean = j.at("mean").get<double>();
    stats.std = j.at("std").get<double>();
    stats.top_threshold = j.at("top_threshold").get<double>();
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("stats JSON: ") + e.what());
  }
}

ScoreDataset read_scores(std::istream& in, const std::optional<ScoreStats>& stats) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("ingredient_a\t")) {
    throw InputError("scores file is missing its header");
  }
  std::vector<PairStats> pairs;
  std::vector<Split> splits;
  std::int64_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    try {
      if (fields.size() != 7) throw InputError("expected 7 columns");
      PairStats p;
      p.a = fields[0];
      p.b = fields[1];
      p.occ_a = parse_int(fields[2]);
      p.occ_b = parse_int(fields[3]);
      p.cooc = parse_int(fields[4]);
      p.score = parse_double(fields[5]);
      splits.push_back(parse_split(fields[6]));
      pairs.push_back(std::move(p));
    } catch (const InputError& e) {
      throw InputError("scores line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (pairs.empty()) throw InputError("scores file has no pairs");
  const ScoreStats resolved = stats ? *stats : score_stats(pairs);
  return ScoreDataset(std::move(pairs), std::move(splits), resolved);
}

}  // namespace foodpair
