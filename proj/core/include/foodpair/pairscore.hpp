#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "foodpair/corpus.hpp"

namespace foodpair {

// Pointwise mutual information (natural log) of a pair from recipe counts.
double pmi(std::int64_t cooc, std::int64_t occ_a, std::int64_t occ_b,
           std::int64_t n_recipes);

// PMI normalized by -log p(a,b) into [-1, 1]. Complete co-occurrence
// (p(a,b) = 1) yields +1.
double npmi(std::int64_t cooc, std::int64_t occ_a, std::int64_t occ_b,
            std::int64_t n_recipes);

struct PairStats {
  std::string a;  // a < b
  std::string b;
  std::int64_t occ_a = 0;
  std::int64_t occ_b = 0;
  std::int64_t cooc = 0;
  double score = 0.0;

  friend bool operator==(const PairStats&, const PairStats&) = default;
};

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct ScoreStats {
  std::int64_t n_pairs = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double top_threshold = 0.0;

  friend bool operator==(const ScoreStats&, const ScoreStats&) = default;
};

// The known-pairs dataset. `pairs` is sorted by key and `splits[i]` belongs to
// `pairs[i]`.
class ScoreDataset {
 public:
  ScoreDataset() = default;
  ScoreDataset(std::vector<PairStats> pairs, std::vector<Split> splits,
               ScoreStats stats);

  const std::vector<PairStats>& pairs() const { return pairs_; }
  const std::vector<Split>& splits() const { return splits_; }
  const ScoreStats& stats() const { return stats_; }

  // Index into pairs() for an unordered pair, if known.
  std::optional<std::size_t> find(std::string_view a, std::string_view b) const;

  // Pairs of one split, in key order.
  std::vector<PairStats> subset(Split split) const;

  // Tokens appearing in any pair, sorted.
  std::vector<std::string> tokens() const;

  friend bool operator==(const ScoreDataset& l, const ScoreDataset& r) {
    return l.pairs_ == r.pairs_ && l.splits_ == r.splits_ && l.stats_ == r.stats_;
  }

 private:
  std::vector<PairStats> pairs_;
  std::vector<Split> splits_;
  ScoreStats stats_;
  std::unordered_map<PairKey, std::size_t, PairKeyHash> index_;
};

// Slice sizes for n pairs: floor for train and val, remainder to test.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios ratios);

ScoreDataset build_dataset(const CountTable& filtered, std::uint64_t seed,
                           SplitRatios ratios = {});

// Mean, population standard deviation and mean + 2 sigma.
ScoreStats score_stats(const std::vector<PairStats>& pairs);

enum class PairClass { kComplementary, kNonComplementary };

// Inclusive at the threshold.
PairClass classify_pair(double score, double threshold);

// Scores TSV with header and the stats JSON sidecar.
void write_scores(std::ostream& out, const ScoreDataset& dataset);
void write_stats(std::ostream& out, const ScoreStats& stats);
// Reads a scores TSV. Stats are recomputed from the stored scores unless a
// sidecar is supplied.
ScoreDataset read_scores(std::istream& in, const std::optional<ScoreStats>& stats = {});
ScoreStats read_stats(std::istream& in);

}  // namespace foodpair
