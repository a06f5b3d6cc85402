#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foodpair/embedding.hpp"
#include "foodpair/model.hpp"
#include "foodpair/pairscore.hpp"

namespace foodpair {

enum class PairStatus { kKnown, kUnknown };
enum class StatusFilter { kAll, kKnownOnly, kUnknownOnly };

std::string_view to_string(PairStatus status);
// Accepts "all", "known", "known_only", "unknown", "unknown_only".
StatusFilter parse_filter(std::string_view name);

struct PairingAnswer {
  std::string query;
  std::string partner;
  double predicted_score = 0.0;
  PairStatus status = PairStatus::kUnknown;
  std::optional<double> true_score;
  std::optional<std::int64_t> cooccurrence;

  friend bool operator==(const PairingAnswer&, const PairingAnswer&) = default;
};

// Everything a pairing query reads. Immutable once built; safe to share
// across threads.
class PairingEngine {
 public:
  PairingEngine(Checkpoint checkpoint, EmbeddingTable embeddings, ScoreDataset dataset,
                std::map<std::string, std::int64_t, std::less<>> occurrence = {});

  const Hyperparams& hyperparams() const { return checkpoint_.hp; }
  const ModelParams& params() const { return checkpoint_.params; }
  const EmbeddingTable& embeddings() const { return embeddings_; }
  const ScoreDataset& dataset() const { return dataset_; }

  // Candidate pool, sorted.
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  bool in_vocabulary(std::string_view token) const;
  std::int64_t occurrence(std::string_view token) const;

  // Vocabulary tokens sharing the longest available prefix with `token`.
  std::vector<std::string> suggestions(std::string_view token, std::size_t limit = 5) const;

  // Tokens starting with `prefix`, most frequent first, then lexicographic.
  std::vector<std::pair<std::string, std::int64_t>> search(std::string_view prefix,
                                                           std::size_t limit) const;

  PairingAnswer score_pair(std::string_view a, std::string_view b) const;
  std::vector<PairingAnswer> rank_partners(std::string_view a, std::size_t k,
                                           StatusFilter filter = StatusFilter::kAll) const;
  // Row-major: result[t][p] answers (targets[t], probes[p]).
  std::vector<std::vector<PairingAnswer>> compare_targets(
      const std::vector<std::string>& targets, const std::vector<std::string>& probes) const;

 private:
  void require(std::string_view token) const;

  Checkpoint checkpoint_;
  EmbeddingTable embeddings_;
  ScoreDataset dataset_;
  std::map<std::string, std::int64_t, std::less<>> occurrence_;
  std::vector<std::string> vocabulary_;
};

// rank,partner,predicted_score,status,true_score,cooccurrence
void write_ranking_csv(std::ostream& out, const std::vector<PairingAnswer>& ranking);

}  // namespace foodpair
