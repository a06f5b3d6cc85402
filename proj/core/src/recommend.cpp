#include "foodpair/recommend.hpp"

#include <algorithm>
#include <ostream>

#include "foodpair/error.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair {

std::string_view to_string(PairStatus status) {
  return status == PairStatus::kKnown ? "known" : "unknown";
}

StatusFilter parse_filter(std::string_view name) {
  if (name == "all") return StatusFilter::kAll;
  if (name == "known" || name == "known_only") return StatusFilter::kKnownOnly;
  if (name == "unknown" || name == "unknown_only") return StatusFilter::kUnknownOnly;
  throw InputError("unknown filter '" + std::string(name) + "' (expected all, known or unknown)");
}

PairingEngine::PairingEngine(Checkpoint checkpoint, EmbeddingTable embeddings,
                             ScoreDataset dataset,
                             std::map<std::string, std::int64_t, std::less<>> occurrence)
    : checkpoint_(std::move(checkpoint)),
      embeddings_(std::move(embeddings)),
      dataset_(std::move(dataset)),
      occurrence_(std::move(occurrence)),
      vocabulary_(embeddings_.tokens()) {
  if (!checkpoint_.params.matches(checkpoint_.hp)) {
    throw ShapeError("checkpoint parameters do not match its hyperparameters");
  }
  if (embeddings_.dim() != checkpoint_.hp.input_dim) {
    throw ShapeError("embedding dim " + std::to_string(embeddings_.dim()) +
                     " does not match the model's input_dim " +
                     std::to_string(checkpoint_.hp.input_dim));
  }
  for (const auto& p : dataset_.pairs()) {
    if (!embeddings_.contains(p.a) || !embeddings_.contains(p.b)) {
      throw InputError("dataset pair (" + p.a + ", " + p.b + ") has a token without an embedding");
    }
    // Fill occurrence from the scores file where no counts were supplied.
    occurrence_.try_emplace(p.a, p.occ_a);
    occurrence_.try_emplace(p.b, p.occ_b);
  }
}

bool PairingEngine::in_vocabulary(std::string_view token) const {
  return embeddings_.contains(token);
}

std::int64_t PairingEngine::occurrence(std::string_view token) const {
  const auto it = occurrence_.find(token);
  return it == occurrence_.end() ? 0 : it->second;
}

std::vector<std::string> PairingEngine::suggestions(std::string_view token,
                                                    std::size_t limit) const {
  for (std::size_t length = token.size(); length > 0; --length) {
    const std::string_view prefix = token.substr(0, length);
    std::vector<std::string> found;
    auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), prefix);
    for (; it != vocabulary_.end() && it->starts_with(prefix) && found.size() < limit; ++it) {
      found.push_back(*it);
    }
    if (!found.empty()) return found;
  }
  return {};
}

std::vector<std::pair<std::string, std::int64_t>> PairingEngine::search(std::string_view prefix,
                                                                        std::size_t limit) const {
  std::vector<std::pair<std::string, std::int64_t>> found;
  auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), prefix);
  for (; it != vocabulary_.end() && it->starts_with(prefix); ++it) {
    found.emplace_back(*it, occurrence(*it));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  if (found.size() > limit) found.resize(limit);
  return found;
}

void PairingEngine::require(std::string_view token) const {
  if (!in_vocabulary(token)) throw UnknownIngredientError(std::string(token), suggestions(token));
}

PairingAnswer PairingEngine::score_pair(std::string_view a, std::string_view b) const {
  require(a);
  require(b);
  if (a == b) throw InputError("cannot pair an ingredient with itself: " + std::string(a));

  const std::string_view first = std::min(a, b);
  const std::string_view second = std::max(a, b);
  PairingAnswer answer;
  answer.query = std::string(a);
  answer.partner = std::string(b);
  answer.predicted_score =
      forward(checkpoint_.params, checkpoint_.hp, embeddings_.at(first), embeddings_.at(second));
  if (const auto index = dataset_.find(a, b)) {
    const auto& stats = dataset_.pairs()[*index];
    answer.status = PairStatus::kKnown;
    answer.true_score = stats.score;
    answer.cooccurrence = stats.cooc;
  }
  return answer;
}

std::vector<PairingAnswer> PairingEngine::rank_partners(std::string_view a, std::size_t k,
                                                        StatusFilter filter) const {
  require(a);
  if (k < 1) throw InputError("k must be at least 1");
  std::vector<PairingAnswer> pool;
  pool.reserve(vocabulary_.size());
  for (const auto& partner : vocabulary_) {
    if (partner == a) continue;
    const bool known = dataset_.find(a, partner).has_value();
    if ((filter == StatusFilter::kKnownOnly && !known) ||
        (filter == StatusFilter::kUnknownOnly && known)) {
      continue;
    }
    pool.push_back(score_pair(a, partner));
  }
  const std::size_t keep = std::min(k, pool.size());
  // The vocabulary is sorted, so a stable sort breaks ties lexicographically.
  std::stable_sort(pool.begin(), pool.end(), [](const PairingAnswer& l, const PairingAnswer& r) {
    return l.predicted_score > r.predicted_score;
  });
  pool.resize(keep);
  return pool;
}

std::vector<std::vector<PairingAnswer>> PairingEngine::compare_targets(
    const std::vector<std::string>& targets, const std::vector<std::string>& probes) const {
  if (targets.empty() || probes.empty()) throw InputError("targets and probes must be nonempty");
  std::vector<std::vector<PairingAnswer>> grid;
  grid.reserve(targets.size());
  for (const auto& target : targets) {
    std::vector<PairingAnswer> row;
    row.reserve(probes.size());
    for (const auto& probe : probes) row.push_back(score_pair(target, probe));
    grid.push_back(std::move(row));
  }
  return grid;
}

void write_ranking_csv(std::ostream& out, const std::vector<PairingAnswer>& ranking) {
  out << "rank,partner,predicted_score,status,true_score,cooccurrence\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const auto& a = ranking[r];
    out << (r + 1) << ',' << a.partner << ',' << format_shortest(a.predicted_score) << ','
        << to_string(a.status) << ',' << (a.true_score ? format_shortest(*a.true_score) : "")
        << ',' << (a.cooccurrence ? std::to_string(*a.cooccurrence) : "") << '\n';
  }
}

}  // namespace foodpair
