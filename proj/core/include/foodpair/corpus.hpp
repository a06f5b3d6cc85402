#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace foodpair {

// One recipe reduced to the set of ingredient tokens it uses. Tokens are
// sorted and unique.
struct RecipeRecord {
  std::string id;
  std::vector<std::string> ingredients;

  friend bool operator==(const RecipeRecord&, const RecipeRecord&) = default;
};

// Canonical unordered pair: `first < second` lexicographically.
struct PairKey {
  std::string first;
  std::string second;

  // Orders the two tokens; throws InputError on a self-pair.
  static PairKey of(std::string_view a, std::string_view b);

  friend auto operator<=>(const PairKey&, const PairKey&) = default;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& key) const noexcept;
};

struct CountTable {
  std::int64_t recipe_count = 0;
  std::unordered_map<std::string, std::int64_t> occurrence;
  std::unordered_map<PairKey, std::int64_t, PairKeyHash> cooccurrence;

  std::int64_t occurrence_of(std::string_view token) const;
  // Symmetric: (a, b) and (b, a) return the same count; 0 when absent.
  std::int64_t cooccurrence_of(std::string_view a, std::string_view b) const;

  // Vocabulary in lexicographic order.
  std::vector<std::string> vocabulary() const;
  // Pairs in canonical key order.
  std::vector<std::pair<PairKey, std::int64_t>> sorted_pairs() const;

  // Adds another table's counts into this one (commutative, associative).
  void merge(const CountTable& other);

  friend bool operator==(const CountTable&, const CountTable&) = default;
};

// Lowercases and replaces each run of internal whitespace with '_'. Leading
// and trailing whitespace is trimmed.
std::string normalize_token(std::string_view raw);

// Streams JSON-lines recipes, calling `sink` once per kept record. Blank
// lines are skipped. Returns the number of non-blank lines read.
std::int64_t for_each_recipe(std::istream& source,
                             const std::function<void(RecipeRecord&&)>& sink);

std::vector<RecipeRecord> load_recipes(std::istream& source);

// Incremental counter; feed recipes one at a time and take the table.
class CorpusCounter {
 public:
  void add(const RecipeRecord& recipe);
  const CountTable& table() const { return table_; }
  CountTable take() && { return std::move(table_); }

 private:
  CountTable table_;
};

CountTable count_corpus(const std::vector<RecipeRecord>& recipes);

// Counts contiguous shards on separate threads and merges the partial tables.
CountTable count_corpus_sharded(const std::vector<RecipeRecord>& recipes,
                                int shards);

struct FilterThresholds {
  std::int64_t min_occurrence = 21;
  std::int64_t min_cooccurrence = 5;
};

CountTable filter_counts(const CountTable& table, FilterThresholds thresholds = {});

// Counts TSV: "#recipes\t<N>", then sorted OCC lines, then sorted COOC lines.
void write_counts(std::ostream& out, const CountTable& table);
CountTable read_counts(std::istream& in);

}  // namespace foodpair
