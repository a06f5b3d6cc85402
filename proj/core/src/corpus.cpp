#include "foodpair/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair {

PairKey PairKey::of(std::string_view a, std::string_view b) {
  if (a == b) throw InputError("self-pair is not a pair: " + std::string(a));
  if (a < b) return {std::string(a), std::string(b)};
  return {std::string(b), std::string(a)};
}

std::size_t PairKeyHash::operator()(const PairKey& key) const noexcept {
  const std::size_t h1 = std::hash<std::string>{}(key.first);
  const std::size_t h2 = std::hash<std::string>{}(key.second);
  return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

std::int64_t CountTable::occurrence_of(std::string_view token) const {
  const auto it = occurrence.find(std::string(token));
  return it == occurrence.end() ? 0 : it->second;
}

std::int64_t CountTable::cooccurrence_of(std::string_view a, std::string_view b) const {
  if (a == b) return 0;
  const auto it = cooccurrence.find(PairKey::of(a, b));
  return it == cooccurrence.end() ? 0 : it->second;
}

std::vector<std::string> CountTable::vocabulary() const {
  std::vector<std::string> tokens;
  tokens.reserve(occurrence.size());
  for (const auto& [token, count] : occurrence) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

std::vector<std::pair<PairKey, std::int64_t>> CountTable::sorted_pairs() const {
  std::vector<std::pair<PairKey, std::int64_t>> pairs(cooccurrence.begin(), cooccurrence.end());
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  return pairs;
}

void CountTable::merge(const CountTable& other) {
  recipe_count += other.recipe_count;
  for (const auto& [token, count] : other.occurrence) occurrence[token] += count;
  for (const auto& [key, count] : other.cooccurrence) cooccurrence[key] += count;
}

std::string normalize_token(std::string_view raw) {
  std::string token;
  token.reserve(raw.size());
  bool pending_space = false;
  for (const char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !token.empty();
      continue;
    }
    if (pending_space) {
      token.push_back('_');
      pending_space = false;
    }
    token.push_back(static_cast<char>(std::tolower(uc)));
  }
  return token;
}

namespace {

RecipeRecord parse_recipe_line(const std::string& line, std::int64_t line_number) {
  const auto where = [&] { return "line " + std::to_string(line_number) + ": "; };
  nlohmann::json object;
  try {
    object = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(where() + "malformed JSON (" + e.what() + ")");
  }
  if (!object.is_object()) throw InputError(where() + "expected a JSON object");

  const auto id = object.find("id");
  if (id == object.end()) throw InputError(where() + "missing field 'id'");
  if (!id->is_string()) throw InputError(where() + "field 'id' must be a string");
  const auto ingredients = object.find("ingredients");
  if (ingredients == object.end()) throw InputError(where() + "missing field 'ingredients'");
  if (!ingredients->is_array()) {
    throw InputError(where() + "field 'ingredients' must be an array of strings");
  }

  RecipeRecord record;
  record.id = id->get<std::string>();
  for (const auto& item : *ingredients) {
    if (!item.is_string()) {
      throw InputError(where() + "field 'ingredients' must be an array of strings");
    }
    std::string token = normalize_token(item.get<std::string>());
    if (!token.empty()) record.ingredients.push_back(std::move(token));
  }
  std::sort(record.ingredients.begin(), record.ingredients.end());
  record.ingredients.erase(std::unique(record.ingredients.begin(), record.ingredients.end()),
                           record.ingredients.end());
  return record;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

std::int64_t for_each_recipe(std::istream& source,
                             const std::function<void(RecipeRecord&&)>& sink) {
  std::string line;
  std::int64_t line_number = 0;
  std::int64_t non_blank = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    ++non_blank;
    RecipeRecord record = parse_recipe_line(line, line_number);
    if (record.ingredients.size() < 2) continue;
    sink(std::move(record));
  }
  return non_blank;
}

std::vector<RecipeRecord> load_recipes(std::istream& source) {
  std::vector<RecipeRecord> records;
  for_each_recipe(source, [&](RecipeRecord&& r) { records.push_back(std::move(r)); });
  return records;
}

void CorpusCounter::add(const RecipeRecord& recipe) {
  ++table_.recipe_count;
  const auto& items = recipe.ingredients;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ++table_.occurrence[items[i]];
    // Ingredients are sorted, so (items[i], items[j]) is already canonical.
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      ++table_.cooccurrence[PairKey{items[i], items[j]}];
    }
  }
}

CountTable count_corpus(const std::vector<RecipeRecord>& recipes) {
  CorpusCounter counter;
  for (const auto& recipe : recipes) counter.add(recipe);
  return std::move(counter).take();
}

CountTable count_corpus_sharded(const std::vector<RecipeRecord>& recipes, int shards) {
  if (shards < 1) throw InputError("shard count must be at least 1");
  const std::size_t n = recipes.size();
  const auto shard_count = static_cast<std::size_t>(shards);
  std::vector<CountTable> partial(shard_count);
  {
    std::vector<std::jthread> workers;
    workers.reserve(shard_count);
    for (std::size_t s = 0; s < shard_count; ++s) {
      workers.emplace_back([&, s] {
        CorpusCounter counter;
        for (std::size_t r = n * s / shard_count; r < n * (s + 1) / shard_count; ++r) {
          counter.add(recipes[r]);
        }
        partial[s] = std::move(counter).take();
      });
    }
  }
  CountTable merged;
  for (const auto& table : partial) merged.merge(table);
  return merged;
}

CountTable filter_counts(const CountTable& table, FilterThresholds thresholds) {
  if (thresholds.min_occurrence < 1 || thresholds.min_cooccurrence < 1) {
    throw InputError("filter thresholds must be at least 1");
  }
  CountTable filtered;
  filtered.recipe_count = table.recipe_count;
  for (const auto& [token, count] : table.occurrence) {
    if (count >= thresholds.min_occurrence) filtered.occurrence.emplace(token, count);
  }
  for (const auto& [key, count] : table.cooccurrence) {
    if (count < thresholds.min_cooccurrence) continue;
    if (!filtered.occurrence.contains(key.first) || !filtered.occurrence.contains(key.second)) {
      continue;
    }
    filtered.cooccurrence.emplace(key, count);
  }
  return filtered;
}

void write_counts(std::ostream& out, const CountTable& table) {
  std::vector<std::string> occ_lines;
  occ_lines.reserve(table.occurrence.size());
  for (const auto& [token, count] : table.occurrence) {
    occ_lines.push_back("OCC\t" + token + "\t" + std::to_string(count));
  }
  std::vector<std::string> cooc_lines;
  cooc_lines.reserve(table.cooccurrence.size());
  for (const auto& [key, count] : table.cooccurrence) {
    cooc_lines.push_back("COOC\t" + key.first + "\t" + key.second + "\t" + std::to_string(count));
  }
  std::sort(occ_lines.begin(), occ_lines.end());
  std::sort(cooc_lines.begin(), cooc_lines.end());

  out << "#recipes\t" << table.recipe_count << '\n';
  for (const auto& line : occ_lines) out << line << '\n';
  for (const auto& line : cooc_lines) out << line << '\n';
}

CountTable read_counts(std::istream& in) {
  CountTable table;
  std::string line;
  std::int64_t line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto fail = [&](const std::string& what) {
      return InputError("counts line " + std::to_string(line_number) + ": " + what);
    };
    try {
      if (fields[0] == "#recipes" && fields.size() == 2) {
        table.recipe_count = parse_int(fields[1]);
        saw_header = true;
      } else if (fields[0] == "OCC" && fields.size() == 3) {
        table.occurrence[std::string(fields[1])] = parse_int(fields[2]);
      } else if (fields[0] == "COOC" && fields.size() == 4) {
        table.cooccurrence[PairKey::of(fields[1], fields[2])] = parse_int(fields[3]);
      } else {
        throw fail("unrecognized record");
      }
    } catch (const InputError& e) {
      if (std::string_view(e.what()).starts_with("counts line")) throw;
      throw fail(e.what());
    }
  }
  if (!saw_header) throw InputError("counts file has no #recipes line");
  return table;
}

}  // namespace foodpair
