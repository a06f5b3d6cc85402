#include "foodpair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "foodpair/random.hpp"

namespace foodpair {

std::string synthetic_token(int index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "ing_%04d", index);
  return buffer;
}

namespace {

// Draws an index from cumulative weights.
std::size_t draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = unit_uniform(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_of(const std::vector<double>& weights) {
  std::vector<double> out(weights.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) out[k] = (sum += weights[k]);
  return out;
}

}  // namespace

std::vector<RecipeRecord> synthetic_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.recipes < 0 || spec.ingredients < 2 || spec.groups < 1 ||
      spec.groups > spec.ingredients || spec.min_size < 2 || spec.max_size < spec.min_size ||
      spec.max_size > spec.ingredients || !(spec.signature_probability >= 0.0) ||
      spec.signature_probability > 1.0) {
    throw InputError("invalid synthetic corpus parameters");
  }
  Rng rng(spec.seed);

  // Ingredient k belongs to group k % groups; popularity follows the index
  // order within a random permutation so groups mix popular and rare items.
  std::vector<int> rank(static_cast<std::size_t>(spec.ingredients));
  for (int k = 0; k < spec.ingredients; ++k) rank[static_cast<std::size_t>(k)] = k;
  shuffle(std::span(rank), rng);
  std::vector<double> popularity(rank.size());
  for (std::size_t k = 0; k < rank.size(); ++k) {
    popularity[k] = 1.0 / std::pow(1.0 + rank[k], spec.zipf_exponent);
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(spec.groups));
  std::vector<std::vector<double>> member_cumulative(members.size());
  for (std::size_t k = 0; k < popularity.size(); ++k) {
    members[k % members.size()].push_back(k);
  }
  for (std::size_t g = 0; g < members.size(); ++g) {
    std::vector<double> weights;
    for (const auto k : members[g]) weights.push_back(popularity[k]);
    member_cumulative[g] = cumulative_of(weights);
  }
  const std::vector<double> all_cumulative = cumulative_of(popularity);
  std::vector<std::size_t> partner(popularity.size());
  for (std::size_t k = 0; k < partner.size(); ++k) partner[k] = k;
  for (const auto& group : members) {
    for (std::size_t m = 0; m + 1 < group.size(); m += 2) {
      partner[group[m]] = group[m + 1];
      partner[group[m + 1]] = group[m];
    }
  }

  std::vector<RecipeRecord> recipes;
  recipes.reserve(static_cast<std::size_t>(spec.recipes));
  for (int r = 0; r < spec.recipes; ++r) {
    const std::size_t group = bounded(rng, members.size());
    const int size = spec.min_size +
                     static_cast<int>(bounded(rng, static_cast<std::uint64_t>(spec.max_size - spec.min_size + 1)));
    const int target = std::min<int>(size, static_cast<int>(members[group].size()) + spec.ingredients / 2);
    std::set<std::size_t> chosen;
    for (int attempts = 0; static_cast<int>(chosen.size()) < target && attempts < 50 * size; ++attempts) {
      const std::size_t item = unit_uniform(rng) < spec.in_group_probability
                                   ? members[group][draw(member_cumulative[group], rng)]
                                   : draw(all_cumulative, rng);
      chosen.insert(item);
      if (static_cast<int>(chosen.size()) < target && unit_uniform(rng) < spec.signature_probability) {
        chosen.insert(partner[item]);
      }
    }
    RecipeRecord record;
    record.id = "syn" + std::to_string(r);
    for (const auto k : chosen) record.ingredients.push_back(synthetic_token(static_cast<int>(k)));
    std::sort(record.ingredients.begin(), record.ingredients.end());
    if (record.ingredients.size() >= 2) recipes.push_back(std::move(record));
  }
  return recipes;
}

void write_recipes_jsonl(std::ostream& out, const std::vector<RecipeRecord>& recipes) {
  for (const auto& r : recipes) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["ingredients"] = r.ingredients;
    out << j.dump() << '\n';
  }
}

}  // namespace foodpair
