#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "foodpair/corpus.hpp"

namespace foodpair {

// Planted pairing structure: ingredients belong to flavor groups; each recipe
// draws most ingredients from one group and the rest from the whole pool,
// weighted by a Zipf-like popularity. Within each group, consecutive members
// form signature pairs that tend to appear together.
struct SyntheticCorpusSpec {
  int recipes = 2000;
  int ingredients = 120;
  int groups = 8;
  int min_size = 3;
  int max_size = 9;
  double in_group_probability = 0.8;
  double signature_probability = 0.35;  // chance a chosen item brings its partner
  double zipf_exponent = 0.7;
  std::uint64_t seed = 1;
};

std::string synthetic_token(int index);
std::vector<RecipeRecord> synthetic_corpus(const SyntheticCorpusSpec& spec);
void write_recipes_jsonl(std::ostream& out, const std::vector<RecipeRecord>& recipes);

}  // namespace foodpair
