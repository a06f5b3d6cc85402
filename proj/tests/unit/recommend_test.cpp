#include "foodpair/recommend.hpp"

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "fixture_engine.hpp"
#include "foodpair/error.hpp"

namespace foodpair {
namespace {

class RecommendTest : public ::testing::Test {
 protected:
  PairingEngine engine = testing::make_fixture_engine();
};

TEST_F(RecommendTest, KnownPairCarriesTruth) {
  const auto& p = engine.dataset().pairs().front();
  const auto ab = engine.score_pair(p.a, p.b);
  EXPECT_EQ(ab.status, PairStatus::kKnown);
  EXPECT_EQ(ab.true_score, p.score);
  EXPECT_EQ(ab.cooccurrence, p.cooc);
  EXPECT_EQ(ab.predicted_score,
            forward(engine.params(), engine.hyperparams(), engine.embeddings().at(p.a),
                    engine.embeddings().at(p.b)));
  // Either argument order asks the model the same question.
  EXPECT_EQ(engine.score_pair(p.b, p.a).predicted_score, ab.predicted_score);
}

TEST_F(RecommendTest, UnknownPairHasNoTruth) {
  const auto& vocab = engine.vocabulary();
  for (std::size_t x = 0; x < vocab.size(); ++x) {
    for (std::size_t y = x + 1; y < vocab.size(); ++y) {
      if (engine.dataset().find(vocab[x], vocab[y])) continue;
      const auto answer = engine.score_pair(vocab[x], vocab[y]);
      EXPECT_EQ(answer.status, PairStatus::kUnknown);
      EXPECT_FALSE(answer.true_score);
      EXPECT_FALSE(answer.cooccurrence);
      return;
    }
  }
  FAIL() << "fixture has no unknown pair";
}

TEST_F(RecommendTest, Errors) {
  EXPECT_THROW(engine.score_pair("ing_0001", "ing_0001"), InputError);
  try {
    engine.score_pair("ing_0001", "ing_00x");
    FAIL();
  } catch (const UnknownIngredientError& e) {
    EXPECT_EQ(e.token(), "ing_00x");
    ASSERT_FALSE(e.suggestions().empty());
    EXPECT_TRUE(e.suggestions().front().starts_with("ing_00"));
  }
  EXPECT_THROW(engine.rank_partners("nope", 3), UnknownIngredientError);
  EXPECT_THROW(engine.rank_partners("ing_0001", 0), InputError);
  EXPECT_THROW(parse_filter("some"), InputError);
}

TEST_F(RecommendTest, RankMatchesBruteForce) {
  for (const auto& query : engine.vocabulary()) {
    std::vector<std::pair<double, std::string>> all;
    for (const auto& partner : engine.vocabulary()) {
      if (partner == query) continue;
      const auto& a = std::min(query, partner);
      const auto& b = std::max(query, partner);
      all.emplace_back(forward(engine.params(), engine.hyperparams(), engine.embeddings().at(a),
                               engine.embeddings().at(b)),
                       partner);
    }
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
      return l.first != r.first ? l.first > r.first : l.second < r.second;
    });
    const auto ranked = engine.rank_partners(query, 7);
    ASSERT_EQ(ranked.size(), 7u);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      EXPECT_EQ(ranked[r].partner, all[r].second);
      EXPECT_EQ(ranked[r].predicted_score, all[r].first);
    }
    EXPECT_EQ(engine.rank_partners(query, 1000).size(), engine.vocabulary().size() - 1);
  }
}

TEST_F(RecommendTest, FiltersPartitionTheRanking) {
  const std::string query = "ing_0003";
  const auto all = engine.rank_partners(query, 1000);
  const auto known = engine.rank_partners(query, 1000, StatusFilter::kKnownOnly);
  const auto unknown = engine.rank_partners(query, 1000, StatusFilter::kUnknownOnly);
  EXPECT_EQ(known.size() + unknown.size(), all.size());
  EXPECT_FALSE(known.empty());
  for (const auto& a : known) EXPECT_EQ(a.status, PairStatus::kKnown);
  for (const auto& a : unknown) EXPECT_EQ(a.status, PairStatus::kUnknown);
  std::vector<PairingAnswer> merged;
  std::merge(known.begin(), known.end(), unknown.begin(), unknown.end(), std::back_inserter(merged),
             [](const PairingAnswer& l, const PairingAnswer& r) {
               return l.predicted_score != r.predicted_score ? l.predicted_score > r.predicted_score
                                                             : l.partner < r.partner;
             });
  EXPECT_EQ(merged, all);
}

TEST_F(RecommendTest, CompareGridMatchesScorePair) {
  const std::vector<std::string> targets{"ing_0000", "ing_0005"};
  const std::vector<std::string> probes{"ing_0001", "ing_0002", "ing_0009"};
  const auto grid = engine.compare_targets(targets, probes);
  ASSERT_EQ(grid.size(), 2u);
  for (std::size_t t = 0; t < 2; ++t) {
    ASSERT_EQ(grid[t].size(), 3u);
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(grid[t][p], engine.score_pair(targets[t], probes[p]));
  }
}

TEST_F(RecommendTest, SearchOrdersByFrequency) {
  const auto found = engine.search("ing_001", 20);
  ASSERT_EQ(found.size(), 10u);
  for (std::size_t k = 1; k < found.size(); ++k) {
    EXPECT_GE(found[k - 1].second, found[k].second);
  }
  EXPECT_EQ(engine.search("ing_", 3).size(), 3u);
  EXPECT_TRUE(engine.search("zzz", 3).empty());
}

TEST_F(RecommendTest, RankingCsv) {
  std::ostringstream out;
  write_ranking_csv(out, engine.rank_partners("ing_0000", 2));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rank,partner,predicted_score,status,true_score,cooccurrence");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

}  // namespace
}  // namespace foodpair
