#pragma once

// Pipeline stages behind the `foodpair` subcommands. Each stage reads and
// writes files only, so any stage can be rerun from its manifest.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "foodpair/corpus.hpp"
#include "foodpair/eval.hpp"
#include "foodpair/model.hpp"
#include "foodpair/pairscore.hpp"
#include "foodpair/train.hpp"

namespace foodpair::pipeline {

struct IngestOptions {
  std::string recipes;
  std::string out;
  FilterThresholds thresholds;
  int shards = 1;
};

struct IngestSummary {
  std::int64_t recipes = 0;
  std::size_t vocab_size = 0;
  std::size_t known_pairs = 0;
};

IngestSummary ingest(const IngestOptions& options);

struct ScoreOptions {
  std::string counts;
  std::string out;
  std::string stats_out;  // defaults to <out stem>.stats.json
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

ScoreStats score(const ScoreOptions& options);

struct EmbedOptions {
  std::string counts;
  std::string out;
  std::string load;  // pretrained file to validate instead of training
  int dim = 64;
  double shift = 1.0;
  std::uint64_t seed = 0;
};

// Returns the number of embedded tokens.
std::size_t embed(const EmbedOptions& options);

struct TrainOptions {
  std::string scores;
  std::string stats;
  std::string embeddings;
  std::string out_dir;
  Hyperparams hp;
  TrainConfig config;
  bool random_embeddings = false;
  int random_dim = 64;
};

struct TrainSummary {
  int epochs = 0;
  int best_epoch = 0;
  double best_val_rmse = 0.0;
  std::string best_checkpoint;
  std::string embeddings;  // the embedding file the checkpoint expects
};

TrainSummary train(const TrainOptions& options, std::ostream* progress = nullptr);

struct EvalOptions {
  std::string checkpoint;
  std::string scores;
  std::string stats;
  std::string embeddings;
  std::string split = "test";
  std::string out;
  std::string baseline;  // "" or "cosine"
  std::optional<double> threshold;
  std::string csv_out;
};

MetricsReport evaluate(const EvalOptions& options);

struct RankOptions {
  std::string checkpoint;
  std::string scores;
  std::string stats;
  std::string embeddings;
  std::string counts;
  std::string ingredient;
  std::size_t k = 10;
  std::string filter = "all";
};

void rank(const RankOptions& options, std::ostream& out);

struct RunOptions {
  std::string recipes;
  std::string out_dir;
  FilterThresholds thresholds;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  int embed_dim = 64;
  double shift = 1.0;
  Hyperparams hp;
  TrainConfig config;
  std::optional<double> threshold;  // evaluation threshold; mu + 2 sigma when unset
};

// ingest -> score -> embed -> train -> eval (model and cosine baseline) into
// out_dir, then writes out_dir/manifest.json.
void run(const RunOptions& options, std::ostream* progress = nullptr);
RunOptions run_options_from_manifest(const std::string& manifest_path);

// "<dir>/<stem>.stats.json" for "<dir>/<stem>.tsv".
std::string default_stats_path(const std::string& scores_path);

}  // namespace foodpair::pipeline
