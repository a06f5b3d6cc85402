#include "pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "foodpair/embedding.hpp"
#include "foodpair/error.hpp"
#include "foodpair/eval.hpp"
#include "foodpair/recommend.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::ifstream open_in(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + " " + path);
  return in;
}

template <typename Writer>
void write_with(const std::string& path, Writer&& writer) {
  std::ostringstream buffer;
  writer(buffer);
  write_file(path, buffer.str());
}

void write_manifest(const std::string& path, const Json& manifest) {
  write_file(path, manifest.dump(2) + "\n");
}

Json hp_json(const Hyperparams& hp) {
  return Json{{"input_dim", hp.input_dim}, {"hidden_i", hp.hidden_i}, {"hidden_j", hp.hidden_j},
              {"symmetrize", hp.symmetrize}, {"use_wide", hp.use_wide}};
}

Json config_json(const TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2},
              {"epsilon", c.epsilon}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
              {"patience", c.patience}, {"seed", c.seed}};
}

ScoreDataset load_dataset(const std::string& scores, const std::string& stats) {
  const std::string stats_path = stats.empty() ? default_stats_path(scores) : stats;
  std::optional<ScoreStats> sidecar;
  if (fs::exists(stats_path)) {
    auto in = open_in(stats_path, "stats");
    sidecar = read_stats(in);
  } else if (!stats.empty()) {
    throw InputError("cannot open stats " + stats);
  }
  auto in = open_in(scores, "scores");
  return read_scores(in, sidecar);
}

EmbeddingTable load_embedding_file(const std::string& path) {
  auto in = open_in(path, "embeddings");
  return load_embeddings(in);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  auto in = open_in(path, "checkpoint");
  return load_checkpoint(in);
}

}  // namespace

std::string default_stats_path(const std::string& scores_path) {
  fs::path p(scores_path);
  p.replace_extension(".stats.json");
  return p.string();
}

IngestSummary ingest(const IngestOptions& options) {
  auto in = open_in(options.recipes, "recipes");
  std::vector<RecipeRecord> records;
  const std::int64_t lines =
      for_each_recipe(in, [&](RecipeRecord&& r) { records.push_back(std::move(r)); });
  if (lines == 0) throw InputError("no recipes in " + options.recipes);
  const CountTable raw = options.shards > 1 ? count_corpus_sharded(records, options.shards)
                                            : count_corpus(records);
  const CountTable filtered = filter_counts(raw, options.thresholds);
  write_with(options.out, [&](std::ostream& out) { write_counts(out, filtered); });

  write_manifest(options.out + ".manifest.json",
                 Json{{"stage", "ingest"},
                      {"inputs", {{"recipes", options.recipes}}},
                      {"outputs", {{"counts", options.out}}},
                      {"min_occurrence", options.thresholds.min_occurrence},
                      {"min_cooccurrence", options.thresholds.min_cooccurrence}});

  IngestSummary summary;
  summary.recipes = filtered.recipe_count;
  summary.vocab_size = filtered.occurrence.size();
  summary.known_pairs = filtered.cooccurrence.size();
  return summary;
}

ScoreStats score(const ScoreOptions& options) {
  auto in = open_in(options.counts, "counts");
  const CountTable counts = read_counts(in);
  const ScoreDataset dataset = build_dataset(counts, options.seed, options.ratios);
  const std::string stats_out = options.stats_out.empty() ? default_stats_path(options.out) : options.stats_out;
  write_with(options.out, [&](std::ostream& out) { write_scores(out, dataset); });
  write_with(stats_out, [&](std::ostream& out) { write_stats(out, dataset.stats()); });
  write_manifest(options.out + ".manifest.json",
                 Json{{"stage", "score"},
                      {"inputs", {{"counts", options.counts}}},
                      {"outputs", {{"scores", options.out}, {"stats", stats_out}}},
                      {"seed", options.seed},
                      {"ratios", {options.ratios.train, options.ratios.val, options.ratios.test}}});
  return dataset.stats();
}

std::size_t embed(const EmbedOptions& options) {
  auto counts_in = open_in(options.counts, "counts");
  const CountTable counts = read_counts(counts_in);
  EmbeddingTable table;
  if (!options.load.empty()) {
    const auto vocab = counts.vocabulary();
    const std::set<std::string, std::less<>> wanted(vocab.begin(), vocab.end());
    auto in = open_in(options.load, "pretrained embeddings");
    table = load_embeddings(in, wanted);
  } else {
    table = train_ppmi_svd(counts, {options.dim, options.shift, options.seed});
  }
  if (!options.out.empty()) {
    write_with(options.out, [&](std::ostream& out) { save_embeddings(out, table); });
    write_manifest(options.out + ".manifest.json",
                   Json{{"stage", "embed"},
                        {"inputs", {{"counts", options.counts}, {"pretrained", options.load}}},
                        {"outputs", {{"embeddings", options.out}}},
                        {"dim", table.dim()},
                        {"shift", options.shift},
                        {"seed", options.seed}});
  }
  return table.size();
}

TrainSummary train(const TrainOptions& options, std::ostream* progress) {
  const ScoreDataset dataset = load_dataset(options.scores, options.stats);
  fs::create_directories(options.out_dir);
  const fs::path dir(options.out_dir);

  TrainSummary summary;
  EmbeddingTable embeddings;
  if (options.random_embeddings) {
    std::vector<std::string> tokens = dataset.tokens();
    if (!options.embeddings.empty()) tokens = load_embedding_file(options.embeddings).tokens();
    embeddings = random_embeddings(tokens, options.random_dim, options.config.seed);
    summary.embeddings = (dir / "random_embeddings.txt").string();
    write_with(summary.embeddings, [&](std::ostream& out) { save_embeddings(out, embeddings); });
    // Reload so training sees exactly the vectors the file holds.
    embeddings = load_embedding_file(summary.embeddings);
  } else {
    if (options.embeddings.empty()) throw InputError("--embeddings is required unless --random-embeddings");
    embeddings = load_embedding_file(options.embeddings);
    summary.embeddings = options.embeddings;
  }

  Hyperparams hp = options.hp;
  hp.input_dim = embeddings.dim();
  const auto on_epoch = [progress](const EpochLog& e) {
    if (progress) {
      *progress << "epoch " << e.epoch << " train_mse " << format_shortest(e.train_mse)
                << " val_rmse " << format_shortest(e.val_rmse) << '\n';
    }
  };
  const TrainResult result = train_loop(dataset, embeddings, hp, options.config, on_epoch);

  summary.best_checkpoint = (dir / "best.json").string();
  write_with(summary.best_checkpoint, [&](std::ostream& out) { save_checkpoint(out, hp, result.best); });
  write_with((dir / "last.json").string(), [&](std::ostream& out) { save_checkpoint(out, hp, result.last); });
  write_with((dir / "train_log.csv").string(), [&](std::ostream& out) { write_training_log(out, result.log); });
  write_manifest((dir / "train.manifest.json").string(),
                 Json{{"stage", "train"},
                      {"inputs", {{"scores", options.scores}, {"embeddings", summary.embeddings}}},
                      {"outputs",
                       {{"best", summary.best_checkpoint},
                        {"last", (dir / "last.json").string()},
                        {"log", (dir / "train_log.csv").string()}}},
                      {"hyperparams", hp_json(hp)},
                      {"train_config", config_json(options.config)},
                      {"random_embeddings", options.random_embeddings}});

  summary.epochs = static_cast<int>(result.log.size());
  summary.best_epoch = result.best_epoch;
  summary.best_val_rmse = result.best_val_rmse;
  return summary;
}

MetricsReport evaluate(const EvalOptions& options) {
  const Split split = parse_split(options.split);
  if (!options.baseline.empty() && options.baseline != "cosine") {
    throw InputError("unknown baseline '" + options.baseline + "' (expected cosine)");
  }
  const ScoreDataset dataset = load_dataset(options.scores, options.stats);
  const EmbeddingTable embeddings = load_embedding_file(options.embeddings);
  const std::vector<PairStats> pairs = dataset.subset(split);
  const double threshold = options.threshold.value_or(dataset.stats().top_threshold);

  MetricsReport report;
  std::string predictor;
  if (options.baseline == "cosine") {
    report = evaluate_cosine(embeddings, pairs, threshold);
    predictor = "cosine";
  } else {
    if (options.checkpoint.empty()) throw InputError("--checkpoint is required unless --baseline is given");
    const Checkpoint ck = load_checkpoint_file(options.checkpoint);
    report = evaluate_model(ck.params, ck.hp, embeddings, pairs, threshold);
    predictor = "model";
  }
  if (!options.out.empty()) {
    write_with(options.out, [&](std::ostream& out) { write_report_json(out, report); });
  }
  if (!options.csv_out.empty()) {
    write_file(options.csv_out, report_csv_header() + "\n" + report_csv_row(predictor, report) + "\n");
  }
  return report;
}

void rank(const RankOptions& options, std::ostream& out) {
  std::map<std::string, std::int64_t, std::less<>> occurrence;
  if (!options.counts.empty()) {
    auto in = open_in(options.counts, "counts");
    for (const auto& [token, count] : read_counts(in).occurrence) occurrence.emplace(token, count);
  }
  const PairingEngine engine(load_checkpoint_file(options.checkpoint),
                             load_embedding_file(options.embeddings),
                             load_dataset(options.scores, options.stats), std::move(occurrence));
  write_ranking_csv(out, engine.rank_partners(options.ingredient, options.k, parse_filter(options.filter)));
}

void run(const RunOptions& options, std::ostream* progress) {
  fs::create_directories(options.out_dir);
  const fs::path dir(options.out_dir);
  const auto path = [&](const char* name) { return (dir / name).string(); };
  const auto note = [&](const std::string& line) {
    if (progress) *progress << line << '\n';
  };

  const IngestSummary ingested = ingest({options.recipes, path("counts.tsv"), options.thresholds, 1});
  note("ingest: " + std::to_string(ingested.recipes) + " recipes, " +
       std::to_string(ingested.vocab_size) + " tokens, " + std::to_string(ingested.known_pairs) +
       " known pairs");
  score({path("counts.tsv"), path("scores.tsv"), path("scores.stats.json"), options.seed, options.ratios});
  note("score: wrote scores.tsv");
  embed({path("counts.tsv"), path("embeddings.txt"), "", options.embed_dim, options.shift, options.seed});
  note("embed: wrote embeddings.txt");

  TrainOptions train_options;
  train_options.scores = path("scores.tsv");
  train_options.stats = path("scores.stats.json");
  train_options.embeddings = path("embeddings.txt");
  train_options.out_dir = path("model");
  train_options.hp = options.hp;
  train_options.config = options.config;
  const TrainSummary trained = train(train_options);
  note("train: " + std::to_string(trained.epochs) + " epochs, best val RMSE " +
       format_shortest(trained.best_val_rmse) + " at epoch " + std::to_string(trained.best_epoch));

  EvalOptions eval_options;
  eval_options.checkpoint = trained.best_checkpoint;
  eval_options.scores = path("scores.tsv");
  eval_options.stats = path("scores.stats.json");
  eval_options.embeddings = path("embeddings.txt");
  eval_options.out = path("report.json");
  eval_options.threshold = options.threshold;
  const MetricsReport model_report = evaluate(eval_options);
  eval_options.baseline = "cosine";
  eval_options.out = path("report_cosine.json");
  const MetricsReport cosine_report = evaluate(eval_options);
  write_file(path("report_table.csv"), report_csv_header() + "\n" +
                                          report_csv_row("model", model_report) + "\n" +
                                          report_csv_row("cosine", cosine_report) + "\n");
  note("eval: model test RMSE " + format_shortest(model_report.rmse) + ", cosine " +
       format_shortest(cosine_report.rmse));

  Hyperparams hp = options.hp;
  hp.input_dim = options.embed_dim;
  write_manifest(path("manifest.json"),
                 Json{{"format_version", 1},
                      {"recipes", fs::absolute(options.recipes).string()},
                      {"artifacts",
                       {{"counts", "counts.tsv"},
                        {"scores", "scores.tsv"},
                        {"stats", "scores.stats.json"},
                        {"embeddings", "embeddings.txt"},
                        {"best_checkpoint", "model/best.json"},
                        {"last_checkpoint", "model/last.json"},
                        {"training_log", "model/train_log.csv"},
                        {"report", "report.json"},
                        {"cosine_report", "report_cosine.json"}}},
                      {"min_occurrence", options.thresholds.min_occurrence},
                      {"min_cooccurrence", options.thresholds.min_cooccurrence},
                      {"seed", options.seed},
                      {"ratios", {options.ratios.train, options.ratios.val, options.ratios.test}},
                      {"embed_dim", options.embed_dim},
                      {"shift", options.shift},
                      {"threshold", options.threshold ? Json(*options.threshold) : Json(nullptr)},
                      {"hyperparams", hp_json(hp)},
                      {"train_config", config_json(options.config)}});
}

RunOptions run_options_from_manifest(const std::string& manifest_path) {
  try {
    const auto j = nlohmann::json::parse(read_file(manifest_path));
    RunOptions o;
    o.recipes = j.at("recipes").get<std::string>();
    o.thresholds.min_occurrence = j.at("min_occurrence").get<std::int64_t>();
    o.thresholds.min_cooccurrence = j.at("min_cooccurrence").get<std::int64_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    const auto ratios = j.at("ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw InputError("manifest ratios must have 3 entries");
    o.ratios = {ratios[0], ratios[1], ratios[2]};
    o.embed_dim = j.at("embed_dim").get<int>();
    o.shift = j.at("shift").get<double>();
    if (const auto t = j.find("threshold"); t != j.end() && !t->is_null()) o.threshold = t->get<double>();
    const auto& h = j.at("hyperparams");
    o.hp.hidden_i = h.at("hidden_i").get<int>();
    o.hp.hidden_j = h.at("hidden_j").get<int>();
    o.hp.symmetrize = h.at("symmetrize").get<bool>();
    o.hp.use_wide = h.at("use_wide").get<bool>();
    const auto& c = j.at("train_config");
    o.config.learning_rate = c.at("learning_rate").get<double>();
    o.config.beta1 = c.at("beta1").get<double>();
    o.config.beta2 = c.at("beta2").get<double>();
    o.config.epsilon = c.at("epsilon").get<double>();
    o.config.batch_size = c.at("batch_size").get<int>();
    o.config.max_epochs = c.at("max_epochs").get<int>();
    o.config.patience = c.at("patience").get<int>();
    o.config.seed = c.at("seed").get<std::uint64_t>();
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + manifest_path + ": " + e.what());
  }
}

}  // namespace foodpair::pipeline
