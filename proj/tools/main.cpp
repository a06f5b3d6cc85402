// foodpair: ingredient pairing pipeline and query tool.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "foodpair/error.hpp"
#include "foodpair/service.hpp"
#include "foodpair/synthetic.hpp"
#include "foodpair/text_format.hpp"
#include "pipeline.hpp"

namespace {

using namespace foodpair;

SplitRatios parse_ratios(const std::string& text) {
  const auto fields = split(text, ',');
  if (fields.size() != 3) throw InputError("--ratios expects three comma-separated numbers");
  SplitRatios ratios{parse_double(fields[0]), parse_double(fields[1]), parse_double(fields[2])};
  split_sizes(0, ratios);  // validates
  return ratios;
}

void add_model_flags(CLI::App* cmd, Hyperparams& hp, TrainConfig& config, int& hidden) {
  cmd->add_option("--hidden", hidden, "Hidden units for every layer (i = j)")->capture_default_str();
  cmd->add_option("--hidden-i", hp.hidden_i, "Encoder first-layer units (overrides --hidden)");
  cmd->add_option("--hidden-j", hp.hidden_j, "Units of the remaining layers (overrides --hidden)");
  cmd->add_flag("--symmetrize", hp.symmetrize, "Average both input orders");
  cmd->add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", config.batch_size)->capture_default_str();
  cmd->add_option("--max-epochs", config.max_epochs)->capture_default_str();
  cmd->add_option("--patience", config.patience, "Epochs without val improvement before stopping")
      ->capture_default_str();
}

void apply_hidden(CLI::App* cmd, Hyperparams& hp, int hidden) {
  if (cmd->count("--hidden-i") == 0) hp.hidden_i = hidden;
  if (cmd->count("--hidden-j") == 0) hp.hidden_j = hidden;
}

int serve(const ServiceConfig& config) {
  auto engine = std::make_shared<const PairingEngine>(load_engine(config));
  PairingService service(engine, config.cors_allowed_origin);

  // Handle SIGINT/SIGTERM on a dedicated thread so stop() runs outside a
  // signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::jthread waiter([&service, signals] {
    int received = 0;
    sigwait(&signals, &received);
    service.stop();
  });

  std::cerr << "serving " << engine->vocabulary().size() << " ingredients on http://" << config.host
            << ':' << config.port << '\n';
  const bool ok = service.listen(config.host, config.port);
  if (!ok) {
    std::cerr << "error: cannot listen on " << config.host << ':' << config.port << '\n';
    pthread_kill(waiter.native_handle(), SIGTERM);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ingredient pairing scores, model training and recommendations"};
  app.require_subcommand(1);

  // ingest
  pipeline::IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Count recipes into a filtered counts TSV");
  ingest_cmd->add_option("--recipes", ingest.recipes, "JSON-lines recipe file")->required();
  ingest_cmd->add_option("--out", ingest.out, "Counts TSV to write")->required();
  ingest_cmd->add_option("--min-occurrence", ingest.thresholds.min_occurrence)->capture_default_str();
  ingest_cmd->add_option("--min-cooccurrence", ingest.thresholds.min_cooccurrence)->capture_default_str();
  ingest_cmd->add_option("--shards", ingest.shards, "Counting threads")->capture_default_str();

  // score
  pipeline::ScoreOptions score;
  std::string score_ratios = "0.8,0.1,0.1";
  auto* score_cmd = app.add_subcommand("score", "Build the NPMI pair dataset and split it");
  score_cmd->add_option("--counts", score.counts)->required();
  score_cmd->add_option("--out", score.out, "Scores TSV to write")->required();
  score_cmd->add_option("--stats-out", score.stats_out, "Stats JSON (default <out>.stats.json)");
  score_cmd->add_option("--seed", score.seed)->capture_default_str();
  score_cmd->add_option("--ratios", score_ratios, "train,val,test")->capture_default_str();

  // embed
  pipeline::EmbedOptions embed;
  auto* embed_cmd = app.add_subcommand("embed", "Train PPMI+SVD embeddings or validate pretrained ones");
  embed_cmd->add_option("--counts", embed.counts)->required();
  embed_cmd->add_option("--dim", embed.dim)->capture_default_str();
  embed_cmd->add_option("--shift", embed.shift, "PPMI shift (1 = plain PPMI)")->capture_default_str();
  embed_cmd->add_option("--seed", embed.seed)->capture_default_str();
  auto* embed_out = embed_cmd->add_option("--out", embed.out, "Embedding file to write");
  auto* embed_load = embed_cmd->add_option("--load", embed.load, "Pretrained word2vec-format text file");
  embed_cmd->callback([&] {
    if (embed_out->count() == 0 && embed_load->count() == 0) {
      throw CLI::ValidationError("embed", "one of --out or --load is required");
    }
  });

  // train
  pipeline::TrainOptions train;
  int train_hidden = 64;
  bool no_wide = false;
  auto* train_cmd = app.add_subcommand("train", "Train the pairing model");
  train_cmd->add_option("--scores", train.scores)->required();
  train_cmd->add_option("--stats", train.stats, "Stats JSON (default derived from --scores)");
  train_cmd->add_option("--embeddings", train.embeddings);
  train_cmd->add_option("--out-dir", train.out_dir)->required();
  train_cmd->add_option("--seed", train.config.seed)->capture_default_str();
  train_cmd->add_flag("--no-wide", no_wide, "Drop the wide (outer product) layer");
  train_cmd->add_flag("--random-embeddings", train.random_embeddings,
                      "Replace input embeddings with seeded uniform vectors");
  train_cmd->add_option("--random-dim", train.random_dim, "Dimension of random embeddings without --embeddings")
      ->capture_default_str();
  add_model_flags(train_cmd, train.hp, train.config, train_hidden);

  // eval
  pipeline::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or the cosine baseline");
  eval_cmd->add_option("--checkpoint", eval.checkpoint);
  eval_cmd->add_option("--scores", eval.scores)->required();
  eval_cmd->add_option("--stats", eval.stats);
  eval_cmd->add_option("--embeddings", eval.embeddings)->required();
  eval_cmd->add_option("--split", eval.split, "train, val or test")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Report JSON to write (stdout when omitted)");
  eval_cmd->add_option("--baseline", eval.baseline, "Evaluate a baseline instead: cosine");
  eval_cmd->add_option("--threshold", eval.threshold, "Complementary threshold (default mu + 2 sigma)");
  eval_cmd->add_option("--csv", eval.csv_out, "Also write a one-row comparison CSV");

  // rank
  pipeline::RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Top-k partners for an ingredient as CSV");
  rank_cmd->add_option("--checkpoint", rank.checkpoint)->required();
  rank_cmd->add_option("--scores", rank.scores)->required();
  rank_cmd->add_option("--stats", rank.stats);
  rank_cmd->add_option("--embeddings", rank.embeddings)->required();
  rank_cmd->add_option("--counts", rank.counts);
  rank_cmd->add_option("--ingredient", rank.ingredient)->required();
  rank_cmd->add_option("--k", rank.k)->capture_default_str();
  rank_cmd->add_option("--filter", rank.filter, "all, known or unknown")->capture_default_str();

  // serve
  std::string config_path;
  std::string host_override;
  int port_override = -1;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP JSON API");
  serve_cmd->add_option("--config", config_path, "service.json")->required();
  serve_cmd->add_option("--host", host_override);
  serve_cmd->add_option("--port", port_override);

  // synth
  SyntheticCorpusSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus with planted pairing groups");
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--recipes", synth.recipes)->capture_default_str();
  synth_cmd->add_option("--ingredients", synth.ingredients)->capture_default_str();
  synth_cmd->add_option("--groups", synth.groups)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  // run
  pipeline::RunOptions run;
  std::string run_ratios = "0.8,0.1,0.1";
  std::string manifest;
  int run_hidden = 64;
  auto* run_cmd = app.add_subcommand("run", "ingest -> score -> embed -> train -> eval into one directory");
  run_cmd->add_option("--recipes", run.recipes);
  run_cmd->add_option("--manifest", manifest, "Replay the settings of an earlier run");
  run_cmd->add_option("--out-dir", run.out_dir)->required();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--min-occurrence", run.thresholds.min_occurrence)->capture_default_str();
  run_cmd->add_option("--min-cooccurrence", run.thresholds.min_cooccurrence)->capture_default_str();
  run_cmd->add_option("--ratios", run_ratios)->capture_default_str();
  run_cmd->add_option("--dim", run.embed_dim)->capture_default_str();
  run_cmd->add_option("--shift", run.shift)->capture_default_str();
  run_cmd->add_flag("--no-wide", no_wide);
  run_cmd->add_option("--threshold", run.threshold, "Complementary threshold for eval (default mu + 2 sigma)");
  add_model_flags(run_cmd, run.hp, run.config, run_hidden);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (ingest_cmd->parsed()) {
      const auto s = pipeline::ingest(ingest);
      std::cout << "recipes\t" << s.recipes << "\nvocab_size\t" << s.vocab_size << "\nknown_pairs\t"
                << s.known_pairs << '\n';
    } else if (score_cmd->parsed()) {
      score.ratios = parse_ratios(score_ratios);
      const auto stats = pipeline::score(score);
      std::cout << "pairs\t" << stats.n_pairs << "\nmean\t" << format_shortest(stats.mean) << "\nstd\t"
                << format_shortest(stats.std) << "\ntop_threshold\t" << format_shortest(stats.top_threshold)
                << '\n';
    } else if (embed_cmd->parsed()) {
      std::cout << "embedded\t" << pipeline::embed(embed) << '\n';
    } else if (train_cmd->parsed()) {
      apply_hidden(train_cmd, train.hp, train_hidden);
      train.hp.use_wide = !no_wide;
      const auto s = pipeline::train(train, &std::cerr);
      std::cout << "epochs\t" << s.epochs << "\nbest_epoch\t" << s.best_epoch << "\nbest_val_rmse\t"
                << format_shortest(s.best_val_rmse) << "\ncheckpoint\t" << s.best_checkpoint
                << "\nembeddings\t" << s.embeddings << '\n';
    } else if (eval_cmd->parsed()) {
      const auto report = pipeline::evaluate(eval);
      if (eval.out.empty()) write_report_json(std::cout, report);
    } else if (rank_cmd->parsed()) {
      pipeline::rank(rank, std::cout);
    } else if (serve_cmd->parsed()) {
      ServiceConfig config = load_service_config(config_path);
      if (!host_override.empty()) config.host = host_override;
      if (port_override >= 0) config.port = port_override;
      return serve(config);
    } else if (synth_cmd->parsed()) {
      std::ofstream out(synth_out);
      if (!out) throw InputError("cannot write " + synth_out);
      write_recipes_jsonl(out, synthetic_corpus(synth));
    } else if (run_cmd->parsed()) {
      if (!manifest.empty()) {
        const std::string out_dir = run.out_dir;
        run = pipeline::run_options_from_manifest(manifest);
        run.out_dir = out_dir;
      } else {
        if (run.recipes.empty()) throw InputError("run needs --recipes or --manifest");
        run.ratios = parse_ratios(run_ratios);
        apply_hidden(run_cmd, run.hp, run_hidden);
        run.hp.use_wide = !no_wide;
        run.config.seed = run.seed;
      }
      pipeline::run(run, &std::cerr);
    }
  } catch (const UnknownIngredientError& e) {
    std::cerr << "error: " << e.what();
    if (!e.suggestions().empty()) {
      std::cerr << " (did you mean:";
      for (const auto& s : e.suggestions()) std::cerr << ' ' << s;
      std::cerr << ")";
    }
    std::cerr << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
