// End-to-end criteria driven through the CLI and the HTTP service.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "criteria.hpp"
#include "foodpair/eval.hpp"
#include "foodpair/model.hpp"
#include "foodpair/recommend.hpp"
#include "foodpair/service.hpp"
#include "foodpair/text_format.hpp"
#include "running_service.hpp"

namespace foodpair::acceptance {
namespace {

using testing::run_cli;
using testing::slurp;
using testing::TempDir;

TempDir& workspace() {
  static TempDir dir("foodpair_acceptance");
  return dir;
}

// Writes (once) a synthetic corpus shared by every criterion here.
std::string corpus_path() {
  static const std::string path = [] {
    const std::string p = workspace() / "recipes.jsonl";
    const auto r = run_cli({"synth", "--out", p, "--recipes", "1500", "--ingredients", "60",
                            "--groups", "6", "--seed", "42"});
    if (r.exit_code != 0) throw std::runtime_error("synth failed: " + r.err);
    return p;
  }();
  return path;
}

std::string require_ok(const std::vector<std::string>& args) {
  const auto r = run_cli(args);
  if (r.exit_code != 0) throw std::runtime_error(args.front() + " failed: " + r.err);
  return r.out;
}

std::vector<std::string> run_args(const std::string& out_dir) {
  return {"run", "--recipes", corpus_path(), "--out-dir", out_dir, "--seed", "7", "--dim", "16",
          "--hidden", "24", "--max-epochs", "40", "--batch-size", "128"};
}

// Problems with a report JSON, or empty when it is well-formed.
std::string report_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "missing " + path;
  try {
    const auto r = read_report_json(in);
    std::string issues;
    for (const double v : {r.rmse, r.mse, r.mae, r.corr, r.r2, r.roc_auc}) {
      if (!std::isfinite(v)) issues += " non-finite metric;";
    }
    if (r.ndcg_at.size() != kNdcgCutoffs.size()) issues += " missing NDCG cutoffs;";
    for (const auto& [k, v] : r.ndcg_at) {
      if (!(v >= 0.0 && v <= 1.0)) issues += " NDCG@" + std::to_string(k) + " outside [0,1];";
    }
    if (!(r.roc_auc >= 0.0 && r.roc_auc <= 1.0)) issues += " AUC outside [0,1];";
    if (r.n_examples <= 0) issues += " no examples;";
    return issues;
  } catch (const std::exception& e) {
    return path + ": " + e.what();
  }
}

Outcome ablation_shapes() {
  const auto& d = workspace();
  const std::string base = d / "ablation";
  require_ok({"ingest", "--recipes", corpus_path(), "--out", base + "_counts.tsv"});
  require_ok({"score", "--counts", base + "_counts.tsv", "--out", base + "_scores.tsv", "--seed", "3"});
  require_ok({"embed", "--counts", base + "_counts.tsv", "--out", base + "_emb.txt", "--dim", "16"});
  const int j = 12;
  const std::vector<std::string> common{"--scores", base + "_scores.tsv", "--hidden", std::to_string(j),
                                        "--max-epochs", "15", "--seed", "3"};
  const auto train = [&](const std::string& dir, std::vector<std::string> extra) {
    std::vector<std::string> args{"train", "--out-dir", dir};
    args.insert(args.end(), common.begin(), common.end());
    args.insert(args.end(), extra.begin(), extra.end());
    require_ok(args);
  };
  train(base + "_full", {"--embeddings", base + "_emb.txt"});
  train(base + "_narrow", {"--embeddings", base + "_emb.txt", "--no-wide"});
  train(base + "_random", {"--random-embeddings", "--random-dim", "16"});

  const auto width = [](const std::string& path) {
    std::ifstream in(path);
    return load_checkpoint(in).params.W5.size();
  };
  const auto full_width = width(base + "_full/best.json");
  const auto narrow_width = width(base + "_narrow/best.json");

  std::string problems;
  for (const auto& [dir, emb] : {std::pair{base + "_narrow", base + "_emb.txt"},
                                 std::pair{base + "_random", base + "_random/random_embeddings.txt"}}) {
    require_ok({"eval", "--checkpoint", dir + "/best.json", "--scores", base + "_scores.tsv",
                "--embeddings", emb, "--split", "test", "--out", dir + "/report.json"});
    const auto issues = report_problems(dir + "/report.json");
    if (!issues.empty()) problems += " " + dir + ":" + issues;
  }
  Outcome out;
  out.pass = narrow_width == j && full_width == j * j + j && problems.empty();
  out.detail = "j=" + std::to_string(j) + ": W5 width " + std::to_string(narrow_width) +
               " with --no-wide vs " + std::to_string(full_width) +
               " with wide; --random-embeddings trained; reports " +
               (problems.empty() ? std::string("valid") : "invalid:" + problems);
  return out;
}

Outcome end_to_end_determinism() {
  const auto& d = workspace();
  require_ok(run_args(d / "run_a"));
  require_ok(run_args(d / "run_b"));
  std::string differing;
  int compared = 0;
  for (const char* name : {"counts.tsv", "scores.tsv", "scores.stats.json", "embeddings.txt",
                           "model/best.json", "model/last.json", "report.json", "report_cosine.json"}) {
    const std::string a = slurp(d / ("run_a/" + std::string(name)));
    const std::string b = slurp(d / ("run_b/" + std::string(name)));
    if (a.empty() || a != b) differing += std::string(" ") + name;
    ++compared;
  }
  Outcome out;
  out.pass = differing.empty();
  out.detail = std::to_string(compared) + " artifacts from two seeded runs " +
               (differing.empty() ? std::string("byte-identical") : "differ:" + differing);
  return out;
}

Outcome service_consistency() {
  const auto& d = workspace();
  const std::string run_dir = d / "run_a";
  if (!std::filesystem::exists(run_dir + "/model/best.json")) require_ok(run_args(run_dir));

  const std::string config_path = run_dir + "/service.json";
  std::ofstream(config_path) << R"({"host": "127.0.0.1", "port": 0, "artifacts": {
      "checkpoint": "model/best.json", "embeddings": "embeddings.txt",
      "scores": "scores.tsv", "stats": "scores.stats.json", "counts": "counts.tsv"}})";
  const ServiceConfig config = load_service_config(config_path);
  const auto engine = std::make_shared<const PairingEngine>(load_engine(config));
  testing::RunningService server(engine);
  auto client = server.client();

  const auto& vocab = engine->vocabulary();
  std::mt19937_64 rng(2024);
  const auto pick = [&] { return vocab[rng() % vocab.size()]; };
  int mismatches = 0;
  std::vector<std::string> notes;
  const auto mismatch = [&](const std::string& what) {
    if (++mismatches <= 5) notes.push_back(what);
  };
  for (int q = 0; q < 100; ++q) {
    std::string a = pick();
    std::string b = pick();
    while (b == a) b = pick();
    const auto expected = engine->score_pair(a, b);
    const auto res = client.Get("/api/score?a=" + a + "&b=" + b);
    if (!res || res->status != 200) {
      mismatch("score " + a + "," + b + ": HTTP failure");
      continue;
    }
    const auto body = nlohmann::json::parse(res->body);
    if (body["predicted_score"].get<double>() != expected.predicted_score ||
        body["status"] != std::string(to_string(expected.status))) {
      mismatch("score " + a + "," + b + ": " + res->body);
    }

    const std::size_t k = 1 + rng() % 15;
    const auto ranking = engine->rank_partners(a, k);
    const auto rank_res = client.Get("/api/rank?ingredient=" + a + "&k=" + std::to_string(k));
    if (!rank_res || rank_res->status != 200) {
      mismatch("rank " + a + ": HTTP failure");
      continue;
    }
    const auto list = nlohmann::json::parse(rank_res->body);
    bool same = list.size() == ranking.size();
    for (std::size_t r = 0; same && r < ranking.size(); ++r) {
      same = list[r]["partner"] == ranking[r].partner &&
             list[r]["predicted_score"].get<double>() == ranking[r].predicted_score;
    }
    if (!same) mismatch("rank " + a + " k=" + std::to_string(k) + " differs from the library");

    const std::string csv = require_ok({"rank", "--checkpoint", config.checkpoint, "--scores",
                                        config.scores, "--embeddings", config.embeddings,
                                        "--ingredient", a, "--k", std::to_string(k)});
    std::ostringstream library_csv;
    write_ranking_csv(library_csv, ranking);
    if (csv != library_csv.str()) mismatch("CLI rank " + a + " differs from the library");
    // The CLI prints shortest round-trip decimals; parse them back.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    for (std::size_t r = 0; std::getline(lines, line) && r < ranking.size(); ++r) {
      if (parse_double(split(line, ',')[2]) != ranking[r].predicted_score) {
        mismatch("CLI rank " + a + " row " + std::to_string(r + 1) + " does not round-trip");
      }
    }
  }
  Outcome out;
  out.notes = notes;
  out.pass = mismatches == 0;
  out.detail = "100 random queries over " + std::to_string(vocab.size()) +
               " ingredients: /api/score, /api/rank and CLI rank vs library, " +
               std::to_string(mismatches) + " mismatch(es); no web UI built";
  return out;
}

}  // namespace

std::vector<Criterion> system_criteria() {
  return {
      {"ablation_shapes", 0.0, ablation_shapes},
      {"end_to_end_determinism", 0.0, end_to_end_determinism},
      {"service_consistency", 0.0, service_consistency},
  };
}

}  // namespace foodpair::acceptance
