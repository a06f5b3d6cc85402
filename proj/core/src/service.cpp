#include "foodpair/service.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "foodpair/error.hpp"
#include "foodpair/text_format.hpp"

namespace foodpair {

using Json = nlohmann::ordered_json;

ServiceConfig load_service_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("service config " + path + ": " + e.what());
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path candidate(p);
    return (candidate.is_absolute() ? candidate : base / candidate).string();
  };
  ServiceConfig config;
  try {
    config.host = j.value("host", config.host);
    config.port = j.value("port", config.port);
    const auto& artifacts = j.at("artifacts");
    config.checkpoint = resolve(artifacts.at("checkpoint").get<std::string>());
    config.embeddings = resolve(artifacts.at("embeddings").get<std::string>());
    config.scores = resolve(artifacts.at("scores").get<std::string>());
    config.stats = resolve(artifacts.at("stats").get<std::string>());
    if (artifacts.contains("counts")) config.counts = resolve(artifacts.at("counts").get<std::string>());
    if (j.contains("cors_allowed_origin") && !j.at("cors_allowed_origin").is_null()) {
      config.cors_allowed_origin = j.at("cors_allowed_origin").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("service config " + path + ": " + e.what());
  }
  if (config.port < 0 || config.port > 65535) throw InputError("service config: bad port");
  return config;
}

PairingEngine load_engine(const ServiceConfig& config) {
  std::ifstream checkpoint_in(config.checkpoint);
  if (!checkpoint_in) throw InputError("cannot open checkpoint " + config.checkpoint);
  Checkpoint checkpoint = load_checkpoint(checkpoint_in);

  std::ifstream stats_in(config.stats);
  if (!stats_in) throw InputError("cannot open stats " + config.stats);
  const ScoreStats stats = read_stats(stats_in);
  std::ifstream scores_in(config.scores);
  if (!scores_in) throw InputError("cannot open scores " + config.scores);
  ScoreDataset dataset = read_scores(scores_in, stats);

  std::ifstream embeddings_in(config.embeddings);
  if (!embeddings_in) throw InputError("cannot open embeddings " + config.embeddings);
  EmbeddingTable embeddings = load_embeddings(embeddings_in);

  std::map<std::string, std::int64_t, std::less<>> occurrence;
  if (config.counts) {
    std::ifstream counts_in(*config.counts);
    if (!counts_in) throw InputError("cannot open counts " + *config.counts);
    for (const auto& [token, count] : read_counts(counts_in).occurrence) occurrence.emplace(token, count);
  }
  return PairingEngine(std::move(checkpoint), std::move(embeddings), std::move(dataset),
                       std::move(occurrence));
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_count(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json pair_json(const PairingAnswer& answer) {
  Json j;
  j["a"] = answer.query;
  j["b"] = answer.partner;
  j["predicted_score"] = answer.predicted_score;
  j["status"] = std::string(to_string(answer.status));
  j["true_score"] = optional_number(answer.true_score);
  j["cooccurrence"] = optional_count(answer.cooccurrence);
  return j;
}

Json ranked_json(const PairingAnswer& answer) {
  Json j;
  j["partner"] = answer.partner;
  j["predicted_score"] = answer.predicted_score;
  j["status"] = std::string(to_string(answer.status));
  j["true_score"] = optional_number(answer.true_score);
  j["cooccurrence"] = optional_count(answer.cooccurrence);
  return j;
}

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void bad_request(httplib::Response& res, const std::string& code, const std::string& message) {
  send(res, 400, Json{{"error", code}, {"message", message}});
}

void unknown_ingredient(httplib::Response& res, const UnknownIngredientError& e) {
  send(res, 404, Json{{"error", "unknown_ingredient"}, {"token", e.token()}, {"suggestions", e.suggestions()}});
}

// Parses an integer query parameter within [lo, hi]; nullopt when invalid.
std::optional<int> int_param(const httplib::Request& req, const char* name, int fallback, int lo,
                             int hi) {
  if (!req.has_param(name)) return fallback;
  try {
    const std::int64_t value = parse_int(req.get_param_value(name));
    if (value < lo || value > hi) return std::nullopt;
    return static_cast<int>(value);
  } catch (const InputError&) {
    return std::nullopt;
  }
}

}  // namespace

PairingService::PairingService(std::shared_ptr<const PairingEngine> engine,
                               std::optional<std::string> cors_allowed_origin)
    : engine_(std::move(engine)), server_(std::make_unique<httplib::Server>()) {
  auto& svr = *server_;
  const auto engine_ptr = engine_;

  if (cors_allowed_origin) {
    const std::string origin = *cors_allowed_origin;
    svr.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

  svr.Get("/api/health", [engine_ptr](const httplib::Request&, httplib::Response& res) {
    send(res, 200, Json{{"status", "ok"}, {"vocab_size", engine_ptr->vocabulary().size()}});
  });

  svr.Get("/api/ingredients", [engine_ptr](const httplib::Request& req, httplib::Response& res) {
    const auto limit = int_param(req, "limit", 20, 1, 200);
    if (!limit) return bad_request(res, "bad_limit", "limit must be an integer in [1, 200]");
    const std::string prefix = req.has_param("prefix") ? req.get_param_value("prefix") : "";
    Json list = Json::array();
    for (const auto& [token, occurrence] : engine_ptr->search(prefix, static_cast<std::size_t>(*limit))) {
      list.push_back(Json{{"token", token}, {"occurrence", occurrence}});
    }
    send(res, 200, list);
  });

  svr.Get("/api/score", [engine_ptr](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("a") || !req.has_param("b")) {
      return bad_request(res, "missing_parameter", "both a and b are required");
    }
    const std::string a = req.get_param_value("a");
    const std::string b = req.get_param_value("b");
    try {
      if (a == b && engine_ptr->in_vocabulary(a)) {
        return bad_request(res, "self_pair", "a and b must differ");
      }
      send(res, 200, pair_json(engine_ptr->score_pair(a, b)));
    } catch (const UnknownIngredientError& e) {
      unknown_ingredient(res, e);
    } catch (const InputError& e) {
      bad_request(res, "bad_request", e.what());
    }
  });

  svr.Get("/api/rank", [engine_ptr](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("ingredient")) {
      return bad_request(res, "missing_parameter", "ingredient is required");
    }
    const auto k = int_param(req, "k", 10, 1, 1000);
    if (!k) return bad_request(res, "bad_k", "k must be an integer in [1, 1000]");
    StatusFilter filter = StatusFilter::kAll;
    try {
      if (req.has_param("filter")) filter = parse_filter(req.get_param_value("filter"));
    } catch (const InputError& e) {
      return bad_request(res, "bad_filter", e.what());
    }
    try {
      Json list = Json::array();
      for (const auto& answer :
           engine_ptr->rank_partners(req.get_param_value("ingredient"), static_cast<std::size_t>(*k), filter)) {
        list.push_back(ranked_json(answer));
      }
      send(res, 200, list);
    } catch (const UnknownIngredientError& e) {
      unknown_ingredient(res, e);
    }
  });

  svr.Post("/api/compare", [engine_ptr](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::string> targets;
    std::vector<std::string> probes;
    try {
      const auto body = nlohmann::json::parse(req.body);
      targets = body.at("targets").get<std::vector<std::string>>();
      probes = body.at("probes").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      return bad_request(res, "bad_body", std::string("expected {\"targets\": [...], \"probes\": [...]}: ") + e.what());
    }
    if (targets.empty() || probes.empty() || targets.size() > 10 || probes.size() > 10) {
      return bad_request(res, "bad_size", "targets and probes must each hold 1 to 10 tokens");
    }
    std::set<std::string> unknown;
    for (const auto* list : {&targets, &probes}) {
      for (const auto& token : *list) {
        if (!engine_ptr->in_vocabulary(token)) unknown.insert(token);
      }
    }
    if (!unknown.empty()) {
      Json suggestions = Json::object();
      for (const auto& token : unknown) suggestions[token] = engine_ptr->suggestions(token);
      return send(res, 404, Json{{"error", "unknown_ingredient"},
                                 {"token", *unknown.begin()},
                                 {"tokens", unknown},
                                 {"suggestions", suggestions}});
    }
    for (const auto& target : targets) {
      for (const auto& probe : probes) {
        if (target == probe) return bad_request(res, "self_pair", "cannot pair " + target + " with itself");
      }
    }
    Json grid = Json::array();
    for (const auto& target : targets) {
      Json row = Json::array();
      for (const auto& probe : probes) {
        row.push_back(pair_json(engine_ptr->score_pair(target, probe)));
      }
      grid.push_back(std::move(row));
    }
    send(res, 200, Json{{"targets", targets}, {"probes", probes}, {"grid", grid}});
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send(res, 500, Json{{"error", "internal"}, {"message", e.what()}});
    } catch (...) {
      send(res, 500, Json{{"error", "internal"}});
    }
  });
}

PairingService::~PairingService() { stop(); }

bool PairingService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int PairingService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool PairingService::listen_after_bind() { return server_->listen_after_bind(); }

void PairingService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void PairingService::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace foodpair
