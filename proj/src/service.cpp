// service.cpp - HTTP/JSON session API
#include "pprvari/service.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <shared_mutex>

#include "httplib.h"
#include "pprvari/deltagen.hpp"
#include "pprvari/workspace.hpp"

namespace pprvari::service {

namespace fs = std::filesystem;
using nlohmann::json;

json metric_json(const engine::SpaceMetric& m) {
  return {{"n", m.n},
          {"r", m.r},
          {"full_space", m.full_space.str()},
          {"stage_sizes", m.stage_sizes},
          {"reduced_space", m.reduced_space.str()},
          {"stages", m.stages}};
}

json session_json(engine::StagedSession& s) {
  json j;
  j["stage"] = engine::to_string(s.stage());
  j["product"] = {{"model", s.product_config().model_id}, {"selected", s.product_config().selected}};
  json queue = json::array();
  for (const auto& a : s.process_config().assignments)
    queue.push_back({{"seq", a.seq}, {"origin", vm::to_string(a.origin)}, {"decision", a.decision}, {"value", a.value}});
  j["process"] = {{"model", s.process_config().model_id},
                  {"product_digest", s.process_config().product_digest},
                  {"queue", queue},
                  {"visible", s.visible_decisions()},
                  {"user_decisions", s.user_decision_count()}};
  const auto& red = s.resource_reduction();
  j["resource"] = {{"model", s.resource_config().model_id},
                   {"selected", s.resource_config().selected},
                   {"preselected", red.preselected},
                   {"required", red.required},
                   {"locked", red.locked},
                   {"fired", red.fired}};
  j["forced"] = s.forced_finish();
  if (s.stage() != engine::Stage::Product) {
    j["sequence"] = s.production_sequence();
    j["metrics"] = metric_json(s.sequence_space());
  }
  return j;
}

namespace {

std::string now_iso() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Record {
  std::string id;
  fs::path workspace_dir;
  engine::StagedSession session;
  std::string created;
  std::string updated;
  std::mutex mu;

  Record(std::string i, fs::path dir, engine::StagedSession s)
      : id(std::move(i)), workspace_dir(std::move(dir)), session(std::move(s)), created(now_iso()), updated(created) {}
};

struct HttpError {
  int status;
  json body;
};

HttpError error(int status, const std::string& msg, const std::vector<std::string>& details = {}) {
  json b = {{"error", msg}};
  if (!details.empty()) b["details"] = details;
  return {status, b};
}

json parse_body(const httplib::Request& req, std::initializer_list<const char*> allowed) {
  json body = json::object();
  if (!req.body.empty()) {
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& ex) {
      throw error(422, std::string("malformed JSON body: ") + ex.what());
    }
  }
  if (!body.is_object()) throw error(422, "request body must be an object");
  std::vector<std::string> unknown;
  for (const auto& [k, v] : body.items())
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
      unknown.push_back(k);
  if (!unknown.empty()) throw error(422, "unknown fields in request body", unknown);
  return body;
}

std::set<std::string> string_set(const json& body, const char* key) {
  if (!body.contains(key)) throw error(422, std::string("missing field '") + key + "'");
  const json& v = body.at(key);
  if (!v.is_array()) throw error(422, std::string("field '") + key + "' must be an array of strings");
  std::set<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw error(422, std::string("field '") + key + "' must be an array of strings");
    out.insert(e.get<std::string>());
  }
  return out;
}

std::string string_field(const json& body, const char* key, bool required = true) {
  if (!body.contains(key)) {
    if (required) throw error(422, std::string("missing field '") + key + "'");
    return {};
  }
  const json& v = body.at(key);
  if (!v.is_string()) throw error(422, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int engine_status(engine::ErrorKind k) {
  switch (k) {
    case engine::ErrorKind::Range:
    case engine::ErrorKind::Unknown:
      return 422;
    default:
      return 409;
  }
}

bool local_origin(const std::string& origin) {
  static const std::regex re(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d+)?$)");
  return std::regex_match(origin, re);
}

}  // namespace

struct Server::Impl {
  Options opts;
  httplib::Server http;
  mutable std::shared_mutex map_mu;
  std::map<std::string, std::shared_ptr<Record>> sessions;
  std::mt19937_64 rng{std::random_device{}()};
  std::mutex rng_mu;

  explicit Impl(Options o) : opts(std::move(o)) {
    if (opts.persist) restore();
    routes();
  }

  std::string new_id() {
    std::lock_guard lock(rng_mu);
    static const char* hex = "0123456789abcdef";
    while (true) {
      std::string id;
      std::uint64_t v = rng();
      for (int i = 0; i < 16; ++i, v >>= 4) id += hex[v & 0xf];
      std::shared_lock m(map_mu);
      if (!sessions.count(id)) return id;
    }
  }

  static fs::path snapshot_dir(const fs::path& ws) { return ws / "sessions"; }

  void persist(const Record& r) const {
    if (!opts.persist) return;
    fs::create_directories(snapshot_dir(r.workspace_dir));
    json j = r.session.to_snapshot();
    j["workspace"] = r.workspace_dir.string();
    j["created"] = r.created;
    engine::write_file(snapshot_dir(r.workspace_dir) / (r.id + ".json"), j.dump(2) + "\n");
  }

  void restore() {
    fs::path dir = snapshot_dir(opts.workspace);
    if (opts.workspace.empty() || !fs::is_directory(dir)) return;
    auto ws = std::make_shared<const engine::Workspace>(engine::load_workspace(opts.workspace));
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        json j = json::parse(engine::read_file(entry.path()));
        auto rec = std::make_shared<Record>(entry.path().stem().string(), opts.workspace,
                                            engine::StagedSession::from_snapshot(ws, j));
        rec->created = j.value("created", rec->created);
        sessions.emplace(rec->id, rec);
      } catch (const std::exception&) {
        // unreadable snapshots are skipped
      }
    }
  }

  std::shared_ptr<Record> find(const std::string& id) const {
    std::shared_lock lock(map_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw error(404, "unknown session " + id);
    return it->second;
  }

  json view(Record& r) {
    json j = session_json(r.session);
    j["id"] = r.id;
    j["created"] = r.created;
    j["updated"] = r.updated;
    return j;
  }

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  using Handler = std::function<std::pair<int, json>(const httplib::Request&)>;

  httplib::Server::Handler wrap(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
      try {
        auto [status, body] = h(req);
        send(res, status, body);
      } catch (const HttpError& e) {
        send(res, e.status, e.body);
      } catch (const engine::EngineError& e) {
        json b = {{"error", e.what()}};
        if (!e.details().empty()) b["details"] = e.details();
        send(res, engine_status(e.kind()), b);
      } catch (const std::exception& e) {
        send(res, 500, json{{"error", e.what()}});
      }
    };
  }

  // Runs fn on the locked record and persists when it returns normally.
  template <typename Fn>
  std::pair<int, json> mutate(const httplib::Request& req, Fn fn) {
    auto rec = find(req.matches[1]);
    std::lock_guard lock(rec->mu);
    auto out = fn(*rec);
    rec->updated = now_iso();
    persist(*rec);
    return out;
  }

  void routes() {
    const std::string sid = R"(/v1/sessions/([0-9a-f]+))";

    http.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
      std::string origin = req.get_header_value("Origin");
      if (!origin.empty() && local_origin(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      }
    });
    http.Options(R"(/v1/.*)", [](const httplib::Request& req, httplib::Response& res) {
      std::string origin = req.get_header_value("Origin");
      if (!origin.empty() && local_origin(origin)) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      }
      res.status = 204;
    });

    http.Get("/v1/health", wrap([this](const httplib::Request&) {
               std::shared_lock lock(map_mu);
               return std::pair{200, json{{"status", "ok"}, {"sessions", sessions.size()}}};
             }));

    http.Post("/v1/sessions", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"workspace"});
                fs::path dir = body.contains("workspace") ? fs::path(string_field(body, "workspace")) : opts.workspace;
                if (dir.empty()) throw error(422, "no workspace given");
                std::shared_ptr<const engine::Workspace> ws;
                try {
                  ws = std::make_shared<const engine::Workspace>(engine::load_workspace(dir));
                } catch (const engine::WorkspaceError& e) {
                  throw error(422, e.what(), e.details());
                } catch (const std::exception& e) {
                  throw error(422, e.what());
                }
                auto rec = std::make_shared<Record>(new_id(), dir, engine::StagedSession(ws));
                {
                  std::unique_lock lock(map_mu);
                  sessions.emplace(rec->id, rec);
                }
                std::lock_guard lock(rec->mu);
                persist(*rec);
                const auto& o = ws->out;
                json summary = {{"product_model", o.product_fm.model_id},
                                {"product_features", o.product_fm.features.size()},
                                {"process_model", o.process_dm.model_id},
                                {"decisions", o.process_dm.decisions.size()},
                                {"resource_model", o.resource_fm.model_id},
                                {"resource_features", o.resource_fm.features.size()},
                                {"cdcs", o.cdcs.size()}};
                return std::pair{201, json{{"id", rec->id}, {"stage", engine::to_string(rec->session.stage())},
                                           {"models", summary}}};
              }));

    http.Get(sid, wrap([this](const httplib::Request& req) {
               auto rec = find(req.matches[1]);
               std::lock_guard lock(rec->mu);
               return std::pair{200, view(*rec)};
             }));

    http.Post(sid + "/product", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"selected"});
                auto selected = string_set(body, "selected");
                return mutate(req, [&](Record& r) {
                  auto v = r.session.set_product_config(selected);
                  if (!v.empty()) throw error(409, "product configuration rejected", v);
                  return std::pair{200, view(r)};
                });
              }));

    http.Post(sid + "/process/decisions", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"decision", "value"});
                std::string decision = string_field(body, "decision");
                if (!body.contains("value")) throw error(422, "missing field 'value'");
                std::string value;
                if (body["value"].is_boolean()) value = body["value"].get<bool>() ? "true" : "false";
                else if (body["value"].is_string()) value = body["value"].get<std::string>();
                else throw error(422, "field 'value' must be a string or boolean");
                return mutate(req, [&](Record& r) {
                  json propagated = json::array();
                  for (const auto& a : r.session.take_decision(decision, value))
                    propagated.push_back({{"seq", a.seq}, {"decision", a.decision}, {"value", a.value}});
                  json j = view(r);
                  j["propagated"] = propagated;
                  return std::pair{200, j};
                });
              }));

    http.Post(sid + "/process/rollback", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"count"});
                if (!body.contains("count") || !body["count"].is_number_integer() || body["count"].get<long long>() < 0)
                  throw error(422, "field 'count' must be a non-negative integer");
                auto count = body["count"].get<std::size_t>();
                return mutate(req, [&](Record& r) {
                  r.session.rollback(count);
                  return std::pair{200, view(r)};
                });
              }));

    http.Post(sid + "/process/finish", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"force"});
                bool force = false;
                if (body.contains("force")) {
                  if (!body["force"].is_boolean()) throw error(422, "field 'force' must be a boolean");
                  force = body["force"].get<bool>();
                }
                return mutate(req, [&](Record& r) {
                  auto seq = r.session.finish_process(force);
                  json j = view(r);
                  j["sequence"] = seq;
                  return std::pair{200, j};
                });
              }));

    http.Post(sid + "/resource", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"selected"});
                auto selected = string_set(body, "selected");
                return mutate(req, [&](Record& r) {
                  auto v = r.session.set_resource_config(selected);
                  if (!v.empty()) throw error(409, "resource configuration rejected", v);
                  return std::pair{200, view(r)};
                });
              }));

    http.Post(sid + "/generate", wrap([this](const httplib::Request& req) {
                json body = parse_body(req, {"base", "deltas"});
                auto rec = find(req.matches[1]);
                std::lock_guard lock(rec->mu);
                auto resolve = [&](const std::string& p) {
                  fs::path path(p);
                  return path.is_relative() ? rec->workspace_dir / path : path;
                };
                fs::path base = resolve(body.contains("base") ? string_field(body, "base") : "base.fbn");
                fs::path deltas = resolve(body.contains("deltas") ? string_field(body, "deltas") : "deltas");
                if (rec->session.stage() != engine::Stage::Done)
                  throw error(409, std::string("session is at stage ") + engine::to_string(rec->session.stage()) +
                                       ", generation requires done");
                delta::FbNetwork net;
                try {
                  net = delta::parse_fbn(engine::read_file(base));
                } catch (const std::exception& e) {
                  throw error(422, std::string("base artifact: ") + e.what());
                }
                try {
                  auto g = delta::generate_artifact(rec->session, net, delta::directory_loader(deltas));
                  json report = {{"pass", g.report.pass},       {"applied", g.report.applied},
                                 {"present", g.report.present}, {"missing", g.report.missing},
                                 {"leftover", g.report.leftover}, {"warnings", g.report.warnings}};
                  return std::pair{200, json{{"artifact", delta::write_fbn(g.network)},
                                             {"report", report},
                                             {"report_text", delta::report_text(g.report)}}};
                } catch (const delta::DeltaError& e) {
                  json b = {{"error", e.what()}};
                  if (!e.delta().empty()) b["delta"] = e.delta();
                  throw HttpError{409, b};
                }
              }));

    http.Get(sid + "/metrics", wrap([this](const httplib::Request& req) {
               auto rec = find(req.matches[1]);
               std::lock_guard lock(rec->mu);
               return std::pair{200, metric_json(rec->session.sequence_space())};
             }));
  }
};

Server::Server(Options opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}
Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }
void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}
void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

std::size_t Server::session_count() const {
  std::shared_lock lock(impl_->map_mu);
  return impl_->sessions.size();
}

}  // namespace pprvari::service
