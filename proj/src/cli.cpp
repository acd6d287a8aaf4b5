// cli.cpp - subcommands validate, transform, stats, configure, metrics, generate, serve
#include "pprvari/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "pprvari/deltagen.hpp"
#include "pprvari/engine.hpp"
#include "pprvari/ppr.hpp"
#include "pprvari/service.hpp"
#include "pprvari/transform.hpp"
#include "pprvari/workspace.hpp"

namespace pprvari::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Carries an exit status out of a subcommand.
struct Exit {
  int code;
};

[[noreturn]] void fail(std::ostream& err, int code, const std::string& msg) {
  err << "pprvari: " << msg << "\n";
  throw Exit{code};
}

std::string read_or_fail(const fs::path& p, std::ostream& err) {
  try {
    return engine::read_file(p);
  } catch (const std::exception& ex) {
    fail(err, kUsage, ex.what());
  }
}

json diagnostic_json(const Diagnostic& d) {
  return {{"severity", to_string(d.severity)}, {"line", d.line},   {"column", d.column},
          {"unit", d.unit_id},                 {"rule", d.rule},   {"message", d.message}};
}

// Parses and validates; diagnostics are printed in the requested format.
std::optional<ppr::PprModel> load_model(const fs::path& file, std::ostream& err, std::vector<Diagnostic>& diags) {
  std::string text = read_or_fail(file, err);
  auto parsed = ppr::parse_ppr(text, file.stem().string());
  diags = parsed.diagnostics;
  if (!parsed.model) return std::nullopt;
  for (auto& d : ppr::validate_model(*parsed.model)) diags.push_back(std::move(d));
  if (has_errors(diags)) return std::nullopt;
  return parsed.model;
}

void print_diagnostics(const fs::path& file, const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const auto& d : diags) err << file.string() << ":" << format(d) << "\n";
}

fs::path need_workspace(const std::string& ws, std::ostream& err) {
  if (ws.empty()) fail(err, kUsage, "no workspace given (use --workspace or PPRVARI_WORKSPACE)");
  return ws;
}

std::shared_ptr<const engine::Workspace> open_workspace(const fs::path& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) fail(err, kUsage, "not a workspace directory: " + dir.string());
  try {
    return std::make_shared<const engine::Workspace>(engine::load_workspace(dir));
  } catch (const engine::WorkspaceError& ex) {
    for (const auto& d : ex.details()) err << d << "\n";
    fail(err, kInvalid, ex.what());
  }
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

std::string join(const std::set<std::string>& v) { return join(std::vector<std::string>(v.begin(), v.end())); }

// ---- validate / transform / stats ----

int cmd_validate(const fs::path& file, const std::string& fmt, std::ostream& out, std::ostream& err) {
  std::vector<Diagnostic> diags;
  auto model = load_model(file, err, diags);
  if (fmt == "structured") {
    json ds = json::array();
    for (const auto& d : diags) ds.push_back(diagnostic_json(d));
    out << json{{"file", file.string()}, {"ok", model.has_value()}, {"diagnostics", ds}}.dump(2) << "\n";
  } else {
    print_diagnostics(file, diags, err);
    if (model) out << "OK\n";
  }
  return model ? kOk : kInvalid;
}

int cmd_transform(const fs::path& file, const std::string& ws, std::size_t limit, std::ostream& out,
                  std::ostream& err) {
  fs::path dir = need_workspace(ws, err);
  std::vector<Diagnostic> diags;
  auto model = load_model(file, err, diags);
  print_diagnostics(file, diags, err);
  if (!model) return kInvalid;
  auto w = engine::make_workspace(*model);
  print_diagnostics(file, w.out.warnings, err);
  engine::write_workspace(w, dir, limit);
  out << "wrote " << engine::kProductFile << " " << engine::kProcessFile << " " << engine::kResourceFile << " "
      << engine::kLinksFile << " to " << dir.string() << "\n";
  return kOk;
}

int cmd_stats(const fs::path& file, const std::string& fmt, std::size_t limit, std::ostream& out,
              std::ostream& err) {
  std::vector<Diagnostic> diags;
  auto model = load_model(file, err, diags);
  print_diagnostics(file, diags, err);
  if (!model) return kInvalid;
  auto w = engine::make_workspace(*model);
  auto s = transform::model_statistics(w.model, w.out, limit);
  if (fmt == "table") {
    out << transform::stats_table(w.model.name, s);
  } else if (fmt == "structured") {
    json j = json::object();
    std::istringstream lines(transform::stats_text(s));
    std::string key, value;
    while (lines >> key >> value) {
      try {
        std::size_t pos = 0;
        long long n = std::stoll(value, &pos);
        if (pos == value.size()) {
          j[key] = n;
          continue;
        }
      } catch (const std::exception&) {
      }
      j[key] = value == "true" ? json(true) : value == "false" ? json(false) : json(value);
    }
    out << j.dump(2) << "\n";
  } else {
    out << transform::stats_text(s);
  }
  return kOk;
}

// ---- configure ----

class Configurator {
 public:
  Configurator(fs::path dir, engine::StagedSession s, std::ostream& out, std::ostream& err)
      : dir_(std::move(dir)), s_(std::move(s)), out_(out), err_(err) {}

  // Returns false on quit.
  bool run(const std::string& line) {
    std::istringstream in(line);
    std::string cmd;
    if (!(in >> cmd) || cmd[0] == '#') return true;
    std::vector<std::string> args;
    for (std::string a; in >> a;) args.push_back(a);
    try {
      if (cmd == "quit" || cmd == "exit") return false;
      if (cmd == "help") {
        out_ << "commands: select IDS..., take DECISION [VALUE], rollback [K], finish [force], reset STAGE, show, quit\n";
      } else if (cmd == "show") {
        show();
      } else if (cmd == "select") {
        select(args);
      } else if (cmd == "take") {
        if (args.empty() || args.size() > 2) return problem("usage: take DECISION [VALUE]");
        auto added = s_.take_decision(args[0], args.size() > 1 ? args[1] : "true");
        for (const auto& a : added) out_ << "propagated " << a.decision << " = " << a.value << "\n";
        changed();
      } else if (cmd == "rollback") {
        std::size_t k = args.empty() ? 1 : std::stoul(args[0]);
        s_.rollback(k);
        changed();
      } else if (cmd == "finish") {
        bool force = !args.empty() && args[0] == "force";
        auto seq = s_.finish_process(force);
        out_ << "sequence " << join(seq) << "\n";
        changed();
      } else if (cmd == "reset") {
        auto st = args.empty() ? std::nullopt : engine::parse_stage(args[0]);
        if (!st) return problem("usage: reset product|process|resource");
        s_.reset(*st);
        changed();
      } else {
        return problem("unknown command '" + cmd + "' (try help)");
      }
    } catch (const engine::EngineError& ex) {
      problem(ex.what());
      for (const auto& d : ex.details()) err_ << "  " << d << "\n";
    } catch (const std::invalid_argument&) {
      problem("expected a number");
    }
    return true;
  }

  void show() {
    out_ << "stage " << engine::to_string(s_.stage()) << "\n";
    const auto& o = s_.workspace().out;
    switch (s_.stage()) {
      case engine::Stage::Product: {
        std::vector<std::string> ids;
        for (const auto& [id, f] : o.product_fm.features)
          if (id != o.product_fm.root) ids.push_back(id);
        out_ << "features " << join(ids) << "\n";
        break;
      }
      case engine::Stage::Process:
        for (const auto& a : s_.process_config().assignments)
          out_ << "  " << a.seq << " " << vm::to_string(a.origin) << " " << a.decision << " = " << a.value << "\n";
        out_ << "visible " << join(s_.visible_decisions()) << "\n";
        break;
      case engine::Stage::Resource: {
        const auto& r = s_.resource_reduction();
        out_ << "preselected " << join(r.preselected) << "\n";
        out_ << "required " << join(r.required) << "\n";
        std::vector<std::string> open;
        for (const auto& [id, f] : o.resource_fm.features)
          if (!r.locked.count(id) && id != o.resource_fm.root) open.push_back(id);
        out_ << "selectable " << join(open) << "\n";
        break;
      }
      case engine::Stage::Done:
        out_ << "sequence " << join(s_.production_sequence()) << "\n";
        out_ << "resources " << join(s_.resource_config().selected) << "\n";
        break;
    }
  }

  void save() const {
    engine::write_file(dir_ / "session.json", s_.to_snapshot().dump(2) + "\n");
    if (s_.stage() != engine::Stage::Product)
      engine::write_file(dir_ / "process.dconfig", vm::dconfig_write(s_.process_config()));
    if (s_.stage() == engine::Stage::Done) {
      std::string sel;
      for (const auto& id : s_.resource_config().selected) sel += id + "\n";
      engine::write_file(dir_ / "resource.config", sel);
    }
  }

  [[nodiscard]] const engine::StagedSession& session() const { return s_; }
  [[nodiscard]] int failures() const { return failures_; }

 private:
  void select(const std::vector<std::string>& ids) {
    std::set<std::string> sel(ids.begin(), ids.end());
    std::vector<std::string> v;
    if (s_.stage() == engine::Stage::Product) v = s_.set_product_config(sel);
    else if (s_.stage() == engine::Stage::Resource) v = s_.set_resource_config(sel);
    else v = {"select is only available in the product and resource stages"};
    if (!v.empty()) {
      problem("selection rejected");
      for (const auto& m : v) err_ << "  " << m << "\n";
      return;
    }
    changed();
  }

  void changed() {
    save();
    show();
  }

  bool problem(const std::string& msg) {
    ++failures_;
    err_ << "error: " << msg << "\n";
    return true;
  }

  fs::path dir_;
  engine::StagedSession s_;
  std::ostream& out_;
  std::ostream& err_;
  int failures_ = 0;
};

int cmd_configure(const std::string& ws, const std::string& resume, const std::string& script, std::istream& in,
                  std::ostream& out, std::ostream& err) {
  fs::path dir = need_workspace(ws, err);
  auto w = open_workspace(dir, err);
  std::optional<engine::StagedSession> session;
  try {
    if (resume.empty()) {
      session.emplace(w);
    } else {
      json snap;
      try {
        snap = json::parse(read_or_fail(resume, err));
      } catch (const json::parse_error& ex) {
        fail(err, kInvalid, std::string("malformed snapshot: ") + ex.what());
      }
      session.emplace(engine::StagedSession::from_snapshot(w, snap));
    }
  } catch (const engine::EngineError& ex) {
    fail(err, kInvalid, ex.what());
  }
  Configurator c(dir, std::move(*session), out, err);
  std::ifstream script_in;
  std::istream* src = &in;
  if (!script.empty()) {
    script_in.open(script);
    if (!script_in) fail(err, kUsage, "cannot read " + script);
    src = &script_in;
  }
  c.show();
  for (std::string line; std::getline(*src, line);)
    if (!c.run(line)) break;
  c.save();
  if (c.session().stage() != engine::Stage::Done)
    err << "pprvari: session saved at stage " << engine::to_string(c.session().stage()) << "\n";
  return !script.empty() && c.failures() > 0 ? kInvalid : kOk;
}

// ---- metrics ----

void print_metric(const engine::SpaceMetric& m, const std::string& fmt, std::ostream& out) {
  if (fmt == "structured") {
    out << service::metric_json(m).dump(2) << "\n";
    return;
  }
  out << "n " << m.n << "\nr " << m.r << "\nfull_space " << m.full_space << "\nstage_sizes";
  for (auto s : m.stage_sizes) out << " " << s;
  out << "\nreduced_space " << m.reduced_space << "\n";
}

// Rebuilds the product stage from the presets of a process configuration.
engine::StagedSession session_from_dconfig(std::shared_ptr<const engine::Workspace> w, const vm::DmConfiguration& cfg,
                                           std::ostream& err) {
  engine::StagedSession s(w);
  std::set<std::string> sel;
  for (const auto& a : cfg.assignments) {
    if (a.origin != vm::Origin::Preset) continue;
    if (a.value == "true") sel.insert(a.decision);
    else if (a.value != "false") sel.insert(a.value);
  }
  auto v = s.set_product_config(sel);
  if (!v.empty()) {
    for (const auto& m : v) err << "  " << m << "\n";
    fail(err, kInvalid, "process configuration does not match the product model");
  }
  if (!cfg.product_digest.empty() && cfg.product_digest != s.process_config().product_digest)
    fail(err, kInvalid, "process configuration digest does not match its presets");
  return s;
}

int cmd_metrics(const std::string& ws, const std::string& dconfig, std::optional<std::size_t> n,
                std::optional<std::size_t> r, const std::string& fmt, std::ostream& out, std::ostream& err) {
  if (n || r) {
    if (!n || !r) fail(err, kUsage, "--n and --r go together");
    if (*r > *n) fail(err, kUsage, "r must not exceed n");
    engine::SpaceMetric m;
    m.n = *n;
    m.r = *r;
    m.full_space = engine::permutations(*n, *r);
    m.stage_sizes = {*r};
    m.reduced_space = m.full_space;
    if (fmt == "structured") out << json{{"n", *n}, {"r", *r}, {"permutations", m.full_space.str()}}.dump(2) << "\n";
    else out << "permutations " << m.full_space << "\n";
    return kOk;
  }
  fs::path dir = need_workspace(ws, err);
  auto w = open_workspace(dir, err);
  fs::path file = dconfig.empty() ? dir / "process.dconfig" : fs::path(dconfig);
  std::optional<engine::StagedSession> s;
  if (fs::exists(file)) {
    try {
      s.emplace(session_from_dconfig(w, vm::dconfig_read(read_or_fail(file, err)), err));
    } catch (const SyntaxError& ex) {
      fail(err, kInvalid, file.string() + ":" + ex.what());
    }
  } else if (!dconfig.empty()) {
    fail(err, kUsage, "cannot read " + file.string());
  } else {
    s.emplace(w);
    auto v = s->set_product_config({});
    if (!v.empty()) fail(err, kUsage, "no process configuration in the workspace (run configure first)");
  }
  print_metric(s->sequence_space(), fmt, out);
  return kOk;
}

// ---- generate ----

int cmd_generate(const std::string& ws, std::string session_file, std::string base, std::string deltas,
                 const std::string& out_file, const std::string& report_file, std::ostream& out, std::ostream& err) {
  fs::path dir = need_workspace(ws, err);
  auto w = open_workspace(dir, err);
  if (session_file.empty()) session_file = (dir / "session.json").string();
  if (base.empty()) base = (dir / "base.fbn").string();
  if (deltas.empty()) deltas = (dir / "deltas").string();
  std::optional<engine::StagedSession> s;
  try {
    s.emplace(engine::StagedSession::from_snapshot(w, json::parse(read_or_fail(session_file, err))));
  } catch (const json::parse_error& ex) {
    fail(err, kInvalid, std::string("malformed session: ") + ex.what());
  } catch (const engine::EngineError& ex) {
    fail(err, kInvalid, ex.what());
  }
  if (s->stage() != engine::Stage::Done)
    fail(err, kInvalid, std::string("session is at stage ") + engine::to_string(s->stage()) + ", not done");
  delta::FbNetwork net;
  try {
    net = delta::parse_fbn(read_or_fail(base, err));
  } catch (const SyntaxError& ex) {
    fail(err, kInvalid, base + ":" + ex.what());
  } catch (const delta::DeltaError& ex) {
    fail(err, kInvalid, base + ":" + ex.what());
  }
  delta::Generation g;
  try {
    g = delta::generate_artifact(*s, net, delta::directory_loader(deltas));
  } catch (const delta::DeltaError& ex) {
    fail(err, kInvalid, ex.what());
  }
  std::string artifact = delta::write_fbn(g.network);
  if (out_file.empty()) out << artifact;
  else engine::write_file(out_file, artifact);
  if (!report_file.empty())
    for (const auto& wmsg : g.report.warnings) err << "warning: " << wmsg << "\n";
  std::string report = delta::report_text(g.report);
  if (!report_file.empty()) engine::write_file(report_file, report);
  else if (!out_file.empty()) out << report;
  return g.report.pass ? kOk : kInvalid;
}

// ---- serve ----

int cmd_serve(const std::string& ws, const std::string& host, int port, bool persist, std::ostream& out,
              std::ostream& err) {
  service::Options opts;
  opts.workspace = ws;
  opts.persist = persist;
  if (persist && ws.empty()) fail(err, kUsage, "--persist needs a workspace");
  std::unique_ptr<service::Server> server;
  try {
    server = std::make_unique<service::Server>(opts);
  } catch (const std::exception& ex) {
    fail(err, kInvalid, ex.what());
  }
  int bound = server->bind(host, port);
  if (bound < 0) fail(err, kUsage, "cannot bind " + host + ":" + std::to_string(port));
  out << "listening on http://" << host << ":" << bound << "/v1" << std::endl;
  return server->listen() ? kOk : kInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"PPR variability toolchain", "pprvari"};
  app.require_subcommand(1);
  std::string workspace;
  app.add_option("-w,--workspace", workspace, "workspace directory")->envname("PPRVARI_WORKSPACE");

  std::string file;
  std::string format = "text";
  std::size_t limit = transform::kDefaultConfigLimit;

  auto* validate = app.add_subcommand("validate", "parse and validate a PPR model");
  validate->add_option("file", file, "model file")->required();
  validate->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  auto* transform = app.add_subcommand("transform", "derive the variability models into a workspace");
  transform->add_option("file", file, "model file")->required();
  transform->add_option("--limit", limit, "configuration count cap");

  auto* stats = app.add_subcommand("stats", "model statistics");
  stats->add_option("file", file, "model file")->required();
  stats->add_option("--format", format)->check(CLI::IsMember({"text", "structured", "table"}));
  stats->add_option("--limit", limit, "configuration count cap");

  std::string resume, script;
  auto* configure = app.add_subcommand("configure", "staged product, process and resource configuration");
  configure->add_option("--resume", resume, "session snapshot to continue");
  configure->add_option("--script", script, "read commands from a file");

  std::string dconfig;
  std::optional<std::size_t> n, r;
  auto* metrics = app.add_subcommand("metrics", "sequence space of a configured process");
  metrics->add_option("--dconfig", dconfig, "process configuration (default <workspace>/process.dconfig)");
  metrics->add_option("--n", n, "permutations: number of steps");
  metrics->add_option("--r", r, "permutations: steps arranged");
  metrics->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  std::string session_file, base, deltas, out_file, report_file;
  auto* generate = app.add_subcommand("generate", "apply deltas to a base network");
  generate->add_option("--session", session_file, "session snapshot (default <workspace>/session.json)");
  generate->add_option("--base", base, "base network (default <workspace>/base.fbn)");
  generate->add_option("--deltas", deltas, "delta directory (default <workspace>/deltas)");
  generate->add_option("--out", out_file, "output network");
  generate->add_option("--report", report_file, "consistency report file");

  std::string host = "127.0.0.1";
  int port = 8080;
  bool persist = false;
  auto* serve = app.add_subcommand("serve", "run the HTTP session API");
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_flag("--persist", persist, "snapshot sessions into the workspace");

  for (auto* sub : {validate, transform, stats, configure, metrics, generate, serve})
    sub->add_option("-w,--workspace", workspace, "workspace directory")->envname("PPRVARI_WORKSPACE");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << "\n";
      return kOk;
    }
    err << "pprvari: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(file, format, out, err);
    if (transform->parsed()) return cmd_transform(file, workspace, limit, out, err);
    if (stats->parsed()) return cmd_stats(file, format, limit, out, err);
    if (configure->parsed()) return cmd_configure(workspace, resume, script, in, out, err);
    if (metrics->parsed()) return cmd_metrics(workspace, dconfig, n, r, format, out, err);
    if (generate->parsed())
      return cmd_generate(workspace, session_file, base, deltas, out_file, report_file, out, err);
    if (serve->parsed()) return cmd_serve(workspace, host, port, persist, out, err);
  } catch (const Exit& e) {
    return e.code;
  } catch (const transform::TransformError& ex) {
    for (const auto& d : ex.diagnostics()) err << pprvari::format(d) << "\n";
    return kInvalid;
  } catch (const std::exception& ex) {
    err << "pprvari: internal error: " << ex.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace pprvari::cli
