// workspace.cpp - reading and writing workspace directories
#include "pprvari/workspace.hpp"

#include <fstream>
#include <sstream>

namespace pprvari::engine {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Workspace make_workspace(const ppr::PprModel& model) {
  Workspace ws;
  ws.model = model;
  ws.out = transform::transform(model);
  return ws;
}

void write_workspace(const Workspace& ws, const fs::path& dir, std::size_t config_limit) {
  fs::create_directories(dir);
  write_file(dir / kModelFile, ppr::write_ppr(ws.model));
  write_file(dir / kProductFile, vm::fm_write(ws.out.product_fm));
  write_file(dir / kProcessFile, vm::dm_write(ws.out.process_dm));
  write_file(dir / kResourceFile, vm::fm_write(ws.out.resource_fm));
  write_file(dir / kLinksFile, vm::cdc_write(ws.out.cdcs));
  write_file(dir / kStatsFile, transform::stats_text(transform::model_statistics(ws.model, ws.out, config_limit)));
}

std::vector<std::string> consistency_errors(const Workspace& ws) {
  std::vector<std::string> out;
  const auto& o = ws.out;
  for (const auto& r : vm::unresolved_refs(o.cdcs, o.product_fm, o.process_dm, o.resource_fm))
    out.push_back("unresolved CDC reference " + r);
  for (const auto& r : vm::unresolved_refs(o.process_dm)) out.push_back("unresolved decision reference " + r);
  for (const auto* fm : {&o.product_fm, &o.resource_fm}) {
    for (const auto& c : fm->constraints)
      for (const auto& v : logic::names(c))
        if (!fm->features.contains(v)) out.push_back("unresolved feature " + v + " in " + fm->model_id);
  }
  return out;
}

namespace {

template <typename Fn>
auto read_part(const fs::path& dir, const char* file, Fn fn) {
  fs::path p = dir / file;
  if (!fs::exists(p)) throw WorkspaceError("workspace file missing: " + p.string());
  std::string text = read_file(p);
  try {
    return fn(text);
  } catch (const SyntaxError& ex) {
    throw WorkspaceError(std::string(file) + ":" + ex.what(), {std::string(file) + ":" + ex.what()});
  }
}

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return s;
}

}  // namespace

Workspace load_workspace(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw WorkspaceError("not a workspace directory: " + dir.string());
  Workspace ws;
  ws.out.product_fm = read_part(dir, kProductFile, [](const std::string& t) { return vm::fm_read(t); });
  ws.out.process_dm = read_part(dir, kProcessFile, [](const std::string& t) { return vm::dm_read(t); });
  ws.out.resource_fm = read_part(dir, kResourceFile, [](const std::string& t) { return vm::fm_read(t); });
  ws.out.cdcs = read_part(dir, kLinksFile, [](const std::string& t) { return vm::cdc_read(t); });
  std::string name = strip_suffix(ws.out.product_fm.model_id, "_product");
  if (fs::exists(dir / kModelFile)) {
    auto parsed = ppr::parse_ppr(read_file(dir / kModelFile), name.empty() ? "model" : name);
    if (!parsed.model) {
      std::vector<std::string> details;
      for (const auto& d : parsed.diagnostics) details.push_back(std::string(kModelFile) + ":" + format(d));
      throw WorkspaceError("workspace model does not parse", details);
    }
    ws.model = std::move(*parsed.model);
  } else {
    ws.model.name = name;
  }
  auto errors = consistency_errors(ws);
  if (!errors.empty()) throw WorkspaceError("inconsistent workspace: " + errors.front(), errors);
  return ws;
}

}  // namespace pprvari::engine
