#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pprvari/cli.hpp"

namespace fx {

using namespace pprvari;

fs::path samples_dir() { return PPRVARI_SAMPLES_DIR; }
fs::path shiftfork_dir() { return samples_dir() / "shiftfork"; }
fs::path data_dir() { return PPRVARI_TEST_DATA_DIR; }
fs::path cli_path() { return PPRVARI_CLI_PATH; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ppr::PprModel load_model(const fs::path& p) {
  auto r = ppr::parse_ppr(slurp(p), p.stem().string());
  if (!r.model || has_errors(r.diagnostics)) {
    std::string msg = "cannot parse " + p.string();
    for (const auto& d : r.diagnostics) msg += "\n" + format(d);
    throw std::runtime_error(msg);
  }
  return *r.model;
}

std::shared_ptr<const engine::Workspace> shiftfork_workspace() {
  static const auto ws =
      std::make_shared<const engine::Workspace>(engine::make_workspace(load_model(shiftfork_dir() / "shiftfork.ppr")));
  return ws;
}

namespace {

std::vector<std::vector<std::string>> script_lines() {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(shiftfork_dir() / "walkthrough.txt"));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (!words.empty() && words[0][0] != '#') out.push_back(words);
  }
  return out;
}

std::set<std::string> nth_select(std::size_t n) {
  std::size_t seen = 0;
  for (const auto& l : script_lines())
    if (l[0] == "select" && seen++ == n) return {l.begin() + 1, l.end()};
  throw std::runtime_error("walkthrough lacks select line");
}

}  // namespace

std::set<std::string> walkthrough_product() { return nth_select(0); }
std::set<std::string> walkthrough_resources() { return nth_select(1); }

std::vector<std::string> walkthrough_decisions() {
  std::vector<std::string> out;
  for (const auto& l : script_lines())
    if (l[0] == "take") out.push_back(l[1]);
  return out;
}

void run_walkthrough(engine::StagedSession& s) {
  auto errs = s.set_product_config(walkthrough_product());
  if (!errs.empty()) throw std::runtime_error("product rejected: " + errs.front());
  for (const auto& d : walkthrough_decisions()) s.take_decision(d, "true");
  s.finish_process(false);
  errs = s.set_resource_config(walkthrough_resources());
  if (!errs.empty()) throw std::runtime_error("resources rejected: " + errs.front());
}

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto p = fs::temp_directory_path() / ("pprvari-test-" + std::to_string(rd()));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("cannot create temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

CliRun cli(const std::vector<std::string>& args, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, err;
  CliRun r;
  r.status = cli::run_cli(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace fx
