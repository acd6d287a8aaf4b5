// fixtures.hpp - sample paths, temporary directories and the shift-fork workspace
#ifndef PPRVARI_TEST_FIXTURES_HPP
#define PPRVARI_TEST_FIXTURES_HPP

#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pprvari/engine.hpp"
#include "pprvari/ppr.hpp"
#include "pprvari/workspace.hpp"

namespace fx {

namespace fs = std::filesystem;

fs::path samples_dir();
fs::path shiftfork_dir();
fs::path data_dir();
fs::path cli_path();

std::string slurp(const fs::path& p);

/// Parses a PPR file; throws std::runtime_error listing the diagnostics.
pprvari::ppr::PprModel load_model(const fs::path& p);

/// Transformed shift-fork sample, built once.
std::shared_ptr<const pprvari::engine::Workspace> shiftfork_workspace();

/// Product selection of the walkthrough script.
std::set<std::string> walkthrough_product();

/// Resource selection of the walkthrough script.
std::set<std::string> walkthrough_resources();

/// Process decisions of the walkthrough script, in order.
std::vector<std::string> walkthrough_decisions();

/// Applies the whole walkthrough; throws on any rejected step.
void run_walkthrough(pprvari::engine::StagedSession& s);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

/// In-process CLI invocation.
CliRun cli(const std::vector<std::string>& args, const std::string& input = "");

}  // namespace fx

#endif
