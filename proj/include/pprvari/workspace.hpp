// workspace.hpp - the directory of derived models shared by all workflow steps
#ifndef PPRVARI_WORKSPACE_HPP
#define PPRVARI_WORKSPACE_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pprvari/ppr.hpp"
#include "pprvari/transform.hpp"

namespace pprvari::engine {

struct Workspace {
  ppr::PprModel model;
  transform::TransformOutput out;
};

class WorkspaceError : public std::runtime_error {
 public:
  WorkspaceError(const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), details_(std::move(details)) {}
  [[nodiscard]] const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

inline constexpr const char* kModelFile = "model.ppr";
inline constexpr const char* kProductFile = "product.fm";
inline constexpr const char* kProcessFile = "process.dm";
inline constexpr const char* kResourceFile = "resource.fm";
inline constexpr const char* kLinksFile = "links.cdc";
inline constexpr const char* kStatsFile = "stats";

/// Transforms a parsed model; throws transform::TransformError when invalid.
[[nodiscard]] Workspace make_workspace(const ppr::PprModel& model);

/// Writes model.ppr, product.fm, process.dm, resource.fm, links.cdc and stats.
void write_workspace(const Workspace& ws, const std::filesystem::path& dir,
                     std::size_t config_limit = transform::kDefaultConfigLimit);

/// Reads a workspace directory; throws WorkspaceError on missing files,
/// syntax errors or unresolved cross references.
[[nodiscard]] Workspace load_workspace(const std::filesystem::path& dir);

/// Unresolved references between the models of a workspace.
[[nodiscard]] std::vector<std::string> consistency_errors(const Workspace& ws);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pprvari::engine

#endif  // PPRVARI_WORKSPACE_HPP
