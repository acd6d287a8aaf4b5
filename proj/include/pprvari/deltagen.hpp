// deltagen.hpp - function block networks, delta models and artifact generation
#ifndef PPRVARI_DELTAGEN_HPP
#define PPRVARI_DELTAGEN_HPP

#include <compare>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pprvari/engine.hpp"
#include "pprvari/logic.hpp"

namespace pprvari::delta {

struct EventConnection {
  std::string src;
  std::string src_port;
  std::string dst;
  std::string dst_port;

  friend auto operator<=>(const EventConnection&, const EventConnection&) = default;
};

[[nodiscard]] std::string to_string(const EventConnection& c);

struct FbNetwork {
  std::string app_name;
  /// block name -> type id
  std::map<std::string, std::string> blocks;
  std::set<EventConnection> connections;

  friend bool operator==(const FbNetwork&, const FbNetwork&) = default;
};

enum class OpKind { RemoveElement, AddBlock, AddEventConnection, RemoveEventConnection };

struct DeltaOp {
  OpKind kind = OpKind::RemoveElement;
  std::string name;  // RemoveElement, AddBlock
  std::string type;  // AddBlock
  EventConnection connection;

  friend bool operator==(const DeltaOp&, const DeltaOp&) = default;
};

struct DeltaModel {
  std::string name;
  std::string uses;
  std::vector<DeltaOp> ops;

  friend bool operator==(const DeltaModel&, const DeltaModel&) = default;
};

/// Raised for semantic failures; delta() names the offending delta if any.
class DeltaError : public std::runtime_error {
 public:
  DeltaError(const std::string& what, std::string delta = {})
      : std::runtime_error(what), delta_(std::move(delta)) {}
  [[nodiscard]] const std::string& delta() const { return delta_; }

 private:
  std::string delta_;
};

/// Throws SyntaxError on malformed text, DeltaError on duplicate blocks or
/// dangling connection endpoints.
[[nodiscard]] FbNetwork parse_fbn(std::string_view text);
[[nodiscard]] std::string write_fbn(const FbNetwork& net);

[[nodiscard]] DeltaModel parse_delta(std::string_view text);
[[nodiscard]] std::string write_delta(const DeltaModel& d);

/// Applies ops in order. Removing a block drops its connections; one warning
/// per dropped connection is appended to warnings when given.
[[nodiscard]] FbNetwork apply_delta(const FbNetwork& net, const DeltaModel& d,
                                    std::vector<std::string>* warnings = nullptr);

struct DeltaBinding {
  logic::QualifiedRef element;
  std::string delta_name;
  bool negated = false;

  friend bool operator==(const DeltaBinding&, const DeltaBinding&) = default;
};

inline constexpr const char* kDeltaAttribute = "deltaFile";

/// Parses a deltaFile value such as "!DLock1"; a path-like value keeps its stem.
[[nodiscard]] DeltaBinding parse_binding(const logic::QualifiedRef& element, const std::string& value);

/// Every binding declared in the workspace.
[[nodiscard]] std::vector<DeltaBinding> bindings(const engine::Workspace& ws);

using DeltaLoader = std::function<DeltaModel(const std::string& name)>;

/// Loads <dir>/<name>.delta; throws DeltaError when missing or misnamed.
[[nodiscard]] DeltaLoader directory_loader(const std::filesystem::path& dir);

struct CollectedDelta {
  DeltaBinding binding;
  DeltaModel model;
};

/// Fired bindings of a Done session: selected processes in sequence order,
/// unselected processes in declaration order, then resources and products
/// in model order. A delta is collected once even if bound twice.
[[nodiscard]] std::vector<CollectedDelta> collect_deltas(const engine::StagedSession& session, const DeltaLoader& load,
                                                         const std::string& app_name);

struct ConsistencyReport {
  bool pass = false;
  std::vector<std::string> applied;
  /// selected element -> matching block
  std::map<std::string, std::string> present;
  std::vector<std::string> missing;
  std::vector<std::string> leftover;
  std::vector<std::string> warnings;
};

[[nodiscard]] std::string report_text(const ConsistencyReport& r);

struct Generation {
  FbNetwork network;
  ConsistencyReport report;
};

/// Requires a Done session; throws DeltaError naming the failing delta.
[[nodiscard]] Generation generate_artifact(const engine::StagedSession& session, const FbNetwork& base,
                                           const DeltaLoader& load);

}  // namespace pprvari::delta

#endif  // PPRVARI_DELTAGEN_HPP
