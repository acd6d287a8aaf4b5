// engine.hpp - staged configuration: product, process sequence, resources
#ifndef PPRVARI_ENGINE_HPP
#define PPRVARI_ENGINE_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pprvari/vmodels.hpp"
#include "pprvari/workspace.hpp"

namespace pprvari::engine {

using BigInt = boost::multiprecision::cpp_int;

/// n! / (n - r)!; throws std::invalid_argument when r > n.
[[nodiscard]] BigInt permutations(std::size_t n, std::size_t r);
[[nodiscard]] BigInt factorial(std::size_t n);

enum class Stage { Product, Process, Resource, Done };

[[nodiscard]] const char* to_string(Stage s);
[[nodiscard]] std::optional<Stage> parse_stage(const std::string& s);

enum class ErrorKind {
  Stage,       // operation not allowed in the current stage
  Unknown,     // unknown decision or feature id
  NotVisible,  // decision not currently visible
  Range,       // value outside the decision's range
  Violation,   // rule, constraint or CDC violated
  Pending,     // visible or required decisions remain
  Argument,    // bad count or similar
};

class EngineError : public std::runtime_error {
 public:
  EngineError(ErrorKind kind, const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), kind_(kind), details_(std::move(details)) {}
  [[nodiscard]] ErrorKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<std::string>& details() const { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

struct SpaceMetric {
  std::size_t n = 0;
  std::size_t r = 0;
  BigInt full_space = 1;
  std::vector<std::size_t> stage_sizes;
  BigInt reduced_space = 1;
  /// Decisions of each exploration stage, in document order.
  std::vector<std::vector<std::string>> stages;
  /// Every decision set true while exploring (stage members and propagations).
  std::set<std::string> reachable;
};

/// Outcome of the automated resource reduction.
struct ResourceReduction {
  std::set<std::string> preselected;
  std::set<std::string> required;
  std::set<std::string> locked;
  /// CDCs that fired, pretty-printed.
  std::vector<std::string> fired;

  friend bool operator==(const ResourceReduction&, const ResourceReduction&) = default;
};

class StagedSession {
 public:
  /// Throws WorkspaceError when the workspace models do not cross-resolve.
  explicit StagedSession(std::shared_ptr<const Workspace> ws);

  [[nodiscard]] const Workspace& workspace() const { return *ws_; }
  [[nodiscard]] std::shared_ptr<const Workspace> workspace_ptr() const { return ws_; }
  [[nodiscard]] Stage stage() const { return stage_; }
  [[nodiscard]] const vm::FmConfiguration& product_config() const { return product_cfg_; }
  [[nodiscard]] const vm::DmConfiguration& process_config() const { return process_cfg_; }
  [[nodiscard]] const vm::FmConfiguration& resource_config() const { return resource_cfg_; }
  [[nodiscard]] const ResourceReduction& resource_reduction() const { return reduction_; }
  [[nodiscard]] bool forced_finish() const { return forced_; }

  /// Empty on success (stage advances to Process and presets are applied);
  /// otherwise the violations, with the session unchanged.
  std::vector<std::string> set_product_config(const std::set<std::string>& selected);

  [[nodiscard]] std::vector<std::string> visible_decisions() const;

  /// Returns the assignments propagated by this decision.
  std::vector<vm::DmAssignment> take_decision(const std::string& id, const std::string& value);

  void rollback(std::size_t k);
  [[nodiscard]] std::size_t user_decision_count() const;

  /// Returns the production sequence and advances to Resource.
  std::vector<std::string> finish_process(bool force = false);
  /// True-valued user and propagated decisions in queue order.
  [[nodiscard]] std::vector<std::string> production_sequence() const;

  /// Empty on success (stage advances to Done); otherwise the violations.
  std::vector<std::string> set_resource_config(const std::set<std::string>& selected);

  /// Requires the Process stage or later; cached.
  const SpaceMetric& sequence_space();

  /// Moves back to an earlier (or the same) stage, discarding later input.
  void reset(Stage target);

  /// Qualified assignment over product, process and resource models using
  /// the current selections; unassigned decisions count as false.
  [[nodiscard]] logic::Assignment combined_assignment() const;
  [[nodiscard]] std::vector<std::string> cdc_violations() const;

  [[nodiscard]] nlohmann::json to_snapshot() const;
  /// Replays a snapshot on a fresh session; throws EngineError on mismatch.
  [[nodiscard]] static StagedSession from_snapshot(std::shared_ptr<const Workspace> ws, const nlohmann::json& snap);

  /// Structural state equality; the metrics cache is not compared.
  friend bool operator==(const StagedSession& a, const StagedSession& b);

 private:
  [[nodiscard]] logic::Assignment process_assignment() const;
  [[nodiscard]] bool is_product_decision(const std::string& id) const;
  std::vector<vm::DmAssignment> propagate(vm::DmConfiguration& cfg) const;
  [[nodiscard]] std::vector<std::string> rule_violations(const vm::DmConfiguration& cfg, bool complete) const;
  [[nodiscard]] std::vector<std::string> required_missing() const;
  [[nodiscard]] ResourceReduction reduce_resource_fm() const;
  [[nodiscard]] std::size_t next_seq() const;

  std::shared_ptr<const Workspace> ws_;
  Stage stage_ = Stage::Product;
  vm::FmConfiguration product_cfg_;
  vm::DmConfiguration process_cfg_;
  vm::FmConfiguration resource_cfg_;
  ResourceReduction reduction_;
  bool forced_ = false;
  std::optional<SpaceMetric> metrics_;
};

}  // namespace pprvari::engine

#endif  // PPRVARI_ENGINE_HPP
