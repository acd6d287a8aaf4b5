// vmodels.hpp - feature models, decision models, CDCs and configurations
#ifndef PPRVARI_VMODELS_HPP
#define PPRVARI_VMODELS_HPP

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pprvari/logic.hpp"
#include "pprvari/ordered_map.hpp"

namespace pprvari::vm {

using logic::Formula;

enum class Variability { Mandatory, Optional };
enum class Group { None, Or, Alternative };

struct Feature {
  std::string id;
  std::string name;
  bool abstract = false;
  std::optional<std::string> parent;
  Variability variability = Variability::Mandatory;
  /// Applies to this feature's children.
  Group group = Group::None;
  OrderedMap<std::string, std::string> attributes;

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct FeatureModel {
  std::string model_id;
  std::string root;
  /// Stored in depth-first preorder.
  OrderedMap<std::string, Feature> features;
  std::vector<Formula> constraints;

  [[nodiscard]] std::vector<std::string> children(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> ancestors(const std::string& id) const;
  /// Features with no children.
  [[nodiscard]] std::vector<std::string> leaves() const;
  [[nodiscard]] std::vector<std::string> concrete() const;

  friend bool operator==(const FeatureModel&, const FeatureModel&) = default;
};

enum class RangeKind { Boolean, Enumeration };

struct Decision {
  std::string id;
  std::string question;
  RangeKind kind = RangeKind::Boolean;
  std::vector<std::string> options;
  Formula visibility = Formula::truth();
  std::vector<Formula> rules;

  [[nodiscard]] bool accepts(const std::string& value) const;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct DecisionModel {
  std::string model_id;
  OrderedMap<std::string, Decision> decisions;

  friend bool operator==(const DecisionModel&, const DecisionModel&) = default;
};

/// Cross-disciplinary constraint. A rule without an implication has lhs True.
struct CdcRule {
  Formula lhs = Formula::truth();
  Formula rhs = Formula::truth();

  [[nodiscard]] Formula formula() const;

  friend bool operator==(const CdcRule&, const CdcRule&) = default;
};

struct FmConfiguration {
  std::string model_id;
  std::set<std::string> selected;

  friend bool operator==(const FmConfiguration&, const FmConfiguration&) = default;
};

enum class Origin { Preset, User, Propagated };

[[nodiscard]] const char* to_string(Origin o);
[[nodiscard]] std::optional<Origin> parse_origin(std::string_view text);

struct DmAssignment {
  std::string decision;
  /// "true"/"false" for Boolean decisions, an option for enumerations.
  std::string value;
  Origin origin = Origin::User;
  std::size_t seq = 0;

  friend bool operator==(const DmAssignment&, const DmAssignment&) = default;
};

struct DmConfiguration {
  std::string model_id;
  std::string product_digest;
  std::vector<DmAssignment> assignments;

  [[nodiscard]] const DmAssignment* find(const std::string& decision) const;

  friend bool operator==(const DmConfiguration&, const DmConfiguration&) = default;
};

// semantics ---------------------------------------------------------------

[[nodiscard]] Formula fm_to_formula(const FeatureModel& fm);

/// Selection closed under ancestors. Throws std::invalid_argument on an
/// unknown feature.
[[nodiscard]] std::set<std::string> with_ancestors(const FeatureModel& fm, const std::set<std::string>& selected);

/// Total assignment: selected features (and their ancestors) true, rest false.
[[nodiscard]] logic::Assignment fm_assignment(const FeatureModel& fm, const std::set<std::string>& selected);

/// Empty when valid; otherwise one human-readable line per violated
/// structural rule or constraint. The selection is closed under ancestors.
[[nodiscard]] std::vector<std::string> validate_fm_config(const FeatureModel& fm, const FmConfiguration& cfg);

struct ConfigCount {
  std::size_t count = 0;
  bool truncated = false;
};

/// Satisfying assignments projected to concrete features.
[[nodiscard]] ConfigCount count_configurations(const FeatureModel& fm, std::size_t limit);

/// Enumeration encoding plus all rules: for decision X with options o,
/// X=o implies X, and X implies exactly one X=o.
[[nodiscard]] Formula dm_to_formula(const DecisionModel& dm);

/// Assignment of a DM configuration in the variable encoding of dm_to_formula.
[[nodiscard]] logic::Assignment dm_assignment(const DecisionModel& dm, const DmConfiguration& cfg);

/// References that do not name a feature, decision or option of the given models.
[[nodiscard]] std::vector<std::string> unresolved_refs(const std::vector<CdcRule>& cdcs, const FeatureModel& product_fm,
                                                       const DecisionModel& process_dm,
                                                       const FeatureModel& resource_fm);

[[nodiscard]] std::vector<std::string> unresolved_refs(const DecisionModel& dm);

// text formats --------------------------------------------------------------
// Readers throw SyntaxError with a 1-based position.

[[nodiscard]] FeatureModel fm_read(std::string_view text);
[[nodiscard]] std::string fm_write(const FeatureModel& fm);

[[nodiscard]] DecisionModel dm_read(std::string_view text);
[[nodiscard]] std::string dm_write(const DecisionModel& dm);

[[nodiscard]] std::vector<CdcRule> cdc_read(std::string_view text);
[[nodiscard]] std::string cdc_write(const std::vector<CdcRule>& cdcs);

[[nodiscard]] DmConfiguration dconfig_read(std::string_view text);
[[nodiscard]] std::string dconfig_write(const DmConfiguration& cfg);

/// "fnv1a64:<16 hex digits>" over the sorted selection joined by '\n'.
[[nodiscard]] std::string selection_digest(const std::set<std::string>& selected);

}  // namespace pprvari::vm

#endif  // PPRVARI_VMODELS_HPP
