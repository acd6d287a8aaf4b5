// ppr.hpp - PPR-DSL model, parser, writer and validator
#ifndef PPRVARI_PPR_HPP
#define PPRVARI_PPR_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pprvari/diagnostic.hpp"
#include "pprvari/logic.hpp"
#include "pprvari/ordered_map.hpp"

namespace pprvari::ppr {

enum class Category { Product, Process, Resource };

[[nodiscard]] const char* to_string(Category c);

enum class ValueType { String, Number, Boolean };

[[nodiscard]] const char* to_string(ValueType t);

struct Output {
  std::string label;
  std::string product;
  friend bool operator==(const Output&, const Output&) = default;
};

/// Shared shape of products, processes and resources. Fields that do not
/// apply to a category stay empty.
struct Unit {
  std::string id;
  std::string name;
  bool is_abstract = false;
  /// Products only: the part may be left out of its parent.
  bool is_optional = false;
  std::vector<std::string> implements;
  std::vector<std::string> required;
  std::vector<std::string> excluded;
  std::vector<std::string> children;
  std::vector<std::string> inputs;
  std::vector<Output> outputs;
  std::vector<std::string> resources;
  OrderedMap<std::string, std::string> attributes;
  int line = 0;
  int column = 0;

  /// Source position is not part of equality.
  friend bool operator==(const Unit& a, const Unit& b);
};

using Product = Unit;
using Process = Unit;
using Resource = Unit;

struct ConstraintDef {
  std::string id;
  std::vector<std::string> scope;
  logic::Formula expr;
  OrderedMap<std::string, std::string> attributes;
  int line = 0;
  int column = 0;

  friend bool operator==(const ConstraintDef& a, const ConstraintDef& b);
};

struct AttributeDef {
  std::string id;
  std::string description;
  std::string default_value;
  ValueType value_type = ValueType::String;
  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct PprModel {
  /// Prefix for derived model ids, e.g. "shiftfork" -> "shiftfork_product".
  std::string name = "model";
  OrderedMap<std::string, Product> products;
  OrderedMap<std::string, Process> processes;
  OrderedMap<std::string, Resource> resources;
  OrderedMap<std::string, ConstraintDef> constraints;
  OrderedMap<std::string, AttributeDef> attribute_defs;

  friend bool operator==(const PprModel&, const PprModel&) = default;
};

struct ParseResult {
  std::optional<PprModel> model;
  std::vector<Diagnostic> diagnostics;
};

[[nodiscard]] ParseResult parse_ppr(std::string_view text, std::string name = "model");
[[nodiscard]] std::string write_ppr(const PprModel& model);

/// Empty iff every model invariant holds.
[[nodiscard]] std::vector<Diagnostic> validate_model(const PprModel& model);

/// Materializes symmetric excludes (B excludes A whenever A excludes B).
[[nodiscard]] PprModel normalize_model(PprModel model);

/// Throws std::invalid_argument when a scope variable is unassigned.
[[nodiscard]] bool eval_constraint(const ConstraintDef& c, const std::map<std::string, bool>& assignment);

[[nodiscard]] const OrderedMap<std::string, Unit>& units(const PprModel& model, Category c);
[[nodiscard]] OrderedMap<std::string, Unit>& units(PprModel& model, Category c);
[[nodiscard]] std::optional<Category> category_of(const PprModel& model, const std::string& id);

/// Concrete units transitively implementing abstract_id, in declaration
/// order. Throws std::invalid_argument for unknown or concrete ids.
[[nodiscard]] std::vector<std::string> concrete_members(const PprModel& model, const std::string& abstract_id);
[[nodiscard]] std::vector<std::string> concrete_members(const PprModel& model, Category c,
                                                        const std::string& abstract_id);

/// A product is intermediate when some process outputs it without also
/// consuming it; all other products are components.
[[nodiscard]] bool is_intermediate(const PprModel& model, const std::string& product_id);
[[nodiscard]] std::vector<std::string> component_ids(const PprModel& model);

}  // namespace pprvari::ppr

#endif  // PPRVARI_PPR_HPP
