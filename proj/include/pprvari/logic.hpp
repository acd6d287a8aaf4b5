// logic.hpp - propositional formulas, parsing, evaluation, CNF and SAT
#ifndef PPRVARI_LOGIC_HPP
#define PPRVARI_LOGIC_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pprvari::logic {

enum class Dialect { Ppr, Dm, Cdc };

enum class Kind { True, False, Var, VarEq, Not, And, Or, Implies };

/// Immutable propositional formula. Copies share structure.
class Formula {
 public:
  Formula();  // True

  static Formula truth();
  static Formula falsity();
  static Formula var(std::string name);
  static Formula var_eq(std::string name, std::string option);
  static Formula negate(Formula f);
  /// Zero children yield True, one child yields the child itself.
  static Formula conj(std::vector<Formula> children);
  /// Zero children yield False, one child yields the child itself.
  static Formula disj(std::vector<Formula> children);
  static Formula implies(Formula lhs, Formula rhs);

  [[nodiscard]] Kind kind() const;
  /// Variable name for Var and VarEq; empty otherwise.
  [[nodiscard]] const std::string& name() const;
  [[nodiscard]] const std::string& option() const;
  [[nodiscard]] const std::vector<Formula>& children() const;
  [[nodiscard]] const Formula& lhs() const { return children().at(0); }
  [[nodiscard]] const Formula& rhs() const { return children().at(1); }

  [[nodiscard]] bool is_literal() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Variable-name to value map. Enumeration tests `X == o` are looked up
/// under the key returned by option_key("X", "o").
using Assignment = std::map<std::string, bool>;

enum class Tri { False, True, Unknown };

[[nodiscard]] std::string option_key(std::string_view name, std::string_view option);

/// Splits "model#element"; model is empty when there is no '#'.
struct QualifiedRef {
  std::string model;
  std::string element;
  friend bool operator==(const QualifiedRef&, const QualifiedRef&) = default;
};
[[nodiscard]] QualifiedRef split_ref(std::string_view text);
[[nodiscard]] std::string join_ref(std::string_view model, std::string_view element);

[[nodiscard]] Formula parse_expr(std::string_view text, Dialect dialect);
[[nodiscard]] std::string to_string(const Formula& f, Dialect dialect = Dialect::Dm);

/// Assignment keys the formula reads, in order of first occurrence.
[[nodiscard]] std::vector<std::string> variables(const Formula& f);
/// Variable names (Var and VarEq names, without options), first occurrence order.
[[nodiscard]] std::vector<std::string> names(const Formula& f);

/// Renames every variable through fn (VarEq keeps its option).
template <typename Fn>
[[nodiscard]] Formula rename(const Formula& f, const Fn& fn);

[[nodiscard]] Tri eval_partial(const Formula& f, const Assignment& a);
/// Classical evaluation; throws std::invalid_argument on an unassigned variable.
[[nodiscard]] bool eval(const Formula& f, const Assignment& a);

inline constexpr std::string_view kAuxPrefix = "__t";

struct Cnf {
  std::vector<std::vector<int>> clauses;
  /// Index i (1-based) names var_names[i - 1].
  std::vector<std::string> var_names;
  std::unordered_map<std::string, int> var_table;

  int var(const std::string& name);
  /// Zero when unknown.
  [[nodiscard]] int lookup(const std::string& name) const;
  [[nodiscard]] std::size_t num_vars() const { return var_names.size(); }
};

/// Equisatisfiable structural CNF. Literal, clause-shaped and
/// implication-of-literal conjuncts are emitted directly.
[[nodiscard]] Cnf to_cnf(const Formula& f);
/// Conjoins f to an existing CNF.
void add_formula(Cnf& cnf, const Formula& f);

struct SatResult {
  bool satisfiable = false;
  /// Values for every non-auxiliary variable of the CNF.
  Assignment witness;
};

/// Throws std::invalid_argument when an assumption names an unknown variable.
[[nodiscard]] SatResult sat(const Cnf& cnf, const Assignment& assumptions = {});

struct Enumeration {
  std::vector<Assignment> models;
  bool truncated = false;
};

/// Projected models over vars in lexicographic order (false before true,
/// vars compared in the given order). Vars absent from the CNF are free.
[[nodiscard]] Enumeration enumerate_models(const Cnf& cnf, const std::vector<std::string>& vars,
                                           std::size_t limit, const Assignment& assumptions = {});

// ---------------------------------------------------------------------------

template <typename Fn>
Formula rename(const Formula& f, const Fn& fn) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Var:
      return Formula::var(fn(f.name()));
    case Kind::VarEq:
      return Formula::var_eq(fn(f.name()), f.option());
    case Kind::Not:
      return Formula::negate(rename(f.children()[0], fn));
    case Kind::Implies:
      return Formula::implies(rename(f.lhs(), fn), rename(f.rhs(), fn));
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(rename(c, fn));
      return f.kind() == Kind::And ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
  }
  return f;
}

}  // namespace pprvari::logic

#endif  // PPRVARI_LOGIC_HPP
