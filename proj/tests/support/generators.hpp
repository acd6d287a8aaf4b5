// generators.hpp - seeded random formulas, feature models, PPR models and sessions
#ifndef PPRVARI_TEST_GENERATORS_HPP
#define PPRVARI_TEST_GENERATORS_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pprvari/engine.hpp"
#include "pprvari/logic.hpp"
#include "pprvari/vmodels.hpp"

namespace gen {

using Rng = std::mt19937_64;

std::vector<std::string> var_names(std::size_t n, const std::string& prefix = "x");

pprvari::logic::Formula random_formula(Rng& rng, const std::vector<std::string>& vars, int depth);

/// Tree of n_features features with random groups plus n_constraints
/// cross-tree constraints.
pprvari::vm::FeatureModel random_fm(Rng& rng, std::size_t n_features, std::size_t n_constraints);

struct GeneratedPpr {
  std::string text;
  /// Bookkeeping done by the generator itself.
  std::size_t components = 0;
  std::size_t processes = 0;
  std::size_t resources = 0;
};

/// A valid PPR model in DSL text. Every concrete process consumes at most one
/// component and only requires processes with no input or the same input.
GeneratedPpr random_ppr(Rng& rng);

/// Transformed random_ppr model whose product model has a configuration.
std::shared_ptr<const pprvari::engine::Workspace> random_workspace(Rng& rng, std::string* text = nullptr);

/// Uniform pick among valid product configurations (all features), or empty
/// when the product model is void.
std::optional<std::set<std::string>> random_product_config(Rng& rng, const pprvari::vm::FeatureModel& fm);

struct DrivenSession {
  std::vector<std::pair<std::string, std::string>> user_decisions;
  std::set<std::string> product;
  /// Property failures seen while driving; empty means all held.
  std::vector<std::string> failures;
  bool done = false;
};

/// Drives a session through all stages with random choices, checking the
/// take/rollback identity on the way.
DrivenSession drive_session(Rng& rng, pprvari::engine::StagedSession& s);

}  // namespace gen

#endif
