// oracle.hpp - brute-force reference semantics for tests
#ifndef PPRVARI_TEST_ORACLE_HPP
#define PPRVARI_TEST_ORACLE_HPP

#include <set>
#include <string>
#include <vector>

#include "pprvari/logic.hpp"
#include "pprvari/vmodels.hpp"

namespace oracle {

using pprvari::logic::Assignment;
using pprvari::logic::Formula;

/// Every assignment over vars (2^n of them).
std::vector<Assignment> all_assignments(const std::vector<std::string>& vars);

bool brute_sat(const Formula& f);

/// Number of distinct restrictions to projection among the models of f.
/// Projection vars that f does not mention are free.
std::size_t brute_count(const Formula& f, const std::vector<std::string>& projection);

/// Feature-model semantics read directly off the tree.
bool brute_fm_valid(const pprvari::vm::FeatureModel& fm, const std::set<std::string>& selected);

/// Distinct concrete-feature projections of valid configurations.
std::size_t brute_fm_count(const pprvari::vm::FeatureModel& fm);

}  // namespace oracle

#endif
