// transform.hpp - PPR model to feature/decision models, CDCs and statistics
#ifndef PPRVARI_TRANSFORM_HPP
#define PPRVARI_TRANSFORM_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pprvari/diagnostic.hpp"
#include "pprvari/ppr.hpp"
#include "pprvari/vmodels.hpp"

namespace pprvari::transform {

struct TransformOutput {
  vm::FeatureModel product_fm;
  vm::DecisionModel process_dm;
  vm::FeatureModel resource_fm;
  std::vector<vm::CdcRule> cdcs;
  std::vector<Diagnostic> warnings;
};

/// Thrown when the input model does not validate.
class TransformError : public std::runtime_error {
 public:
  explicit TransformError(std::vector<Diagnostic> diagnostics);
  [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

[[nodiscard]] std::string product_model_id(const ppr::PprModel& m);
[[nodiscard]] std::string process_model_id(const ppr::PprModel& m);
[[nodiscard]] std::string resource_model_id(const ppr::PprModel& m);

// The four derivations expect a validated, normalized model.
[[nodiscard]] vm::FeatureModel to_product_fm(const ppr::PprModel& m, std::vector<Diagnostic>* warnings = nullptr);
[[nodiscard]] vm::DecisionModel to_process_dm(const ppr::PprModel& m);
[[nodiscard]] vm::FeatureModel to_resource_fm(const ppr::PprModel& m);
[[nodiscard]] std::vector<vm::CdcRule> derive_cdcs(const ppr::PprModel& m, const TransformOutput& out);

/// Validates, normalizes and derives all artifacts.
[[nodiscard]] TransformOutput transform(const ppr::PprModel& m);

/// Alternative-group parent of a product component, or empty.
[[nodiscard]] std::string alternative_parent(const vm::FeatureModel& product_fm, const std::string& feature);

struct FmStats {
  std::size_t n_features = 0;
  std::size_t n_xor = 0;
  std::size_t n_or = 0;
  std::size_t n_tree = 0;
  std::size_t tree_height = 0;
};

struct StatsReport {
  std::size_t n_products = 0;
  std::size_t n_product_components = 0;
  std::size_t n_processes = 0;
  std::size_t n_resources = 0;
  std::size_t n_constraints = 0;
  FmStats product_fm;
  std::size_t n_configs = 0;
  bool configs_truncated = false;
  std::size_t n_decisions = 0;
  std::size_t n_rules = 0;
  std::size_t n_visibility = 0;
  FmStats resource_fm;
  std::size_t n_cdc_rules = 0;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

inline constexpr std::size_t kDefaultConfigLimit = 100000;

[[nodiscard]] FmStats fm_stats(const vm::FeatureModel& fm);
[[nodiscard]] StatsReport model_statistics(const ppr::PprModel& m, const TransformOutput& out,
                                           std::size_t config_limit = kDefaultConfigLimit);

/// One "key value" line per field.
[[nodiscard]] std::string stats_text(const StatsReport& s);
/// Column layout of the usual artifact statistics table.
[[nodiscard]] std::string stats_table(const std::string& name, const StatsReport& s);

}  // namespace pprvari::transform

#endif  // PPRVARI_TRANSFORM_HPP
