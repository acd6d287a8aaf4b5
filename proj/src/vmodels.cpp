// vmodels.cpp - semantics of feature and decision models
#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "pprvari/vmodels.hpp"

namespace pprvari::vm {

std::vector<std::string> FeatureModel::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [fid, f] : features)
    if (f.parent && *f.parent == id) out.push_back(fid);
  return out;
}

std::vector<std::string> FeatureModel::ancestors(const std::string& id) const {
  std::vector<std::string> out;
  const Feature* f = features.find(id);
  while (f != nullptr && f->parent) {
    out.push_back(*f->parent);
    f = features.find(*f->parent);
  }
  return out;
}

std::vector<std::string> FeatureModel::leaves() const {
  std::set<std::string> parents;
  for (const auto& [id, f] : features)
    if (f.parent) parents.insert(*f.parent);
  std::vector<std::string> out;
  for (const auto& [id, f] : features)
    if (parents.count(id) == 0) out.push_back(id);
  return out;
}

std::vector<std::string> FeatureModel::concrete() const {
  std::vector<std::string> out;
  for (const auto& [id, f] : features)
    if (!f.abstract) out.push_back(id);
  return out;
}

bool Decision::accepts(const std::string& value) const {
  if (kind == RangeKind::Boolean) return value == "true" || value == "false";
  return std::find(options.begin(), options.end(), value) != options.end();
}

Formula CdcRule::formula() const {
  if (lhs.kind() == logic::Kind::True) return rhs;
  return Formula::implies(lhs, rhs);
}

const char* to_string(Origin o) {
  switch (o) {
    case Origin::Preset: return "preset";
    case Origin::User: return "user";
    case Origin::Propagated: return "propagated";
  }
  return "";
}

std::optional<Origin> parse_origin(std::string_view text) {
  if (text == "preset") return Origin::Preset;
  if (text == "user") return Origin::User;
  if (text == "propagated") return Origin::Propagated;
  return std::nullopt;
}

const DmAssignment* DmConfiguration::find(const std::string& decision) const {
  for (const auto& a : assignments)
    if (a.decision == decision) return &a;
  return nullptr;
}

namespace {

std::vector<Formula> vars_of(const std::vector<std::string>& ids) {
  std::vector<Formula> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(Formula::var(id));
  return out;
}

std::string join(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  return out;
}

}  // namespace

Formula fm_to_formula(const FeatureModel& fm) {
  if (fm.root.empty()) return Formula::conj(fm.constraints);
  std::vector<Formula> parts{Formula::var(fm.root)};
  for (const auto& [id, f] : fm.features) {
    if (!f.parent) continue;
    const Feature& parent = fm.features.at(*f.parent);
    parts.push_back(Formula::implies(Formula::var(id), Formula::var(*f.parent)));
    if (parent.group == Group::None && f.variability == Variability::Mandatory)
      parts.push_back(Formula::implies(Formula::var(*f.parent), Formula::var(id)));
  }
  for (const auto& [id, f] : fm.features) {
    if (f.group == Group::None) continue;
    auto kids = fm.children(id);
    if (kids.empty()) continue;
    parts.push_back(Formula::implies(Formula::var(id), Formula::disj(vars_of(kids))));
    if (f.group == Group::Alternative) {
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j)
          parts.push_back(Formula::negate(Formula::conj({Formula::var(kids[i]), Formula::var(kids[j])})));
    }
  }
  for (const auto& c : fm.constraints) parts.push_back(c);
  return Formula::conj(std::move(parts));
}

std::set<std::string> with_ancestors(const FeatureModel& fm, const std::set<std::string>& selected) {
  std::set<std::string> out;
  for (const auto& id : selected) {
    if (!fm.features.contains(id)) throw std::invalid_argument("unknown feature '" + id + "'");
    out.insert(id);
    for (const auto& a : fm.ancestors(id)) out.insert(a);
  }
  return out;
}

logic::Assignment fm_assignment(const FeatureModel& fm, const std::set<std::string>& selected) {
  auto closed = with_ancestors(fm, selected);
  logic::Assignment a;
  for (const auto& [id, f] : fm.features) a[id] = closed.count(id) != 0;
  return a;
}

std::vector<std::string> validate_fm_config(const FeatureModel& fm, const FmConfiguration& cfg) {
  auto a = fm_assignment(fm, cfg.selected);
  std::vector<std::string> out;
  if (fm.root.empty()) {
    if (!cfg.selected.empty()) out.push_back("model has no features");
  } else if (!a.at(fm.root)) {
    out.push_back("root feature '" + fm.root + "' is not selected");
  }
  for (const auto& [id, f] : fm.features) {
    if (!a.at(id)) continue;
    auto kids = fm.children(id);
    if (f.group == Group::None) {
      for (const auto& k : kids)
        if (fm.features.at(k).variability == Variability::Mandatory && !a.at(k))
          out.push_back("mandatory feature '" + k + "' of '" + id + "' is not selected");
      continue;
    }
    if (kids.empty()) continue;
    std::size_t n = std::count_if(kids.begin(), kids.end(), [&](const std::string& k) { return a.at(k); });
    if (f.group == Group::Alternative && n != 1)
      out.push_back("alternative group of '" + id + "' requires exactly one of [" + join(kids) + "], found " +
                    std::to_string(n));
    if (f.group == Group::Or && n == 0)
      out.push_back("or group of '" + id + "' requires at least one of [" + join(kids) + "]");
  }
  for (const auto& c : fm.constraints) {
    if (logic::eval_partial(c, a) != logic::Tri::True)
      out.push_back("constraint violated: " + logic::to_string(c, logic::Dialect::Dm));
  }
  return out;
}

ConfigCount count_configurations(const FeatureModel& fm, std::size_t limit) {
  auto cnf = logic::to_cnf(fm_to_formula(fm));
  auto e = logic::enumerate_models(cnf, fm.concrete(), limit);
  return {e.models.size(), e.truncated};
}

Formula dm_to_formula(const DecisionModel& dm) {
  std::vector<Formula> parts;
  for (const auto& [id, d] : dm.decisions) {
    if (d.kind != RangeKind::Enumeration) continue;
    std::vector<Formula> opts;
    for (const auto& o : d.options) {
      opts.push_back(Formula::var_eq(id, o));
      parts.push_back(Formula::implies(Formula::var_eq(id, o), Formula::var(id)));
    }
    parts.push_back(Formula::implies(Formula::var(id), Formula::disj(opts)));
    for (std::size_t i = 0; i < opts.size(); ++i)
      for (std::size_t j = i + 1; j < opts.size(); ++j) parts.push_back(Formula::negate(Formula::conj({opts[i], opts[j]})));
  }
  for (const auto& [id, d] : dm.decisions)
    for (const auto& r : d.rules) parts.push_back(r);
  return Formula::conj(std::move(parts));
}

logic::Assignment dm_assignment(const DecisionModel& dm, const DmConfiguration& cfg) {
  logic::Assignment a;
  for (const auto& asg : cfg.assignments) {
    const Decision* d = dm.decisions.find(asg.decision);
    if (d == nullptr) continue;
    if (d->kind == RangeKind::Boolean) {
      a[asg.decision] = asg.value == "true";
      continue;
    }
    a[asg.decision] = true;
    for (const auto& o : d->options) a[logic::option_key(asg.decision, o)] = o == asg.value;
  }
  return a;
}

namespace {

void check_dm_ref(const DecisionModel& dm, const Formula& f, const std::string& prefix, std::vector<std::string>& out) {
  switch (f.kind()) {
    case logic::Kind::Var:
    case logic::Kind::VarEq: {
      auto ref = logic::split_ref(f.name());
      const Decision* d = dm.decisions.find(ref.element);
      bool ok = d != nullptr;
      if (ok && f.kind() == logic::Kind::VarEq)
        ok = d->kind == RangeKind::Enumeration &&
             std::find(d->options.begin(), d->options.end(), f.option()) != d->options.end();
      if (!ok) {
        std::string r = prefix + ref.element + (f.kind() == logic::Kind::VarEq ? " == " + f.option() : "");
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
      }
      break;
    }
    default:
      for (const auto& c : f.children()) check_dm_ref(dm, c, prefix, out);
  }
}

void check_cdc_ref(const Formula& f, const FeatureModel& pfm, const DecisionModel& dm, const FeatureModel& rfm,
                   std::vector<std::string>& out) {
  switch (f.kind()) {
    case logic::Kind::Var:
    case logic::Kind::VarEq: {
      auto ref = logic::split_ref(f.name());
      bool ok = false;
      if (ref.model == dm.model_id && !dm.model_id.empty()) {
        std::vector<std::string> local;
        Formula inner = f.kind() == logic::Kind::Var ? Formula::var(ref.element) : Formula::var_eq(ref.element, f.option());
        check_dm_ref(dm, inner, "", local);
        ok = local.empty();
      } else if (f.kind() == logic::Kind::Var && ref.model == pfm.model_id && !pfm.model_id.empty()) {
        ok = pfm.features.contains(ref.element);
      } else if (f.kind() == logic::Kind::Var && ref.model == rfm.model_id && !rfm.model_id.empty()) {
        ok = rfm.features.contains(ref.element);
      }
      if (!ok) {
        std::string r = f.name() + (f.kind() == logic::Kind::VarEq ? " == " + f.option() : "");
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
      }
      break;
    }
    default:
      for (const auto& c : f.children()) check_cdc_ref(c, pfm, dm, rfm, out);
  }
}

}  // namespace

std::vector<std::string> unresolved_refs(const std::vector<CdcRule>& cdcs, const FeatureModel& product_fm,
                                         const DecisionModel& process_dm, const FeatureModel& resource_fm) {
  std::vector<std::string> out;
  for (const auto& r : cdcs) check_cdc_ref(r.formula(), product_fm, process_dm, resource_fm, out);
  return out;
}

std::vector<std::string> unresolved_refs(const DecisionModel& dm) {
  std::vector<std::string> out;
  for (const auto& [id, d] : dm.decisions) {
    check_dm_ref(dm, d.visibility, "", out);
    for (const auto& r : d.rules) check_dm_ref(dm, r, "", out);
  }
  return out;
}

std::string selection_digest(const std::set<std::string>& selected) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  bool first = true;
  for (const auto& s : selected) {
    if (!first) {
      h ^= static_cast<unsigned char>('\n');
      h *= 0x100000001b3ULL;
    }
    first = false;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  static const char* kHex = "0123456789abcdef";
  std::string out = "fnv1a64:";
  for (int shift = 60; shift >= 0; shift -= 4) out += kHex[(h >> shift) & 0xF];
  return out;
}

}  // namespace pprvari::vm
