#include "oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace oracle {

using namespace pprvari;

std::vector<Assignment> all_assignments(const std::vector<std::string>& vars) {
  if (vars.size() > 20) throw std::invalid_argument("too many variables for brute force");
  std::vector<Assignment> out;
  for (unsigned long bits = 0; bits < (1UL << vars.size()); ++bits) {
    Assignment a;
    for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = ((bits >> i) & 1U) != 0;
    out.push_back(std::move(a));
  }
  return out;
}

bool brute_sat(const Formula& f) {
  for (const auto& a : all_assignments(logic::variables(f)))
    if (logic::eval(f, a)) return true;
  return false;
}

std::size_t brute_count(const Formula& f, const std::vector<std::string>& projection) {
  auto vars = logic::variables(f);
  std::set<std::vector<bool>> seen;
  std::size_t free_vars = 0;
  for (const auto& p : projection)
    if (std::find(vars.begin(), vars.end(), p) == vars.end()) ++free_vars;
  for (const auto& a : all_assignments(vars)) {
    if (!logic::eval(f, a)) continue;
    std::vector<bool> key;
    for (const auto& p : projection) {
      auto it = a.find(p);
      if (it != a.end()) key.push_back(it->second);
    }
    seen.insert(key);
  }
  return seen.size() << free_vars;
}

bool brute_fm_valid(const vm::FeatureModel& fm, const std::set<std::string>& selected) {
  if (fm.features.empty()) return selected.empty();
  if (!selected.count(fm.root)) return false;
  for (const auto& [id, f] : fm.features) {
    bool on = selected.count(id) != 0;
    if (on && f.parent && !selected.count(*f.parent)) return false;
    if (!on) continue;
    auto kids = fm.children(id);
    std::size_t n_on = 0;
    for (const auto& k : kids) {
      if (selected.count(k)) ++n_on;
      else if (f.group == vm::Group::None && fm.features.at(k).variability == vm::Variability::Mandatory) return false;
    }
    if (f.group == vm::Group::Or && !kids.empty() && n_on == 0) return false;
    if (f.group == vm::Group::Alternative && !kids.empty() && n_on != 1) return false;
  }
  Assignment a;
  for (const auto& [id, f] : fm.features) a[id] = selected.count(id) != 0;
  for (const auto& c : fm.constraints)
    if (!logic::eval(c, a)) return false;
  return true;
}

std::size_t brute_fm_count(const vm::FeatureModel& fm) {
  std::vector<std::string> ids;
  for (const auto& [id, f] : fm.features) ids.push_back(id);
  std::set<std::set<std::string>> seen;
  for (const auto& a : all_assignments(ids)) {
    std::set<std::string> sel;
    for (const auto& [k, v] : a)
      if (v) sel.insert(k);
    if (!brute_fm_valid(fm, sel)) continue;
    std::set<std::string> concrete;
    for (const auto& s : sel)
      if (!fm.features.at(s).abstract) concrete.insert(s);
    seen.insert(concrete);
  }
  return seen.size();
}

}  // namespace oracle
