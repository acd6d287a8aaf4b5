// transform.cpp - derivation of the three variability models and CDCs
#include "pprvari/transform.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pprvari::transform {

using logic::Formula;
using ppr::Category;
using ppr::PprModel;
using ppr::Unit;

TransformError::TransformError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid model" : format(diagnostics.front())),
      diagnostics_(std::move(diagnostics)) {}

std::string product_model_id(const PprModel& m) { return m.name + "_product"; }
std::string process_model_id(const PprModel& m) { return m.name + "_process"; }
std::string resource_model_id(const PprModel& m) { return m.name + "_resource"; }

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (!contains(v, s)) v.push_back(s);
}

// Rebuilds the feature map in depth-first preorder, children in insertion order.
void reorder_preorder(vm::FeatureModel& fm) {
  std::unordered_map<std::string, std::vector<std::string>> kids;
  for (const auto& [id, f] : fm.features)
    if (f.parent) kids[*f.parent].push_back(id);
  OrderedMap<std::string, vm::Feature> out;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    out.insert(id, fm.features.at(id));
    for (const auto& k : kids[id]) visit(k);
  };
  visit(fm.root);
  fm.features = std::move(out);
}

vm::Feature make_root(const std::string& id) {
  vm::Feature root;
  root.id = id;
  root.abstract = true;
  return root;
}

vm::Feature feature_of(const Unit& u, const std::string& parent) {
  vm::Feature f;
  f.id = u.id;
  f.name = u.name;
  f.abstract = u.is_abstract;
  f.parent = parent;
  f.attributes = u.attributes;
  return f;
}

// Features on a chain of mandatory edges from the root.
std::set<std::string> core_features(const vm::FeatureModel& fm) {
  std::set<std::string> core;
  if (fm.root.empty()) return core;
  core.insert(fm.root);
  for (const auto& [id, f] : fm.features) {
    if (!f.parent || core.count(*f.parent) == 0) continue;
    const auto& parent = fm.features.at(*f.parent);
    bool forced = parent.group == vm::Group::None && f.variability == vm::Variability::Mandatory;
    if (!forced && parent.group != vm::Group::None && fm.children(*f.parent).size() == 1) forced = true;
    if (forced) core.insert(id);
  }
  return core;
}

// requires -> implication, excludes -> negated implication, skipping edges
// that the tree already expresses.
void relation_constraints(const OrderedMap<std::string, Unit>& us, vm::FeatureModel& fm) {
  auto core = core_features(fm);
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& [id, u] : us) {
    if (!fm.features.contains(id)) continue;
    auto anc = fm.ancestors(id);
    for (const auto& r : u.required) {
      if (!fm.features.contains(r) || r == id) continue;
      if (contains(anc, r) || core.count(r) != 0) continue;
      fm.constraints.push_back(Formula::implies(Formula::var(id), Formula::var(r)));
    }
    for (const auto& e : u.excluded) {
      if (!fm.features.contains(e) || e == id) continue;
      auto key = std::minmax(id, e);
      if (!done.insert({key.first, key.second}).second) continue;
      const auto& fa = fm.features.at(id);
      const auto& fb = fm.features.at(e);
      if (fa.parent && fb.parent && *fa.parent == *fb.parent &&
          fm.features.at(*fa.parent).group == vm::Group::Alternative)
        continue;
      fm.constraints.push_back(Formula::implies(Formula::var(id), Formula::negate(Formula::var(e))));
    }
  }
}

bool all_in(const std::vector<std::string>& scope, const std::function<bool(const std::string&)>& pred) {
  return !scope.empty() && std::all_of(scope.begin(), scope.end(), pred);
}

}  // namespace

vm::FeatureModel to_product_fm(const PprModel& m, std::vector<Diagnostic>* warnings) {
  vm::FeatureModel fm;
  fm.model_id = product_model_id(m);
  fm.root = fm.model_id;
  fm.features.insert(fm.root, make_root(fm.root));

  auto comps = ppr::component_ids(m);
  std::unordered_set<std::string> is_comp(comps.begin(), comps.end());

  // parent assignment: children lists first, then a single implements target
  std::unordered_map<std::string, std::string> parent;
  std::unordered_map<std::string, bool> via_children;
  for (const auto& pid : comps)
    for (const auto& ch : m.products.at(pid).children)
      if (is_comp.count(ch) && ch != pid && !parent.count(ch)) {
        parent[ch] = pid;
        via_children[ch] = true;
      }
  for (const auto& id : comps) {
    if (parent.count(id)) continue;
    const Unit& u = m.products.at(id);
    if (u.implements.size() == 1 && is_comp.count(u.implements[0])) {
      parent[id] = u.implements[0];
      via_children[id] = false;
    } else {
      parent[id] = fm.root;
      via_children[id] = true;
    }
  }

  for (const auto& id : comps) {
    const Unit& u = m.products.at(id);
    vm::Feature f = feature_of(u, parent[id]);
    if (u.implements.size() > 1) {
      std::string joined;
      for (const auto& t : u.implements) joined += (joined.empty() ? "" : ",") + t;
      f.attributes.insert_or_assign("implements", joined);
      if (warnings != nullptr)
        warnings->push_back({Severity::Warning, u.line, u.column, id, "multiple-implements",
                             "product implements several parents; recorded as attribute 'implements'"});
    }
    fm.features.insert(id, std::move(f));
  }

  // groups and variability
  for (auto& [pid, pf] : fm.features) {
    std::vector<std::string> impl;
    std::vector<std::string> owned;
    for (const auto& id : comps) {
      if (parent[id] != pid) continue;
      (via_children[id] ? owned : impl).push_back(id);
    }
    auto set_var = [&](const std::string& id, vm::Variability v) { fm.features.at(id).variability = v; };
    auto plain = [&](const std::string& id) {
      set_var(id, m.products.at(id).is_optional ? vm::Variability::Optional : vm::Variability::Mandatory);
    };
    for (const auto& id : owned) plain(id);
    if (impl.empty()) continue;
    if (!owned.empty()) {
      for (const auto& id : impl) set_var(id, vm::Variability::Optional);
      continue;
    }
    if (impl.size() == 1) {
      plain(impl[0]);
      continue;
    }
    bool pairwise = pf.abstract;
    for (std::size_t i = 0; i < impl.size() && pairwise; ++i)
      for (std::size_t j = 0; j < impl.size() && pairwise; ++j)
        if (i != j && !contains(m.products.at(impl[i]).excluded, impl[j])) pairwise = false;
    pf.group = pairwise ? vm::Group::Alternative : vm::Group::Or;
    for (const auto& id : impl) set_var(id, vm::Variability::Optional);
  }
  reorder_preorder(fm);

  relation_constraints(m.products, fm);
  for (const auto& [cid, c] : m.constraints)
    if (all_in(c.scope, [&](const std::string& s) { return is_comp.count(s) != 0; })) fm.constraints.push_back(c.expr);
  return fm;
}

std::string alternative_parent(const vm::FeatureModel& product_fm, const std::string& feature) {
  const vm::Feature* f = product_fm.features.find(feature);
  if (f == nullptr || !f->parent) return {};
  const vm::Feature& p = product_fm.features.at(*f->parent);
  return p.group == vm::Group::Alternative ? p.id : std::string();
}

vm::DecisionModel to_process_dm(const PprModel& m) {
  auto fm = to_product_fm(m);
  vm::DecisionModel dm;
  dm.model_id = process_model_id(m);
  auto comps = ppr::component_ids(m);
  std::unordered_set<std::string> is_comp(comps.begin(), comps.end());

  // product atoms in DM vocabulary
  auto product_atom = [&](const std::string& pid) {
    std::string group = alternative_parent(fm, pid);
    return group.empty() ? Formula::var(pid) : Formula::var_eq(group, pid);
  };
  auto to_dm = [&](const Formula& f) {
    std::function<Formula(const Formula&)> map = [&](const Formula& g) -> Formula {
      switch (g.kind()) {
        case logic::Kind::Var: return product_atom(g.name());
        case logic::Kind::Not: return Formula::negate(map(g.children()[0]));
        case logic::Kind::Implies: return Formula::implies(map(g.lhs()), map(g.rhs()));
        case logic::Kind::And:
        case logic::Kind::Or: {
          std::vector<Formula> kids;
          for (const auto& c : g.children()) kids.push_back(map(c));
          return g.kind() == logic::Kind::And ? Formula::conj(kids) : Formula::disj(kids);
        }
        default: return g;
      }
    };
    return map(f);
  };

  for (const auto& pid : comps) {
    const Unit& u = m.products.at(pid);
    vm::Decision d;
    d.id = pid;
    d.visibility = Formula::falsity();
    const vm::Feature& f = fm.features.at(pid);
    if (u.is_abstract && f.group == vm::Group::Alternative) {
      d.kind = vm::RangeKind::Enumeration;
      d.options = fm.children(pid);
      d.question = "Which " + pid + " types?";
    } else {
      d.question = "Install " + pid + "?";
    }
    dm.decisions.insert(pid, std::move(d));
  }
  // product rules go to the decision of their leftmost variable
  for (const auto& c : fm.constraints) {
    auto vars = logic::names(c);
    if (vars.empty()) continue;
    std::string owner = alternative_parent(fm, vars.front());
    if (owner.empty()) owner = vars.front();
    if (auto* d = dm.decisions.find(owner)) d->rules.push_back(to_dm(c));
  }

  // producers of intermediate products
  std::unordered_map<std::string, std::vector<std::string>> producers;
  for (const auto& [qid, q] : m.processes)
    for (const auto& o : q.outputs)
      if (!is_comp.count(o.product) && !contains(q.inputs, o.product)) push_unique(producers[o.product], qid);

  for (const auto& [qid, q] : m.processes) {
    vm::Decision d;
    d.id = qid;
    d.question = "Install " + qid + "?";
    if (q.is_abstract) {
      d.visibility = Formula::falsity();
    } else {
      std::vector<Formula> atoms;
      auto add = [&](Formula f) {
        if (std::find(atoms.begin(), atoms.end(), f) == atoms.end()) atoms.push_back(std::move(f));
      };
      for (const auto& in : q.inputs) {
        if (is_comp.count(in)) {
          add(product_atom(in));
        } else {
          std::vector<Formula> alts;
          for (const auto& p : producers[in]) alts.push_back(Formula::var(p));
          if (!alts.empty()) add(Formula::disj(alts));
        }
      }
      for (const auto& r : q.required)
        if (m.processes.contains(r) && r != qid) add(Formula::var(r));
      // requires inherited from abstract ancestors
      std::vector<std::string> todo = q.implements;
      std::set<std::string> seen;
      for (std::size_t i = 0; i < todo.size(); ++i) {
        const Unit* a = m.processes.find(todo[i]);
        if (a == nullptr || !seen.insert(todo[i]).second) continue;
        if (a->is_abstract)
          for (const auto& r : a->required)
            if (m.processes.contains(r) && r != qid) add(Formula::var(r));
        todo.insert(todo.end(), a->implements.begin(), a->implements.end());
      }
      d.visibility = Formula::conj(std::move(atoms));
    }
    for (const auto& a : q.implements) {
      const Unit* parent = m.processes.find(a);
      if (parent != nullptr && parent->is_abstract)
        d.rules.push_back(Formula::implies(Formula::var(qid), Formula::var(a)));
    }
    dm.decisions.insert(qid, std::move(d));
  }
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& [qid, q] : m.processes) {
    for (const auto& e : q.excluded) {
      if (!m.processes.contains(e) || e == qid) continue;
      auto key = std::minmax(qid, e);
      if (!done.insert({key.first, key.second}).second) continue;
      dm.decisions.at(qid).rules.push_back(Formula::implies(Formula::var(qid), Formula::negate(Formula::var(e))));
    }
  }
  return dm;
}

vm::FeatureModel to_resource_fm(const PprModel& m) {
  vm::FeatureModel fm;
  fm.model_id = resource_model_id(m);
  fm.root = fm.model_id;
  fm.features.insert(fm.root, make_root(fm.root));
  std::unordered_map<std::string, std::string> parent;
  for (const auto& [id, u] : m.resources) {
    bool nested = u.implements.size() == 1 && m.resources.contains(u.implements[0]) && u.implements[0] != id;
    parent[id] = nested ? u.implements[0] : fm.root;
  }
  for (const auto& [id, u] : m.resources) fm.features.insert(id, feature_of(u, parent[id]));
  for (auto& [pid, pf] : fm.features) {
    std::vector<std::string> kids;
    for (const auto& [id, u] : m.resources)
      if (parent[id] == pid) kids.push_back(id);
    if (kids.empty()) continue;
    if (pid == fm.root) {
      for (const auto& k : kids) fm.features.at(k).variability = vm::Variability::Optional;
    } else if (kids.size() == 1) {
      fm.features.at(kids[0]).variability = vm::Variability::Mandatory;
    } else {
      pf.group = vm::Group::Or;
      for (const auto& k : kids) fm.features.at(k).variability = vm::Variability::Optional;
    }
  }
  reorder_preorder(fm);
  relation_constraints(m.resources, fm);
  for (const auto& [cid, c] : m.constraints)
    if (all_in(c.scope, [&](const std::string& s) { return m.resources.contains(s); })) fm.constraints.push_back(c.expr);
  return fm;
}

std::vector<vm::CdcRule> derive_cdcs(const PprModel& m, const TransformOutput& out) {
  const std::string pm = out.product_fm.model_id;
  const std::string dm = out.process_dm.model_id;
  const std::string rm = out.resource_fm.model_id;
  auto ref = [](const std::string& model, const std::string& id) { return Formula::var(logic::join_ref(model, id)); };
  std::vector<vm::CdcRule> cdcs;
  auto comps = ppr::component_ids(m);
  std::unordered_set<std::string> is_comp(comps.begin(), comps.end());

  for (const auto& pid : comps)
    if (!m.products.at(pid).is_abstract) cdcs.push_back({ref(pm, pid), ref(dm, pid)});
  for (const auto& pid : comps) {
    if (m.products.at(pid).is_abstract) continue;
    for (const auto& [qid, q] : m.processes)
      if (!q.is_abstract && contains(q.inputs, pid)) cdcs.push_back({ref(pm, pid), ref(dm, qid)});
  }
  for (const auto& [qid, q] : m.processes)
    for (const auto& r : q.resources)
      if (m.resources.contains(r)) cdcs.push_back({ref(dm, qid), ref(rm, r)});
  for (const auto& [cid, c] : m.constraints) {
    bool ok = true;
    for (const auto& s : logic::names(c.expr)) {
      if (m.products.contains(s) && !is_comp.count(s)) ok = false;
      if (!ppr::category_of(m, s)) ok = false;
    }
    if (!ok) continue;
    Formula q = logic::rename(c.expr, [&](const std::string& s) {
      if (is_comp.count(s)) return logic::join_ref(pm, s);
      if (m.processes.contains(s)) return logic::join_ref(dm, s);
      return logic::join_ref(rm, s);
    });
    if (q.kind() == logic::Kind::Implies) cdcs.push_back({q.lhs(), q.rhs()});
    else cdcs.push_back({Formula::truth(), q});
  }
  return cdcs;
}

TransformOutput transform(const PprModel& input) {
  auto diags = ppr::validate_model(input);
  if (has_errors(diags)) throw TransformError(std::move(diags));
  PprModel m = ppr::normalize_model(input);
  TransformOutput out;
  out.product_fm = to_product_fm(m, &out.warnings);
  out.process_dm = to_process_dm(m);
  out.resource_fm = to_resource_fm(m);
  out.cdcs = derive_cdcs(m, out);
  return out;
}

FmStats fm_stats(const vm::FeatureModel& fm) {
  FmStats s;
  s.n_features = fm.features.size();
  std::unordered_map<std::string, std::size_t> depth;
  for (const auto& [id, f] : fm.features) {
    if (f.group == vm::Group::Alternative) ++s.n_xor;
    if (f.group == vm::Group::Or) ++s.n_or;
    if (f.parent) {
      ++s.n_tree;
      depth[id] = depth[*f.parent] + 1;
      s.tree_height = std::max(s.tree_height, depth[id]);
    } else {
      depth[id] = 0;
    }
  }
  return s;
}

StatsReport model_statistics(const PprModel& m, const TransformOutput& out, std::size_t config_limit) {
  StatsReport s;
  s.n_products = m.products.size();
  s.n_product_components = ppr::component_ids(m).size();
  s.n_processes = m.processes.size();
  s.n_resources = m.resources.size();
  s.n_constraints = m.constraints.size();
  for (Category c : {Category::Product, Category::Process, Category::Resource})
    for (const auto& [id, u] : ppr::units(m, c)) s.n_constraints += u.required.size() + u.excluded.size();
  s.product_fm = fm_stats(out.product_fm);
  auto count = vm::count_configurations(out.product_fm, config_limit);
  s.n_configs = count.count;
  s.configs_truncated = count.truncated;
  s.n_decisions = out.process_dm.decisions.size();
  for (const auto& [id, d] : out.process_dm.decisions) {
    s.n_rules += d.rules.size();
    auto k = d.visibility.kind();
    if (k != logic::Kind::True && k != logic::Kind::False) ++s.n_visibility;
  }
  s.resource_fm = fm_stats(out.resource_fm);
  s.n_cdc_rules = out.cdcs.size();
  return s;
}

std::string stats_text(const StatsReport& s) {
  std::ostringstream os;
  os << "ppr.n_products " << s.n_products << "\n"
     << "ppr.n_product_components " << s.n_product_components << "\n"
     << "ppr.n_processes " << s.n_processes << "\n"
     << "ppr.n_resources " << s.n_resources << "\n"
     << "ppr.n_constraints " << s.n_constraints << "\n"
     << "product_fm.n_features " << s.product_fm.n_features << "\n"
     << "product_fm.n_xor " << s.product_fm.n_xor << "\n"
     << "product_fm.n_or " << s.product_fm.n_or << "\n"
     << "product_fm.n_tree " << s.product_fm.n_tree << "\n"
     << "product_fm.tree_height " << s.product_fm.tree_height << "\n"
     << "product_fm.n_configs " << s.n_configs << (s.configs_truncated ? "+" : "") << "\n"
     << "process_dm.n_decisions " << s.n_decisions << "\n"
     << "process_dm.n_rules " << s.n_rules << "\n"
     << "process_dm.n_visibility " << s.n_visibility << "\n"
     << "resource_fm.n_features " << s.resource_fm.n_features << "\n"
     << "resource_fm.n_xor " << s.resource_fm.n_xor << "\n"
     << "resource_fm.n_or " << s.resource_fm.n_or << "\n"
     << "resource_fm.n_tree " << s.resource_fm.n_tree << "\n"
     << "resource_fm.tree_height " << s.resource_fm.tree_height << "\n"
     << "cdc.n_rules " << s.n_cdc_rules << "\n";
  return os.str();
}

std::string stats_table(const std::string& name, const StatsReport& s) {
  struct Col {
    std::string head;
    std::string value;
  };
  auto n = [](std::size_t v) { return std::to_string(v); };
  std::vector<Col> cols{
      {"Model", name},
      {"#Products", n(s.n_products)},
      {"#Components", n(s.n_product_components)},
      {"#Processes", n(s.n_processes)},
      {"#Resources", n(s.n_resources)},
      {"#Constraints", n(s.n_constraints)},
      {"PFM#Features", n(s.product_fm.n_features)},
      {"PFM#XOR", n(s.product_fm.n_xor)},
      {"PFM#OR", n(s.product_fm.n_or)},
      {"PFM#Tree", n(s.product_fm.n_tree)},
      {"PFM#Height", n(s.product_fm.tree_height)},
      {"PFM#Configs", n(s.n_configs) + (s.configs_truncated ? "+" : "")},
      {"DM#Decisions", n(s.n_decisions)},
      {"DM#Rules", n(s.n_rules)},
      {"DM#Vis", n(s.n_visibility)},
      {"RFM#Features", n(s.resource_fm.n_features)},
      {"RFM#XOR", n(s.resource_fm.n_xor)},
      {"RFM#OR", n(s.resource_fm.n_or)},
      {"RFM#Tree", n(s.resource_fm.n_tree)},
      {"RFM#Height", n(s.resource_fm.tree_height)},
      {"#CDCs", n(s.n_cdc_rules)},
  };
  std::string head;
  std::string row;
  for (const auto& c : cols) {
    std::size_t w = std::max(c.head.size(), c.value.size());
    head += c.head + std::string(w - c.head.size() + 2, ' ');
    row += c.value + std::string(w - c.value.size() + 2, ' ');
  }
  auto rtrim = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  return rtrim(head) + "\n" + rtrim(row) + "\n";
}

}  // namespace pprvari::transform
