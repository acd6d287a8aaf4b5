// engine.cpp - staged configuration session
#include "pprvari/engine.hpp"

#include <algorithm>

namespace pprvari::engine {

using logic::Formula;
using logic::Kind;
using logic::Tri;

BigInt factorial(std::size_t n) {
  BigInt out = 1;
  for (std::size_t i = 2; i <= n; ++i) out *= i;
  return out;
}

BigInt permutations(std::size_t n, std::size_t r) {
  if (r > n) throw std::invalid_argument("r must not exceed n");
  BigInt out = 1;
  for (std::size_t i = n - r + 1; i <= n; ++i) out *= i;
  return out;
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Product: return "product";
    case Stage::Process: return "process";
    case Stage::Resource: return "resource";
    case Stage::Done: return "done";
  }
  return "";
}

std::optional<Stage> parse_stage(const std::string& s) {
  for (Stage st : {Stage::Product, Stage::Process, Stage::Resource, Stage::Done})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string stage_error(Stage have, Stage want) {
  return std::string("operation requires stage ") + to_string(want) + ", session is at " + to_string(have);
}

bool is_assigned(const vm::DmConfiguration& cfg, const std::string& id) { return cfg.find(id) != nullptr; }

// Every variable of f belongs to the given model.
bool all_in_model(const Formula& f, const std::string& model) {
  auto ns = logic::names(f);
  return !ns.empty() && std::all_of(ns.begin(), ns.end(), [&](const std::string& n) {
    return logic::split_ref(n).model == model;
  });
}

void add_subtree(const vm::FeatureModel& fm, const std::string& id, std::set<std::string>& out) {
  out.insert(id);
  for (const auto& k : fm.children(id)) add_subtree(fm, k, out);
}

}  // namespace

StagedSession::StagedSession(std::shared_ptr<const Workspace> ws) : ws_(std::move(ws)) {
  if (!ws_) throw WorkspaceError("no workspace");
  auto errors = consistency_errors(*ws_);
  if (!errors.empty()) throw WorkspaceError("inconsistent workspace: " + errors.front(), errors);
  product_cfg_.model_id = ws_->out.product_fm.model_id;
  process_cfg_.model_id = ws_->out.process_dm.model_id;
  resource_cfg_.model_id = ws_->out.resource_fm.model_id;
}

bool StagedSession::is_product_decision(const std::string& id) const {
  const auto& fm = ws_->out.product_fm;
  return fm.features.contains(id) && id != fm.root;
}

std::size_t StagedSession::next_seq() const {
  return process_cfg_.assignments.empty() ? 1 : process_cfg_.assignments.back().seq + 1;
}

logic::Assignment StagedSession::process_assignment() const {
  return vm::dm_assignment(ws_->out.process_dm, process_cfg_);
}

std::vector<std::string> StagedSession::set_product_config(const std::set<std::string>& selected) {
  if (stage_ != Stage::Product) return {stage_error(stage_, Stage::Product)};
  const auto& fm = ws_->out.product_fm;
  std::vector<std::string> unknown;
  for (const auto& id : selected)
    if (!fm.features.contains(id)) unknown.push_back("unknown feature '" + id + "'");
  if (!unknown.empty()) return unknown;
  vm::FmConfiguration cfg{fm.model_id, vm::with_ancestors(fm, selected)};
  auto violations = vm::validate_fm_config(fm, cfg);
  if (!violations.empty()) return violations;

  product_cfg_ = std::move(cfg);
  process_cfg_ = vm::DmConfiguration{ws_->out.process_dm.model_id, vm::selection_digest(product_cfg_.selected), {}};
  // presets: every product decision follows the product configuration
  std::size_t seq = 1;
  for (const auto& [id, d] : ws_->out.process_dm.decisions) {
    if (!is_product_decision(id)) continue;
    if (d.kind == vm::RangeKind::Enumeration) {
      for (const auto& o : d.options) {
        if (product_cfg_.selected.count(o) != 0) {
          process_cfg_.assignments.push_back({id, o, vm::Origin::Preset, seq++});
          break;
        }
      }
    } else {
      process_cfg_.assignments.push_back(
          {id, product_cfg_.selected.count(id) != 0 ? "true" : "false", vm::Origin::Preset, seq++});
    }
  }
  stage_ = Stage::Process;
  metrics_.reset();
  return {};
}

std::vector<std::string> StagedSession::visible_decisions() const {
  std::vector<std::string> out;
  if (stage_ != Stage::Process) return out;
  auto a = process_assignment();
  for (const auto& [id, d] : ws_->out.process_dm.decisions) {
    if (is_assigned(process_cfg_, id)) continue;
    if (logic::eval_partial(d.visibility, a) == Tri::True) out.push_back(id);
  }
  return out;
}

// Applies rules whose antecedent holds and whose consequent is a single
// positive literal, until nothing changes.
std::vector<vm::DmAssignment> StagedSession::propagate(vm::DmConfiguration& cfg) const {
  const auto& dm = ws_->out.process_dm;
  std::vector<vm::DmAssignment> added;
  bool changed = true;
  while (changed) {
    changed = false;
    auto a = vm::dm_assignment(dm, cfg);
    for (const auto& [id, d] : dm.decisions) {
      for (const auto& rule : d.rules) {
        Formula lhs = Formula::truth();
        Formula rhs = rule;
        if (rule.kind() == Kind::Implies) {
          lhs = rule.lhs();
          rhs = rule.rhs();
        }
        if (rhs.kind() != Kind::Var && rhs.kind() != Kind::VarEq) continue;
        const vm::Decision* target = dm.decisions.find(rhs.name());
        if (target == nullptr || is_assigned(cfg, rhs.name())) continue;
        std::string value;
        if (rhs.kind() == Kind::Var && target->kind == vm::RangeKind::Boolean) value = "true";
        else if (rhs.kind() == Kind::VarEq && target->accepts(rhs.option())) value = rhs.option();
        else continue;
        if (logic::eval_partial(lhs, a) != Tri::True) continue;
        std::size_t seq = cfg.assignments.empty() ? 1 : cfg.assignments.back().seq + 1;
        vm::DmAssignment asg{rhs.name(), value, vm::Origin::Propagated, seq};
        cfg.assignments.push_back(asg);
        added.push_back(asg);
        a = vm::dm_assignment(dm, cfg);
        changed = true;
      }
    }
  }
  return added;
}

std::vector<std::string> StagedSession::rule_violations(const vm::DmConfiguration& cfg, bool complete) const {
  const auto& dm = ws_->out.process_dm;
  auto a = vm::dm_assignment(dm, cfg);
  if (complete) {
    for (const auto& [id, d] : dm.decisions) {
      if (a.count(id)) continue;
      a[id] = false;
      for (const auto& o : d.options) a[logic::option_key(id, o)] = false;
    }
  }
  std::vector<std::string> out;
  for (const auto& [id, d] : dm.decisions)
    for (const auto& r : d.rules)
      if (logic::eval_partial(r, a) == Tri::False) out.push_back("rule of " + id + " violated: " + logic::to_string(r));
  return out;
}

std::vector<vm::DmAssignment> StagedSession::take_decision(const std::string& id, const std::string& value) {
  if (stage_ != Stage::Process) throw EngineError(ErrorKind::Stage, stage_error(stage_, Stage::Process));
  const vm::Decision* d = ws_->out.process_dm.decisions.find(id);
  if (d == nullptr) throw EngineError(ErrorKind::Unknown, "unknown decision '" + id + "'");
  auto vis = visible_decisions();
  if (std::find(vis.begin(), vis.end(), id) == vis.end())
    throw EngineError(ErrorKind::NotVisible, "decision '" + id + "' is not visible");
  if (!d->accepts(value)) throw EngineError(ErrorKind::Range, "value '" + value + "' is outside the range of '" + id + "'");
  vm::DmConfiguration next = process_cfg_;
  next.assignments.push_back({id, value, vm::Origin::User, next_seq()});
  auto added = propagate(next);
  auto violations = rule_violations(next, false);
  if (!violations.empty())
    throw EngineError(ErrorKind::Violation, "decision '" + id + "' violates " + violations.front(), violations);
  process_cfg_ = std::move(next);
  return added;
}

std::size_t StagedSession::user_decision_count() const {
  return static_cast<std::size_t>(std::count_if(process_cfg_.assignments.begin(), process_cfg_.assignments.end(),
                                                [](const vm::DmAssignment& a) { return a.origin == vm::Origin::User; }));
}

void StagedSession::rollback(std::size_t k) {
  if (stage_ != Stage::Process) throw EngineError(ErrorKind::Stage, stage_error(stage_, Stage::Process));
  std::size_t users = user_decision_count();
  if (k > users)
    throw EngineError(ErrorKind::Argument,
                      "cannot roll back " + std::to_string(k) + " decisions, only " + std::to_string(users) + " taken");
  if (k == 0) return;
  std::size_t seen = 0;
  std::size_t cut = process_cfg_.assignments.size();
  for (std::size_t i = process_cfg_.assignments.size(); i-- > 0;) {
    if (process_cfg_.assignments[i].origin == vm::Origin::User && ++seen == k) {
      cut = i;
      break;
    }
  }
  process_cfg_.assignments.resize(cut);
}

// Process decisions that fired CDCs demand but that are not set true.
std::vector<std::string> StagedSession::required_missing() const {
  const auto& o = ws_->out;
  auto combined = combined_assignment();
  std::vector<std::string> out;
  for (const auto& cdc : o.cdcs) {
    const Formula& rhs = cdc.rhs;
    if (rhs.kind() != Kind::Var) continue;
    auto ref = logic::split_ref(rhs.name());
    if (ref.model != o.process_dm.model_id) continue;
    if (logic::eval_partial(cdc.lhs, combined) != Tri::True) continue;
    const vm::DmAssignment* a = process_cfg_.find(ref.element);
    if ((a == nullptr || a->value == "false") && std::find(out.begin(), out.end(), ref.element) == out.end())
      out.push_back(ref.element);
  }
  return out;
}

std::vector<std::string> StagedSession::finish_process(bool force) {
  if (stage_ != Stage::Process) throw EngineError(ErrorKind::Stage, stage_error(stage_, Stage::Process));
  auto pending = visible_decisions();
  if (!pending.empty() && !force)
    throw EngineError(ErrorKind::Pending, "visible decisions pending: " + join(pending), pending);
  auto missing = required_missing();
  if (!missing.empty())
    throw EngineError(ErrorKind::Pending, "required process decisions not taken: " + join(missing), missing);
  auto violations = rule_violations(process_cfg_, true);
  if (!violations.empty()) throw EngineError(ErrorKind::Violation, violations.front(), violations);
  auto reduction = reduce_resource_fm();
  std::vector<std::string> clash;
  for (const auto& f : reduction.locked)
    if (reduction.preselected.count(f) || reduction.required.count(f)) clash.push_back(f);
  if (!clash.empty())
    throw EngineError(ErrorKind::Violation, "contradictory resource constraints on " + join(clash), clash);
  reduction_ = std::move(reduction);
  resource_cfg_ = vm::FmConfiguration{ws_->out.resource_fm.model_id,
                                      vm::with_ancestors(ws_->out.resource_fm, reduction_.preselected)};
  forced_ = force;
  stage_ = Stage::Resource;
  return production_sequence();
}

std::vector<std::string> StagedSession::production_sequence() const {
  std::vector<std::string> out;
  for (const auto& a : process_cfg_.assignments)
    if (a.origin != vm::Origin::Preset && a.value == "true") out.push_back(a.decision);
  return out;
}

ResourceReduction StagedSession::reduce_resource_fm() const {
  const auto& o = ws_->out;
  const auto& fm = o.resource_fm;
  ResourceReduction red;
  auto combined = combined_assignment();
  std::set<std::string> positive;
  for (const auto& cdc : o.cdcs) {
    if (!all_in_model(cdc.rhs, fm.model_id)) continue;
    if (cdc.lhs.kind() == Kind::True || !all_in_model(cdc.lhs, o.process_dm.model_id)) continue;
    if (logic::eval_partial(cdc.lhs, combined) != Tri::True) continue;
    red.fired.push_back(logic::to_string(cdc.formula(), logic::Dialect::Cdc));
    const Formula& rhs = cdc.rhs;
    auto element = [](const Formula& f) { return logic::split_ref(f.name()).element; };
    if (rhs.kind() == Kind::Var) {
      std::string f = element(rhs);
      positive.insert(f);
      if (fm.features.contains(f) && fm.features.at(f).abstract) red.required.insert(f);
      else red.preselected.insert(f);
    } else if (rhs.kind() == Kind::Not && rhs.children()[0].kind() == Kind::Var) {
      red.locked.insert(element(rhs.children()[0]));
    } else {
      for (const auto& n : logic::names(rhs)) positive.insert(logic::split_ref(n).element);
    }
  }
  std::set<std::string> allowed;
  if (!fm.root.empty()) allowed.insert(fm.root);
  for (const auto& f : positive) {
    if (!fm.features.contains(f)) continue;
    add_subtree(fm, f, allowed);
    for (const auto& a : fm.ancestors(f)) allowed.insert(a);
  }
  for (const auto& [id, f] : fm.features)
    if (!allowed.count(id)) red.locked.insert(id);
  for (const auto& p : std::set<std::string>(red.preselected))
    for (const auto& a : fm.ancestors(p))
      if (a != fm.root) red.preselected.insert(a);
  return red;
}

std::vector<std::string> StagedSession::set_resource_config(const std::set<std::string>& selected) {
  if (stage_ != Stage::Resource) return {stage_error(stage_, Stage::Resource)};
  const auto& fm = ws_->out.resource_fm;
  std::vector<std::string> out;
  for (const auto& id : selected)
    if (!fm.features.contains(id)) out.push_back("unknown feature '" + id + "'");
  if (!out.empty()) return out;
  std::set<std::string> sel = selected;
  sel.insert(reduction_.preselected.begin(), reduction_.preselected.end());
  if (!fm.root.empty()) sel.insert(fm.root);
  vm::FmConfiguration cfg{fm.model_id, vm::with_ancestors(fm, sel)};
  for (const auto& id : cfg.selected)
    if (reduction_.locked.count(id)) out.push_back("resource '" + id + "' is locked out");
  for (auto& v : vm::validate_fm_config(fm, cfg)) out.push_back(std::move(v));
  vm::FmConfiguration previous = resource_cfg_;
  resource_cfg_ = cfg;
  for (auto& v : cdc_violations()) out.push_back(std::move(v));
  if (!out.empty()) {
    resource_cfg_ = std::move(previous);
    return out;
  }
  stage_ = Stage::Done;
  return {};
}

logic::Assignment StagedSession::combined_assignment() const {
  const auto& o = ws_->out;
  logic::Assignment a;
  auto pf = vm::fm_assignment(o.product_fm, product_cfg_.selected);
  for (const auto& [k, v] : pf) a[logic::join_ref(o.product_fm.model_id, k)] = v;
  auto pa = process_assignment();
  for (const auto& [id, d] : o.process_dm.decisions) {
    std::string q = logic::join_ref(o.process_dm.model_id, id);
    auto it = pa.find(id);
    a[q] = it != pa.end() && it->second;
    for (const auto& opt : d.options) {
      auto ot = pa.find(logic::option_key(id, opt));
      a[logic::option_key(q, opt)] = ot != pa.end() && ot->second;
    }
  }
  auto rf = vm::fm_assignment(o.resource_fm, resource_cfg_.selected);
  for (const auto& [k, v] : rf) a[logic::join_ref(o.resource_fm.model_id, k)] = v;
  return a;
}

std::vector<std::string> StagedSession::cdc_violations() const {
  auto a = combined_assignment();
  std::vector<std::string> out;
  for (const auto& cdc : ws_->out.cdcs) {
    Formula f = cdc.formula();
    if (logic::eval_partial(f, a) != Tri::True) out.push_back("CDC violated: " + logic::to_string(f, logic::Dialect::Cdc));
  }
  return out;
}

const SpaceMetric& StagedSession::sequence_space() {
  if (stage_ == Stage::Product) throw EngineError(ErrorKind::Stage, "process stage not reached");
  if (metrics_) return *metrics_;
  SpaceMetric m;
  const auto& dm = ws_->out.process_dm;
  vm::DmConfiguration sim = process_cfg_;
  sim.assignments.erase(std::remove_if(sim.assignments.begin(), sim.assignments.end(),
                                       [](const vm::DmAssignment& a) { return a.origin != vm::Origin::Preset; }),
                        sim.assignments.end());
  while (true) {
    auto a = vm::dm_assignment(dm, sim);
    std::vector<std::string> batch;
    for (const auto& [id, d] : dm.decisions)
      if (!is_assigned(sim, id) && logic::eval_partial(d.visibility, a) == Tri::True) batch.push_back(id);
    if (batch.empty()) break;
    for (const auto& id : batch) {
      const auto& d = dm.decisions.at(id);
      std::string value = d.kind == vm::RangeKind::Boolean ? "true" : d.options.front();
      sim.assignments.push_back({id, value, vm::Origin::User, sim.assignments.empty() ? 1 : sim.assignments.back().seq + 1});
      m.reachable.insert(id);
    }
    for (const auto& p : propagate(sim))
      if (p.value != "false") m.reachable.insert(p.decision);
    m.stage_sizes.push_back(batch.size());
    m.stages.push_back(std::move(batch));
  }
  if (m.stage_sizes.empty()) m.stage_sizes.push_back(0);
  for (auto s : m.stage_sizes) m.n += s;
  m.r = m.n;
  m.full_space = permutations(m.n, m.r);
  m.reduced_space = 0;
  for (auto s : m.stage_sizes) m.reduced_space += factorial(s);
  metrics_ = std::move(m);
  return *metrics_;
}

void StagedSession::reset(Stage target) {
  if (static_cast<int>(target) > static_cast<int>(stage_))
    throw EngineError(ErrorKind::Stage, std::string("cannot reset forward to ") + to_string(target));
  if (target == Stage::Product) {
    product_cfg_.selected.clear();
    process_cfg_ = vm::DmConfiguration{ws_->out.process_dm.model_id, "", {}};
    metrics_.reset();
  }
  if (target == Stage::Process) {
    auto& as = process_cfg_.assignments;
    as.erase(std::remove_if(as.begin(), as.end(), [](const vm::DmAssignment& a) { return a.origin != vm::Origin::Preset; }),
             as.end());
  }
  if (static_cast<int>(target) <= static_cast<int>(Stage::Process)) {
    reduction_ = ResourceReduction{};
    forced_ = false;
  }
  resource_cfg_.selected.clear();
  if (target == Stage::Resource) resource_cfg_.selected = vm::with_ancestors(ws_->out.resource_fm, reduction_.preselected);
  stage_ = target;
}

nlohmann::json StagedSession::to_snapshot() const {
  nlohmann::json j;
  j["version"] = 1;
  j["stage"] = to_string(stage_);
  if (stage_ != Stage::Product) j["product"] = product_cfg_.selected;
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& a : process_cfg_.assignments)
    if (a.origin == vm::Origin::User) decisions.push_back({{"decision", a.decision}, {"value", a.value}});
  j["decisions"] = decisions;
  j["finished"] = stage_ == Stage::Resource || stage_ == Stage::Done;
  j["forced"] = forced_;
  if (stage_ == Stage::Done) j["resource"] = resource_cfg_.selected;
  return j;
}

StagedSession StagedSession::from_snapshot(std::shared_ptr<const Workspace> ws, const nlohmann::json& snap) {
  StagedSession s(std::move(ws));
  try {
    if (snap.contains("product")) {
      auto v = s.set_product_config(snap.at("product").get<std::set<std::string>>());
      if (!v.empty()) throw EngineError(ErrorKind::Violation, "snapshot product selection invalid: " + v.front(), v);
    }
    for (const auto& d : snap.value("decisions", nlohmann::json::array()))
      s.take_decision(d.at("decision").get<std::string>(), d.at("value").get<std::string>());
    if (snap.value("finished", false)) s.finish_process(snap.value("forced", false));
    if (snap.contains("resource")) {
      auto v = s.set_resource_config(snap.at("resource").get<std::set<std::string>>());
      if (!v.empty()) throw EngineError(ErrorKind::Violation, "snapshot resource selection invalid: " + v.front(), v);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw EngineError(ErrorKind::Argument, std::string("malformed snapshot: ") + ex.what());
  }
  return s;
}

bool operator==(const StagedSession& a, const StagedSession& b) {
  return a.ws_ == b.ws_ && a.stage_ == b.stage_ && a.product_cfg_ == b.product_cfg_ && a.process_cfg_ == b.process_cfg_ &&
         a.resource_cfg_ == b.resource_cfg_ && a.reduction_ == b.reduction_ && a.forced_ == b.forced_;
}

}  // namespace pprvari::engine
