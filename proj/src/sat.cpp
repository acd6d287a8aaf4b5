// sat.cpp - Tseitin CNF conversion and a DPLL solver
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

#include "pprvari/logic.hpp"

namespace pprvari::logic {

int Cnf::var(const std::string& name) {
  auto it = var_table.find(name);
  if (it != var_table.end()) return it->second;
  var_names.push_back(name);
  int idx = static_cast<int>(var_names.size());
  var_table.emplace(name, idx);
  return idx;
}

int Cnf::lookup(const std::string& name) const {
  auto it = var_table.find(name);
  return it == var_table.end() ? 0 : it->second;
}

namespace {

class Encoder {
 public:
  explicit Encoder(Cnf& cnf) : cnf_(cnf) {
    for (const auto& name : cnf_.var_names)
      if (name.rfind(kAuxPrefix, 0) == 0) ++aux_;
  }

  void add(const Formula& f) {
    for (const auto& v : variables(f)) cnf_.var(v);
    add_conjunct(f);
  }

 private:
  static bool is_atom(const Formula& f) { return f.kind() == Kind::Var || f.kind() == Kind::VarEq; }

  std::string key(const Formula& atom) const {
    return atom.kind() == Kind::VarEq ? option_key(atom.name(), atom.option()) : atom.name();
  }

  // Appends the literals of f to clause when f is a disjunction of literals
  // (negated=true reads f as negated). Returns false otherwise.
  bool clause_of(const Formula& f, bool negated, std::vector<int>& clause) {
    switch (f.kind()) {
      case Kind::Var:
      case Kind::VarEq: {
        int v = cnf_.var(key(f));
        clause.push_back(negated ? -v : v);
        return true;
      }
      case Kind::False:
        return !negated;
      case Kind::Not:
        return clause_of(f.children()[0], !negated, clause);
      case Kind::Or:
        if (negated) return false;
        for (const auto& c : f.children())
          if (!clause_of(c, false, clause)) return false;
        return true;
      case Kind::And:
        if (!negated) return false;
        for (const auto& c : f.children())
          if (!clause_of(c, true, clause)) return false;
        return true;
      case Kind::Implies:
        if (negated) return false;
        return clause_of(f.lhs(), true, clause) && clause_of(f.rhs(), false, clause);
      case Kind::True:
        return negated;
    }
    return false;
  }

  void add_conjunct(const Formula& f) {
    if (f.kind() == Kind::True) return;
    if (f.kind() == Kind::And) {
      for (const auto& c : f.children()) add_conjunct(c);
      return;
    }
    std::vector<int> clause;
    if (clause_of(f, false, clause)) {
      cnf_.clauses.push_back(std::move(clause));
      return;
    }
    cnf_.clauses.push_back({encode(f)});
  }

  int fresh() { return cnf_.var(std::string(kAuxPrefix) + std::to_string(++aux_)); }

  int constant_true() {
    std::string name = std::string(kAuxPrefix) + "true";
    int existing = cnf_.lookup(name);
    if (existing != 0) return existing;
    int v = cnf_.var(name);
    cnf_.clauses.push_back({v});
    return v;
  }

  // Returns a literal equivalent to f.
  int encode(const Formula& f) {
    switch (f.kind()) {
      case Kind::True: return constant_true();
      case Kind::False: return -constant_true();
      case Kind::Var:
      case Kind::VarEq: return cnf_.var(key(f));
      case Kind::Not: return -encode(f.children()[0]);
      case Kind::And:
      case Kind::Or: {
        std::vector<int> lits;
        for (const auto& c : f.children()) lits.push_back(encode(c));
        int t = fresh();
        bool is_and = f.kind() == Kind::And;
        // t <-> AND(lits): (-t | l) for each, (t | -l1 | ... ); Or is the dual.
        std::vector<int> big{is_and ? t : -t};
        for (int l : lits) {
          cnf_.clauses.push_back(is_and ? std::vector<int>{-t, l} : std::vector<int>{t, -l});
          big.push_back(is_and ? -l : l);
        }
        cnf_.clauses.push_back(std::move(big));
        return t;
      }
      case Kind::Implies: {
        int a = encode(f.lhs());
        int b = encode(f.rhs());
        int t = fresh();
        cnf_.clauses.push_back({-t, -a, b});
        cnf_.clauses.push_back({t, a});
        cnf_.clauses.push_back({t, -b});
        return t;
      }
    }
    return constant_true();
  }

  Cnf& cnf_;
  int aux_ = 0;
};

class Solver {
 public:
  explicit Solver(const Cnf& cnf) : n_(static_cast<int>(cnf.num_vars())), value_(n_ + 1, kUnset), watches_(2 * (n_ + 1)) {
    for (const auto& clause : cnf.clauses) {
      if (clause.empty()) {
        ok_ = false;
        continue;
      }
      if (clause.size() == 1) {
        units_.push_back(clause[0]);
        continue;
      }
      clauses_.push_back(clause);
    }
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      watches_[code(-clauses_[i][0])].push_back(i);
      watches_[code(-clauses_[i][1])].push_back(i);
    }
    if (ok_) {
      for (int u : units_) {
        if (!enqueue(u)) {
          ok_ = false;
          break;
        }
      }
      if (ok_ && !propagate()) ok_ = false;
    }
  }

  [[nodiscard]] bool ok() const { return ok_; }

  // Assumes lit at a new level; false on conflict (state restored).
  bool push(int lit) {
    if (!ok_) return false;
    levels_.push_back(trail_.size());
    if (!enqueue(lit) || !propagate()) {
      undo_to(levels_.back());
      levels_.pop_back();
      return false;
    }
    return true;
  }

  void pop() {
    undo_to(levels_.back());
    levels_.pop_back();
  }

  // Completes the current partial assignment; on success returns the model
  // and restores the current state either way.
  bool check(std::vector<int8_t>* model) {
    if (!ok_) return false;
    std::size_t base_levels = levels_.size();
    std::vector<bool> flipped;
    bool result = false;
    while (true) {
      int v = next_unassigned();
      if (v == 0) {
        result = true;
        if (model != nullptr) *model = value_;
        break;
      }
      levels_.push_back(trail_.size());
      flipped.push_back(false);
      bool good = enqueue(-v) && propagate();
      while (!good) {
        // chronological backtracking to the most recent unflipped decision
        while (!flipped.empty() && flipped.back()) {
          undo_to(levels_.back());
          levels_.pop_back();
          flipped.pop_back();
        }
        if (flipped.empty()) break;
        int lit = trail_[levels_.back()];
        undo_to(levels_.back());
        flipped.back() = true;
        good = enqueue(-lit) && propagate();
      }
      if (!good) break;
    }
    while (levels_.size() > base_levels) {
      undo_to(levels_.back());
      levels_.pop_back();
    }
    return result;
  }

  [[nodiscard]] int8_t value_of(int v) const { return value_[v]; }

  static constexpr int8_t kUnset = -1;

 private:
  static std::size_t code(int lit) { return static_cast<std::size_t>(std::abs(lit)) * 2 + (lit < 0 ? 1 : 0); }

  int8_t lit_value(int lit) const {
    int8_t v = value_[std::abs(lit)];
    if (v == kUnset) return kUnset;
    return lit > 0 ? v : static_cast<int8_t>(1 - v);
  }

  bool enqueue(int lit) {
    int8_t cur = lit_value(lit);
    if (cur == 1) return true;
    if (cur == 0) return false;
    value_[std::abs(lit)] = lit > 0 ? 1 : 0;
    trail_.push_back(lit);
    return true;
  }

  void undo_to(std::size_t size) {
    while (trail_.size() > size) {
      value_[std::abs(trail_.back())] = kUnset;
      trail_.pop_back();
    }
    if (qhead_ > trail_.size()) qhead_ = trail_.size();
  }

  int next_unassigned() const {
    for (int v = 1; v <= n_; ++v)
      if (value_[v] == kUnset) return v;
    return 0;
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      int p = trail_[qhead_++];
      // clauses watching literal -p, which just became false
      auto& ws = watches_[code(p)];
      std::size_t keep = 0;
      bool conflict = false;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        std::size_t ci = ws[i];
        if (conflict) {
          ws[keep++] = ci;
          continue;
        }
        auto& c = clauses_[ci];
        if (c[0] == -p) std::swap(c[0], c[1]);
        if (lit_value(c[0]) == 1) {
          ws[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (lit_value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[code(-c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = ci;
        if (!enqueue(c[0])) conflict = true;
      }
      ws.resize(keep);
      if (conflict) {
        qhead_ = trail_.size();
        return false;
      }
    }
    return true;
  }

  int n_;
  std::vector<int8_t> value_;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<std::vector<int>> clauses_;
  std::vector<int> units_;
  std::vector<int> trail_;
  std::vector<std::size_t> levels_;
  std::size_t qhead_ = 0;
  bool ok_ = true;
};

bool push_assumptions(Solver& solver, const Cnf& cnf, const Assignment& assumptions) {
  for (const auto& [name, value] : assumptions) {
    int v = cnf.lookup(name);
    if (v == 0) throw std::invalid_argument("unknown assumption variable '" + name + "'");
    if (!solver.push(value ? v : -v)) return false;
  }
  return true;
}

bool is_aux(const std::string& name) { return name.rfind(kAuxPrefix, 0) == 0; }

}  // namespace

void add_formula(Cnf& cnf, const Formula& f) {
  Encoder enc(cnf);
  enc.add(f);
}

Cnf to_cnf(const Formula& f) {
  Cnf cnf;
  add_formula(cnf, f);
  return cnf;
}

SatResult sat(const Cnf& cnf, const Assignment& assumptions) {
  Solver solver(cnf);
  SatResult result;
  if (!push_assumptions(solver, cnf, assumptions)) return result;
  std::vector<int8_t> model;
  if (!solver.check(&model)) return result;
  result.satisfiable = true;
  for (std::size_t i = 0; i < cnf.var_names.size(); ++i) {
    if (is_aux(cnf.var_names[i])) continue;
    result.witness[cnf.var_names[i]] = model[i + 1] == 1;
  }
  return result;
}

Enumeration enumerate_models(const Cnf& cnf, const std::vector<std::string>& vars, std::size_t limit,
                             const Assignment& assumptions) {
  Enumeration out;
  if (limit == 0) limit = 1;
  Solver solver(cnf);
  if (!push_assumptions(solver, cnf, assumptions)) return out;
  if (!solver.check(nullptr)) return out;

  std::vector<int> index;
  index.reserve(vars.size());
  for (const auto& v : vars) index.push_back(cnf.lookup(v));

  Assignment current;
  bool stop = false;
  // Depth-first over vars; every visited prefix is known satisfiable.
  auto dfs = [&](auto&& self, std::size_t depth) -> void {
    if (stop) return;
    if (depth == vars.size()) {
      if (out.models.size() == limit) {
        out.truncated = true;
        stop = true;
        return;
      }
      out.models.push_back(current);
      return;
    }
    for (bool value : {false, true}) {
      if (stop) return;
      int v = index[depth];
      if (v == 0) {
        current[vars[depth]] = value;
        self(self, depth + 1);
        continue;
      }
      if (!solver.push(value ? v : -v)) continue;
      if (solver.check(nullptr)) {
        current[vars[depth]] = value;
        self(self, depth + 1);
      }
      solver.pop();
    }
    current.erase(vars[depth]);
  };
  dfs(dfs, 0);
  return out;
}

}  // namespace pprvari::logic
