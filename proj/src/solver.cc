// Copyright 2026 The Cosig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cosig/solver.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <utility>
#include <vector>

#include "bitblast.h"
#include "cosig/error.h"

namespace cosig {
namespace {

using internal::Lit;

// Conflict-driven clause learning with two watched literals, first-UIP
// learning and non-chronological backjumping. No restarts and no clause
// deletion: instances here are small and determinism matters more.
class Cdcl {
 public:
  explicit Cdcl(int num_vars)
      : num_vars_(num_vars),
        value_(num_vars + 1, -1),
        level_(num_vars + 1, 0),
        reason_(num_vars + 1, -1),
        seen_(num_vars + 1, 0),
        watches_(2 * (num_vars + 1)) {}

  void AddClause(std::vector<Lit> lits) {
    if (unsat_) return;
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (size_t i = 0; i + 1 < lits.size(); ++i) {
      for (size_t j = i + 1; j < lits.size(); ++j)
        if (lits[i] == -lits[j]) return;  // tautology
    }
    // Drop literals already false at level 0; skip satisfied clauses.
    std::vector<Lit> kept;
    for (Lit l : lits) {
      const int v = LitValue(l);
      if (v == 1) return;
      if (v == -1) kept.push_back(l);
    }
    if (kept.empty()) {
      unsat_ = true;
      return;
    }
    if (kept.size() == 1) {
      Enqueue(kept[0], -1);
      if (Propagate() >= 0) unsat_ = true;
      return;
    }
    Attach(std::move(kept));
  }

  void SetOrder(std::vector<int> order) {
    std::vector<bool> listed(num_vars_ + 1, false);
    for (int v : order) listed[v] = true;
    for (int v = 1; v <= num_vars_; ++v)
      if (!listed[v]) order.push_back(v);
    order_ = std::move(order);
    position_.assign(num_vars_ + 1, 0);
    for (size_t i = 0; i < order_.size(); ++i) position_[order_[i]] = i;
    next_ = 0;
  }

  Verdict Solve(const SolverBudget &budget) {
    if (unsat_) return Verdict::kUnsat;
    const auto start = std::chrono::steady_clock::now();
    uint64_t ticks = 0;
    for (;;) {
      const int conflict = Propagate();
      if (conflict >= 0) {
        ++conflicts_;
        if (DecisionLevel() == 0) return Verdict::kUnsat;
        Learn(conflict);
      } else {
        const int v = PickVar();
        if (v == 0) return Verdict::kSat;
        if (decisions_ >= budget.max_decisions) return Verdict::kUnknown;
        ++decisions_;
        trail_lim_.push_back(trail_.size());
        Enqueue(-v, -1);
      }
      if ((++ticks & 1023) == 0) {
        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        if (elapsed.count() > budget.max_seconds) return Verdict::kUnknown;
      }
    }
  }

  bool Value(int var) const { return value_[var] == 1; }
  uint64_t decisions() const { return decisions_; }
  uint64_t conflicts() const { return conflicts_; }

 private:
  static size_t Index(Lit l) { return 2 * static_cast<size_t>(std::abs(l)) + (l < 0); }

  int LitValue(Lit l) const {
    const int v = value_[std::abs(l)];
    if (v < 0) return -1;
    return l > 0 ? v : 1 - v;
  }

  int DecisionLevel() const { return static_cast<int>(trail_lim_.size()); }

  void Enqueue(Lit l, int reason) {
    const int v = std::abs(l);
    value_[v] = l > 0 ? 1 : 0;
    level_[v] = DecisionLevel();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  int Attach(std::vector<Lit> lits) {
    const int id = static_cast<int>(clauses_.size());
    watches_[Index(lits[0])].push_back(id);
    watches_[Index(lits[1])].push_back(id);
    clauses_.push_back(std::move(lits));
    return id;
  }

  // Returns a conflicting clause id, or -1.
  int Propagate() {
    while (qhead_ < trail_.size()) {
      const Lit false_lit = -trail_[qhead_++];
      auto &ws = watches_[Index(false_lit)];
      size_t i = 0;
      size_t j = 0;
      while (i < ws.size()) {
        const int ci = ws[i++];
        auto &c = clauses_[ci];
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (LitValue(c[0]) == 1) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < c.size(); ++k) {
          if (LitValue(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[Index(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (LitValue(c[0]) == 0) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          return ci;
        }
        Enqueue(c[0], ci);
      }
      ws.resize(j);
    }
    return -1;
  }

  void Learn(int conflict) {
    std::vector<Lit> learnt(1, 0);
    int pending = 0;
    Lit p = 0;
    size_t idx = trail_.size();
    int clause = conflict;
    do {
      const auto &c = clauses_[clause];
      for (size_t k = (p == 0 ? 0 : 1); k < c.size(); ++k) {
        const int v = std::abs(c[k]);
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        if (level_[v] >= DecisionLevel()) {
          ++pending;
        } else {
          learnt.push_back(c[k]);
        }
      }
      do {
        --idx;
      } while (!seen_[std::abs(trail_[idx])]);
      p = trail_[idx];
      clause = reason_[std::abs(p)];
      seen_[std::abs(p)] = 0;
      --pending;
    } while (pending > 0);
    learnt[0] = -p;
    for (size_t k = 1; k < learnt.size(); ++k) seen_[std::abs(learnt[k])] = 0;

    int back_level = 0;
    if (learnt.size() > 1) {
      size_t max_k = 1;
      for (size_t k = 2; k < learnt.size(); ++k) {
        if (level_[std::abs(learnt[k])] > level_[std::abs(learnt[max_k])])
          max_k = k;
      }
      std::swap(learnt[1], learnt[max_k]);
      back_level = level_[std::abs(learnt[1])];
    }
    Backtrack(back_level);
    if (learnt.size() == 1) {
      Enqueue(learnt[0], -1);
    } else {
      const Lit asserting = learnt[0];
      const int id = Attach(std::move(learnt));
      Enqueue(asserting, id);
    }
  }

  void Backtrack(int level) {
    if (DecisionLevel() <= level) return;
    const size_t keep = trail_lim_[level];
    for (size_t k = trail_.size(); k > keep; --k) {
      const int v = std::abs(trail_[k - 1]);
      value_[v] = -1;
      reason_[v] = -1;
      next_ = std::min(next_, position_[v]);
    }
    trail_.resize(keep);
    trail_lim_.resize(level);
    qhead_ = keep;
  }

  int PickVar() {
    while (next_ < order_.size() && value_[order_[next_]] >= 0) ++next_;
    return next_ < order_.size() ? order_[next_] : 0;
  }

  int num_vars_;
  bool unsat_ = false;
  std::vector<int> value_;  // -1 unassigned, 0 false, 1 true
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<char> seen_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<Lit> trail_;
  std::vector<size_t> trail_lim_;
  size_t qhead_ = 0;
  std::vector<int> order_;
  std::vector<size_t> position_;
  size_t next_ = 0;
  uint64_t decisions_ = 0;
  uint64_t conflicts_ = 0;
};

}  // namespace

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kSat:
      return "sat";
    case Verdict::kUnsat:
      return "unsat";
    case Verdict::kUnknown:
      return "unknown";
  }
  return "?";
}

SolveResult Solve(std::span<const BoolExpr> constraints,
                  const SolverBudget &budget) {
  std::set<VarRef> vars;
  for (const auto &c : constraints) CollectFreeVars(c, vars);

  internal::CnfBuilder cnf;
  internal::BitBlaster blaster(cnf);
  std::vector<int> order;
  for (const auto &v : vars) {
    blaster.Declare(v);
    const auto &bits = blaster.vars().at(v);
    for (int i = 7; i >= 0; --i) order.push_back(bits[i]);
  }
  std::vector<Lit> roots;
  for (const auto &c : constraints) roots.push_back(blaster.Blast(Simplify(c)));

  Cdcl solver(cnf.num_vars());
  solver.SetOrder(std::move(order));
  for (const auto &clause : cnf.clauses()) solver.AddClause(clause);
  for (Lit root : roots) solver.AddClause({root});

  SolveResult result;
  result.verdict = solver.Solve(budget);
  result.decisions = solver.decisions();
  result.conflicts = solver.conflicts();
  if (result.verdict == Verdict::kSat) {
    for (const auto &[v, bits] : blaster.vars()) {
      uint8_t byte = 0;
      for (int i = 0; i < 8; ++i) {
        const Lit l = bits[i];
        const bool bit = l > 0 ? solver.Value(l) : !solver.Value(-l);
        byte |= static_cast<uint8_t>(bit) << i;
      }
      result.assignment.emplace(v, byte);
    }
  }
  return result;
}

SolveResult Solve(const PathCondition &pc, const SolverBudget &budget) {
  const auto constraints = Constraints(pc);
  return Solve(constraints, budget);
}

bool CheckAssignment(std::span<const BoolExpr> constraints,
                     const Assignment &a) {
  bool ok = true;
  // Evaluate all constraints so a partial assignment always throws.
  for (const auto &c : constraints) ok = Eval(c, a) && ok;
  return ok;
}

bool CheckAssignment(const PathCondition &pc, const Assignment &a) {
  const auto constraints = Constraints(pc);
  return CheckAssignment(constraints, a);
}

}  // namespace cosig
