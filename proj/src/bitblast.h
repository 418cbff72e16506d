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

// Tseitin encoding of bitvector expressions into CNF. Literals use the
// DIMACS convention: variable v > 0, negation -v. Variable 1 is constant
// true.

#ifndef COSIG_SRC_BITBLAST_H_
#define COSIG_SRC_BITBLAST_H_

#include <array>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "cosig/symexpr.h"

namespace cosig::internal {

using Lit = int;
using Bits = std::vector<Lit>;  // least significant bit first

class CnfBuilder {
 public:
  CnfBuilder();

  Lit True() const { return 1; }
  Lit False() const { return -1; }
  Lit Constant(bool b) const { return b ? True() : False(); }

  Lit NewVar() { return ++num_vars_; }
  int num_vars() const { return num_vars_; }
  const std::vector<std::vector<Lit>> &clauses() const { return clauses_; }
  void AddClause(std::vector<Lit> clause) {
    clauses_.push_back(std::move(clause));
  }

  // Gates fold constants and reuse structurally identical gates.
  Lit And(Lit a, Lit b);
  Lit Or(Lit a, Lit b) { return -And(-a, -b); }
  Lit Xor(Lit a, Lit b);
  Lit Mux(Lit sel, Lit then_lit, Lit else_lit);

 private:
  int num_vars_ = 0;
  std::vector<std::vector<Lit>> clauses_;
  std::unordered_map<uint64_t, Lit> and_cache_;
  std::unordered_map<uint64_t, Lit> xor_cache_;
};

class BitBlaster {
 public:
  explicit BitBlaster(CnfBuilder &cnf) : cnf_(cnf) {}

  // Allocates the eight bits of `v`, most significant first. Must precede
  // any Blast() that mentions `v` for the decision order to hold.
  void Declare(const VarRef &v);
  const std::map<VarRef, std::array<Lit, 8>> &vars() const { return vars_; }

  Bits Blast(const Expr &e);
  Lit Blast(const BoolExpr &p);

 private:
  Bits Add(const Bits &a, const Bits &b, Lit carry_in);
  Bits Shift(const Bits &a, const Bits &amount, bool left);
  Lit Equal(const Bits &a, const Bits &b);
  Lit Less(const Bits &a, const Bits &b);

  CnfBuilder &cnf_;
  std::map<VarRef, std::array<Lit, 8>> vars_;
  std::unordered_map<const void *, Bits> expr_memo_;
  std::unordered_map<const void *, Lit> bool_memo_;
  // Keeps memoized nodes alive so their addresses stay unique.
  std::vector<Expr> pinned_exprs_;
  std::vector<BoolExpr> pinned_bools_;
};

}  // namespace cosig::internal

#endif  // COSIG_SRC_BITBLAST_H_
