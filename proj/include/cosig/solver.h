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

// Exact satisfiability for path conditions over input-byte variables.
//
// Constraints are bit-blasted to CNF and decided by a conflict-driven
// clause-learning procedure with a fixed decision order: input bits by
// (region, byte index, most significant bit first), each tried as 0 before
// 1. Witnesses are therefore deterministic and lexicographically smallest
// over the byte values in that order.

#ifndef COSIG_SOLVER_H_
#define COSIG_SOLVER_H_

#include <cstdint>
#include <span>
#include <string_view>

#include "cosig/symexpr.h"

namespace cosig {

struct SolverBudget {
  uint64_t max_decisions = 1'000'000;
  double max_seconds = 10.0;
};

enum class Verdict : uint8_t { kSat, kUnsat, kUnknown };

std::string_view VerdictName(Verdict v);

struct SolveResult {
  Verdict verdict = Verdict::kUnknown;
  Assignment assignment;  // total over the free variables when kSat
  uint64_t decisions = 0;
  uint64_t conflicts = 0;
};

SolveResult Solve(std::span<const BoolExpr> constraints,
                  const SolverBudget &budget = {});
SolveResult Solve(const PathCondition &pc, const SolverBudget &budget = {});

// Evaluates every constraint under `a` with the reference semantics. Throws
// InvalidArgument when `a` misses a free variable.
bool CheckAssignment(std::span<const BoolExpr> constraints,
                     const Assignment &a);
bool CheckAssignment(const PathCondition &pc, const Assignment &a);

}  // namespace cosig

#endif  // COSIG_SOLVER_H_
