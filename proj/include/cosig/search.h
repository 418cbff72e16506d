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

// Directed generational search: run concolically, negate one branch
// constraint of the observed path, solve, rerun on the new input, and
// repeat until the target block is entered.

#ifndef COSIG_SEARCH_H_
#define COSIG_SEARCH_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cosig/cfg.h"
#include "cosig/concolic.h"
#include "cosig/execution_map.h"
#include "cosig/interp.h"
#include "cosig/program.h"
#include "cosig/solver.h"
#include "cosig/symexpr.h"

namespace cosig {

// A label ("DETECTED", "str.match") or an explicit pc.
struct TargetSpec {
  std::string label;
  std::optional<ModulePc> pc;

  static TargetSpec Label(std::string label) { return {std::move(label), {}}; }
  static TargetSpec At(ModulePc pc) { return {"", pc}; }
};

// Throws InvalidArgument naming the label when it does not resolve.
ModulePc ResolveTarget(const Program &program, const TargetSpec &target);
std::string DescribeTarget(const Program &program, const TargetSpec &target);

inline constexpr uint32_t kInfiniteDistance =
    std::numeric_limits<uint32_t>::max();

// Fewest CFG edges from each block to `target`, by reverse breadth-first
// traversal; kInfiniteDistance when the target cannot be reached.
std::vector<uint32_t> DistanceMap(const Cfg &cfg, BlockId target);
std::vector<uint32_t> DistanceMap(const Program &program, const Cfg &cfg,
                                  const TargetSpec &target);

enum class SearchOrder : uint8_t {
  kDirected,  // distance to the target, then prefix length, then index
  kFifo,      // discovery order
};

struct SearchConfig {
  uint32_t loop_bound = 128;
  size_t max_states = 4096;
  size_t max_solver_calls = 512;
  SolverBudget solver;
  std::optional<ExecutionMap> restrict_to_map;
  uint64_t fuel = kDefaultFuel;
  SearchOrder order = SearchOrder::kDirected;
  unsigned jobs = 1;
  ConsistencyCheck check = ConsistencyCheck::kSampled;
};

void ValidateConfig(const SearchConfig &config);

enum class SearchVerdict : uint8_t { kWitness, kExhausted, kBudgetExceeded };

std::string_view SearchVerdictName(SearchVerdict verdict);

struct SearchStats {
  uint64_t iterations = 0;
  uint64_t solver_calls = 0;
  uint64_t negations = 0;  // accepted (SAT) negations
  uint64_t sat = 0;
  uint64_t unsat = 0;
  uint64_t unknown = 0;
  uint64_t skipped_loop_bound = 0;
  uint64_t skipped_outside_map = 0;
  uint64_t skipped_unreachable = 0;
  uint64_t duplicates = 0;
  uint64_t frontier_dropped = 0;
  uint64_t consistency_violations = 0;
};

struct Witness {
  Assignment assignment;  // every marked byte
  InputImage inputs;
  std::vector<BranchRecord> branch_path;
  PathCondition path;
  Trace trace;
  ConcolicOutcome outcome;
};

struct SearchResult {
  SearchVerdict verdict = SearchVerdict::kExhausted;
  std::optional<Witness> witness;
  SearchStats stats;
  ModulePc target;
  std::string target_name;
  PolicyMode policy = PolicyMode::kHalt;
};

// Deterministic for a given config, including the number of jobs.
SearchResult DirectedSearch(const Program &program, const InputImage &seed,
                            const SymbolicMarks &marks,
                            const TargetSpec &target,
                            const ExternalPolicy &policy,
                            const SearchConfig &config = {});

// True when a concrete run on `inputs` enters the block containing `target`
// and reproduces `expected` as a prefix of its branch records (the whole
// sequence when `complete`).
bool ReplayMatches(const Program &program, const InputImage &inputs,
                   ModulePc target, const std::vector<BranchRecord> &expected,
                   bool complete, uint64_t fuel = kDefaultFuel);

// JSON report; `stamp` adds a wall-clock timestamp.
std::string SearchReportJson(const Program &program, const SearchResult &r,
                             bool stamp = false);

std::string HexBytes(const std::vector<uint8_t> &bytes);

}  // namespace cosig

#endif  // COSIG_SEARCH_H_
