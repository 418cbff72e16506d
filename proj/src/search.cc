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

#include "cosig/search.h"

#include <algorithm>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "cosig/error.h"

namespace cosig {
namespace {

uint64_t Mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdull;
}

uint64_t EntryHash(const PathEntry &e, bool taken) {
  return (uint64_t{e.site.module} << 40) ^ (uint64_t{e.site.index} << 8) ^
         (taken ? 1 : 0) ^ (e.kind == ConstraintKind::kPin ? 2 : 0);
}

struct Generation {
  InputImage inputs;
  PathCondition path;
};

struct Candidate {
  std::tuple<uint32_t, uint32_t, uint32_t, uint64_t> key;
  std::shared_ptr<const Generation> parent;
  uint32_t k = 0;
  uint64_t seq = 0;

  bool operator<(const Candidate &o) const { return key < o.key; }
};

bool Reached(const Trace &trace, ModulePc target_block) {
  return std::find(trace.blocks.begin(), trace.blocks.end(), target_block) !=
         trace.blocks.end();
}

}  // namespace

ModulePc ResolveTarget(const Program &program, const TargetSpec &target) {
  if (target.pc) {
    if (!program.Valid(*target.pc))
      throw InvalidArgument("target pc out of range");
    return *target.pc;
  }
  if (auto pc = program.FindLabel(target.label)) return *pc;
  if (auto pc = program.ParsePc(target.label)) return *pc;
  throw InvalidArgument("unknown label '" + target.label + "'");
}

std::string DescribeTarget(const Program &program, const TargetSpec &target) {
  if (!target.label.empty()) return target.label;
  return program.FormatPc(ResolveTarget(program, target));
}

std::vector<uint32_t> DistanceMap(const Cfg &cfg, BlockId target) {
  const size_t n = cfg.blocks().size();
  if (target >= n) throw InvalidArgument("target block out of range");
  std::vector<std::vector<BlockId>> preds(n);
  for (const Edge &e : cfg.edges()) preds[e.to].push_back(e.from);
  std::vector<uint32_t> dist(n, kInfiniteDistance);
  std::deque<BlockId> queue{target};
  dist[target] = 0;
  while (!queue.empty()) {
    const BlockId b = queue.front();
    queue.pop_front();
    for (BlockId p : preds[b]) {
      if (dist[p] != kInfiniteDistance) continue;
      dist[p] = dist[b] + 1;
      queue.push_back(p);
    }
  }
  return dist;
}

std::vector<uint32_t> DistanceMap(const Program &program, const Cfg &cfg,
                                  const TargetSpec &target) {
  return DistanceMap(cfg, cfg.BlockOf(ResolveTarget(program, target)));
}

void ValidateConfig(const SearchConfig &config) {
  if (config.loop_bound == 0 || config.max_states == 0 ||
      config.max_solver_calls == 0 || config.fuel == 0 || config.jobs == 0 ||
      config.solver.max_decisions == 0 || !(config.solver.max_seconds > 0))
    throw InvalidArgument("search limits must be positive");
}

std::string_view SearchVerdictName(SearchVerdict verdict) {
  switch (verdict) {
    case SearchVerdict::kWitness:
      return "witness";
    case SearchVerdict::kExhausted:
      return "exhausted";
    case SearchVerdict::kBudgetExceeded:
      return "budget-exceeded";
  }
  return "?";
}

bool ReplayMatches(const Program &program, const InputImage &inputs,
                   ModulePc target, const std::vector<BranchRecord> &expected,
                   bool complete, uint64_t fuel) {
  RunResult run = Run(program, LoadImage(program, inputs), fuel);
  const Cfg cfg = BuildCfg(program);
  if (!Reached(run.trace, cfg.blocks()[cfg.BlockOf(target)].first()))
    return false;
  const auto &got = run.trace.branches;
  if (complete) return got == expected;
  return got.size() >= expected.size() &&
         std::equal(expected.begin(), expected.end(), got.begin());
}

SearchResult DirectedSearch(const Program &program, const InputImage &seed,
                            const SymbolicMarks &marks,
                            const TargetSpec &target,
                            const ExternalPolicy &policy,
                            const SearchConfig &config) {
  ValidateConfig(config);
  ValidateInputs(seed);
  for (const auto &name : marks.regions) {
    if (!seed.Find(name))
      throw InvalidArgument("unknown symbolic region '" + name + "'");
  }
  SearchResult result;
  result.target = ResolveTarget(program, target);
  result.target_name = DescribeTarget(program, target);
  result.policy = policy.mode;
  SearchStats &stats = result.stats;

  const Cfg cfg = BuildCfg(program);
  const BlockId target_block = cfg.BlockOf(result.target);
  const ModulePc target_start = cfg.blocks()[target_block].first();
  const std::vector<uint32_t> dist = DistanceMap(cfg, target_block);
  const ExecutionMap *map =
      config.restrict_to_map ? &*config.restrict_to_map : nullptr;
  auto in_map = [&](ModulePc start) {
    return start == target_start || map->ContainsBlock(start);
  };

  const ConcolicOptions options{config.fuel, config.check};
  std::set<Candidate> frontier;
  std::unordered_set<uint64_t> seen;
  std::map<uint64_t, SolveResult> solved;  // speculative results by seq
  bool truncated = false;
  uint64_t seq = 0;

  auto solve_candidate = [&](const Candidate &c) {
    return Solve(NegateAt(c.parent->path, c.k), config.solver);
  };

  InputImage inputs = seed;
  uint32_t bound = 0;  // generation bound: negate only at or after this index
  while (true) {
    ++stats.iterations;
    ConcolicResult run =
        ExecuteConcolic(program, inputs, marks, policy, options);
    stats.consistency_violations += run.consistency_violations;

    if (Reached(run.trace, target_start)) {
      Witness w;
      w.assignment = InputAssignment(inputs, marks);
      if (!CheckAssignment(run.path, w.assignment))
        throw Error(ErrorKind::kInternal,
                    "witness does not satisfy its own path condition");
      const bool complete = run.outcome.kind != OutcomeKind::kPolicyHalt;
      if (!ReplayMatches(program, inputs, result.target, run.trace.branches,
                         complete, config.fuel))
        throw Error(ErrorKind::kInternal, "witness replay diverged");
      w.inputs = inputs;
      w.branch_path = run.trace.branches;
      w.path = std::move(run.path);
      w.trace = std::move(run.trace);
      w.outcome = run.outcome;
      result.witness = std::move(w);
      result.verdict = SearchVerdict::kWitness;
      return result;
    }

    // Expand negation candidates of this run.
    auto parent = std::make_shared<Generation>(Generation{inputs, std::move(run.path)});
    const PathCondition &path = parent->path;
    const std::vector<ModulePc> &blocks = run.trace.blocks;
    size_t first_outside = blocks.size();
    if (map) {
      for (size_t i = 0; i < blocks.size(); ++i) {
        if (!in_map(blocks[i])) {
          first_outside = i;
          break;
        }
      }
    }
    std::unordered_map<uint64_t, uint32_t> visits;
    size_t swept = 0;
    auto key_of = [](ModulePc pc) {
      return (uint64_t{pc.module} << 32) | pc.index;
    };
    uint64_t prefix_hash = 0;
    for (size_t k = 0; k < path.size(); ++k) {
      const PathEntry &e = path[k];
      const uint64_t h_here = prefix_hash;
      prefix_hash = Mix(prefix_hash, EntryHash(e, e.taken));
      if (k < bound || e.kind != ConstraintKind::kBranch) continue;
      while (swept <= e.block_pos && swept < blocks.size())
        ++visits[key_of(blocks[swept++])];

      const Instruction &insn = program.at(e.site);
      const ModulePc alt = e.taken ? ModulePc{e.site.module, e.site.index + 1}
                                   : ModulePc{e.site.module, insn.target};
      if (!program.Valid(alt)) continue;
      const BlockId alt_block = cfg.BlockOf(alt);
      const uint32_t d = dist[alt_block];
      if (d == kInfiniteDistance) {
        ++stats.skipped_unreachable;
        continue;
      }
      auto it = visits.find(key_of(alt));
      const uint32_t count = it == visits.end() ? 0 : it->second;
      if (count + 1 > config.loop_bound) {
        ++stats.skipped_loop_bound;
        continue;
      }
      if (map && (e.block_pos >= first_outside || !in_map(alt))) {
        ++stats.skipped_outside_map;
        continue;
      }
      const uint64_t h = Mix(h_here, EntryHash(e, !e.taken));
      if (!seen.insert(h).second) {
        ++stats.duplicates;
        continue;
      }
      Candidate c;
      c.parent = parent;
      c.k = static_cast<uint32_t>(k);
      c.seq = seq++;
      if (config.order == SearchOrder::kDirected) {
        c.key = {d, e.block_pos, c.k, c.seq};
      } else {
        c.key = {0, 0, 0, c.seq};
      }
      frontier.insert(std::move(c));
      if (frontier.size() > config.max_states) {
        auto worst = std::prev(frontier.end());
        solved.erase(worst->seq);
        frontier.erase(worst);
        truncated = true;
        ++stats.frontier_dropped;
      }
    }

    // Pick the best candidate whose negation is satisfiable.
    bool advanced = false;
    while (!frontier.empty()) {
      if (stats.solver_calls >= config.max_solver_calls) {
        result.verdict = SearchVerdict::kBudgetExceeded;
        return result;
      }
      if (config.jobs > 1) {
        // Speculatively solve the next few candidates in parallel; results
        // are consumed in frontier order so the outcome matches jobs=1.
        const size_t budget_left = config.max_solver_calls - stats.solver_calls;
        std::vector<const Candidate *> batch;
        size_t examined = 0;
        for (auto it = frontier.begin();
             it != frontier.end() && examined < config.jobs &&
             examined < budget_left;
             ++it, ++examined) {
          if (!solved.contains(it->seq)) batch.push_back(&*it);
        }
        std::vector<std::future<SolveResult>> futures;
        for (const Candidate *c : batch)
          futures.push_back(std::async(std::launch::async, solve_candidate,
                                       std::cref(*c)));
        for (size_t i = 0; i < batch.size(); ++i)
          solved[batch[i]->seq] = futures[i].get();
      }
      const Candidate c = *frontier.begin();
      frontier.erase(frontier.begin());
      SolveResult sr;
      if (auto it = solved.find(c.seq); it != solved.end()) {
        sr = std::move(it->second);
        solved.erase(it);
      } else {
        sr = solve_candidate(c);
      }
      ++stats.solver_calls;
      if (sr.verdict == Verdict::kUnsat) {
        ++stats.unsat;
        continue;
      }
      if (sr.verdict == Verdict::kUnknown) {
        ++stats.unknown;
        continue;
      }
      ++stats.sat;
      ++stats.negations;
      inputs = PatchInputs(c.parent->inputs, sr.assignment);
      bound = c.k + 1;
      advanced = true;
      break;
    }
    if (!advanced) {
      result.verdict = (truncated || stats.unknown > 0)
                           ? SearchVerdict::kBudgetExceeded
                           : SearchVerdict::kExhausted;
      return result;
    }
  }
}

}  // namespace cosig
