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

#include <chrono>
#include <cstdio>

#include "cosig/search.h"
#include "json.hpp"

namespace cosig {

std::string HexBytes(const std::vector<uint8_t> &bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  char buf[3];
  for (uint8_t b : bytes) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    out += buf;
  }
  return out;
}

std::string SearchReportJson(const Program &program, const SearchResult &r,
                             bool stamp) {
  nlohmann::ordered_json j;
  j["target"] = r.target_name;
  j["target_pc"] = program.FormatPc(r.target);
  j["policy"] = PolicyName(r.policy);
  j["verdict"] = SearchVerdictName(r.verdict);
  j["iterations"] = r.stats.iterations;
  j["solver_calls"] = r.stats.solver_calls;
  if (r.witness) {
    nlohmann::ordered_json regions = nlohmann::ordered_json::object();
    for (const auto &region : r.witness->inputs.regions)
      regions[region.name] = HexBytes(region.bytes);
    j["witness"] = regions;
    j["branch_path_length"] = r.witness->branch_path.size();
  } else {
    j["witness"] = nullptr;
    j["branch_path_length"] = nullptr;
  }
  const SearchStats &s = r.stats;
  j["statistics"] = {
      {"negations", s.negations},
      {"sat", s.sat},
      {"unsat", s.unsat},
      {"unknown", s.unknown},
      {"skipped_loop_bound", s.skipped_loop_bound},
      {"skipped_outside_map", s.skipped_outside_map},
      {"skipped_unreachable", s.skipped_unreachable},
      {"duplicates", s.duplicates},
      {"frontier_dropped", s.frontier_dropped},
      {"consistency_violations", s.consistency_violations},
  };
  if (stamp) {
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  }
  return j.dump(2) + "\n";
}

}  // namespace cosig
