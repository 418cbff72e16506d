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

#include <algorithm>
#include <chrono>

#include "cosig/error.h"
#include "cosig/sigextract.h"
#include "json.hpp"

namespace cosig {
namespace {

// Offset of the matching window and the recovered bytes: the file bytes
// constrained after the final entry into the comparison window.
void RecoverPattern(const Program &scanner, const Witness &w,
                    ExtractionReport &report) {
  auto window = scanner.FindLabel(kScanWindowLabel);
  if (!window) return;
  size_t last = w.trace.blocks.size();
  for (size_t i = w.trace.blocks.size(); i-- > 0;) {
    if (w.trace.blocks[i] == *window) {
      last = i;
      break;
    }
  }
  if (last == w.trace.blocks.size()) return;
  std::set<VarRef> vars;
  for (const PathEntry &e : w.path) {
    if (e.block_pos >= last) CollectFreeVars(e.constraint, vars);
  }
  const InputRegion *file = w.inputs.Find(kFileRegion);
  if (!file) return;
  for (const VarRef &v : vars) {
    if (v.region != kFileRegion || v.index >= file->bytes.size()) continue;
    if (!report.matched_offset) report.matched_offset = v.index;
    report.recovered_pattern.push_back(file->bytes[v.index]);
  }
}

}  // namespace

std::string_view CheckName(Check c) {
  switch (c) {
    case Check::kPass:
      return "pass";
    case Check::kFail:
      return "fail";
    case Check::kNotChecked:
      return "not-checked";
  }
  return "?";
}

ExtractionReport ExtractSignature(const Program &scanner,
                                  const ExtractionRequest &request) {
  const SignatureDb db = ParseDb(request.db_text);
  if (request.file_length < db.LongestPattern())
    throw InvalidArgument("file length " +
                          std::to_string(request.file_length) +
                          " is shorter than the longest rule pattern");
  const SignatureRule *truth = nullptr;
  if (request.ground_truth) {
    truth = db.Find(*request.ground_truth);
    if (!truth)
      throw InvalidArgument("unknown ground-truth rule '" +
                            *request.ground_truth + "'");
  }

  const std::string db_text = FormatDb(db);
  const InputImage seed = ScannerInputs(
      db_text, std::vector<uint8_t>(request.file_length, request.seed_byte));
  SearchConfig config = request.config;
  ExternalPolicy policy{request.policy, nullptr};
  if (!request.preruns.empty()) {
    std::vector<Trace> traces;
    for (const InputImage &inputs : request.preruns) {
      traces.push_back(ParseTraceFile(
          scanner, RecordReplay(scanner, inputs, config.fuel)));
    }
    ExecutionMap map = BuildMap(scanner, traces);
    config.restrict_to_map = map;
    policy.map = std::make_shared<const ExecutionMap>(std::move(map));
  } else if (request.policy == PolicyMode::kMapped) {
    throw InvalidArgument("mapped policy requires at least one pre-run");
  }

  SearchResult search =
      DirectedSearch(scanner, seed, SymbolicMarks{{std::string(kFileRegion)}},
                     request.target, policy, config);

  ExtractionReport report;
  report.target_endpoint = search.target_name;
  report.policy = request.policy;
  report.outcome = search.verdict;
  report.statistics = search.stats;
  if (!search.witness) return report;

  const Witness &w = *search.witness;
  for (const auto &region : w.inputs.regions) {
    if (region.name == kFileRegion)
      report.witness_bytes.emplace_back(region.name, region.bytes);
  }
  report.branch_path_length = w.branch_path.size();
  report.verification =
      ReplayMatches(scanner, w.inputs, search.target, w.branch_path,
                    w.outcome.kind != OutcomeKind::kPolicyHalt, config.fuel)
          ? Check::kPass
          : Check::kFail;
  RecoverPattern(scanner, w, report);
  if (truth) {
    report.equality = report.recovered_pattern == truth->pattern
                          ? Check::kPass
                          : Check::kFail;
  }
  report.witness = std::move(search.witness);
  return report;
}

std::string ExtractionReportJson(const ExtractionReport &r, bool stamp) {
  nlohmann::ordered_json j;
  j["target_endpoint"] = r.target_endpoint;
  j["policy"] = PolicyName(r.policy);
  j["outcome"] = SearchVerdictName(r.outcome);
  nlohmann::ordered_json witness = nlohmann::ordered_json::object();
  for (const auto &[name, bytes] : r.witness_bytes)
    witness[name] = HexBytes(bytes);
  j["witness_bytes"] = witness;
  if (r.matched_offset) {
    j["matched_offset"] = *r.matched_offset;
  } else {
    j["matched_offset"] = nullptr;
  }
  j["recovered_pattern"] = HexBytes(r.recovered_pattern);
  j["verification"] = CheckName(r.verification);
  j["equality"] = CheckName(r.equality);
  const SearchStats &s = r.statistics;
  j["statistics"] = {
      {"iterations", s.iterations},
      {"solver_calls", s.solver_calls},
      {"negations", s.negations},
      {"unsat", s.unsat},
      {"unknown", s.unknown},
      {"skipped_loop_bound", s.skipped_loop_bound},
      {"skipped_outside_map", s.skipped_outside_map},
      {"frontier_dropped", s.frontier_dropped},
      {"branch_path_length", r.branch_path_length},
  };
  if (stamp) {
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  }
  return j.dump(2) + "\n";
}

}  // namespace cosig
