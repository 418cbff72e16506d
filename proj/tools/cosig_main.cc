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

// cosig: command-line frontend.
//
// Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 target
// not reached, 4 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cosig/cfg.h"
#include "cosig/concolic.h"
#include "cosig/error.h"
#include "cosig/execution_map.h"
#include "cosig/interp.h"
#include "cosig/program.h"
#include "cosig/search.h"
#include "cosig/sigextract.h"
#include "cosig/solver.h"
#include "cosig/symexpr.h"

namespace cosig {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNotReached = 3;
constexpr int kExitInternal = 4;

constexpr std::string_view kCorpusPrefix = "corpus:";

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, const std::string &data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data))
    throw InvalidArgument("cannot write '" + path + "'");
}

std::string ProgramSource(const std::string &arg) {
  if (arg.starts_with(kCorpusPrefix))
    return std::string(CorpusSource(arg.substr(kCorpusPrefix.size())));
  return ReadFile(arg);
}

Program LoadProgram(const std::string &arg) {
  return AssembleProgram(ProgramSource(arg));
}

uint32_t ParseHex(const std::string &text, const std::string &what) {
  std::string s = text;
  if (s.starts_with("0x") || s.starts_with("0X")) s = s.substr(2);
  if (s.empty() || s.size() > 8 ||
      s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
    throw InvalidArgument("bad hex address in " + what);
  return static_cast<uint32_t>(std::stoul(s, nullptr, 16));
}

// name=file@hexaddr; the address may be omitted when `default_base` knows
// the region name.
InputRegion ParseInputSpec(
    const std::string &spec,
    const std::function<std::optional<uint32_t>(const std::string &)>
        &default_base = nullptr) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidArgument("bad input spec '" + spec +
                          "', expected name=file@hexaddr");
  InputRegion region;
  region.name = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  const size_t at = rest.rfind('@');
  std::optional<uint32_t> base;
  if (at != std::string::npos) {
    base = ParseHex(rest.substr(at + 1), "'" + spec + "'");
    rest = rest.substr(0, at);
  } else if (default_base) {
    base = default_base(region.name);
  }
  if (!base)
    throw InvalidArgument("bad input spec '" + spec +
                          "', expected name=file@hexaddr");
  region.base = *base;
  const std::string data = ReadFile(rest);
  region.bytes.assign(data.begin(), data.end());
  return region;
}

// name=LEN@hexaddr: LEN copies of the fill byte.
InputRegion ParseFillSpec(const std::string &spec, uint8_t fill) {
  const size_t eq = spec.find('=');
  const size_t at = spec.rfind('@');
  if (eq == std::string::npos || eq == 0 || at == std::string::npos ||
      at < eq)
    throw InvalidArgument("bad fill spec '" + spec +
                          "', expected name=LEN@hexaddr");
  InputRegion region;
  region.name = spec.substr(0, eq);
  const std::string len = spec.substr(eq + 1, at - eq - 1);
  if (len.empty() || len.size() > 7 ||
      len.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidArgument("bad length in fill spec '" + spec + "'");
  region.base = ParseHex(spec.substr(at + 1), "'" + spec + "'");
  region.bytes.assign(std::stoul(len), fill);
  return region;
}

InputImage BuildInputs(const std::vector<std::string> &inputs,
                       const std::vector<std::string> &fills, uint8_t fill) {
  InputImage image;
  for (const auto &spec : inputs) image.regions.push_back(ParseInputSpec(spec));
  for (const auto &spec : fills)
    image.regions.push_back(ParseFillSpec(spec, fill));
  ValidateInputs(image);
  return image;
}

std::string DescribeRun(const Program &program, const MachineState &s) {
  std::string out = std::string(RunStatusName(s.status));
  if (s.status == RunStatus::kHalted) out += " exit=" + std::to_string(s.exit_code);
  if (s.status == RunStatus::kFault)
    out += " at " + program.FormatPc(s.fault_pc) + ": " + s.fault;
  out += " steps=" + std::to_string(s.steps);
  return out;
}

ExternalPolicy MakePolicy(const Program &program, const std::string &name,
                          const std::vector<std::string> &maps) {
  auto mode = ParsePolicy(name);
  if (!mode) throw InvalidArgument("unknown policy '" + name + "'");
  ExternalPolicy policy{*mode, nullptr};
  if (!maps.empty())
    policy.map = std::make_shared<const ExecutionMap>(
        BuildMapFromFiles(program, maps));
  if (*mode == PolicyMode::kMapped && !policy.map)
    throw InvalidArgument("--policy mapped requires --map");
  return policy;
}

struct Options {
  std::string program;
  std::string output;
  std::vector<std::string> inputs;
  std::vector<std::string> fills;
  std::vector<std::string> symbolic;
  std::vector<std::string> maps;
  std::vector<std::string> preruns;
  std::string policy = "halt";
  std::string target;
  std::string order = "directed";
  std::string check = "sampled";
  std::string db;
  std::string report;
  std::string ground_truth;
  uint64_t fuel = kDefaultFuel;
  uint32_t loop_bound = 128;
  size_t max_states = 4096;
  size_t max_solver_calls = 512;
  uint64_t max_decisions = 1'000'000;
  double max_seconds = 10.0;
  unsigned jobs = 1;
  uint32_t file_len = 8;
  int fill_byte = 0x58;
  int seed_byte = 0x00;
  bool dot = false;
  bool dump = false;
  bool stamp = false;
  bool restrict_to_map = false;
};

void Emit(const Options &o, const std::string &text) {
  if (o.output.empty()) {
    std::cout << text;
  } else {
    WriteFile(o.output, text);
  }
}

int CmdAsm(const Options &o) {
  const std::string source = ReadFile(o.program);
  Program program = AssembleProgram(source);
  std::string out;
  for (const auto &m : program.modules()) out += Disassemble(m);
  Emit(o, out);
  return kExitOk;
}

int CmdRun(const Options &o) {
  Program program = LoadProgram(o.program);
  InputImage inputs = BuildInputs(o.inputs, o.fills, o.fill_byte);
  RunResult r = Run(program, LoadImage(program, inputs), o.fuel);
  std::cout << DescribeRun(program, r.state) << "\n";
  return kExitOk;
}

int CmdTrace(const Options &o) {
  Program program = LoadProgram(o.program);
  InputImage inputs = BuildInputs(o.inputs, o.fills, o.fill_byte);
  Emit(o, RecordReplay(program, inputs, o.fuel));
  return kExitOk;
}

int CmdCfg(const Options &o) {
  Program program = LoadProgram(o.program);
  Cfg cfg = BuildCfg(program);
  Emit(o, o.dot ? cfg.ToDot(program) : cfg.ToText(program));
  return kExitOk;
}

int CmdSolve(const Options &o) {
  std::vector<BoolExpr> constraints = ParseConstraints(ReadFile(o.program));
  SolverBudget budget{o.max_decisions, o.max_seconds};
  SolveResult r = Solve(constraints, budget);
  std::string out = std::string(VerdictName(r.verdict)) + "\n";
  for (const auto &[var, value] : r.assignment) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", value);
    out += "var " + var.region + " " + std::to_string(var.index) + " = " +
           buf + "\n";
  }
  Emit(o, out);
  return kExitOk;
}

ConsistencyCheck ParseCheck(const std::string &name) {
  if (name == "off") return ConsistencyCheck::kOff;
  if (name == "sampled") return ConsistencyCheck::kSampled;
  if (name == "every") return ConsistencyCheck::kEveryStep;
  throw InvalidArgument("unknown check mode '" + name + "'");
}

int CmdConcolic(const Options &o) {
  Program program = LoadProgram(o.program);
  InputImage inputs = BuildInputs(o.inputs, o.fills, o.fill_byte);
  ExternalPolicy policy = MakePolicy(program, o.policy, o.maps);
  SymbolicMarks marks{{o.symbolic.begin(), o.symbolic.end()}};
  ConcolicResult r = ExecuteConcolic(program, inputs, marks, policy,
                                     {o.fuel, ParseCheck(o.check)});
  std::string out = "outcome " + std::string(OutcomeName(r.outcome.kind));
  switch (r.outcome.kind) {
    case OutcomeKind::kHalted:
      out += " exit=" + std::to_string(r.outcome.exit_code);
      break;
    case OutcomeKind::kFault:
      out += " at " + program.FormatPc(r.outcome.pc) + ": " + r.outcome.detail;
      break;
    case OutcomeKind::kPolicyHalt:
      out += " symbol=" + r.outcome.detail + " at " +
             program.FormatPc(r.outcome.pc);
      break;
    case OutcomeKind::kFuelExhausted:
      break;
  }
  out += "\nconstraints " + std::to_string(r.path.size()) + "\n";
  out += "consistency_violations " +
         std::to_string(r.consistency_violations) + "\n";
  if (o.dump) out += ToString(r.path, &program);
  Emit(o, out);
  if (r.consistency_violations > 0) {
    std::cerr << "consistency violation: " << r.first_violation << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

SearchConfig MakeConfig(const Options &o) {
  SearchConfig config;
  config.loop_bound = o.loop_bound;
  config.max_states = o.max_states;
  config.max_solver_calls = o.max_solver_calls;
  config.solver = {o.max_decisions, o.max_seconds};
  config.fuel = o.fuel;
  config.jobs = o.jobs;
  config.check = ParseCheck(o.check);
  if (o.order == "directed") {
    config.order = SearchOrder::kDirected;
  } else if (o.order == "fifo") {
    config.order = SearchOrder::kFifo;
  } else {
    throw InvalidArgument("unknown order '" + o.order + "'");
  }
  ValidateConfig(config);
  return config;
}

int CmdSearch(const Options &o) {
  Program program = LoadProgram(o.program);
  const TargetSpec target = TargetSpec::Label(o.target);
  ResolveTarget(program, target);
  InputImage inputs = BuildInputs(o.inputs, o.fills, o.fill_byte);
  ExternalPolicy policy = MakePolicy(program, o.policy, o.maps);
  SearchConfig config = MakeConfig(o);
  if (o.restrict_to_map) {
    if (!policy.map) throw InvalidArgument("--restrict-to-map requires --map");
    config.restrict_to_map = *policy.map;
  }
  SymbolicMarks marks{{o.symbolic.begin(), o.symbolic.end()}};
  SearchResult r =
      DirectedSearch(program, inputs, marks, target, policy, config);
  const std::string report = SearchReportJson(program, r, o.stamp);
  if (o.report.empty()) {
    std::cout << report;
  } else {
    WriteFile(o.report, report);
    std::cout << SearchVerdictName(r.verdict) << "\n";
  }
  return r.verdict == SearchVerdict::kWitness ? kExitOk : kExitNotReached;
}

int CmdExtract(const Options &o) {
  Program scanner = LoadProgram(o.program);
  ExtractionRequest request;
  request.db_text = ReadFile(o.db);
  request.file_length = o.file_len;
  request.target = TargetSpec::Label(o.target);
  ResolveTarget(scanner, request.target);
  auto mode = ParsePolicy(o.policy);
  if (!mode) throw InvalidArgument("unknown policy '" + o.policy + "'");
  request.policy = *mode;
  request.config = MakeConfig(o);
  request.seed_byte = static_cast<uint8_t>(o.seed_byte);
  if (!o.ground_truth.empty()) request.ground_truth = o.ground_truth;
  const std::string db_text = FormatDb(ParseDb(request.db_text));
  auto default_base = [](const std::string &name) -> std::optional<uint32_t> {
    if (name == kDbRegion) return kDbBase;
    if (name == kFileRegion) return kFileBase;
    return std::nullopt;
  };
  for (const auto &spec : o.preruns) {
    InputRegion region = ParseInputSpec(spec, default_base);
    InputImage image = ScannerInputs(db_text, {});
    if (InputRegion *existing = image.Find(region.name)) {
      *existing = std::move(region);
    } else {
      image.regions.push_back(std::move(region));
    }
    ValidateInputs(image);
    request.preruns.push_back(std::move(image));
  }
  ExtractionReport report = ExtractSignature(scanner, request);
  const std::string json = ExtractionReportJson(report, o.stamp);
  if (o.report.empty()) {
    std::cout << json;
  } else {
    WriteFile(o.report, json);
  }
  std::cout << SearchVerdictName(report.outcome) << " verification="
            << CheckName(report.verification)
            << " equality=" << CheckName(report.equality)
            << " recovered=" << HexBytes(report.recovered_pattern) << "\n";
  if (report.outcome != SearchVerdict::kWitness) return kExitNotReached;
  if (report.verification != Check::kPass) {
    std::cerr << "witness failed concrete verification\n";
    return kExitInternal;
  }
  return kExitOk;
}

void AddInputOptions(CLI::App *cmd, Options &o) {
  cmd->add_option("--input", o.inputs, "Input region name=file@hexaddr");
  cmd->add_option("--fill", o.fills,
                  "Input region of fill bytes, name=LEN@hexaddr");
  cmd->add_option("--fill-byte", o.fill_byte, "Byte used by --fill")
      ->check(CLI::Range(0, 255));
  cmd->add_option("--fuel", o.fuel, "Instruction budget")
      ->check(CLI::PositiveNumber);
}

void AddSearchOptions(CLI::App *cmd, Options &o) {
  cmd->add_option("--target", o.target, "Target label or module:index")
      ->required();
  cmd->add_option("--policy", o.policy, "halt|concretize|mapped");
  cmd->add_option("--loop-bound", o.loop_bound, "Max visits per block")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-states", o.max_states, "Max frontier size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-solver-calls", o.max_solver_calls,
                  "Max solver invocations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-decisions", o.max_decisions,
                  "Solver decision budget per call")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-seconds", o.max_seconds,
                  "Solver time budget per call")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", o.jobs, "Parallel solver jobs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--order", o.order, "directed|fifo");
  cmd->add_option("--check", o.check, "Consistency check: off|sampled|every");
  cmd->add_option("--report", o.report, "Report output file");
  cmd->add_flag("--stamp", o.stamp, "Add a timestamp to the report");
}

int Main(int argc, char **argv) {
  CLI::App app{"Concolic execution and signature extraction toolkit", "cosig"};
  app.require_subcommand(1);
  Options o;

  auto *asm_cmd = app.add_subcommand("asm", "Assemble and validate a program");
  asm_cmd->add_option("source", o.program, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", o.output, "Output file");

  auto *run_cmd = app.add_subcommand("run", "Run a program concretely");
  run_cmd->add_option("program", o.program, "Program file or corpus:<name>")
      ->required();
  AddInputOptions(run_cmd, o);

  auto *trace_cmd = app.add_subcommand("trace", "Record a trace file");
  trace_cmd->add_option("program", o.program, "Program file or corpus:<name>")
      ->required();
  AddInputOptions(trace_cmd, o);
  trace_cmd->add_option("-o,--output", o.output, "Output file");

  auto *cfg_cmd = app.add_subcommand("cfg", "Print the control-flow graph");
  cfg_cmd->add_option("program", o.program, "Program file or corpus:<name>")
      ->required();
  cfg_cmd->add_flag("--dot", o.dot, "Graphviz output");
  cfg_cmd->add_option("-o,--output", o.output, "Output file");

  auto *solve_cmd = app.add_subcommand("solve", "Solve a constraint file");
  solve_cmd->add_option("constraints", o.program, "Constraint file")
      ->required();
  solve_cmd->add_option("--max-decisions", o.max_decisions, "Decision budget")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-seconds", o.max_seconds, "Time budget")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("-o,--output", o.output, "Output file");

  auto *concolic_cmd =
      app.add_subcommand("concolic", "Run concolically and collect constraints");
  concolic_cmd
      ->add_option("program", o.program, "Program file or corpus:<name>")
      ->required();
  AddInputOptions(concolic_cmd, o);
  concolic_cmd->add_option("--symbolic", o.symbolic, "Symbolic region name");
  concolic_cmd->add_option("--policy", o.policy, "halt|concretize|mapped");
  concolic_cmd->add_option("--map", o.maps, "Trace files for the map");
  concolic_cmd->add_option("--check", o.check,
                           "Consistency check: off|sampled|every");
  concolic_cmd->add_flag("--dump-constraints", o.dump,
                         "Print the path condition");
  concolic_cmd->add_option("-o,--output", o.output, "Output file");

  auto *search_cmd =
      app.add_subcommand("search", "Search for an input reaching a target");
  search_cmd->add_option("program", o.program, "Program file or corpus:<name>")
      ->required();
  AddInputOptions(search_cmd, o);
  search_cmd->add_option("--symbolic", o.symbolic, "Symbolic region name");
  search_cmd->add_option("--map", o.maps, "Trace files for the map");
  search_cmd->add_flag("--restrict-to-map", o.restrict_to_map,
                       "Only explore paths inside the map");
  AddSearchOptions(search_cmd, o);

  auto *extract_cmd =
      app.add_subcommand("extract", "Recover a signature from a scanner");
  extract_cmd
      ->add_option("scanner", o.program, "Program file or corpus:<name>")
      ->required();
  extract_cmd->add_option("--db", o.db, "Signature database")->required();
  extract_cmd->add_option("--file-len", o.file_len, "Symbolic file length")
      ->check(CLI::PositiveNumber);
  extract_cmd->add_option("--prerun", o.preruns,
                          "Pre-run input, name=file[@hexaddr]");
  extract_cmd->add_option("--ground-truth", o.ground_truth,
                          "Rule to compare the recovered bytes against");
  extract_cmd->add_option("--seed-byte", o.seed_byte,
                          "Initial value of symbolic file bytes")
      ->check(CLI::Range(0, 255));
  extract_cmd->add_option("--fuel", o.fuel, "Instruction budget")
      ->check(CLI::PositiveNumber);
  AddSearchOptions(extract_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*asm_cmd) return CmdAsm(o);
    if (*run_cmd) return CmdRun(o);
    if (*trace_cmd) return CmdTrace(o);
    if (*cfg_cmd) return CmdCfg(o);
    if (*solve_cmd) return CmdSolve(o);
    if (*concolic_cmd) return CmdConcolic(o);
    if (*search_cmd) return CmdSearch(o);
    if (*extract_cmd) return CmdExtract(o);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::kInternal ? kExitInternal : kExitInput;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace cosig

int main(int argc, char **argv) { return cosig::Main(argc, argv); }
