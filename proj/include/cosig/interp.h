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

// Concrete interpreter with input regions mapped into memory and trace
// recording.
//
// Memory layout conventions:
//   [0x0000, 0x0100)  null page; any access faults
//   0x0F00 + 8*i      input table: (base, length) words for region i
// Unwritten bytes read as zero.

#ifndef COSIG_INTERP_H_
#define COSIG_INTERP_H_

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cosig/program.h"

namespace cosig {

inline constexpr uint32_t kNullPageEnd = 0x100;
inline constexpr uint32_t kInputTableBase = 0x0F00;
inline constexpr uint32_t kMaxInputRegions = 32;
inline constexpr uint32_t kDefaultMaxStack = 1024;
inline constexpr uint64_t kDefaultFuel = 1'000'000;

struct InputRegion {
  std::string name;
  uint32_t base = 0;
  std::vector<uint8_t> bytes;

  bool operator==(const InputRegion &) const = default;
};

struct InputImage {
  std::vector<InputRegion> regions;

  const InputRegion *Find(std::string_view name) const;
  InputRegion *Find(std::string_view name);
  bool operator==(const InputImage &) const = default;
};

// Checks region shapes: unique names, no overlap with each other, the null
// page or the input table, and no 32-bit wraparound.
void ValidateInputs(const InputImage &inputs);

enum class RunStatus : uint8_t { kRunning, kHalted, kFault, kFuelExhausted };

std::string_view RunStatusName(RunStatus status);

struct Frame {
  ModulePc ret;
  int32_t xcall = -1;  // index into Trace::xcalls when entered via XCALL
  bool operator==(const Frame &) const = default;
};

struct MachineState {
  std::array<uint32_t, kNumRegisters> regs{};
  ModulePc pc;
  std::unordered_map<uint32_t, uint8_t> memory;
  std::vector<Frame> stack;
  uint32_t max_stack = kDefaultMaxStack;
  RunStatus status = RunStatus::kRunning;
  uint32_t exit_code = 0;
  std::string fault;
  ModulePc fault_pc;
  uint64_t steps = 0;
  std::set<uint32_t> loaded;  // library modules entered so far

  uint8_t Read8(uint32_t addr) const;
  uint32_t Read32(uint32_t addr) const;
  void Write8(uint32_t addr, uint8_t v) { memory[addr] = v; }
  void Write32(uint32_t addr, uint32_t v);

  bool operator==(const MachineState &) const = default;
};

struct BranchRecord {
  ModulePc pc;
  bool taken = false;
  bool operator==(const BranchRecord &) const = default;
};

struct ExternalCall {
  std::string symbol;
  std::array<uint32_t, 4> args{};
  uint32_t result = 0;
  std::string via;  // library name or "native"
  bool operator==(const ExternalCall &) const = default;
};

enum class TraceEvent : uint8_t { kBlock, kBranch, kXcall, kLoad };

struct Trace {
  std::vector<ModulePc> blocks;  // start pc of each block entered
  std::vector<BranchRecord> branches;
  std::vector<ExternalCall> xcalls;
  std::vector<std::string> loads;
  // Interleaving of the vectors above in execution order.
  std::vector<std::pair<TraceEvent, uint32_t>> events;

  bool operator==(const Trace &) const = default;
};

// What a single step did, for observers layered on the interpreter.
struct StepEffect {
  ModulePc pc;
  const Instruction *insn = nullptr;
  uint32_t address = 0;  // effective address of LOAD/STORE
  bool taken = false;    // JZ/JNZ
  ExternalKind external = ExternalKind::kUnresolved;  // XCALL target kind
  bool returned_from_xcall = false;                   // RET popped an XCALL
};

MachineState LoadImage(const Program &program, const InputImage &inputs);

// Executes one instruction of a running state. Faults set the state's
// status instead of throwing.
StepEffect Step(const Program &program, MachineState &state, Trace &trace);

struct RunResult {
  MachineState state;
  Trace trace;
};

// Runs until HALT, a fault, or `fuel` instructions.
RunResult Run(const Program &program, MachineState state,
              uint64_t fuel = kDefaultFuel);

// Loads, runs and serializes the trace. Faulting runs still produce a trace.
std::string RecordReplay(const Program &program, const InputImage &inputs,
                         uint64_t fuel = kDefaultFuel);

std::string WriteTraceFile(const Program &program, const Trace &trace);
// Fails when the text is malformed or names pcs absent from `program`.
Trace ParseTraceFile(const Program &program, std::string_view text);

}  // namespace cosig

#endif  // COSIG_INTERP_H_
