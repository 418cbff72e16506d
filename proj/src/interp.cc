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

#include "cosig/interp.h"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <string>

#include "cosig/error.h"

namespace cosig {
namespace {

constexpr uint32_t kMaxNativeLength = 1u << 20;

bool AddressOk(uint32_t addr, uint32_t size) {
  return addr >= kNullPageEnd && addr <= 0xFFFFFFFFu - (size - 1);
}

void SetFault(MachineState &state, ModulePc pc, std::string reason) {
  state.status = RunStatus::kFault;
  state.fault = std::move(reason);
  state.fault_pc = pc;
}

std::string Hex32(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%x", v);
  return buf;
}

// Compares `n` bytes; nullopt on an invalid address.
std::optional<bool> NativeEqual(const MachineState &state, uint32_t a,
                                uint32_t b, uint32_t n) {
  if (n == 0) return true;
  if (n > kMaxNativeLength || !AddressOk(a, n) || !AddressOk(b, n))
    return std::nullopt;
  for (uint32_t i = 0; i < n; ++i) {
    if (state.Read8(a + i) != state.Read8(b + i)) return false;
  }
  return true;
}

}  // namespace

const InputRegion *InputImage::Find(std::string_view name) const {
  for (const auto &r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

InputRegion *InputImage::Find(std::string_view name) {
  for (auto &r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void ValidateInputs(const InputImage &inputs) {
  if (inputs.regions.size() > kMaxInputRegions)
    throw InvalidArgument("too many input regions");
  std::vector<std::pair<uint64_t, uint64_t>> spans;
  std::set<std::string> names;
  for (const auto &r : inputs.regions) {
    if (!names.insert(r.name).second)
      throw InvalidArgument("duplicate input region '" + r.name + "'");
    const uint64_t begin = r.base;
    const uint64_t end = begin + r.bytes.size();
    if (end > 0x100000000ull)
      throw InvalidArgument("input region '" + r.name + "' wraps memory");
    if (!r.bytes.empty() &&
        (begin < kNullPageEnd ||
         (begin < kInputTableBase + 8 * kMaxInputRegions &&
          end > kInputTableBase)))
      throw InvalidArgument("input region '" + r.name +
                            "' overlaps reserved memory");
    spans.emplace_back(begin, end);
  }
  for (size_t i = 0; i < spans.size(); ++i) {
    for (size_t j = i + 1; j < spans.size(); ++j) {
      if (spans[i].first < spans[j].second &&
          spans[j].first < spans[i].second)
        throw InvalidArgument("overlapping input regions '" +
                              inputs.regions[i].name + "' and '" +
                              inputs.regions[j].name + "'");
    }
  }
}

std::string_view RunStatusName(RunStatus status) {
  switch (status) {
    case RunStatus::kRunning:
      return "running";
    case RunStatus::kHalted:
      return "halted";
    case RunStatus::kFault:
      return "fault";
    case RunStatus::kFuelExhausted:
      return "fuel-exhausted";
  }
  return "?";
}

uint8_t MachineState::Read8(uint32_t addr) const {
  auto it = memory.find(addr);
  return it == memory.end() ? 0 : it->second;
}

uint32_t MachineState::Read32(uint32_t addr) const {
  uint32_t v = 0;
  for (uint32_t i = 0; i < 4; ++i) v |= uint32_t{Read8(addr + i)} << (8 * i);
  return v;
}

void MachineState::Write32(uint32_t addr, uint32_t v) {
  for (uint32_t i = 0; i < 4; ++i) memory[addr + i] = (v >> (8 * i)) & 0xFF;
}

MachineState LoadImage(const Program &program, const InputImage &inputs) {
  ValidateInputs(inputs);
  MachineState state;
  state.pc = program.entry();
  for (size_t i = 0; i < inputs.regions.size(); ++i) {
    const InputRegion &r = inputs.regions[i];
    for (size_t j = 0; j < r.bytes.size(); ++j)
      state.memory[r.base + static_cast<uint32_t>(j)] = r.bytes[j];
    state.Write32(kInputTableBase + 8 * i, r.base);
    state.Write32(kInputTableBase + 8 * i + 4,
                  static_cast<uint32_t>(r.bytes.size()));
  }
  return state;
}

StepEffect Step(const Program &program, MachineState &state, Trace &trace) {
  StepEffect effect;
  const ModulePc pc = state.pc;
  effect.pc = pc;
  if (!program.Valid(pc)) {
    SetFault(state, pc, "pc out of range");
    return effect;
  }
  if (program.IsLeader(pc)) {
    trace.events.emplace_back(TraceEvent::kBlock, trace.blocks.size());
    trace.blocks.push_back(pc);
  }
  const Instruction &insn = program.at(pc);
  effect.insn = &insn;
  ++state.steps;
  auto &regs = state.regs;
  ModulePc next{pc.module, pc.index + 1};
  const uint32_t a = regs[insn.ra];
  const uint32_t b = regs[insn.rb];

  switch (insn.op) {
    case Opcode::kConst:
      regs[insn.rd] = static_cast<uint32_t>(insn.imm);
      break;
    case Opcode::kMov:
      regs[insn.rd] = a;
      break;
    case Opcode::kAdd:
      regs[insn.rd] = a + b;
      break;
    case Opcode::kSub:
      regs[insn.rd] = a - b;
      break;
    case Opcode::kMul:
      regs[insn.rd] = a * b;
      break;
    case Opcode::kAnd:
      regs[insn.rd] = a & b;
      break;
    case Opcode::kOr:
      regs[insn.rd] = a | b;
      break;
    case Opcode::kXor:
      regs[insn.rd] = a ^ b;
      break;
    case Opcode::kShl:
      regs[insn.rd] = a << (b & 31);
      break;
    case Opcode::kShr:
      regs[insn.rd] = a >> (b & 31);
      break;
    case Opcode::kEq:
      regs[insn.rd] = a == b ? 1 : 0;
      break;
    case Opcode::kLt:
      regs[insn.rd] = a < b ? 1 : 0;
      break;
    case Opcode::kLoad8:
    case Opcode::kLoad32:
    case Opcode::kStore8:
    case Opcode::kStore32: {
      const uint32_t addr = a + static_cast<uint32_t>(insn.imm);
      const bool wide =
          insn.op == Opcode::kLoad32 || insn.op == Opcode::kStore32;
      effect.address = addr;
      if (!AddressOk(addr, wide ? 4 : 1)) {
        SetFault(state, pc, "invalid address " + Hex32(addr));
        return effect;
      }
      switch (insn.op) {
        case Opcode::kLoad8:
          regs[insn.rd] = state.Read8(addr);
          break;
        case Opcode::kLoad32:
          regs[insn.rd] = state.Read32(addr);
          break;
        case Opcode::kStore8:
          state.Write8(addr, b & 0xFF);
          break;
        default:
          state.Write32(addr, b);
          break;
      }
      break;
    }
    case Opcode::kJmp:
      next.index = insn.target;
      break;
    case Opcode::kJz:
    case Opcode::kJnz:
      effect.taken = (insn.op == Opcode::kJz) == (a == 0);
      trace.events.emplace_back(TraceEvent::kBranch, trace.branches.size());
      trace.branches.push_back({pc, effect.taken});
      if (effect.taken) next.index = insn.target;
      break;
    case Opcode::kCall:
      if (state.stack.size() >= state.max_stack) {
        SetFault(state, pc, "stack overflow");
        return effect;
      }
      state.stack.push_back({next, -1});
      next.index = insn.target;
      break;
    case Opcode::kRet: {
      if (state.stack.empty()) {
        SetFault(state, pc, "return with empty call stack");
        return effect;
      }
      const Frame frame = state.stack.back();
      state.stack.pop_back();
      if (frame.xcall >= 0) {
        trace.xcalls[frame.xcall].result = regs[0];
        effect.returned_from_xcall = true;
      }
      next = frame.ret;
      break;
    }
    case Opcode::kXcall: {
      const ExternalTarget target = program.ResolveExternal(insn.symbol);
      effect.external = target.kind;
      ExternalCall call{insn.symbol, {regs[0], regs[1], regs[2], regs[3]}, 0,
                        "native"};
      if (target.kind == ExternalKind::kUnresolved) {
        SetFault(state, pc, "unresolved external '" + insn.symbol + "'");
        return effect;
      }
      if (target.kind == ExternalKind::kLibrary) {
        if (state.stack.size() >= state.max_stack) {
          SetFault(state, pc, "stack overflow");
          return effect;
        }
        call.via = program.module(target.entry.module).name;
        if (state.loaded.insert(target.entry.module).second) {
          trace.events.emplace_back(TraceEvent::kLoad, trace.loads.size());
          trace.loads.push_back(call.via);
        }
        state.stack.push_back({next, static_cast<int32_t>(trace.xcalls.size())});
        next = target.entry;
      } else {
        auto equal = NativeEqual(state, regs[0], regs[1], regs[2]);
        if (!equal) {
          SetFault(state, pc, "invalid address in native '" + insn.symbol + "'");
          return effect;
        }
        if (insn.symbol == "mem.cmp") {
          regs[0] = *equal ? 0 : 1;
        } else {
          regs[0] = *equal ? 1 : 0;
        }
        call.result = regs[0];
      }
      trace.events.emplace_back(TraceEvent::kXcall, trace.xcalls.size());
      trace.xcalls.push_back(std::move(call));
      break;
    }
    case Opcode::kHalt:
      state.status = RunStatus::kHalted;
      state.exit_code = a;
      return effect;
  }
  state.pc = next;
  if (!program.Valid(next)) SetFault(state, pc, "fell off end of module");
  return effect;
}

RunResult Run(const Program &program, MachineState state, uint64_t fuel) {
  RunResult result{std::move(state), {}};
  MachineState &s = result.state;
  while (s.status == RunStatus::kRunning && fuel > 0) {
    Step(program, s, result.trace);
    --fuel;
  }
  if (s.status == RunStatus::kRunning) s.status = RunStatus::kFuelExhausted;
  return result;
}

std::string RecordReplay(const Program &program, const InputImage &inputs,
                         uint64_t fuel) {
  RunResult result = Run(program, LoadImage(program, inputs), fuel);
  return WriteTraceFile(program, result.trace);
}

}  // namespace cosig
