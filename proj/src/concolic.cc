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

#include "cosig/concolic.h"

#include <cstdio>
#include <utility>

#include "cosig/error.h"

namespace cosig {
namespace {

constexpr uint64_t kSampleInterval = 256;

Expr Const32(uint32_t v) { return Expr::Const(32, v); }

Expr Widen(const Expr &byte) { return SimplifyRoot(Expr::ZeroExtend(byte, 32)); }

std::string Hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%x", v);
  return buf;
}

}  // namespace

std::string_view PolicyName(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::kHalt:
      return "halt";
    case PolicyMode::kConcretize:
      return "concretize";
    case PolicyMode::kMapped:
      return "mapped";
  }
  return "?";
}

std::optional<PolicyMode> ParsePolicy(std::string_view name) {
  if (name == "halt") return PolicyMode::kHalt;
  if (name == "concretize") return PolicyMode::kConcretize;
  if (name == "mapped") return PolicyMode::kMapped;
  return std::nullopt;
}

std::string_view OutcomeName(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kHalted:
      return "halted";
    case OutcomeKind::kFault:
      return "fault";
    case OutcomeKind::kFuelExhausted:
      return "fuel-exhausted";
    case OutcomeKind::kPolicyHalt:
      return "policy-halt";
  }
  return "?";
}

ConcolicMachine::ConcolicMachine(const Program &program,
                                 const InputImage &inputs,
                                 const SymbolicMarks &marks,
                                 ExternalPolicy policy,
                                 ConcolicOptions options)
    : program_(program),
      policy_(std::move(policy)),
      options_(options),
      inputs_(inputs) {
  if (policy_.mode == PolicyMode::kMapped && !policy_.map)
    throw InvalidArgument("mapped policy requires an execution map");
  state_ = LoadImage(program_, inputs_);
  for (const auto &name : marks.regions) {
    const InputRegion *r = inputs_.Find(name);
    if (!r) throw InvalidArgument("unknown symbolic region '" + name + "'");
    symbolic_[name] = &r->bytes;
    for (uint32_t i = 0; i < r->bytes.size(); ++i)
      memory_[r->base + i] = Expr::Var(name, i);
  }
}

bool ConcolicMachine::stopped() const {
  return policy_halted_ || state_.status != RunStatus::kRunning;
}

void ConcolicMachine::SetReg(int reg, std::optional<Shadow> shadow) {
  regs_[reg] = std::move(shadow);
}

void ConcolicMachine::SetRegBv(int reg, const Expr &e) {
  if (e.IsConst()) {
    regs_[reg].reset();
  } else {
    regs_[reg] = Shadow{e, {}};
  }
}

void ConcolicMachine::SetRegPred(int reg, const BoolExpr &p) {
  if (p.IsLiteral()) {
    regs_[reg].reset();
  } else {
    regs_[reg] = Shadow{{}, p};
  }
}

void ConcolicMachine::Pin(const BoolExpr &constraint, ModulePc site) {
  BoolExpr c = SimplifyRoot(constraint);
  if (c.IsLiteral() && c.literal()) return;
  path_.push_back({c, site, true, ConstraintKind::kPin,
                   static_cast<uint32_t>(trace_.blocks.size() - 1)});
}

void ConcolicMachine::AddBranch(const BoolExpr &constraint, ModulePc site,
                                bool taken) {
  BoolExpr c = SimplifyRoot(constraint);
  if (c.IsLiteral() && c.literal()) return;
  path_.push_back({c, site, taken, ConstraintKind::kBranch,
                   static_cast<uint32_t>(trace_.blocks.size() - 1)});
}

// Symbolic view of a register's pre-step value. A predicate shadow is pinned
// to its concrete truth value since bitvector terms cannot embed it.
Expr ConcolicMachine::AsBv(int reg, ModulePc site) {
  const auto &s = regs_[reg];
  if (!s) return Const32(pre_regs_[reg]);
  if (s->bv) return s->bv;
  Pin(pre_regs_[reg] ? s->pred : BoolExpr::Not(s->pred), site);
  return Const32(pre_regs_[reg]);
}

Expr ConcolicMachine::MemoryByte(uint32_t addr) const {
  auto it = memory_.find(addr);
  if (it != memory_.end()) return it->second;
  return Expr::Const(8, state_.Read8(addr));
}

void ConcolicMachine::WriteMemoryShadow(uint32_t addr, const Expr &byte) {
  if (byte.IsConst()) {
    memory_.erase(addr);
  } else {
    memory_[addr] = byte;
  }
}

void ConcolicMachine::ExecuteConcrete() {
  const Instruction &insn = program_.at(state_.pc);
  StepEffect effect = Step(program_, state_, trace_);
  if (state_.status != RunStatus::kRunning) return;
  switch (insn.op) {
    case Opcode::kConst:
    case Opcode::kMov:
    case Opcode::kLoad8:
    case Opcode::kLoad32:
      regs_[insn.rd].reset();
      break;
    case Opcode::kStore8:
      memory_.erase(effect.address);
      break;
    case Opcode::kStore32:
      for (uint32_t i = 0; i < 4; ++i) memory_.erase(effect.address + i);
      break;
    case Opcode::kXcall:
      if (effect.external == ExternalKind::kNative) regs_[0].reset();
      break;
    case Opcode::kRet:
      if (state_.stack.size() < concrete_depth_) concrete_depth_ = 0;
      break;
    default:
      if (IsAlu(insn.op)) regs_[insn.rd].reset();
      break;
  }
}

void ConcolicMachine::StepAlu(const Instruction &insn, ModulePc pc) {
  if (insn.op == Opcode::kMov) {
    regs_[insn.rd] = regs_[insn.ra];
    return;
  }
  const auto sa = regs_[insn.ra];
  const auto sb = regs_[insn.rb];
  const uint32_t a = pre_regs_[insn.ra];
  const uint32_t b = pre_regs_[insn.rb];
  const bool pa = sa && sa->pred;
  const bool pb = sb && sb->pred;

  // Predicate algebra keeps comparison results symbolic through the common
  // boolean idioms.
  if ((pa || pb) && !(pa && sb && sb->bv) && !(pb && sa && sa->bv)) {
    const BoolExpr p = pa ? sa->pred : sb->pred;
    const uint32_t other = pa ? b : a;
    const bool both = pa && pb;
    switch (insn.op) {
      case Opcode::kEq:
        if (both) break;
        if (other <= 1) {
          SetRegPred(insn.rd, other ? p : BoolExpr::Not(p));
        } else {
          regs_[insn.rd].reset();
        }
        return;
      case Opcode::kAnd:
        if (both) {
          SetRegPred(insn.rd, BoolExpr::And(sa->pred, sb->pred));
        } else if (other & 1) {
          SetRegPred(insn.rd, p);
        } else {
          regs_[insn.rd].reset();
        }
        return;
      case Opcode::kOr:
        if (both) {
          SetRegPred(insn.rd, BoolExpr::Or(sa->pred, sb->pred));
          return;
        }
        if (other == 0) {
          SetRegPred(insn.rd, p);
          return;
        }
        break;
      case Opcode::kXor:
        if (both) {
          SetRegPred(insn.rd,
                     BoolExpr::Or(BoolExpr::And(sa->pred, BoolExpr::Not(sb->pred)),
                                  BoolExpr::And(BoolExpr::Not(sa->pred), sb->pred)));
          return;
        }
        if (other <= 1) {
          SetRegPred(insn.rd, other ? BoolExpr::Not(p) : p);
          return;
        }
        break;
      default:
        break;
    }
  }

  if (!sa && !sb) {
    regs_[insn.rd].reset();
    return;
  }
  const Expr ea = AsBv(insn.ra, pc);
  const Expr eb = AsBv(insn.rb, pc);
  BinaryOp op;
  switch (insn.op) {
    case Opcode::kEq:
      SetRegPred(insn.rd, SimplifyRoot(BoolExpr::Cmp(CmpOp::kEq, ea, eb)));
      return;
    case Opcode::kLt:
      SetRegPred(insn.rd, SimplifyRoot(BoolExpr::Cmp(CmpOp::kUlt, ea, eb)));
      return;
    case Opcode::kAdd: op = BinaryOp::kAdd; break;
    case Opcode::kSub: op = BinaryOp::kSub; break;
    case Opcode::kMul: op = BinaryOp::kMul; break;
    case Opcode::kAnd: op = BinaryOp::kAnd; break;
    case Opcode::kOr: op = BinaryOp::kOr; break;
    case Opcode::kXor: op = BinaryOp::kXor; break;
    case Opcode::kShl: op = BinaryOp::kShl; break;
    case Opcode::kShr: op = BinaryOp::kShr; break;
    default:
      throw Error(ErrorKind::kInternal, "unexpected ALU opcode");
  }
  SetRegBv(insn.rd, SimplifyRoot(Expr::Binary(op, ea, eb)));
}

void ConcolicMachine::StepSymbolic() {
  const ModulePc pc = state_.pc;
  const Instruction &insn = program_.at(pc);
  pre_regs_ = state_.regs;
  StepEffect effect = Step(program_, state_, trace_);
  if (state_.status == RunStatus::kFault) return;

  switch (insn.op) {
    case Opcode::kConst:
      regs_[insn.rd].reset();
      break;
    case Opcode::kLoad8:
    case Opcode::kLoad32:
    case Opcode::kStore8:
    case Opcode::kStore32: {
      if (regs_[insn.ra]) {
        Expr addr = SimplifyRoot(Expr::Binary(
            BinaryOp::kAdd, AsBv(insn.ra, pc),
            Const32(static_cast<uint32_t>(insn.imm))));
        if (!addr.IsConst())
          Pin(BoolExpr::Cmp(CmpOp::kEq, addr, Const32(effect.address)), pc);
      }
      const uint32_t at = effect.address;
      if (insn.op == Opcode::kLoad8) {
        auto it = memory_.find(at);
        if (it == memory_.end()) {
          regs_[insn.rd].reset();
        } else {
          SetRegBv(insn.rd, Widen(it->second));
        }
      } else if (insn.op == Opcode::kLoad32) {
        bool any = false;
        for (uint32_t i = 0; i < 4; ++i) any |= memory_.contains(at + i);
        if (!any) {
          regs_[insn.rd].reset();
        } else {
          Expr lo = SimplifyRoot(Expr::Concat(MemoryByte(at + 1), MemoryByte(at)));
          Expr hi =
              SimplifyRoot(Expr::Concat(MemoryByte(at + 3), MemoryByte(at + 2)));
          SetRegBv(insn.rd, SimplifyRoot(Expr::Concat(hi, lo)));
        }
      } else {
        const bool symbolic_value = regs_[insn.rb].has_value();
        const uint32_t width = insn.op == Opcode::kStore8 ? 1 : 4;
        if (!symbolic_value) {
          for (uint32_t i = 0; i < width; ++i) memory_.erase(at + i);
        } else {
          const Expr v = AsBv(insn.rb, pc);
          for (uint32_t i = 0; i < width; ++i)
            WriteMemoryShadow(at + i,
                              SimplifyRoot(Expr::Extract(8 * i, 8, v)));
        }
      }
      break;
    }
    case Opcode::kJz:
    case Opcode::kJnz: {
      const auto &s = regs_[insn.ra];
      if (!s) break;
      const bool zero = pre_regs_[insn.ra] == 0;
      BoolExpr c;
      if (s->pred) {
        c = zero ? BoolExpr::Not(s->pred) : s->pred;
      } else {
        c = BoolExpr::Cmp(zero ? CmpOp::kEq : CmpOp::kNe, s->bv, Const32(0));
      }
      AddBranch(c, pc, effect.taken);
      break;
    }
    case Opcode::kXcall:
      if (effect.external == ExternalKind::kNative) regs_[0].reset();
      break;
    case Opcode::kJmp:
    case Opcode::kCall:
    case Opcode::kRet:
    case Opcode::kHalt:
      break;
    default:
      StepAlu(insn, pc);
      break;
  }
}

void ConcolicMachine::ApplyExternal() {
  const ModulePc pc = state_.pc;
  const Instruction &insn = program_.at(pc);
  if (insn.op != Opcode::kXcall)
    throw Error(ErrorKind::kInternal, "ApplyExternal at a non-XCALL pc");
  const ExternalTarget target = program_.ResolveExternal(insn.symbol);
  if (target.kind == ExternalKind::kUnresolved || concrete_mode()) {
    ExecuteConcrete();
    return;
  }
  bool symbolic_args = false;
  for (int r = 0; r < 4; ++r) symbolic_args |= regs_[r].has_value();

  auto policy_halt = [&] {
    policy_halted_ = true;
    policy_symbol_ = insn.symbol;
    policy_pc_ = pc;
  };
  auto concrete_call = [&] {
    ExecuteConcrete();
    if (target.kind == ExternalKind::kLibrary &&
        state_.status == RunStatus::kRunning)
      concrete_depth_ = state_.stack.size();
  };

  switch (policy_.mode) {
    case PolicyMode::kHalt:
      if (symbolic_args) {
        policy_halt();
      } else {
        concrete_call();
      }
      return;
    case PolicyMode::kConcretize:
      for (int r = 0; r < 4; ++r) regs_[r].reset();
      concrete_call();
      return;
    case PolicyMode::kMapped: {
      const bool recorded =
          policy_.map->ContainsCallSite(pc, insn.symbol) &&
          (target.kind != ExternalKind::kLibrary ||
           policy_.map->loads.contains(
               program_.module(target.entry.module).name));
      if (!recorded) {
        policy_halt();
      } else if (target.kind == ExternalKind::kLibrary) {
        StepSymbolic();
      } else if (symbolic_args) {
        policy_halt();
      } else {
        concrete_call();
      }
      return;
    }
  }
}

bool ConcolicMachine::StepOnce() {
  if (stopped()) return false;
  if (state_.steps >= options_.fuel) {
    state_.status = RunStatus::kFuelExhausted;
    return false;
  }
  if (program_.Valid(state_.pc) &&
      program_.at(state_.pc).op == Opcode::kXcall) {
    ApplyExternal();
  } else if (concrete_mode()) {
    ExecuteConcrete();
  } else {
    StepSymbolic();
  }
  if (options_.check == ConsistencyCheck::kEveryStep ||
      (options_.check == ConsistencyCheck::kSampled &&
       state_.steps % kSampleInterval == 0)) {
    CheckConsistency();
  }
  return !stopped();
}

void ConcolicMachine::Run() {
  while (StepOnce()) {
  }
}

uint64_t ConcolicMachine::CheckConsistency() {
  ++checks_;
  VarLookup lookup = [this](const VarRef &v) -> std::optional<uint8_t> {
    auto it = symbolic_.find(v.region);
    if (it == symbolic_.end() || v.index >= it->second->size())
      return std::nullopt;
    return (*it->second)[v.index];
  };
  uint64_t bad = 0;
  auto report = [&](std::string what) {
    ++bad;
    ++violations_;
    if (first_violation_.empty()) first_violation_ = std::move(what);
  };
  for (int r = 0; r < kNumRegisters; ++r) {
    const auto &s = regs_[r];
    if (!s) continue;
    const uint32_t v = s->bv ? Eval(s->bv, lookup)
                             : static_cast<uint32_t>(Eval(s->pred, lookup));
    if (v != state_.regs[r])
      report("r" + std::to_string(r) + " shadow " + Hex(v) + " != " +
             Hex(state_.regs[r]));
  }
  for (const auto &[addr, e] : memory_) {
    const uint32_t v = Eval(e, lookup);
    if (v != state_.Read8(addr))
      report("mem[" + Hex(addr) + "] shadow " + Hex(v) + " != " +
             Hex(state_.Read8(addr)));
  }
  return bad;
}

ConcolicResult ConcolicMachine::Finish() && {
  ConcolicResult result;
  if (policy_halted_) {
    result.outcome = {OutcomeKind::kPolicyHalt, 0, policy_symbol_, policy_pc_};
  } else {
    switch (state_.status) {
      case RunStatus::kHalted:
        result.outcome = {OutcomeKind::kHalted, state_.exit_code, "",
                          state_.pc};
        break;
      case RunStatus::kFault:
        result.outcome = {OutcomeKind::kFault, 0, state_.fault,
                          state_.fault_pc};
        break;
      default:
        result.outcome = {OutcomeKind::kFuelExhausted, 0, "", state_.pc};
        break;
    }
  }
  result.trace = std::move(trace_);
  result.path = std::move(path_);
  result.state = std::move(state_);
  result.consistency_checks = checks_;
  result.consistency_violations = violations_;
  result.first_violation = std::move(first_violation_);
  return result;
}

ConcolicResult ExecuteConcolic(const Program &program, const InputImage &inputs,
                               const SymbolicMarks &marks,
                               const ExternalPolicy &policy,
                               const ConcolicOptions &options) {
  ConcolicMachine machine(program, inputs, marks, policy, options);
  machine.Run();
  if (options.check != ConsistencyCheck::kOff) machine.CheckConsistency();
  return std::move(machine).Finish();
}

PathCondition NegateAt(const PathCondition &pc, size_t k) {
  if (k >= pc.size()) throw InvalidArgument("negation index out of range");
  PathCondition out(pc.begin(), pc.begin() + static_cast<std::ptrdiff_t>(k) + 1);
  out.back().constraint = SimplifyRoot(BoolExpr::Not(out.back().constraint));
  out.back().taken = !out.back().taken;
  return out;
}

InputImage PatchInputs(const InputImage &inputs, const Assignment &a) {
  InputImage out = inputs;
  for (const auto &[var, value] : a) {
    InputRegion *r = out.Find(var.region);
    if (!r || var.index >= r->bytes.size())
      throw InvalidArgument("assignment names unknown byte " + var.ToString());
    r->bytes[var.index] = value;
  }
  return out;
}

Assignment InputAssignment(const InputImage &inputs,
                           const SymbolicMarks &marks) {
  Assignment a;
  for (const auto &name : marks.regions) {
    const InputRegion *r = inputs.Find(name);
    if (!r) continue;
    for (uint32_t i = 0; i < r->bytes.size(); ++i) a[{name, i}] = r->bytes[i];
  }
  return a;
}

}  // namespace cosig
