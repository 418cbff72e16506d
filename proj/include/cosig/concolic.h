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

// Concolic execution: runs a program concretely while shadowing marked
// input bytes with symbolic expressions, and records the constraint each
// input-dependent branch imposes along the concrete path.
//
// External calls follow one of three policies:
//   kHalt        stop when an external call receives a symbolic argument.
//   kConcretize  drop argument and result shadows and run the callee
//                concretely; no constraint records what was lost.
//   kMapped      follow library bytecode with full shadow propagation, but
//                only for call sites present in a pre-recorded map.

#ifndef COSIG_CONCOLIC_H_
#define COSIG_CONCOLIC_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "cosig/execution_map.h"
#include "cosig/interp.h"
#include "cosig/program.h"
#include "cosig/symexpr.h"

namespace cosig {

enum class PolicyMode : uint8_t { kHalt, kConcretize, kMapped };

std::string_view PolicyName(PolicyMode mode);
std::optional<PolicyMode> ParsePolicy(std::string_view name);

struct ExternalPolicy {
  PolicyMode mode = PolicyMode::kHalt;
  std::shared_ptr<const ExecutionMap> map;  // required for kMapped

  static ExternalPolicy Halt() { return {PolicyMode::kHalt, nullptr}; }
  static ExternalPolicy Concretize() {
    return {PolicyMode::kConcretize, nullptr};
  }
  static ExternalPolicy Mapped(ExecutionMap map) {
    return {PolicyMode::kMapped,
            std::make_shared<const ExecutionMap>(std::move(map))};
  }
};

struct SymbolicMarks {
  std::set<std::string> regions;
};

enum class ConsistencyCheck : uint8_t {
  kOff,
  kSampled,    // every 256 steps
  kEveryStep,  // debug mode
};

struct ConcolicOptions {
  uint64_t fuel = kDefaultFuel;
  ConsistencyCheck check = ConsistencyCheck::kSampled;
};

enum class OutcomeKind : uint8_t {
  kHalted,
  kFault,
  kFuelExhausted,
  kPolicyHalt,
};

std::string_view OutcomeName(OutcomeKind kind);

struct ConcolicOutcome {
  OutcomeKind kind = OutcomeKind::kHalted;
  uint32_t exit_code = 0;  // kHalted
  std::string detail;      // fault reason, or the symbol for kPolicyHalt
  ModulePc pc;
};

// Symbolic counterpart of a register: either a 32-bit expression or, for
// comparison results, a predicate whose truth is the register's 0/1 value.
struct Shadow {
  Expr bv;
  BoolExpr pred;
};

struct ConcolicResult {
  Trace trace;
  PathCondition path;
  ConcolicOutcome outcome;
  MachineState state;
  uint64_t consistency_checks = 0;
  uint64_t consistency_violations = 0;
  std::string first_violation;
};

class ConcolicMachine {
 public:
  ConcolicMachine(const Program &program, const InputImage &inputs,
                  const SymbolicMarks &marks, ExternalPolicy policy,
                  ConcolicOptions options = {});

  // Executes one instruction; returns false once execution has stopped.
  bool StepOnce();
  void Run();
  bool stopped() const;

  // Handles the XCALL at the current pc under the configured policy,
  // including executing it when the policy allows.
  void ApplyExternal();

  const MachineState &state() const { return state_; }
  const Trace &trace() const { return trace_; }
  const PathCondition &path() const { return path_; }
  const std::optional<Shadow> &register_shadow(int r) const {
    return regs_[r];
  }
  const std::unordered_map<uint32_t, Expr> &memory_shadow() const {
    return memory_;
  }

  // Checks every present shadow slot against the concrete state; returns
  // the number of mismatches.
  uint64_t CheckConsistency();

  ConcolicResult Finish() &&;

 private:
  Expr AsBv(int reg, ModulePc site);
  void Pin(const BoolExpr &constraint, ModulePc site);
  void SetReg(int reg, std::optional<Shadow> shadow);
  void SetRegBv(int reg, const Expr &e);
  void SetRegPred(int reg, const BoolExpr &p);
  void AddBranch(const BoolExpr &constraint, ModulePc site, bool taken);
  void StepSymbolic();
  void StepAlu(const Instruction &insn, ModulePc pc);
  Expr MemoryByte(uint32_t addr) const;
  void WriteMemoryShadow(uint32_t addr, const Expr &byte);
  void ExecuteConcrete();
  bool concrete_mode() const { return concrete_depth_ > 0; }

  const Program &program_;
  ExternalPolicy policy_;
  ConcolicOptions options_;
  MachineState state_;
  Trace trace_;
  PathCondition path_;
  std::array<std::optional<Shadow>, kNumRegisters> regs_;
  std::array<uint32_t, kNumRegisters> pre_regs_{};
  std::unordered_map<uint32_t, Expr> memory_;
  std::unordered_map<std::string, const std::vector<uint8_t> *> symbolic_;
  size_t concrete_depth_ = 0;
  bool policy_halted_ = false;
  std::string policy_symbol_;
  ModulePc policy_pc_;
  uint64_t checks_ = 0;
  uint64_t violations_ = 0;
  std::string first_violation_;
  InputImage inputs_;
};

ConcolicResult ExecuteConcolic(const Program &program, const InputImage &inputs,
                               const SymbolicMarks &marks,
                               const ExternalPolicy &policy,
                               const ConcolicOptions &options = {});

// Keeps pc[0..k), negates pc[k] and drops the rest.
PathCondition NegateAt(const PathCondition &pc, size_t k);

// Overwrites the bytes named by `a` in a copy of `inputs`.
InputImage PatchInputs(const InputImage &inputs, const Assignment &a);

// Current input bytes of every marked region as an assignment.
Assignment InputAssignment(const InputImage &inputs,
                           const SymbolicMarks &marks);

}  // namespace cosig

#endif  // COSIG_CONCOLIC_H_
