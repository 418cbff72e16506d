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

// Bytecode instruction set: a 32-bit register machine with eight registers
// and byte-addressable little-endian memory.
//
// Textual assembly, one instruction per line:
//
//   .module str          ; optional, names the module
//   .export match        ; marks a label callable through XCALL
//   match:
//     load8  r3, [r0+0]
//     eq     r5, r3, r4
//     jz     r5, done
//     xcall  mem.cmp
//
// Operand shapes per opcode:
//   CONST rd, imm            MOV rd, ra
//   ADD..LT rd, ra, rb       LOAD8/LOAD32 rd, [ra+imm]
//   STORE8/STORE32 [ra+imm], rb
//   JMP label   JZ/JNZ ra, label   CALL label   RET   XCALL lib.fn   HALT ra
//
// XCALL passes r0..r3 as arguments and returns its result in r0. Library
// code runs on the caller's register file and may clobber every register.

#ifndef COSIG_ISA_H_
#define COSIG_ISA_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cosig {

inline constexpr int kNumRegisters = 8;

enum class Opcode : uint8_t {
  kConst,
  kMov,
  kAdd,
  kSub,
  kMul,
  kAnd,
  kOr,
  kXor,
  kShl,
  kShr,
  kEq,
  kLt,
  kLoad8,
  kLoad32,
  kStore8,
  kStore32,
  kJmp,
  kJz,
  kJnz,
  kCall,
  kRet,
  kXcall,
  kHalt,
};

std::string_view OpcodeName(Opcode op);
std::optional<Opcode> ParseOpcode(std::string_view mnemonic);

// Three-register arithmetic, logic and comparison opcodes.
bool IsAlu(Opcode op);
// JMP, JZ, JNZ and CALL carry a label operand.
bool HasLabel(Opcode op);
// Instructions after which a basic block ends.
bool EndsBlock(Opcode op);

struct Instruction {
  Opcode op = Opcode::kHalt;
  uint8_t rd = 0;  // destination (CONST, MOV, ALU, LOAD)
  uint8_t ra = 0;  // source / address base / branch condition / halt code
  uint8_t rb = 0;  // second source / stored value
  int32_t imm = 0;
  std::string label;   // branch or call target name
  uint32_t target = 0; // resolved instruction index of `label`
  std::string symbol;  // XCALL "lib.fn"

  bool operator==(const Instruction &) const = default;
};

struct ModuleImage {
  std::string name;
  std::vector<Instruction> code;
  std::map<std::string, uint32_t> labels;
  std::set<std::string> exports;

  bool operator==(const ModuleImage &) const = default;

  std::optional<uint32_t> FindLabel(std::string_view label) const;
};

// Assembles one module. A leading `.module` directive overrides
// `default_name`. Errors carry the 1-based source line.
ModuleImage Assemble(std::string_view source,
                     std::string_view default_name = "main");

// Renders `module` so that Assemble(Disassemble(m)) == m.
std::string Disassemble(const ModuleImage &module);

// Splits a multi-module source at `.module` directives and assembles each
// section; the first section is the main module.
std::vector<ModuleImage> AssembleModules(std::string_view source);

std::string FormatInstruction(const Instruction &insn);

}  // namespace cosig

#endif  // COSIG_ISA_H_
