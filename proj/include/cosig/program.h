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

#ifndef COSIG_PROGRAM_H_
#define COSIG_PROGRAM_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosig/isa.h"

namespace cosig {

// Instruction address inside a linked program. Module 0 is the main module;
// libraries follow in name order.
struct ModulePc {
  uint32_t module = 0;
  uint32_t index = 0;

  auto operator<=>(const ModulePc &) const = default;
};

enum class ExternalKind {
  kLibrary,     // bytecode export of a registered library
  kNative,      // built-in helper (see interp.h)
  kUnresolved,  // faults when called
};

struct ExternalTarget {
  ExternalKind kind = ExternalKind::kUnresolved;
  ModulePc entry;  // valid for kLibrary
};

// A main module linked against named dynamic-library modules. XCALL symbols
// are looked up when they execute, so a program may legally reference
// libraries that were never registered.
class Program {
 public:
  Program() = default;

  const ModuleImage &main() const { return modules_.front(); }
  const std::vector<ModuleImage> &modules() const { return modules_; }
  const ModuleImage &module(uint32_t id) const { return modules_[id]; }
  std::optional<uint32_t> ModuleId(std::string_view name) const;

  ModulePc entry() const { return entry_; }

  const Instruction &at(ModulePc pc) const {
    return modules_[pc.module].code[pc.index];
  }
  bool Valid(ModulePc pc) const {
    return pc.module < modules_.size() &&
           pc.index < modules_[pc.module].code.size();
  }
  // True when `pc` starts a basic block.
  bool IsLeader(ModulePc pc) const { return leaders_[pc.module][pc.index]; }

  ExternalTarget ResolveExternal(std::string_view symbol) const;

  // XCALL symbols that did not resolve against a library export at link
  // time, sorted and unique.
  const std::vector<std::string> &unresolved() const { return unresolved_; }

  // "main:12".
  std::string FormatPc(ModulePc pc) const;
  std::optional<ModulePc> ParsePc(std::string_view text) const;

  // Resolves `label` in the main module, or `module.label` anywhere.
  std::optional<ModulePc> FindLabel(std::string_view label) const;

  bool operator==(const Program &) const = default;

 private:
  friend Program Link(ModuleImage main, std::vector<ModuleImage> libs);

  std::vector<ModuleImage> modules_;
  std::vector<std::vector<bool>> leaders_;
  std::vector<std::string> unresolved_;
  ModulePc entry_;
};

// Fails on duplicate library names, a library sharing the main module's
// name, or a main module without a `main` label.
Program Link(ModuleImage main, std::vector<ModuleImage> libs);

// Assembles a multi-module source and links it.
Program AssembleProgram(std::string_view source);

// Native helpers available to XCALL symbols that name no library.
bool IsNativeSymbol(std::string_view symbol);
std::span<const std::string_view> NativeSymbols();

}  // namespace cosig

#endif  // COSIG_PROGRAM_H_
