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

#include "cosig/program.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <string>
#include <utility>

#include "cosig/error.h"

namespace cosig {
namespace {

constexpr std::array<std::string_view, 2> kNatives = {"mem.cmp", "mem.eq"};

std::vector<bool> ComputeLeaders(const ModuleImage &module) {
  std::vector<bool> leaders(module.code.size(), false);
  if (leaders.empty()) return leaders;
  leaders[0] = true;
  for (size_t i = 0; i < module.code.size(); ++i) {
    const Instruction &insn = module.code[i];
    if (HasLabel(insn.op)) leaders[insn.target] = true;
    if (EndsBlock(insn.op) && i + 1 < module.code.size()) leaders[i + 1] = true;
  }
  // Entry points reached from outside the module.
  for (const auto &name : module.exports) leaders[module.labels.at(name)] = true;
  if (auto main = module.FindLabel("main")) leaders[*main] = true;
  return leaders;
}

}  // namespace

bool IsNativeSymbol(std::string_view symbol) {
  return std::find(kNatives.begin(), kNatives.end(), symbol) != kNatives.end();
}

std::span<const std::string_view> NativeSymbols() { return kNatives; }

std::optional<uint32_t> Program::ModuleId(std::string_view name) const {
  for (uint32_t i = 0; i < modules_.size(); ++i) {
    if (modules_[i].name == name) return i;
  }
  return std::nullopt;
}

ExternalTarget Program::ResolveExternal(std::string_view symbol) const {
  const size_t dot = symbol.find('.');
  if (dot != std::string_view::npos) {
    const std::string_view lib = symbol.substr(0, dot);
    const std::string fn(symbol.substr(dot + 1));
    for (uint32_t i = 1; i < modules_.size(); ++i) {
      if (modules_[i].name != lib) continue;
      if (!modules_[i].exports.contains(fn)) break;
      return {ExternalKind::kLibrary, {i, modules_[i].labels.at(fn)}};
    }
  }
  if (IsNativeSymbol(symbol)) return {ExternalKind::kNative, {}};
  return {};
}

std::string Program::FormatPc(ModulePc pc) const {
  return modules_[pc.module].name + ":" + std::to_string(pc.index);
}

std::optional<ModulePc> Program::ParsePc(std::string_view text) const {
  const size_t colon = text.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto id = ModuleId(text.substr(0, colon));
  if (!id) return std::nullopt;
  const std::string_view digits = text.substr(colon + 1);
  uint32_t index = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size() ||
      digits.empty())
    return std::nullopt;
  ModulePc pc{*id, index};
  if (!Valid(pc)) return std::nullopt;
  return pc;
}

std::optional<ModulePc> Program::FindLabel(std::string_view label) const {
  if (auto index = main().FindLabel(label)) return ModulePc{0, *index};
  const size_t dot = label.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto id = ModuleId(label.substr(0, dot));
  if (!id) return std::nullopt;
  if (auto index = modules_[*id].FindLabel(label.substr(dot + 1)))
    return ModulePc{*id, *index};
  return std::nullopt;
}

Program Link(ModuleImage main, std::vector<ModuleImage> libs) {
  auto entry = main.FindLabel("main");
  if (!entry)
    throw InvalidArgument("main module '" + main.name +
                          "' has no 'main' label");
  std::sort(libs.begin(), libs.end(),
            [](const ModuleImage &a, const ModuleImage &b) {
              return a.name < b.name;
            });
  for (size_t i = 0; i < libs.size(); ++i) {
    if ((i > 0 && libs[i].name == libs[i - 1].name) ||
        libs[i].name == main.name)
      throw InvalidArgument("duplicate library name '" + libs[i].name + "'");
  }
  Program program;
  program.entry_ = {0, *entry};
  program.modules_.push_back(std::move(main));
  for (auto &lib : libs) program.modules_.push_back(std::move(lib));
  std::set<std::string> unresolved;
  for (const auto &module : program.modules_) {
    program.leaders_.push_back(ComputeLeaders(module));
    for (const auto &insn : module.code) {
      if (insn.op == Opcode::kXcall &&
          program.ResolveExternal(insn.symbol).kind != ExternalKind::kLibrary)
        unresolved.insert(insn.symbol);
    }
  }
  program.unresolved_.assign(unresolved.begin(), unresolved.end());
  return program;
}

Program AssembleProgram(std::string_view source) {
  auto modules = AssembleModules(source);
  if (modules.empty()) throw ParseError("empty program");
  ModuleImage main = std::move(modules.front());
  modules.erase(modules.begin());
  return Link(std::move(main), std::move(modules));
}

}  // namespace cosig
