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
#include <array>
#include <cctype>
#include <charconv>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosig/error.h"
#include "cosig/isa.h"

namespace cosig {
namespace {

struct OpcodeInfo {
  Opcode op;
  std::string_view name;
};

constexpr std::array<OpcodeInfo, 23> kOpcodes = {{
    {Opcode::kConst, "const"},   {Opcode::kMov, "mov"},
    {Opcode::kAdd, "add"},       {Opcode::kSub, "sub"},
    {Opcode::kMul, "mul"},       {Opcode::kAnd, "and"},
    {Opcode::kOr, "or"},         {Opcode::kXor, "xor"},
    {Opcode::kShl, "shl"},       {Opcode::kShr, "shr"},
    {Opcode::kEq, "eq"},         {Opcode::kLt, "lt"},
    {Opcode::kLoad8, "load8"},   {Opcode::kLoad32, "load32"},
    {Opcode::kStore8, "store8"}, {Opcode::kStore32, "store32"},
    {Opcode::kJmp, "jmp"},       {Opcode::kJz, "jz"},
    {Opcode::kJnz, "jnz"},       {Opcode::kCall, "call"},
    {Opcode::kRet, "ret"},       {Opcode::kXcall, "xcall"},
    {Opcode::kHalt, "halt"},
}};

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool IsIdentifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool IsSymbol(std::string_view s) {
  const size_t dot = s.find('.');
  if (dot == std::string_view::npos) return false;
  return IsIdentifier(s.substr(0, dot)) && IsIdentifier(s.substr(dot + 1));
}

[[noreturn]] void Fail(const std::string &msg, int line) {
  throw ParseError(msg + " (line " + std::to_string(line) + ")");
}

std::vector<std::string_view> SplitOperands(std::string_view s) {
  std::vector<std::string_view> out;
  s = Trim(s);
  if (s.empty()) return out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(Trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

// Unsigned decimal or 0x-prefixed hex.
std::optional<uint64_t> ParseUnsigned(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty() || s.size() > 12) return std::nullopt;
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

int32_t ParseImmediate(std::string_view s, int line) {
  bool negative = false;
  std::string_view digits = s;
  if (!digits.empty() && digits[0] == '-') {
    negative = true;
    digits.remove_prefix(1);
  }
  auto v = ParseUnsigned(digits);
  if (!v) Fail("syntax error: bad immediate '" + std::string(s) + "'", line);
  if (negative ? *v > 0x80000000ull : *v > 0xFFFFFFFFull)
    Fail("syntax error: immediate out of range '" + std::string(s) + "'",
         line);
  const uint32_t bits =
      negative ? static_cast<uint32_t>(0u - static_cast<uint32_t>(*v))
               : static_cast<uint32_t>(*v);
  return static_cast<int32_t>(bits);
}

uint8_t ParseRegister(std::string_view s, int line) {
  if (s.size() < 2 || (s[0] != 'r' && s[0] != 'R'))
    Fail("syntax error: expected register, got '" + std::string(s) + "'",
         line);
  auto v = ParseUnsigned(s.substr(1));
  if (!v || s.substr(1).starts_with("0x"))
    Fail("syntax error: expected register, got '" + std::string(s) + "'",
         line);
  if (*v >= kNumRegisters)
    Fail("register out of range '" + std::string(s) + "'", line);
  return static_cast<uint8_t>(*v);
}

// `[rN]`, `[rN+imm]` or `[rN-imm]`.
std::pair<uint8_t, int32_t> ParseMemory(std::string_view s, int line) {
  if (s.size() < 3 || s.front() != '[' || s.back() != ']')
    Fail("syntax error: expected memory operand, got '" + std::string(s) + "'",
         line);
  std::string_view inner = Trim(s.substr(1, s.size() - 2));
  const size_t sign = inner.find_first_of("+-");
  if (sign == std::string_view::npos) return {ParseRegister(inner, line), 0};
  const uint8_t base = ParseRegister(Trim(inner.substr(0, sign)), line);
  std::string_view off = Trim(inner.substr(sign + 1));
  if (inner[sign] == '-') {
    return {base, ParseImmediate("-" + std::string(off), line)};
  }
  if (off.starts_with("-"))
    Fail("syntax error: bad memory offset '" + std::string(s) + "'", line);
  return {base, ParseImmediate(off, line)};
}

void ExpectOperands(const std::vector<std::string_view> &ops, size_t n,
                    std::string_view mnemonic, int line) {
  if (ops.size() != n) {
    Fail("syntax error: '" + std::string(mnemonic) + "' expects " +
             std::to_string(n) + " operand(s), got " +
             std::to_string(ops.size()),
         line);
  }
}

Instruction ParseInstruction(std::string_view text, int line) {
  const size_t space = text.find_first_of(" \t");
  std::string mnemonic(text.substr(0, space));
  std::transform(mnemonic.begin(), mnemonic.end(), mnemonic.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto op = ParseOpcode(mnemonic);
  if (!op) Fail("syntax error: unknown mnemonic '" + mnemonic + "'", line);
  const auto ops = SplitOperands(
      space == std::string_view::npos ? std::string_view{}
                                      : text.substr(space));
  Instruction insn;
  insn.op = *op;
  switch (*op) {
    case Opcode::kConst:
      ExpectOperands(ops, 2, mnemonic, line);
      insn.rd = ParseRegister(ops[0], line);
      insn.imm = ParseImmediate(ops[1], line);
      break;
    case Opcode::kMov:
      ExpectOperands(ops, 2, mnemonic, line);
      insn.rd = ParseRegister(ops[0], line);
      insn.ra = ParseRegister(ops[1], line);
      break;
    case Opcode::kLoad8:
    case Opcode::kLoad32: {
      ExpectOperands(ops, 2, mnemonic, line);
      insn.rd = ParseRegister(ops[0], line);
      auto [base, off] = ParseMemory(ops[1], line);
      insn.ra = base;
      insn.imm = off;
      break;
    }
    case Opcode::kStore8:
    case Opcode::kStore32: {
      ExpectOperands(ops, 2, mnemonic, line);
      auto [base, off] = ParseMemory(ops[0], line);
      insn.ra = base;
      insn.imm = off;
      insn.rb = ParseRegister(ops[1], line);
      break;
    }
    case Opcode::kJmp:
    case Opcode::kCall:
      ExpectOperands(ops, 1, mnemonic, line);
      if (!IsIdentifier(ops[0]))
        Fail("syntax error: bad label '" + std::string(ops[0]) + "'", line);
      insn.label = std::string(ops[0]);
      break;
    case Opcode::kJz:
    case Opcode::kJnz:
      ExpectOperands(ops, 2, mnemonic, line);
      insn.ra = ParseRegister(ops[0], line);
      if (!IsIdentifier(ops[1]))
        Fail("syntax error: bad label '" + std::string(ops[1]) + "'", line);
      insn.label = std::string(ops[1]);
      break;
    case Opcode::kRet:
      ExpectOperands(ops, 0, mnemonic, line);
      break;
    case Opcode::kXcall:
      ExpectOperands(ops, 1, mnemonic, line);
      if (!IsSymbol(ops[0]))
        Fail("syntax error: bad external symbol '" + std::string(ops[0]) +
                 "'",
             line);
      insn.symbol = std::string(ops[0]);
      break;
    case Opcode::kHalt:
      ExpectOperands(ops, 1, mnemonic, line);
      insn.ra = ParseRegister(ops[0], line);
      break;
    default:  // ALU
      ExpectOperands(ops, 3, mnemonic, line);
      insn.rd = ParseRegister(ops[0], line);
      insn.ra = ParseRegister(ops[1], line);
      insn.rb = ParseRegister(ops[2], line);
      break;
  }
  return insn;
}

struct SourceLine {
  int number;
  std::string_view text;  // trimmed, comment stripped
};

std::vector<SourceLine> SplitLines(std::string_view source) {
  std::vector<SourceLine> lines;
  int number = 0;
  size_t pos = 0;
  while (pos <= source.size()) {
    size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    ++number;
    std::string_view text = source.substr(pos, end - pos);
    if (size_t c = text.find(';'); c != std::string_view::npos)
      text = text.substr(0, c);
    text = Trim(text);
    if (!text.empty()) lines.push_back({number, text});
    pos = end + 1;
  }
  return lines;
}

ModuleImage AssembleLines(std::span<const SourceLine> lines,
                          std::string_view default_name) {
  ModuleImage module;
  module.name = std::string(default_name);
  std::vector<int> insn_lines;
  std::vector<std::pair<std::string, int>> exports;
  std::vector<std::pair<std::string, int>> pending;  // labels awaiting insn
  bool seen_module = false;
  for (const auto &[number, text] : lines) {
    if (text.starts_with(".")) {
      const size_t space = text.find_first_of(" \t");
      const std::string_view directive = text.substr(0, space);
      const std::string_view arg =
          space == std::string_view::npos ? std::string_view{}
                                          : Trim(text.substr(space));
      if (!IsIdentifier(arg))
        Fail("syntax error: bad directive argument '" + std::string(arg) + "'",
             number);
      if (directive == ".module") {
        if (seen_module || !module.code.empty() || !pending.empty())
          Fail("syntax error: '.module' must start the module", number);
        seen_module = true;
        module.name = std::string(arg);
      } else if (directive == ".export") {
        exports.emplace_back(std::string(arg), number);
      } else {
        Fail("syntax error: unknown directive '" + std::string(directive) +
                 "'",
             number);
      }
      continue;
    }
    if (text.back() == ':') {
      std::string_view name = Trim(text.substr(0, text.size() - 1));
      if (!IsIdentifier(name))
        Fail("syntax error: bad label '" + std::string(name) + "'", number);
      if (!module.labels.emplace(std::string(name), module.code.size()).second)
        Fail("duplicate label '" + std::string(name) + "'", number);
      pending.emplace_back(std::string(name), number);
      continue;
    }
    module.code.push_back(ParseInstruction(text, number));
    insn_lines.push_back(number);
    pending.clear();
  }
  if (!pending.empty())
    Fail("label '" + pending.front().first + "' has no instruction",
         pending.front().second);
  for (size_t i = 0; i < module.code.size(); ++i) {
    Instruction &insn = module.code[i];
    if (!HasLabel(insn.op)) continue;
    auto it = module.labels.find(insn.label);
    if (it == module.labels.end())
      Fail("undefined label '" + insn.label + "'", insn_lines[i]);
    insn.target = it->second;
  }
  for (const auto &[name, number] : exports) {
    if (!module.labels.contains(name))
      Fail("export of undefined label '" + name + "'", number);
    module.exports.insert(name);
  }
  return module;
}

std::string FormatImmediate(int32_t imm) { return std::to_string(imm); }

std::string Reg(uint8_t r) { return "r" + std::to_string(r); }

std::string Mem(uint8_t base, int32_t imm) {
  std::string s = "[" + Reg(base);
  if (imm < 0) {
    s += "-" + std::to_string(-static_cast<int64_t>(imm));
  } else {
    s += "+" + std::to_string(imm);
  }
  return s + "]";
}

}  // namespace

std::string_view OpcodeName(Opcode op) {
  return kOpcodes[static_cast<size_t>(op)].name;
}

std::optional<Opcode> ParseOpcode(std::string_view mnemonic) {
  for (const auto &info : kOpcodes) {
    if (info.name == mnemonic) return info.op;
  }
  return std::nullopt;
}

bool IsAlu(Opcode op) { return op >= Opcode::kAdd && op <= Opcode::kLt; }

bool HasLabel(Opcode op) {
  return op == Opcode::kJmp || op == Opcode::kJz || op == Opcode::kJnz ||
         op == Opcode::kCall;
}

bool EndsBlock(Opcode op) {
  return op >= Opcode::kJmp;
}

std::optional<uint32_t> ModuleImage::FindLabel(std::string_view label) const {
  auto it = labels.find(std::string(label));
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

std::string FormatInstruction(const Instruction &insn) {
  std::string out(OpcodeName(insn.op));
  switch (insn.op) {
    case Opcode::kConst:
      return out + " " + Reg(insn.rd) + ", " + FormatImmediate(insn.imm);
    case Opcode::kMov:
      return out + " " + Reg(insn.rd) + ", " + Reg(insn.ra);
    case Opcode::kLoad8:
    case Opcode::kLoad32:
      return out + " " + Reg(insn.rd) + ", " + Mem(insn.ra, insn.imm);
    case Opcode::kStore8:
    case Opcode::kStore32:
      return out + " " + Mem(insn.ra, insn.imm) + ", " + Reg(insn.rb);
    case Opcode::kJmp:
    case Opcode::kCall:
      return out + " " + insn.label;
    case Opcode::kJz:
    case Opcode::kJnz:
      return out + " " + Reg(insn.ra) + ", " + insn.label;
    case Opcode::kRet:
      return out;
    case Opcode::kXcall:
      return out + " " + insn.symbol;
    case Opcode::kHalt:
      return out + " " + Reg(insn.ra);
    default:
      return out + " " + Reg(insn.rd) + ", " + Reg(insn.ra) + ", " +
             Reg(insn.rb);
  }
}

ModuleImage Assemble(std::string_view source, std::string_view default_name) {
  return AssembleLines(SplitLines(source), default_name);
}

std::vector<ModuleImage> AssembleModules(std::string_view source) {
  const auto lines = SplitLines(source);
  std::vector<ModuleImage> modules;
  size_t start = 0;
  for (size_t i = 1; i <= lines.size(); ++i) {
    if (i == lines.size() || lines[i].text.starts_with(".module")) {
      modules.push_back(AssembleLines(
          std::span(lines).subspan(start, i - start), "main"));
      start = i;
    }
  }
  return modules;
}

std::string Disassemble(const ModuleImage &module) {
  if (module.code.empty() && module.labels.empty() && module.exports.empty())
    return "";
  std::ostringstream out;
  out << ".module " << module.name << "\n";
  for (const auto &name : module.exports) out << ".export " << name << "\n";
  std::multimap<uint32_t, std::string> by_index;
  for (const auto &[name, index] : module.labels) by_index.emplace(index, name);
  for (uint32_t i = 0; i < module.code.size(); ++i) {
    auto [lo, hi] = by_index.equal_range(i);
    for (auto it = lo; it != hi; ++it) out << it->second << ":\n";
    out << "  " << FormatInstruction(module.code[i]) << "\n";
  }
  return out.str();
}

}  // namespace cosig
