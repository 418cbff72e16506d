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
#include <cctype>
#include <charconv>
#include <set>

#include "cosig/error.h"
#include "cosig/search.h"
#include "cosig/sigextract.h"

namespace cosig {
namespace {

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-';
}

int HexDigit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Empty string on success, else the problem.
std::string CheckName(std::string_view name) {
  if (name.empty()) return "empty rule name";
  if (!std::all_of(name.begin(), name.end(), IsNameChar))
    return "invalid rule name '" + std::string(name) + "'";
  return "";
}

std::optional<uint32_t> ParseOffset(std::string_view s) {
  if (s == "*") return kAnyOffset;
  if (s.empty() || s.size() > 10 ||
      !std::all_of(s.begin(), s.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  uint64_t v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  if (v >= kAnyOffset) return std::nullopt;
  return static_cast<uint32_t>(v);
}

std::optional<std::string> CheckHex(std::string_view hex) {
  if (hex.size() % 2 != 0)
    return "odd-length hex pattern '" + std::string(hex) + "'";
  if (hex.size() < kMinPatternDigits || hex.size() > kMaxPatternDigits)
    return "hex pattern must have 2 to 64 digits";
  for (char c : hex) {
    if (HexDigit(c) < 0)
      return "invalid hex pattern '" + std::string(hex) + "'";
  }
  return std::nullopt;
}

}  // namespace

const SignatureRule *SignatureDb::Find(std::string_view name) const {
  for (const auto &r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

size_t SignatureDb::LongestPattern() const {
  size_t n = 0;
  for (const auto &r : rules) n = std::max(n, r.pattern.size());
  return n;
}

std::string GenMinDb(std::string_view name, std::string_view hex,
                     std::string_view offset) {
  if (std::string problem = CheckName(name); !problem.empty())
    throw InvalidArgument(problem);
  if (!ParseOffset(offset))
    throw InvalidArgument("invalid offset '" + std::string(offset) + "'");
  if (auto problem = CheckHex(hex)) throw InvalidArgument(*problem);
  return std::string(name) + ":" + std::string(offset) + ":" +
         std::string(hex);
}

SignatureDb ParseDb(std::string_view text) {
  SignatureDb db;
  std::set<std::string> names;
  int number = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = Trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++number;
    auto fail = [&](const std::string &msg) {
      throw ParseError(msg + " (line " + std::to_string(number) + ")");
    };
    if (line.empty() || line.front() == '#') continue;
    const size_t c1 = line.find(':');
    const size_t c2 =
        c1 == std::string_view::npos ? c1 : line.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
      fail("malformed rule, expected Name:Offset:Hex");
    const std::string_view name = line.substr(0, c1);
    const std::string_view offset = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string_view hex = line.substr(c2 + 1);
    if (std::string problem = CheckName(name); !problem.empty()) fail(problem);
    auto off = ParseOffset(offset);
    if (!off) fail("invalid offset '" + std::string(offset) + "'");
    if (auto problem = CheckHex(hex)) fail(*problem);
    if (!names.insert(std::string(name)).second)
      fail("duplicate rule name '" + std::string(name) + "'");
    SignatureRule rule{std::string(name), *off, {}};
    for (size_t i = 0; i < hex.size(); i += 2)
      rule.pattern.push_back(
          static_cast<uint8_t>(HexDigit(hex[i]) * 16 + HexDigit(hex[i + 1])));
    db.rules.push_back(std::move(rule));
  }
  return db;
}

std::string FormatDb(const SignatureDb &db) {
  std::string out;
  for (const auto &r : db.rules) {
    out += r.name;
    out += ':';
    out += r.offset == kAnyOffset ? "*" : std::to_string(r.offset);
    out += ':';
    std::string hex = HexBytes(r.pattern);
    std::transform(hex.begin(), hex.end(), hex.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    out += hex;
    out += '\n';
  }
  return out;
}

}  // namespace cosig
