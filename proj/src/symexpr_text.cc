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
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "cosig/error.h"
#include "cosig/symexpr.h"

namespace cosig {
namespace {

constexpr std::array<std::string_view, 8> kBinaryNames = {
    "bvadd", "bvsub", "bvmul", "bvand", "bvor", "bvxor", "bvshl", "bvlshr"};
constexpr std::array<std::string_view, 4> kCmpNames = {"=", "!=", "bvult",
                                                       "bvule"};

std::string HexValue(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%x", v);
  return buf;
}

void Print(const Expr &e, std::string &out) {
  switch (e.kind()) {
    case ExprKind::kConst:
      out += "(const " + std::to_string(e.width()) + " " + HexValue(e.value()) +
             ")";
      return;
    case ExprKind::kVar:
      out += "(var " + e.var().region + " " + std::to_string(e.var().index) +
             ")";
      return;
    case ExprKind::kNot:
      out += "(bvnot ";
      Print(e.operand(0), out);
      out += ")";
      return;
    case ExprKind::kBinary:
      out += "(";
      out += kBinaryNames[static_cast<size_t>(e.op())];
      out += " ";
      Print(e.operand(0), out);
      out += " ";
      Print(e.operand(1), out);
      out += ")";
      return;
    case ExprKind::kExtract:
      out += "(extract " + std::to_string(e.lo()) + " " +
             std::to_string(e.width()) + " ";
      Print(e.operand(0), out);
      out += ")";
      return;
    case ExprKind::kConcat:
      out += "(concat ";
      Print(e.operand(0), out);
      out += " ";
      Print(e.operand(1), out);
      out += ")";
      return;
  }
}

void Print(const BoolExpr &p, std::string &out) {
  switch (p.kind()) {
    case BoolKind::kLiteral:
      out += p.literal() ? "true" : "false";
      return;
    case BoolKind::kCmp:
      out += "(";
      out += kCmpNames[static_cast<size_t>(p.cmp())];
      out += " ";
      Print(p.lhs(), out);
      out += " ";
      Print(p.rhs(), out);
      out += ")";
      return;
    case BoolKind::kNot:
      out += "(not ";
      Print(p.operand(0), out);
      out += ")";
      return;
    case BoolKind::kAnd:
    case BoolKind::kOr:
      out += p.kind() == BoolKind::kAnd ? "(and " : "(or ";
      Print(p.operand(0), out);
      out += " ";
      Print(p.operand(1), out);
      out += ")";
      return;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  bool AtEnd() {
    SkipSpace();
    return pos_ >= text_.size();
  }

  Expr ParseExpr() {
    Expect('(');
    const std::string_view head = Atom();
    Expr e;
    if (head == "const") {
      const uint32_t width = Number(Atom());
      const uint32_t value = Number(Atom());
      e = Wrap([&] { return Expr::Const(width, value); });
    } else if (head == "var") {
      const std::string_view region = Atom();
      const uint32_t index = Number(Atom());
      e = Expr::Var(std::string(region), index);
    } else if (head == "bvnot") {
      Expr x = ParseExpr();
      e = Expr::Not(std::move(x));
    } else if (head == "extract") {
      const uint32_t lo = Number(Atom());
      const uint32_t width = Number(Atom());
      Expr x = ParseExpr();
      e = Wrap([&] { return Expr::Extract(lo, width, x); });
    } else if (head == "concat") {
      Expr hi = ParseExpr();
      Expr lo = ParseExpr();
      e = Wrap([&] { return Expr::Concat(hi, lo); });
    } else {
      size_t op = 0;
      while (op < kBinaryNames.size() && kBinaryNames[op] != head) ++op;
      if (op == kBinaryNames.size())
        Fail("unknown operator '" + std::string(head) + "'");
      Expr a = ParseExpr();
      Expr b = ParseExpr();
      e = Wrap([&] {
        return Expr::Binary(static_cast<BinaryOp>(op), a, b);
      });
    }
    Expect(')');
    return e;
  }

  BoolExpr ParseBool() {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] != '(') {
      const std::string_view atom = Atom();
      if (atom == "true") return BoolExpr::Literal(true);
      if (atom == "false") return BoolExpr::Literal(false);
      Fail("expected constraint, got '" + std::string(atom) + "'");
    }
    Expect('(');
    const std::string_view head = Atom();
    BoolExpr p;
    if (head == "not") {
      p = BoolExpr::Not(ParseBool());
    } else if (head == "and" || head == "or") {
      BoolExpr x = ParseBool();
      BoolExpr y = ParseBool();
      p = head == "and" ? BoolExpr::And(x, y) : BoolExpr::Or(x, y);
    } else {
      size_t op = 0;
      while (op < kCmpNames.size() && kCmpNames[op] != head) ++op;
      if (op == kCmpNames.size())
        Fail("unknown predicate '" + std::string(head) + "'");
      Expr a = ParseExpr();
      Expr b = ParseExpr();
      p = Wrap([&] { return BoolExpr::Cmp(static_cast<CmpOp>(op), a, b); });
    }
    Expect(')');
    return p;
  }

 private:
  template <typename F>
  auto Wrap(F &&make) -> decltype(make()) {
    try {
      return make();
    } catch (const Error &err) {
      Fail(err.what());
    }
  }

  [[noreturn]] void Fail(const std::string &what) {
    throw ParseError("constraint syntax: " + what + " (line " +
                     std::to_string(Line()) + ")");
  }

  // At end of input, the line of the last token.
  int Line() const {
    size_t end = std::min(pos_, text_.size());
    if (end == text_.size()) {
      while (end > 0 && std::isspace(static_cast<unsigned char>(text_[end - 1])))
        --end;
    }
    int line = 1;
    for (size_t i = 0; i < end; ++i)
      if (text_[i] == '\n') ++line;
    return line;
  }

  void SkipSpace() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void Expect(char c) {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("unexpected end of input");
    if (text_[pos_] != c) Fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view Atom() {
    SkipSpace();
    const size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           text_[pos_] != ';' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start) Fail("expected atom");
    return text_.substr(start, pos_ - start);
  }

  uint32_t Number(std::string_view s) {
    int base = 10;
    std::string_view digits = s;
    if (digits.size() > 2 && digits[0] == '0' &&
        (digits[1] == 'x' || digits[1] == 'X')) {
      base = 16;
      digits.remove_prefix(2);
    }
    uint32_t v = 0;
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (digits.empty() || ec != std::errc() ||
        ptr != digits.data() + digits.size())
      Fail("bad number '" + std::string(s) + "'");
    return v;
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

std::string ToString(const Expr &e) {
  std::string out;
  Print(e, out);
  return out;
}

std::string ToString(const BoolExpr &p) {
  std::string out;
  Print(p, out);
  return out;
}

Expr ParseExpr(std::string_view text) {
  Parser parser(text);
  Expr e = parser.ParseExpr();
  if (!parser.AtEnd()) throw ParseError("constraint syntax: trailing input");
  return e;
}

BoolExpr ParseBoolExpr(std::string_view text) {
  Parser parser(text);
  BoolExpr p = parser.ParseBool();
  if (!parser.AtEnd()) throw ParseError("constraint syntax: trailing input");
  return p;
}

std::vector<BoolExpr> ParseConstraints(std::string_view text) {
  Parser parser(text);
  std::vector<BoolExpr> out;
  while (!parser.AtEnd()) out.push_back(parser.ParseBool());
  return out;
}

}  // namespace cosig
