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

// Exhaustive constraint oracle shared by the solver tests.

#ifndef COSIG_TESTS_BRUTE_FORCE_H_
#define COSIG_TESTS_BRUTE_FORCE_H_

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "cosig/symexpr.h"

namespace cosig::testing {

// Postfix evaluator used by the exhaustive oracle; deliberately independent
// of the library's Eval so the two can be cross-checked.
enum class K : uint8_t { kConst, kVar, kNot, kBin, kExtract, kConcat, kCmp,
                         kBoolNot, kBoolAnd, kBoolOr };
struct Op {
  K k;
  uint8_t sub = 0;
  uint8_t width = 0;
  uint8_t lo = 0;
  uint32_t v = 0;
};

inline uint32_t Mask(uint32_t w) {
  return w >= 32 ? 0xFFFFFFFFu : (1u << w) - 1;
}

inline void Compile(const Expr &e, const std::vector<VarRef> &vars,
             std::vector<Op> &out) {
  switch (e.kind()) {
    case ExprKind::kConst:
      out.push_back({K::kConst, 0, 0, 0, e.value()});
      return;
    case ExprKind::kVar: {
      auto it = std::find(vars.begin(), vars.end(), e.var());
      out.push_back({K::kVar, 0, 0, 0,
                     static_cast<uint32_t>(it - vars.begin())});
      return;
    }
    case ExprKind::kNot:
      Compile(e.operand(0), vars, out);
      out.push_back({K::kNot, 0, static_cast<uint8_t>(e.width()), 0, 0});
      return;
    case ExprKind::kBinary:
      Compile(e.operand(0), vars, out);
      Compile(e.operand(1), vars, out);
      out.push_back({K::kBin, static_cast<uint8_t>(e.op()),
                     static_cast<uint8_t>(e.width()), 0, 0});
      return;
    case ExprKind::kExtract:
      Compile(e.operand(0), vars, out);
      out.push_back({K::kExtract, 0, static_cast<uint8_t>(e.width()),
                     static_cast<uint8_t>(e.lo()), 0});
      return;
    case ExprKind::kConcat:
      Compile(e.operand(0), vars, out);
      Compile(e.operand(1), vars, out);
      out.push_back({K::kConcat, 0,
                     static_cast<uint8_t>(e.operand(1).width()), 0, 0});
      return;
  }
}

inline void Compile(const BoolExpr &p, const std::vector<VarRef> &vars,
             std::vector<Op> &out) {
  switch (p.kind()) {
    case BoolKind::kCmp:
      Compile(p.lhs(), vars, out);
      Compile(p.rhs(), vars, out);
      out.push_back({K::kCmp, static_cast<uint8_t>(p.cmp()), 0, 0, 0});
      return;
    case BoolKind::kNot:
      Compile(p.operand(0), vars, out);
      out.push_back({K::kBoolNot});
      return;
    case BoolKind::kAnd:
    case BoolKind::kOr:
      Compile(p.operand(0), vars, out);
      Compile(p.operand(1), vars, out);
      out.push_back({p.kind() == BoolKind::kAnd ? K::kBoolAnd : K::kBoolOr});
      return;
    case BoolKind::kLiteral:
      out.push_back({K::kConst, 0, 0, 0, p.literal() ? 1u : 0u});
      return;
  }
}

inline uint32_t Execute(const std::vector<Op> &code, const uint8_t *vals) {
  uint32_t st[128];
  int sp = 0;
  for (const Op &op : code) {
    switch (op.k) {
      case K::kConst:
        st[sp++] = op.v;
        break;
      case K::kVar:
        st[sp++] = vals[op.v];
        break;
      case K::kNot:
        st[sp - 1] = ~st[sp - 1] & Mask(op.width);
        break;
      case K::kBin: {
        const uint32_t b = st[--sp];
        const uint32_t a = st[sp - 1];
        uint32_t r = 0;
        switch (static_cast<BinaryOp>(op.sub)) {
          case BinaryOp::kAdd: r = a + b; break;
          case BinaryOp::kSub: r = a - b; break;
          case BinaryOp::kMul: r = a * b; break;
          case BinaryOp::kAnd: r = a & b; break;
          case BinaryOp::kOr: r = a | b; break;
          case BinaryOp::kXor: r = a ^ b; break;
          case BinaryOp::kShl: r = a << (b & 31); break;
          case BinaryOp::kShr: r = a >> (b & 31); break;
        }
        st[sp - 1] = r & Mask(op.width);
        break;
      }
      case K::kExtract:
        st[sp - 1] = (st[sp - 1] >> op.lo) & Mask(op.width);
        break;
      case K::kConcat: {
        const uint32_t lo = st[--sp];
        st[sp - 1] = (op.width >= 32 ? 0 : st[sp - 1] << op.width) | lo;
        break;
      }
      case K::kCmp: {
        const uint32_t b = st[--sp];
        const uint32_t a = st[sp - 1];
        bool r = false;
        switch (static_cast<CmpOp>(op.sub)) {
          case CmpOp::kEq: r = a == b; break;
          case CmpOp::kNe: r = a != b; break;
          case CmpOp::kUlt: r = a < b; break;
          case CmpOp::kUle: r = a <= b; break;
        }
        st[sp - 1] = r;
        break;
      }
      case K::kBoolNot:
        st[sp - 1] = !st[sp - 1];
        break;
      case K::kBoolAnd: {
        const uint32_t b = st[--sp];
        st[sp - 1] = st[sp - 1] && b;
        break;
      }
      case K::kBoolOr: {
        const uint32_t b = st[--sp];
        st[sp - 1] = st[sp - 1] || b;
        break;
      }
    }
  }
  return st[0];
}

// Exhaustive search in lexicographic order of (v0, v1, ...); returns the
// smallest satisfying tuple. Constraints are checked as soon as their last
// variable is fixed.
inline std::optional<std::vector<uint8_t>> BruteForce(
    const std::vector<BoolExpr> &cs, const std::vector<VarRef> &vars) {
  const size_t n = vars.size();
  std::vector<std::vector<std::vector<Op>>> at_level(n + 1);
  for (const auto &c : cs) {
    size_t level = 0;
    for (const auto &v : FreeVars(c)) {
      level = std::max<size_t>(
          level, std::find(vars.begin(), vars.end(), v) - vars.begin() + 1);
    }
    std::vector<Op> code;
    Compile(c, vars, code);
    at_level[level].push_back(std::move(code));
  }
  std::vector<uint8_t> vals(std::max<size_t>(n, 1), 0);
  auto ok = [&](size_t level) {
    for (const auto &code : at_level[level]) {
      if (!Execute(code, vals.data())) return false;
    }
    return true;
  };
  if (!ok(0)) return std::nullopt;
  std::function<bool(size_t)> rec = [&](size_t i) -> bool {
    if (i == n) return true;
    for (int b = 0; b < 256; ++b) {
      vals[i] = static_cast<uint8_t>(b);
      if (ok(i + 1) && rec(i + 1)) return true;
    }
    return false;
  };
  if (!rec(0)) return std::nullopt;
  vals.resize(n);
  return vals;
}

}  // namespace cosig::testing

#endif  // COSIG_TESTS_BRUTE_FORCE_H_
