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

#include "bitblast.h"

#include <algorithm>
#include <utility>

namespace cosig::internal {
namespace {

uint64_t Key(Lit a, Lit b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

}  // namespace

CnfBuilder::CnfBuilder() {
  NewVar();
  AddClause({True()});
}

Lit CnfBuilder::And(Lit a, Lit b) {
  if (a == False() || b == False() || a == -b) return False();
  if (a == True()) return b;
  if (b == True() || a == b) return a;
  const uint64_t key = Key(a, b);
  if (auto it = and_cache_.find(key); it != and_cache_.end()) return it->second;
  const Lit out = NewVar();
  AddClause({-out, a});
  AddClause({-out, b});
  AddClause({out, -a, -b});
  and_cache_.emplace(key, out);
  return out;
}

Lit CnfBuilder::Xor(Lit a, Lit b) {
  if (a == False()) return b;
  if (b == False()) return a;
  if (a == True()) return -b;
  if (b == True()) return -a;
  if (a == b) return False();
  if (a == -b) return True();
  // Normalize polarity so xor(a,b), xor(-a,b) share one gate.
  bool flip = false;
  if (a < 0) {
    a = -a;
    flip = !flip;
  }
  if (b < 0) {
    b = -b;
    flip = !flip;
  }
  const uint64_t key = Key(a, b);
  Lit out;
  if (auto it = xor_cache_.find(key); it != xor_cache_.end()) {
    out = it->second;
  } else {
    out = NewVar();
    AddClause({-out, a, b});
    AddClause({-out, -a, -b});
    AddClause({out, -a, b});
    AddClause({out, a, -b});
    xor_cache_.emplace(key, out);
  }
  return flip ? -out : out;
}

Lit CnfBuilder::Mux(Lit sel, Lit then_lit, Lit else_lit) {
  if (sel == True()) return then_lit;
  if (sel == False()) return else_lit;
  if (then_lit == else_lit) return then_lit;
  return Or(And(sel, then_lit), And(-sel, else_lit));
}

void BitBlaster::Declare(const VarRef &v) {
  if (vars_.contains(v)) return;
  std::array<Lit, 8> bits{};
  for (int i = 7; i >= 0; --i) bits[i] = cnf_.NewVar();
  vars_.emplace(v, bits);
}

Bits BitBlaster::Add(const Bits &a, const Bits &b, Lit carry) {
  Bits out(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const Lit t = cnf_.Xor(a[i], b[i]);
    out[i] = cnf_.Xor(t, carry);
    carry = cnf_.Or(cnf_.And(a[i], b[i]), cnf_.And(carry, t));
  }
  return out;
}

// Barrel shifter over the low five bits of `amount`; shifting by the width
// or more yields zero, matching the masked-shift semantics.
Bits BitBlaster::Shift(const Bits &a, const Bits &amount, bool left) {
  const size_t w = a.size();
  Bits cur = a;
  const size_t stages = std::min<size_t>(5, amount.size());
  for (size_t s = 0; s < stages; ++s) {
    const size_t dist = size_t{1} << s;
    Bits shifted(w, cnf_.False());
    for (size_t i = 0; i < w; ++i) {
      if (left) {
        if (i >= dist) shifted[i] = cur[i - dist];
      } else {
        if (i + dist < w) shifted[i] = cur[i + dist];
      }
    }
    for (size_t i = 0; i < w; ++i)
      cur[i] = cnf_.Mux(amount[s], shifted[i], cur[i]);
  }
  return cur;
}

Lit BitBlaster::Equal(const Bits &a, const Bits &b) {
  Lit acc = cnf_.True();
  for (size_t i = 0; i < a.size(); ++i)
    acc = cnf_.And(acc, -cnf_.Xor(a[i], b[i]));
  return acc;
}

Lit BitBlaster::Less(const Bits &a, const Bits &b) {
  Lit lt = cnf_.False();
  for (size_t i = 0; i < a.size(); ++i) {
    const Lit here = cnf_.And(-a[i], b[i]);
    const Lit same = -cnf_.Xor(a[i], b[i]);
    lt = cnf_.Or(here, cnf_.And(same, lt));
  }
  return lt;
}

Bits BitBlaster::Blast(const Expr &e) {
  if (auto it = expr_memo_.find(e.id()); it != expr_memo_.end())
    return it->second;
  const uint32_t w = e.width();
  Bits out;
  switch (e.kind()) {
    case ExprKind::kConst:
      for (uint32_t i = 0; i < w; ++i)
        out.push_back(cnf_.Constant((e.value() >> i) & 1));
      break;
    case ExprKind::kVar: {
      Declare(e.var());
      const auto &bits = vars_.at(e.var());
      out.assign(bits.begin(), bits.end());
      break;
    }
    case ExprKind::kNot:
      out = Blast(e.operand(0));
      for (Lit &l : out) l = -l;
      break;
    case ExprKind::kBinary: {
      const Bits a = Blast(e.operand(0));
      const Bits b = Blast(e.operand(1));
      out.resize(w);
      switch (e.op()) {
        case BinaryOp::kAdd:
          out = Add(a, b, cnf_.False());
          break;
        case BinaryOp::kSub: {
          Bits nb = b;
          for (Lit &l : nb) l = -l;
          out = Add(a, nb, cnf_.True());
          break;
        }
        case BinaryOp::kMul: {
          Bits acc(w, cnf_.False());
          for (uint32_t i = 0; i < w; ++i) {
            if (b[i] == cnf_.False()) continue;
            Bits partial(w, cnf_.False());
            for (uint32_t j = i; j < w; ++j)
              partial[j] = cnf_.And(a[j - i], b[i]);
            acc = Add(acc, partial, cnf_.False());
          }
          out = acc;
          break;
        }
        case BinaryOp::kAnd:
          for (uint32_t i = 0; i < w; ++i) out[i] = cnf_.And(a[i], b[i]);
          break;
        case BinaryOp::kOr:
          for (uint32_t i = 0; i < w; ++i) out[i] = cnf_.Or(a[i], b[i]);
          break;
        case BinaryOp::kXor:
          for (uint32_t i = 0; i < w; ++i) out[i] = cnf_.Xor(a[i], b[i]);
          break;
        case BinaryOp::kShl:
          out = Shift(a, b, /*left=*/true);
          break;
        case BinaryOp::kShr:
          out = Shift(a, b, /*left=*/false);
          break;
      }
      break;
    }
    case ExprKind::kExtract: {
      const Bits a = Blast(e.operand(0));
      out.assign(a.begin() + e.lo(), a.begin() + e.lo() + w);
      break;
    }
    case ExprKind::kConcat: {
      out = Blast(e.operand(1));
      const Bits hi = Blast(e.operand(0));
      out.insert(out.end(), hi.begin(), hi.end());
      break;
    }
  }
  pinned_exprs_.push_back(e);
  expr_memo_.emplace(e.id(), out);
  return out;
}

Lit BitBlaster::Blast(const BoolExpr &p) {
  if (auto it = bool_memo_.find(p.id()); it != bool_memo_.end())
    return it->second;
  Lit out = cnf_.False();
  switch (p.kind()) {
    case BoolKind::kLiteral:
      out = cnf_.Constant(p.literal());
      break;
    case BoolKind::kCmp: {
      const Bits a = Blast(p.lhs());
      const Bits b = Blast(p.rhs());
      switch (p.cmp()) {
        case CmpOp::kEq:
          out = Equal(a, b);
          break;
        case CmpOp::kNe:
          out = -Equal(a, b);
          break;
        case CmpOp::kUlt:
          out = Less(a, b);
          break;
        case CmpOp::kUle:
          out = -Less(b, a);
          break;
      }
      break;
    }
    case BoolKind::kNot:
      out = -Blast(p.operand(0));
      break;
    case BoolKind::kAnd:
      out = cnf_.And(Blast(p.operand(0)), Blast(p.operand(1)));
      break;
    case BoolKind::kOr:
      out = cnf_.Or(Blast(p.operand(0)), Blast(p.operand(1)));
      break;
  }
  pinned_bools_.push_back(p);
  bool_memo_.emplace(p.id(), out);
  return out;
}

}  // namespace cosig::internal
