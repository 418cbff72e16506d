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

#include "cosig/symexpr.h"

#include <sstream>
#include <utility>

#include "cosig/error.h"

namespace cosig {

struct Expr::Node {
  ExprKind kind = ExprKind::kConst;
  uint32_t width = 0;
  uint32_t value = 0;
  uint32_t lo = 0;
  BinaryOp op = BinaryOp::kAdd;
  VarRef var;
  Expr a;
  Expr b;
};

struct BoolExpr::Node {
  BoolKind kind = BoolKind::kLiteral;
  CmpOp cmp = CmpOp::kEq;
  bool literal = false;
  Expr lhs;
  Expr rhs;
  BoolExpr p;
  BoolExpr q;
};

std::string VarRef::ToString() const {
  return region + "[" + std::to_string(index) + "]";
}

bool IsValidWidth(uint32_t width) {
  return width == 1 || width == 8 || width == 16 || width == 32;
}

uint32_t WidthMask(uint32_t width) {
  return width >= 32 ? 0xFFFFFFFFu : (1u << width) - 1;
}

namespace {

void RequireNonNull(const Expr &e) {
  if (!e) throw InvalidArgument("null expression operand");
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr construction and accessors.

Expr Expr::Const(uint32_t width, uint32_t value) {
  if (!IsValidWidth(width))
    throw InvalidArgument("invalid width " + std::to_string(width));
  if ((value & ~WidthMask(width)) != 0)
    throw InvalidArgument("constant " + std::to_string(value) +
                          " does not fit in " + std::to_string(width) +
                          " bits");
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kConst;
  n->width = width;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::Var(std::string region, uint32_t index) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kVar;
  n->width = 8;
  n->var = {std::move(region), index};
  return Expr(std::move(n));
}

Expr Expr::Not(Expr e) {
  RequireNonNull(e);
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kNot;
  n->width = e.width();
  n->a = std::move(e);
  return Expr(std::move(n));
}

Expr Expr::Binary(BinaryOp op, Expr a, Expr b) {
  RequireNonNull(a);
  RequireNonNull(b);
  if (a.width() != b.width())
    throw InvalidArgument("binary operand widths differ: " +
                          std::to_string(a.width()) + " vs " +
                          std::to_string(b.width()));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kBinary;
  n->width = a.width();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return Expr(std::move(n));
}

Expr Expr::Extract(uint32_t lo, uint32_t width, Expr e) {
  RequireNonNull(e);
  if (!IsValidWidth(width) || lo + width > e.width())
    throw InvalidArgument("invalid extract of bits [" + std::to_string(lo) +
                          ", " + std::to_string(lo + width) + ") from width " +
                          std::to_string(e.width()));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kExtract;
  n->width = width;
  n->lo = lo;
  n->a = std::move(e);
  return Expr(std::move(n));
}

Expr Expr::Concat(Expr hi, Expr lo) {
  RequireNonNull(hi);
  RequireNonNull(lo);
  const uint32_t width = hi.width() + lo.width();
  if (!IsValidWidth(width))
    throw InvalidArgument("concat width " + std::to_string(width) +
                          " is not a valid width");
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kConcat;
  n->width = width;
  n->a = std::move(hi);
  n->b = std::move(lo);
  return Expr(std::move(n));
}

Expr Expr::ZeroExtend(Expr e, uint32_t width) {
  RequireNonNull(e);
  while (e.width() < width) {
    const uint32_t w = e.width();
    if (w == 1) throw InvalidArgument("cannot zero-extend a 1-bit expression");
    e = Concat(Const(w, 0), std::move(e));
  }
  if (e.width() != width)
    throw InvalidArgument("cannot zero-extend to width " +
                          std::to_string(width));
  return e;
}

ExprKind Expr::kind() const { return node_->kind; }
uint32_t Expr::width() const { return node_->width; }
uint32_t Expr::value() const { return node_->value; }
const VarRef &Expr::var() const { return node_->var; }
BinaryOp Expr::op() const { return node_->op; }
uint32_t Expr::lo() const { return node_->lo; }
const Expr &Expr::operand(int i) const { return i == 0 ? node_->a : node_->b; }

bool Expr::operator==(const Expr &other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  const Node &x = *node_;
  const Node &y = *other.node_;
  if (x.kind != y.kind || x.width != y.width) return false;
  switch (x.kind) {
    case ExprKind::kConst:
      return x.value == y.value;
    case ExprKind::kVar:
      return x.var == y.var;
    case ExprKind::kNot:
      return x.a == y.a;
    case ExprKind::kBinary:
      return x.op == y.op && x.a == y.a && x.b == y.b;
    case ExprKind::kExtract:
      return x.lo == y.lo && x.a == y.a;
    case ExprKind::kConcat:
      return x.a == y.a && x.b == y.b;
  }
  return false;
}

// ---------------------------------------------------------------------------
// BoolExpr construction and accessors.

BoolExpr BoolExpr::Cmp(CmpOp op, Expr a, Expr b) {
  RequireNonNull(a);
  RequireNonNull(b);
  if (a.width() != b.width())
    throw InvalidArgument("comparison operand widths differ: " +
                          std::to_string(a.width()) + " vs " +
                          std::to_string(b.width()));
  auto n = std::make_shared<Node>();
  n->kind = BoolKind::kCmp;
  n->cmp = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return BoolExpr(std::move(n));
}

BoolExpr BoolExpr::Not(BoolExpr p) {
  if (!p) throw InvalidArgument("null boolean operand");
  auto n = std::make_shared<Node>();
  n->kind = BoolKind::kNot;
  n->p = std::move(p);
  return BoolExpr(std::move(n));
}

BoolExpr BoolExpr::And(BoolExpr p, BoolExpr q) {
  if (!p || !q) throw InvalidArgument("null boolean operand");
  auto n = std::make_shared<Node>();
  n->kind = BoolKind::kAnd;
  n->p = std::move(p);
  n->q = std::move(q);
  return BoolExpr(std::move(n));
}

BoolExpr BoolExpr::Or(BoolExpr p, BoolExpr q) {
  if (!p || !q) throw InvalidArgument("null boolean operand");
  auto n = std::make_shared<Node>();
  n->kind = BoolKind::kOr;
  n->p = std::move(p);
  n->q = std::move(q);
  return BoolExpr(std::move(n));
}

BoolExpr BoolExpr::Literal(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = BoolKind::kLiteral;
  n->literal = value;
  return BoolExpr(std::move(n));
}

BoolKind BoolExpr::kind() const { return node_->kind; }
CmpOp BoolExpr::cmp() const { return node_->cmp; }
const Expr &BoolExpr::lhs() const { return node_->lhs; }
const Expr &BoolExpr::rhs() const { return node_->rhs; }
const BoolExpr &BoolExpr::operand(int i) const {
  return i == 0 ? node_->p : node_->q;
}
bool BoolExpr::literal() const { return node_->literal; }

bool BoolExpr::operator==(const BoolExpr &other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  const Node &x = *node_;
  const Node &y = *other.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case BoolKind::kCmp:
      return x.cmp == y.cmp && x.lhs == y.lhs && x.rhs == y.rhs;
    case BoolKind::kNot:
      return x.p == y.p;
    case BoolKind::kAnd:
    case BoolKind::kOr:
      return x.p == y.p && x.q == y.q;
    case BoolKind::kLiteral:
      return x.literal == y.literal;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

uint32_t ApplyBinary(BinaryOp op, uint32_t width, uint32_t a, uint32_t b) {
  const uint32_t mask = WidthMask(width);
  switch (op) {
    case BinaryOp::kAdd:
      return (a + b) & mask;
    case BinaryOp::kSub:
      return (a - b) & mask;
    case BinaryOp::kMul:
      return (a * b) & mask;
    case BinaryOp::kAnd:
      return a & b;
    case BinaryOp::kOr:
      return a | b;
    case BinaryOp::kXor:
      return a ^ b;
    case BinaryOp::kShl: {
      const uint32_t amt = b & 31;
      return amt >= width ? 0 : (a << amt) & mask;
    }
    case BinaryOp::kShr: {
      const uint32_t amt = b & 31;
      return amt >= width ? 0 : a >> amt;
    }
  }
  return 0;
}

bool ApplyCmp(CmpOp op, uint32_t a, uint32_t b) {
  switch (op) {
    case CmpOp::kEq:
      return a == b;
    case CmpOp::kNe:
      return a != b;
    case CmpOp::kUlt:
      return a < b;
    case CmpOp::kUle:
      return a <= b;
  }
  return false;
}

template <typename Lookup>
uint32_t EvalImpl(const Expr &e, const Lookup &lookup) {
  switch (e.kind()) {
    case ExprKind::kConst:
      return e.value();
    case ExprKind::kVar:
      return lookup(e.var());
    case ExprKind::kNot:
      return ~EvalImpl(e.operand(0), lookup) & WidthMask(e.width());
    case ExprKind::kBinary:
      return ApplyBinary(e.op(), e.width(), EvalImpl(e.operand(0), lookup),
                         EvalImpl(e.operand(1), lookup));
    case ExprKind::kExtract:
      return (EvalImpl(e.operand(0), lookup) >> e.lo()) & WidthMask(e.width());
    case ExprKind::kConcat: {
      const uint64_t hi = EvalImpl(e.operand(0), lookup);
      const uint32_t lo = EvalImpl(e.operand(1), lookup);
      return static_cast<uint32_t>((hi << e.operand(1).width()) | lo);
    }
  }
  return 0;
}

template <typename Lookup>
bool EvalImpl(const BoolExpr &p, const Lookup &lookup) {
  switch (p.kind()) {
    case BoolKind::kCmp:
      return ApplyCmp(p.cmp(), EvalImpl(p.lhs(), lookup),
                      EvalImpl(p.rhs(), lookup));
    case BoolKind::kNot:
      return !EvalImpl(p.operand(0), lookup);
    case BoolKind::kAnd:
      return EvalImpl(p.operand(0), lookup) && EvalImpl(p.operand(1), lookup);
    case BoolKind::kOr:
      return EvalImpl(p.operand(0), lookup) || EvalImpl(p.operand(1), lookup);
    case BoolKind::kLiteral:
      return p.literal();
  }
  return false;
}

struct MapLookup {
  const Assignment &a;
  uint32_t operator()(const VarRef &v) const {
    auto it = a.find(v);
    if (it == a.end())
      throw InvalidArgument("missing variable " + v.ToString());
    return it->second;
  }
};

struct FnLookup {
  const VarLookup &fn;
  uint32_t operator()(const VarRef &v) const {
    auto b = fn(v);
    if (!b) throw InvalidArgument("missing variable " + v.ToString());
    return *b;
  }
};

}  // namespace

uint32_t Eval(const Expr &e, const Assignment &a) {
  return EvalImpl(e, MapLookup{a});
}
bool Eval(const BoolExpr &p, const Assignment &a) {
  return EvalImpl(p, MapLookup{a});
}
uint32_t Eval(const Expr &e, const VarLookup &lookup) {
  return EvalImpl(e, FnLookup{lookup});
}
bool Eval(const BoolExpr &p, const VarLookup &lookup) {
  return EvalImpl(p, FnLookup{lookup});
}

// ---------------------------------------------------------------------------
// Free variables.

namespace {

void Collect(const Expr &e, std::set<VarRef> &out) {
  switch (e.kind()) {
    case ExprKind::kConst:
      return;
    case ExprKind::kVar:
      out.insert(e.var());
      return;
    case ExprKind::kNot:
    case ExprKind::kExtract:
      Collect(e.operand(0), out);
      return;
    case ExprKind::kBinary:
    case ExprKind::kConcat:
      Collect(e.operand(0), out);
      Collect(e.operand(1), out);
      return;
  }
}

}  // namespace

void CollectFreeVars(const BoolExpr &p, std::set<VarRef> &out) {
  switch (p.kind()) {
    case BoolKind::kCmp:
      Collect(p.lhs(), out);
      Collect(p.rhs(), out);
      return;
    case BoolKind::kNot:
      CollectFreeVars(p.operand(0), out);
      return;
    case BoolKind::kAnd:
    case BoolKind::kOr:
      CollectFreeVars(p.operand(0), out);
      CollectFreeVars(p.operand(1), out);
      return;
    case BoolKind::kLiteral:
      return;
  }
}

std::set<VarRef> FreeVars(const Expr &e) {
  std::set<VarRef> out;
  Collect(e, out);
  return out;
}

std::set<VarRef> FreeVars(const BoolExpr &p) {
  std::set<VarRef> out;
  CollectFreeVars(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Simplification.

namespace {

bool IsConstValue(const Expr &e, uint32_t v) {
  return e.IsConst() && e.value() == v;
}

bool Commutative(BinaryOp op) {
  return op == BinaryOp::kAdd || op == BinaryOp::kMul ||
         op == BinaryOp::kAnd || op == BinaryOp::kOr || op == BinaryOp::kXor;
}

// Views `e` as (constant high part, low part of width `lo_width`) when its
// high bits are known constants.
struct Split {
  uint32_t hi;
  Expr lo;
};

std::optional<Split> SplitAt(const Expr &e, uint32_t lo_width) {
  if (e.IsConst()) {
    return Split{e.value() >> lo_width,
                 Expr::Const(lo_width, e.value() & WidthMask(lo_width))};
  }
  if (e.kind() == ExprKind::kConcat && e.operand(1).width() == lo_width &&
      e.operand(0).IsConst()) {
    return Split{e.operand(0).value(), e.operand(1)};
  }
  return std::nullopt;
}

std::optional<uint32_t> ConcatLoWidth(const Expr &e) {
  if (e.kind() == ExprKind::kConcat && e.operand(0).IsConst())
    return e.operand(1).width();
  return std::nullopt;
}

}  // namespace

Expr SimplifyRoot(const Expr &e) {
  switch (e.kind()) {
    case ExprKind::kConst:
    case ExprKind::kVar:
      return e;
    case ExprKind::kNot: {
      const Expr &x = e.operand(0);
      if (x.IsConst())
        return Expr::Const(e.width(), ~x.value() & WidthMask(e.width()));
      if (x.kind() == ExprKind::kNot) return x.operand(0);
      return e;
    }
    case ExprKind::kBinary: {
      Expr a = e.operand(0);
      Expr b = e.operand(1);
      const uint32_t w = e.width();
      const uint32_t mask = WidthMask(w);
      if (a.IsConst() && b.IsConst())
        return Expr::Const(w, ApplyBinary(e.op(), w, a.value(), b.value()));
      if (Commutative(e.op()) && a.IsConst()) {
        return SimplifyRoot(Expr::Binary(e.op(), b, a));
      }
      switch (e.op()) {
        case BinaryOp::kAdd:
          if (IsConstValue(b, 0)) return a;
          break;
        case BinaryOp::kSub:
          if (IsConstValue(b, 0)) return a;
          if (a == b) return Expr::Const(w, 0);
          break;
        case BinaryOp::kMul:
          if (IsConstValue(b, 0)) return b;
          if (IsConstValue(b, 1)) return a;
          break;
        case BinaryOp::kAnd:
          if (IsConstValue(b, 0)) return b;
          if (IsConstValue(b, mask) || a == b) return a;
          break;
        case BinaryOp::kOr:
          if (IsConstValue(b, 0) || a == b) return a;
          if (IsConstValue(b, mask)) return b;
          break;
        case BinaryOp::kXor:
          if (IsConstValue(b, 0)) return a;
          if (a == b) return Expr::Const(w, 0);
          break;
        case BinaryOp::kShl:
        case BinaryOp::kShr:
          if (IsConstValue(a, 0)) return a;
          if (b.IsConst()) {
            const uint32_t amt = b.value() & 31;
            if (amt == 0) return a;
            if (amt >= w) return Expr::Const(w, 0);
          }
          break;
      }
      return e;
    }
    case ExprKind::kExtract: {
      const Expr &x = e.operand(0);
      const uint32_t lo = e.lo();
      const uint32_t w = e.width();
      if (x.IsConst()) return Expr::Const(w, (x.value() >> lo) & WidthMask(w));
      if (lo == 0 && w == x.width()) return x;
      if (x.kind() == ExprKind::kExtract)
        return SimplifyRoot(Expr::Extract(lo + x.lo(), w, x.operand(0)));
      if (x.kind() == ExprKind::kConcat) {
        const uint32_t low_width = x.operand(1).width();
        if (lo + w <= low_width)
          return SimplifyRoot(Expr::Extract(lo, w, x.operand(1)));
        if (lo >= low_width)
          return SimplifyRoot(Expr::Extract(lo - low_width, w, x.operand(0)));
      }
      return e;
    }
    case ExprKind::kConcat: {
      const Expr &hi = e.operand(0);
      const Expr &lo = e.operand(1);
      if (hi.IsConst() && lo.IsConst())
        return Expr::Const(e.width(), (hi.value() << lo.width()) | lo.value());
      return e;
    }
  }
  return e;
}

BoolExpr SimplifyRoot(const BoolExpr &p) {
  switch (p.kind()) {
    case BoolKind::kLiteral:
      return p;
    case BoolKind::kCmp: {
      const Expr &a = p.lhs();
      const Expr &b = p.rhs();
      const CmpOp op = p.cmp();
      if (a.IsConst() && b.IsConst())
        return BoolExpr::Literal(ApplyCmp(op, a.value(), b.value()));
      if (a == b)
        return BoolExpr::Literal(op == CmpOp::kEq || op == CmpOp::kUle);
      const uint32_t max = WidthMask(a.width());
      if (op == CmpOp::kUlt && (IsConstValue(b, 0) || IsConstValue(a, max)))
        return BoolExpr::Literal(false);
      if (op == CmpOp::kUle && (IsConstValue(a, 0) || IsConstValue(b, max)))
        return BoolExpr::Literal(true);
      // Narrow comparisons against values with constant high bits.
      std::optional<uint32_t> lo_width = ConcatLoWidth(a);
      if (!lo_width) lo_width = ConcatLoWidth(b);
      if (lo_width) {
        auto sa = SplitAt(a, *lo_width);
        auto sb = SplitAt(b, *lo_width);
        if (sa && sb) {
          const uint32_t ha = sa->hi;
          const uint32_t hb = sb->hi;
          switch (op) {
            case CmpOp::kEq:
              if (ha != hb) return BoolExpr::Literal(false);
              break;
            case CmpOp::kNe:
              if (ha != hb) return BoolExpr::Literal(true);
              break;
            case CmpOp::kUlt:
            case CmpOp::kUle:
              if (ha != hb) return BoolExpr::Literal(ha < hb);
              break;
          }
          return SimplifyRoot(BoolExpr::Cmp(op, sa->lo, sb->lo));
        }
      }
      return p;
    }
    case BoolKind::kNot: {
      const BoolExpr &x = p.operand(0);
      switch (x.kind()) {
        case BoolKind::kLiteral:
          return BoolExpr::Literal(!x.literal());
        case BoolKind::kNot:
          return x.operand(0);
        case BoolKind::kCmp:
          switch (x.cmp()) {
            case CmpOp::kEq:
              return SimplifyRoot(BoolExpr::Cmp(CmpOp::kNe, x.lhs(), x.rhs()));
            case CmpOp::kNe:
              return SimplifyRoot(BoolExpr::Cmp(CmpOp::kEq, x.lhs(), x.rhs()));
            case CmpOp::kUlt:
              return SimplifyRoot(BoolExpr::Cmp(CmpOp::kUle, x.rhs(), x.lhs()));
            case CmpOp::kUle:
              return SimplifyRoot(BoolExpr::Cmp(CmpOp::kUlt, x.rhs(), x.lhs()));
          }
          break;
        default:
          break;
      }
      return p;
    }
    case BoolKind::kAnd:
    case BoolKind::kOr: {
      const bool is_and = p.kind() == BoolKind::kAnd;
      const BoolExpr &x = p.operand(0);
      const BoolExpr &y = p.operand(1);
      for (const auto &[lit, other] : {std::pair{x, y}, std::pair{y, x}}) {
        if (!lit.IsLiteral()) continue;
        // and(true, q) = q; and(false, q) = false; dually for or.
        if (lit.literal() == is_and) return other;
        return BoolExpr::Literal(!is_and);
      }
      if (x == y) return x;
      return p;
    }
  }
  return p;
}

Expr Simplify(const Expr &e) {
  switch (e.kind()) {
    case ExprKind::kConst:
    case ExprKind::kVar:
      return e;
    case ExprKind::kNot:
      return SimplifyRoot(Expr::Not(Simplify(e.operand(0))));
    case ExprKind::kBinary:
      return SimplifyRoot(Expr::Binary(e.op(), Simplify(e.operand(0)),
                                       Simplify(e.operand(1))));
    case ExprKind::kExtract:
      return SimplifyRoot(
          Expr::Extract(e.lo(), e.width(), Simplify(e.operand(0))));
    case ExprKind::kConcat:
      return SimplifyRoot(
          Expr::Concat(Simplify(e.operand(0)), Simplify(e.operand(1))));
  }
  return e;
}

BoolExpr Simplify(const BoolExpr &p) {
  switch (p.kind()) {
    case BoolKind::kLiteral:
      return p;
    case BoolKind::kCmp:
      return SimplifyRoot(
          BoolExpr::Cmp(p.cmp(), Simplify(p.lhs()), Simplify(p.rhs())));
    case BoolKind::kNot:
      return SimplifyRoot(BoolExpr::Not(Simplify(p.operand(0))));
    case BoolKind::kAnd:
      return SimplifyRoot(
          BoolExpr::And(Simplify(p.operand(0)), Simplify(p.operand(1))));
    case BoolKind::kOr:
      return SimplifyRoot(
          BoolExpr::Or(Simplify(p.operand(0)), Simplify(p.operand(1))));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Path conditions.

std::vector<BoolExpr> Constraints(const PathCondition &pc) {
  std::vector<BoolExpr> out;
  out.reserve(pc.size());
  for (const auto &entry : pc) out.push_back(entry.constraint);
  return out;
}

std::set<VarRef> FreeVars(const PathCondition &pc) {
  std::set<VarRef> out;
  for (const auto &entry : pc) CollectFreeVars(entry.constraint, out);
  return out;
}

std::string ToString(const PathCondition &pc, const Program *program) {
  std::ostringstream out;
  for (const auto &entry : pc) {
    if (program != nullptr) {
      out << "; " << (entry.kind == ConstraintKind::kPin ? "pin" : "branch")
          << " " << program->FormatPc(entry.site) << " taken="
          << (entry.taken ? 1 : 0) << "\n";
    }
    out << ToString(entry.constraint) << "\n";
  }
  return out.str();
}

PathCondition PathFromConstraints(std::vector<BoolExpr> constraints) {
  PathCondition pc;
  pc.reserve(constraints.size());
  for (auto &c : constraints) {
    PathEntry entry;
    entry.constraint = std::move(c);
    entry.taken = true;
    pc.push_back(std::move(entry));
  }
  return pc;
}

}  // namespace cosig
