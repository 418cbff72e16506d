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

// Symbolic bitvector expressions over input bytes, boolean constraints over
// them, and path conditions.
//
// Expressions are immutable and cheap to copy; structurally equal trees
// compare equal regardless of sharing. Widths are restricted to 1, 8, 16
// and 32 bits and every constructor enforces its operand contract.

#ifndef COSIG_SYMEXPR_H_
#define COSIG_SYMEXPR_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cosig/program.h"

namespace cosig {

// One symbolic input byte: byte `index` of input region `region`.
struct VarRef {
  std::string region;
  uint32_t index = 0;

  auto operator<=>(const VarRef &) const = default;
  std::string ToString() const;  // "file[2]"
};

using Assignment = std::map<VarRef, uint8_t>;

enum class ExprKind : uint8_t { kConst, kVar, kNot, kBinary, kExtract, kConcat };
enum class BinaryOp : uint8_t { kAdd, kSub, kMul, kAnd, kOr, kXor, kShl, kShr };
enum class CmpOp : uint8_t { kEq, kNe, kUlt, kUle };
enum class BoolKind : uint8_t { kCmp, kNot, kAnd, kOr, kLiteral };

bool IsValidWidth(uint32_t width);
uint32_t WidthMask(uint32_t width);

class Expr {
 public:
  Expr() = default;  // null; only valid as a placeholder

  static Expr Const(uint32_t width, uint32_t value);
  static Expr Var(std::string region, uint32_t index);
  static Expr Not(Expr e);
  static Expr Binary(BinaryOp op, Expr a, Expr b);
  static Expr Extract(uint32_t lo, uint32_t width, Expr e);
  static Expr Concat(Expr hi, Expr lo);
  // Pads with zero constants up to `width` (>= e.width()).
  static Expr ZeroExtend(Expr e, uint32_t width);

  explicit operator bool() const { return node_ != nullptr; }

  ExprKind kind() const;
  uint32_t width() const;
  uint32_t value() const;       // kConst
  const VarRef &var() const;    // kVar
  BinaryOp op() const;          // kBinary
  uint32_t lo() const;          // kExtract
  const Expr &operand(int i) const;  // kNot/kExtract: 0; kBinary/kConcat: 0,1

  bool IsConst() const { return kind() == ExprKind::kConst; }
  const void *id() const { return node_.get(); }

  bool operator==(const Expr &other) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

class BoolExpr {
 public:
  BoolExpr() = default;

  static BoolExpr Cmp(CmpOp op, Expr a, Expr b);
  static BoolExpr Not(BoolExpr p);
  static BoolExpr And(BoolExpr p, BoolExpr q);
  static BoolExpr Or(BoolExpr p, BoolExpr q);
  static BoolExpr Literal(bool value);

  explicit operator bool() const { return node_ != nullptr; }

  BoolKind kind() const;
  CmpOp cmp() const;                   // kCmp
  const Expr &lhs() const;             // kCmp
  const Expr &rhs() const;             // kCmp
  const BoolExpr &operand(int i) const;  // kNot: 0; kAnd/kOr: 0,1
  bool literal() const;                // kLiteral

  bool IsLiteral() const { return kind() == BoolKind::kLiteral; }
  const void *id() const { return node_.get(); }

  bool operator==(const BoolExpr &other) const;

 private:
  struct Node;
  explicit BoolExpr(std::shared_ptr<const Node> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Constant folding and identity rewrites. Semantics preserving.
Expr Simplify(const Expr &e);
BoolExpr Simplify(const BoolExpr &p);
// Applies rewrites at the root only, assuming operands are already
// simplified. Used when building expressions incrementally.
Expr SimplifyRoot(const Expr &e);
BoolExpr SimplifyRoot(const BoolExpr &p);

// Looks up a variable; returns nullopt when it is not assigned.
using VarLookup = std::function<std::optional<uint8_t>(const VarRef &)>;

// Modular evaluation at the expression's width. Throws InvalidArgument on a
// variable missing from the assignment.
uint32_t Eval(const Expr &e, const Assignment &a);
bool Eval(const BoolExpr &p, const Assignment &a);
uint32_t Eval(const Expr &e, const VarLookup &lookup);
bool Eval(const BoolExpr &p, const VarLookup &lookup);

std::set<VarRef> FreeVars(const Expr &e);
std::set<VarRef> FreeVars(const BoolExpr &p);
void CollectFreeVars(const BoolExpr &p, std::set<VarRef> &out);

// S-expression text, e.g. `(= (var file 0) (const 8 0x41))`.
std::string ToString(const Expr &e);
std::string ToString(const BoolExpr &p);
Expr ParseExpr(std::string_view text);
BoolExpr ParseBoolExpr(std::string_view text);
// Whitespace-separated constraints; `;` starts a comment.
std::vector<BoolExpr> ParseConstraints(std::string_view text);

enum class ConstraintKind : uint8_t {
  kBranch,  // direction of a JZ/JNZ
  kPin,     // concrete value chosen for a symbolic address
};

struct PathEntry {
  BoolExpr constraint;
  ModulePc site;
  bool taken = false;
  ConstraintKind kind = ConstraintKind::kBranch;
  uint32_t block_pos = 0;  // index into Trace::blocks of the enclosing block
};

// Ordered conjunction of branch constraints collected along one path.
using PathCondition = std::vector<PathEntry>;

std::vector<BoolExpr> Constraints(const PathCondition &pc);
std::set<VarRef> FreeVars(const PathCondition &pc);
std::string ToString(const PathCondition &pc, const Program *program = nullptr);
PathCondition PathFromConstraints(std::vector<BoolExpr> constraints);

}  // namespace cosig

#endif  // COSIG_SYMEXPR_H_
