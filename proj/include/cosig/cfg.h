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

#ifndef COSIG_CFG_H_
#define COSIG_CFG_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosig/program.h"

namespace cosig {

using BlockId = uint32_t;

struct Block {
  uint32_t module = 0;
  uint32_t start = 0;
  uint32_t end = 0;  // exclusive

  ModulePc first() const { return {module, start}; }
  ModulePc last() const { return {module, end - 1}; }
  bool operator==(const Block &) const = default;
};

enum class EdgeKind : uint8_t { kFallthrough, kTaken, kCall, kReturn };

std::string_view EdgeKindName(EdgeKind kind);

struct Edge {
  BlockId from = 0;
  BlockId to = 0;
  EdgeKind kind = EdgeKind::kFallthrough;

  auto operator<=>(const Edge &) const = default;
};

// Basic-block graph over every module of a linked program. Blocks are
// numbered by module, then start index. Call edges enter callees (including
// library exports reached through XCALL); return edges leave each RET block
// for the instruction after every call site whose callee can reach it.
// XCALLs without a library target fall through, since their effect is
// atomic.
class Cfg {
 public:
  const std::vector<Block> &blocks() const { return blocks_; }
  // Sorted, unique.
  const std::vector<Edge> &edges() const { return edges_; }

  BlockId BlockOf(ModulePc pc) const;
  // Block starting exactly at `pc`, if any.
  std::optional<BlockId> BlockStartingAt(ModulePc pc) const;

  std::vector<BlockId> Successors(BlockId block) const;
  // Successor along an edge of the given kind.
  std::optional<BlockId> Successor(BlockId block, EdgeKind kind) const;
  bool HasEdge(BlockId from, BlockId to) const;

  std::string ToDot(const Program &program) const;
  std::string ToText(const Program &program) const;

  bool operator==(const Cfg &) const = default;

 private:
  friend Cfg BuildCfg(const Program &program);

  std::vector<Block> blocks_;
  std::vector<Edge> edges_;
  std::vector<std::vector<BlockId>> block_of_;  // [module][index]
};

Cfg BuildCfg(const Program &program);

}  // namespace cosig

#endif  // COSIG_CFG_H_
