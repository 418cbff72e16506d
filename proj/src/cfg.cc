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

#include "cosig/cfg.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

namespace cosig {

std::string_view EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kFallthrough:
      return "fallthrough";
    case EdgeKind::kTaken:
      return "taken";
    case EdgeKind::kCall:
      return "call";
    case EdgeKind::kReturn:
      return "return";
  }
  return "?";
}

BlockId Cfg::BlockOf(ModulePc pc) const {
  return block_of_[pc.module][pc.index];
}

std::optional<BlockId> Cfg::BlockStartingAt(ModulePc pc) const {
  if (pc.module >= block_of_.size() ||
      pc.index >= block_of_[pc.module].size())
    return std::nullopt;
  const BlockId id = block_of_[pc.module][pc.index];
  if (blocks_[id].start != pc.index) return std::nullopt;
  return id;
}

std::vector<BlockId> Cfg::Successors(BlockId block) const {
  std::vector<BlockId> out;
  auto it = std::lower_bound(edges_.begin(), edges_.end(),
                             Edge{block, 0, EdgeKind::kFallthrough});
  for (; it != edges_.end() && it->from == block; ++it) out.push_back(it->to);
  return out;
}

std::optional<BlockId> Cfg::Successor(BlockId block, EdgeKind kind) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(),
                             Edge{block, 0, EdgeKind::kFallthrough});
  for (; it != edges_.end() && it->from == block; ++it) {
    if (it->kind == kind) return it->to;
  }
  return std::nullopt;
}

bool Cfg::HasEdge(BlockId from, BlockId to) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(),
                             Edge{from, 0, EdgeKind::kFallthrough});
  for (; it != edges_.end() && it->from == from; ++it) {
    if (it->to == to) return true;
  }
  return false;
}

std::string Cfg::ToDot(const Program &program) const {
  std::ostringstream out;
  out << "digraph cfg {\n  node [shape=box];\n";
  for (BlockId id = 0; id < blocks_.size(); ++id) {
    const Block &b = blocks_[id];
    out << "  b" << id << " [label=\"" << program.module(b.module).name << ":"
        << b.start << ".." << b.end - 1 << "\"];\n";
  }
  for (const Edge &e : edges_) {
    out << "  b" << e.from << " -> b" << e.to << " [label=\""
        << EdgeKindName(e.kind) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string Cfg::ToText(const Program &program) const {
  std::ostringstream out;
  out << "blocks " << blocks_.size() << "\n";
  for (BlockId id = 0; id < blocks_.size(); ++id) {
    const Block &b = blocks_[id];
    out << "block " << id << " " << program.module(b.module).name << ":"
        << b.start << " " << b.end << "\n";
  }
  out << "edges " << edges_.size() << "\n";
  for (const Edge &e : edges_) {
    out << "edge " << e.from << " " << e.to << " " << EdgeKindName(e.kind)
        << "\n";
  }
  return out.str();
}

Cfg BuildCfg(const Program &program) {
  Cfg cfg;
  for (uint32_t m = 0; m < program.modules().size(); ++m) {
    const auto &code = program.module(m).code;
    cfg.block_of_.emplace_back(code.size());
    for (uint32_t i = 0; i < code.size(); ++i) {
      const bool leader = program.IsLeader({m, i});
      if (leader) cfg.blocks_.push_back({m, i, i + 1});
      cfg.blocks_.back().end = i + 1;
      cfg.block_of_[m][i] = static_cast<BlockId>(cfg.blocks_.size() - 1);
    }
  }

  std::set<Edge> edges;
  auto next_block = [&](const Block &b) -> std::optional<BlockId> {
    if (b.end >= program.module(b.module).code.size()) return std::nullopt;
    return cfg.block_of_[b.module][b.end];
  };
  // Callee entry block for CALL/XCALL blocks.
  auto callee = [&](const Block &b) -> std::optional<BlockId> {
    const Instruction &insn = program.at(b.last());
    if (insn.op == Opcode::kCall) return cfg.block_of_[b.module][insn.target];
    if (insn.op == Opcode::kXcall) {
      ExternalTarget t = program.ResolveExternal(insn.symbol);
      if (t.kind == ExternalKind::kLibrary)
        return cfg.block_of_[t.entry.module][t.entry.index];
    }
    return std::nullopt;
  };

  for (BlockId id = 0; id < cfg.blocks_.size(); ++id) {
    const Block &b = cfg.blocks_[id];
    const Instruction &insn = program.at(b.last());
    auto next = next_block(b);
    switch (insn.op) {
      case Opcode::kJmp:
        edges.insert({id, cfg.block_of_[b.module][insn.target],
                      EdgeKind::kTaken});
        break;
      case Opcode::kJz:
      case Opcode::kJnz:
        edges.insert({id, cfg.block_of_[b.module][insn.target],
                      EdgeKind::kTaken});
        if (next) edges.insert({id, *next, EdgeKind::kFallthrough});
        break;
      case Opcode::kCall:
      case Opcode::kXcall:
        if (auto c = callee(b)) {
          edges.insert({id, *c, EdgeKind::kCall});
        } else if (next) {
          edges.insert({id, *next, EdgeKind::kFallthrough});
        }
        break;
      case Opcode::kRet:
      case Opcode::kHalt:
        break;
      default:
        if (next) edges.insert({id, *next, EdgeKind::kFallthrough});
        break;
    }
  }

  // Return edges: walk each callee intraprocedurally (stepping over nested
  // calls to their continuation) and connect the RETs it reaches back to the
  // caller's continuation.
  for (BlockId id = 0; id < cfg.blocks_.size(); ++id) {
    const Block &b = cfg.blocks_[id];
    auto entry = callee(b);
    auto cont = next_block(b);
    if (!entry || !cont) continue;
    std::vector<bool> seen(cfg.blocks_.size(), false);
    std::vector<BlockId> work = {*entry};
    seen[*entry] = true;
    while (!work.empty()) {
      const BlockId cur = work.back();
      work.pop_back();
      const Block &cb = cfg.blocks_[cur];
      const Instruction &last = program.at(cb.last());
      std::vector<BlockId> succ;
      if (last.op == Opcode::kRet) {
        edges.insert({cur, *cont, EdgeKind::kReturn});
      } else if (last.op == Opcode::kCall || last.op == Opcode::kXcall) {
        if (auto n = next_block(cb)) succ.push_back(*n);
      } else if (last.op != Opcode::kHalt) {
        auto it = edges.lower_bound({cur, 0, EdgeKind::kFallthrough});
        for (; it != edges.end() && it->from == cur; ++it) {
          if (it->kind == EdgeKind::kTaken ||
              it->kind == EdgeKind::kFallthrough)
            succ.push_back(it->to);
        }
      }
      for (BlockId s : succ) {
        if (!seen[s]) {
          seen[s] = true;
          work.push_back(s);
        }
      }
    }
  }
  cfg.edges_.assign(edges.begin(), edges.end());
  return cfg;
}

}  // namespace cosig
