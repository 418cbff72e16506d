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

#include "cosig/execution_map.h"

#include <fstream>
#include <sstream>

#include "cosig/error.h"

namespace cosig {

void ExecutionMap::Merge(const ExecutionMap &other) {
  blocks.insert(other.blocks.begin(), other.blocks.end());
  loads.insert(other.loads.begin(), other.loads.end());
  call_sites.insert(other.call_sites.begin(), other.call_sites.end());
}

ExecutionMap BuildMap(const Program &program, std::span<const Trace> traces) {
  ExecutionMap map;
  for (const Trace &trace : traces) {
    std::optional<ModulePc> block;
    for (const auto &[kind, i] : trace.events) {
      switch (kind) {
        case TraceEvent::kBlock: {
          const ModulePc pc = trace.blocks.at(i);
          if (!program.Valid(pc) || !program.IsLeader(pc))
            throw InvalidArgument("trace block " + program.FormatPc(pc) +
                                  " is not a block of this program");
          map.blocks.insert(pc);
          block = pc;
          break;
        }
        case TraceEvent::kLoad:
          if (!program.ModuleId(trace.loads.at(i)))
            throw InvalidArgument("trace loads unknown library '" +
                                  trace.loads.at(i) + "'");
          map.loads.insert(trace.loads.at(i));
          break;
        case TraceEvent::kXcall: {
          const std::string &symbol = trace.xcalls.at(i).symbol;
          if (!block)
            throw InvalidArgument("trace call to '" + symbol +
                                  "' precedes every block");
          // The XCALL ends the block it occurs in.
          ModulePc pc = *block;
          const auto &code = program.module(pc.module).code;
          while (pc.index < code.size() && !EndsBlock(code[pc.index].op))
            ++pc.index;
          if (pc.index >= code.size() || code[pc.index].op != Opcode::kXcall ||
              code[pc.index].symbol != symbol)
            throw InvalidArgument("trace call to '" + symbol +
                                  "' does not match the program at " +
                                  program.FormatPc(*block));
          map.call_sites.insert({pc, symbol});
          break;
        }
        case TraceEvent::kBranch:
          break;
      }
    }
  }
  return map;
}

ExecutionMap BuildMapFromFiles(const Program &program,
                               std::span<const std::string> trace_files) {
  std::vector<Trace> traces;
  for (const auto &path : trace_files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read trace file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    traces.push_back(ParseTraceFile(program, ss.str()));
  }
  return BuildMap(program, traces);
}

}  // namespace cosig
