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

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cosig/error.h"
#include "cosig/interp.h"

namespace cosig {
namespace {

std::string Word(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

std::vector<std::string_view> Fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    size_t end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

uint32_t ParseWord(std::string_view s, int line) {
  uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("trace: bad hex word '" + std::string(s) + "' (line " +
                     std::to_string(line) + ")");
  return v;
}

}  // namespace

std::string WriteTraceFile(const Program &program, const Trace &trace) {
  std::ostringstream out;
  out << "trace v1\n";
  for (const auto &[kind, i] : trace.events) {
    switch (kind) {
      case TraceEvent::kBlock:
        out << "block " << program.FormatPc(trace.blocks[i]) << "\n";
        break;
      case TraceEvent::kBranch:
        out << "branch " << program.FormatPc(trace.branches[i].pc) << " "
            << (trace.branches[i].taken ? 1 : 0) << "\n";
        break;
      case TraceEvent::kXcall: {
        const ExternalCall &c = trace.xcalls[i];
        out << "xcall " << c.symbol << " " << Word(c.args[0]) << ","
            << Word(c.args[1]) << "," << Word(c.args[2]) << ","
            << Word(c.args[3]) << " -> " << Word(c.result) << " via " << c.via
            << "\n";
        break;
      }
      case TraceEvent::kLoad:
        out << "load " << trace.loads[i] << "\n";
        break;
    }
  }
  return out.str();
}

Trace ParseTraceFile(const Program &program, std::string_view text) {
  Trace trace;
  int number = 0;
  bool header = false;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string &what) -> Error {
      return ParseError("trace: " + what + " (line " + std::to_string(number) +
                        ")");
    };
    const auto f = Fields(line);
    if (!header) {
      if (f.size() != 2 || f[0] != "trace" || f[1] != "v1")
        throw fail("missing 'trace v1' header");
      header = true;
      continue;
    }
    auto pc_of = [&](std::string_view s) {
      auto pc = program.ParsePc(s);
      if (!pc) throw fail("pc '" + std::string(s) + "' not in program");
      return *pc;
    };
    if (f[0] == "block" && f.size() == 2) {
      const ModulePc pc = pc_of(f[1]);
      if (!program.IsLeader(pc))
        throw fail("'" + std::string(f[1]) + "' does not start a block");
      trace.events.emplace_back(TraceEvent::kBlock, trace.blocks.size());
      trace.blocks.push_back(pc);
    } else if (f[0] == "branch" && f.size() == 3 &&
               (f[2] == "0" || f[2] == "1")) {
      trace.events.emplace_back(TraceEvent::kBranch, trace.branches.size());
      trace.branches.push_back({pc_of(f[1]), f[2] == "1"});
    } else if (f[0] == "xcall" && f.size() == 7 && f[3] == "->" &&
               f[5] == "via") {
      ExternalCall call;
      call.symbol = std::string(f[1]);
      std::string_view args = f[2];
      for (int i = 0; i < 4; ++i) {
        const size_t comma = args.find(',');
        if ((i < 3) == (comma == std::string_view::npos))
          throw fail("xcall expects four argument words");
        call.args[i] = ParseWord(args.substr(0, comma), number);
        if (i < 3) args.remove_prefix(comma + 1);
      }
      call.result = ParseWord(f[4], number);
      call.via = std::string(f[6]);
      trace.events.emplace_back(TraceEvent::kXcall, trace.xcalls.size());
      trace.xcalls.push_back(std::move(call));
    } else if (f[0] == "load" && f.size() == 2) {
      if (!program.ModuleId(f[1]))
        throw fail("unknown library '" + std::string(f[1]) + "'");
      trace.events.emplace_back(TraceEvent::kLoad, trace.loads.size());
      trace.loads.push_back(std::string(f[1]));
    } else {
      throw fail("unrecognized line '" + std::string(line) + "'");
    }
  }
  if (!header) throw ParseError("trace: missing 'trace v1' header");
  return trace;
}

}  // namespace cosig
