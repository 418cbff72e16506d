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

// Blocks, library loads and external call sites recorded from concrete
// pre-runs. Used to let symbolic execution follow library code that the
// pre-runs showed to be loaded, and to restrict path search to the region
// of the program those runs covered.

#ifndef COSIG_EXECUTION_MAP_H_
#define COSIG_EXECUTION_MAP_H_

#include <set>
#include <span>
#include <string>
#include <utility>

#include "cosig/interp.h"
#include "cosig/program.h"

namespace cosig {

struct ExecutionMap {
  std::set<ModulePc> blocks;  // block start pcs
  std::set<std::string> loads;
  std::set<std::pair<ModulePc, std::string>> call_sites;

  void Merge(const ExecutionMap &other);
  bool ContainsBlock(ModulePc start) const { return blocks.contains(start); }
  bool ContainsCallSite(ModulePc pc, const std::string &symbol) const {
    return call_sites.contains({pc, symbol});
  }

  bool operator==(const ExecutionMap &) const = default;
};

// Union over traces recorded from `program`. Throws InvalidArgument when a
// trace does not fit the program.
ExecutionMap BuildMap(const Program &program, std::span<const Trace> traces);
ExecutionMap BuildMapFromFiles(const Program &program,
                               std::span<const std::string> trace_files);

}  // namespace cosig

#endif  // COSIG_EXECUTION_MAP_H_
