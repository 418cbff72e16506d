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

#include <random>
#include <sstream>

#include "cosig/cfg.h"
#include "cosig/error.h"
#include "cosig/execution_map.h"
#include "cosig/search.h"
#include "cosig/sigextract.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace cosig {
namespace {

const SymbolicMarks kFile{{"file"}};
constexpr std::string_view kDb = "Test:*:414243\n";

std::vector<uint8_t> Bytes(std::string_view s) { return {s.begin(), s.end()}; }

InputImage Seed(std::string_view db, size_t len, uint8_t fill = 0x58) {
  return ScannerInputs(db, std::vector<uint8_t>(len, fill));
}

SearchConfig Checked() {
  SearchConfig c;
  c.check = ConsistencyCheck::kEveryStep;
  return c;
}

std::vector<uint8_t> WitnessFile(const SearchResult &r) {
  for (const auto &region : r.witness->inputs.regions) {
    if (region.name == "file") return region.bytes;
  }
  return {};
}

TEST(ResolveTargetTest, LabelsAndPcs) {
  Program p = CorpusProgram("scanner_inline");
  EXPECT_EQ(ResolveTarget(p, TargetSpec::Label("DETECTED")),
            p.FindLabel("DETECTED").value());
  EXPECT_EQ(ResolveTarget(p, TargetSpec::Label("main:3")), (ModulePc{0, 3}));
  EXPECT_EQ(ResolveTarget(p, TargetSpec::At({0, 5})), (ModulePc{0, 5}));
  try {
    ResolveTarget(p, TargetSpec::Label("NOPE"));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("NOPE"), std::string::npos);
  }
  EXPECT_THROW(ResolveTarget(p, TargetSpec::At({0, 100000})), Error);
}

TEST(DistanceMapTest, Chain) {
  Program p = AssembleProgram(
      "main:\n  const r0, 0\n  jz r0, b\n  halt r0\nb:\n  jz r0, c\n"
      "  halt r0\nc:\n  halt r0\n");
  Cfg cfg = BuildCfg(p);
  auto d = DistanceMap(p, cfg, TargetSpec::Label("c"));
  ASSERT_EQ(d.size(), cfg.blocks().size());
  auto at = [&](uint32_t idx) { return d[cfg.BlockOf({0, idx})]; };
  EXPECT_EQ(at(0), 2u);
  EXPECT_EQ(at(2), kInfiniteDistance);
  EXPECT_EQ(at(3), 1u);
  EXPECT_EQ(at(4), kInfiniteDistance);
  EXPECT_EQ(at(5), 0u);
}

TEST(DistanceMapTest, ScannerInlineGolden) {
  const std::string golden =
      "main:0=10, main:7=9, main:8=5, main:9=4, main:10=1, main:11=10, "
      "main:12=-1, main:13=-1, main:15=0, main:17=8, main:20=7, main:22=9, "
      "main:26=9, main:29=8, main:32=7, main:34=8, main:40=9, main:44=12, "
      "main:48=8, main:49=7, main:51=9, main:57=8, main:63=11, main:65=10, "
      "main:67=13, main:69=10, main:72=13, main:77=11, main:86=9, main:88=6, "
      "main:91=8, main:94=9, main:95=8, main:96=6, main:99=8, main:101=8, "
      "main:107=7, main:108=12, main:111=12, main:114=11, main:117=12, "
      "main:120=12, main:123=11, main:126=12, main:129=12, main:132=11, "
      "main:135=11, main:137=3, main:145=4, main:149=3, main:151=5, "
      "main:153=5, main:154=4, main:155=3, main:157=4, main:165=4, "
      "main:168=3, main:170=5, main:173=2, main:175=2";
  Program p = CorpusProgram("scanner_inline");
  Cfg cfg = BuildCfg(p);
  auto d = DistanceMap(p, cfg, TargetSpec::Label("DETECTED"));
  std::ostringstream out;
  for (size_t i = 0; i < d.size(); ++i) {
    if (i) out << ", ";
    out << p.FormatPc(cfg.blocks()[i].first()) << "="
        << (d[i] == kInfiniteDistance ? -1 : static_cast<long>(d[i]));
  }
  EXPECT_EQ(out.str(), golden);
}

TEST(DistanceMapTest, EdgeProperty) {
  for (const auto &name : CorpusNames()) {
    Program p = CorpusProgram(name);
    Cfg cfg = BuildCfg(p);
    auto d = DistanceMap(p, cfg, TargetSpec::Label("DETECTED"));
    for (const Edge &e : cfg.edges()) {
      if (d[e.to] != kInfiniteDistance) {
        EXPECT_LE(d[e.from], d[e.to] + 1) << name;
      }
    }
    for (BlockId b = 0; b < d.size(); ++b) {
      if (d[b] == 0 || d[b] == kInfiniteDistance) continue;
      bool has_step = false;
      for (BlockId s : cfg.Successors(b)) has_step |= d[s] + 1 == d[b];
      EXPECT_TRUE(has_step) << name << " block " << b;
    }
  }
}

TEST(ExecutionMapTest, SingleTrace) {
  Program p = CorpusProgram("scanner_inline");
  Trace t = cosig::Run(p, LoadImage(p, ScannerInputs(kDb, Bytes("XY")))).trace;
  ExecutionMap m = BuildMap(p, std::span<const Trace>(&t, 1));
  EXPECT_EQ(m.blocks, std::set<ModulePc>(t.blocks.begin(), t.blocks.end()));
  EXPECT_TRUE(m.loads.empty());
  EXPECT_TRUE(m.call_sites.empty());
}

TEST(ExecutionMapTest, UnionOfTwo) {
  Program p = CorpusProgram("scanner_inline");
  std::vector<Trace> ts = {
      cosig::Run(p, LoadImage(p, ScannerInputs(kDb, Bytes("XY")))).trace,
      cosig::Run(p, LoadImage(p, ScannerInputs(kDb, Bytes("ABC")))).trace};
  ExecutionMap a = BuildMap(p, std::span<const Trace>(&ts[0], 1));
  ExecutionMap b = BuildMap(p, std::span<const Trace>(&ts[1], 1));
  ExecutionMap both = BuildMap(p, ts);
  ExecutionMap merged = a;
  merged.Merge(b);
  EXPECT_EQ(both, merged);
  EXPECT_TRUE(both.ContainsBlock(p.FindLabel("DETECTED").value()));
  EXPECT_FALSE(a.ContainsBlock(p.FindLabel("DETECTED").value()));
}

TEST(ExecutionMapTest, LibraryRecorded) {
  Program p = CorpusProgram("scanner_dylib");
  std::vector<Trace> ts = {
      cosig::Run(p, LoadImage(p, ScannerInputs(kDb, Bytes("XABC")))).trace};
  ExecutionMap m = BuildMap(p, ts);
  EXPECT_EQ(m.loads, std::set<std::string>{"str"});
  ASSERT_EQ(m.call_sites.size(), 1u);
  EXPECT_EQ(m.call_sites.begin()->second, "str.match");
  const uint32_t lib = *p.ModuleId("str");
  bool has_lib_block = false;
  for (const auto &b : m.blocks) has_lib_block |= b.module == lib;
  EXPECT_TRUE(has_lib_block);
}

TEST(ExecutionMapTest, RejectsForeignTrace) {
  Program inline_p = CorpusProgram("scanner_inline");
  Program dylib = CorpusProgram("scanner_dylib");
  std::vector<Trace> ts = {
      cosig::Run(dylib, LoadImage(dylib, ScannerInputs(kDb, Bytes("XABC")))).trace};
  EXPECT_THROW(BuildMap(inline_p, ts), Error);
}

TEST(DirectedSearchTest, FindsPatternInline) {
  Program p = CorpusProgram("scanner_inline");
  InputImage seed = Seed(kDb, 8);
  SearchResult r = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), Checked());
  ASSERT_EQ(r.verdict, SearchVerdict::kWitness);
  std::vector<uint8_t> f = WitnessFile(r);
  auto it = std::search(f.begin(), f.end(), std::begin("ABC"), std::end("ABC") - 1);
  EXPECT_NE(it, f.end());
  EXPECT_TRUE(ReplayMatches(p, r.witness->inputs, r.target,
                            r.witness->branch_path, true));
  EXPECT_TRUE(CheckAssignment(r.witness->path, r.witness->assignment));
  EXPECT_EQ(r.stats.consistency_violations, 0u);
  EXPECT_EQ(cosig::Run(p, LoadImage(p, r.witness->inputs)).state.exit_code, 1u);
}

TEST(DirectedSearchTest, SeedAlreadyReachesTarget) {
  Program p = CorpusProgram("scanner_inline");
  InputImage seed = ScannerInputs(kDb, Bytes("ABCXXXXX"));
  SearchResult r = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt());
  ASSERT_EQ(r.verdict, SearchVerdict::kWitness);
  EXPECT_EQ(r.stats.negations, 0u);
  EXPECT_EQ(r.stats.solver_calls, 0u);
  EXPECT_EQ(r.stats.iterations, 1u);
  EXPECT_EQ(r.witness->inputs, seed);
}

TEST(DirectedSearchTest, UnreachableTargetExhausts) {
  Program p = AssembleProgram(
      "main:\n  const r7, 0x0F00\n  load32 r1, [r7+0]\n  load8 r0, [r1+0]\n"
      "  const r4, 5\n  lt r2, r0, r4\n  jz r2, out\n  const r4, 10\n"
      "  lt r3, r4, r0\n  jnz r3, never\n  halt r0\nout:\n  halt r0\n"
      "never:\n  halt r3\n");
  InputImage seed{{{"file", 0x2000, {7}}}};
  SearchResult r = DirectedSearch(p, seed, kFile, TargetSpec::Label("never"),
                                  ExternalPolicy::Halt(), Checked());
  EXPECT_EQ(r.verdict, SearchVerdict::kExhausted);
  EXPECT_FALSE(r.witness.has_value());
  EXPECT_EQ(r.stats.unsat, 1u);
}

TEST(DirectedSearchTest, LoopScannerTerminates) {
  Program p = CorpusProgram("scanner_loop");
  for (uint8_t fill : {uint8_t{0x58}, uint8_t{0x00}}) {
    SearchConfig c;
    c.loop_bound = 128;
    c.max_states = 4096;
    SearchResult r = DirectedSearch(p, Seed(kDb, 8, fill), kFile,
                                    TargetSpec::Label("DETECTED"),
                                    ExternalPolicy::Halt(), c);
    if (r.verdict == SearchVerdict::kWitness) {
      EXPECT_TRUE(ReplayMatches(p, r.witness->inputs, r.target,
                                r.witness->branch_path, true));
    }
    SearchResult again = DirectedSearch(p, Seed(kDb, 8, fill), kFile,
                                        TargetSpec::Label("DETECTED"),
                                        ExternalPolicy::Halt(), c);
    EXPECT_EQ(again.verdict, r.verdict);
    EXPECT_EQ(SearchReportJson(p, again), SearchReportJson(p, r));
  }
}

TEST(DirectedSearchTest, DirectedNoWorseThanFifo) {
  for (const auto &name : {"scanner_inline", "scanner_loop"}) {
    Program p = CorpusProgram(name);
    SearchConfig directed;
    SearchConfig fifo;
    fifo.order = SearchOrder::kFifo;
    InputImage seed = Seed(kDb, 8);
    SearchResult a = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                    ExternalPolicy::Halt(), directed);
    SearchResult b = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                    ExternalPolicy::Halt(), fifo);
    ASSERT_EQ(a.verdict, SearchVerdict::kWitness) << name;
    if (b.verdict == SearchVerdict::kWitness) {
      EXPECT_LE(a.stats.solver_calls, b.stats.solver_calls) << name;
    }
  }
}

TEST(DirectedSearchTest, ParallelSolvingIsDeterministic) {
  Program p = CorpusProgram("scanner_loop");
  InputImage seed = Seed("A:*:4142\nB:2:4344\n", 6);
  SearchConfig one;
  SearchConfig four;
  four.jobs = 4;
  SearchResult a = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), one);
  SearchResult b = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), four);
  EXPECT_EQ(SearchReportJson(p, a), SearchReportJson(p, b));
}

TEST(DirectedSearchTest, BudgetExceeded) {
  Program p = CorpusProgram("scanner_inline");
  SearchConfig c;
  c.max_solver_calls = 1;
  SearchResult r = DirectedSearch(p, Seed(kDb, 8), kFile,
                                  TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), c);
  EXPECT_EQ(r.verdict, SearchVerdict::kBudgetExceeded);
  EXPECT_LE(r.stats.solver_calls, 1u);
}

TEST(DirectedSearchTest, ValidateConfig) {
  SearchConfig c;
  c.loop_bound = 0;
  EXPECT_THROW(ValidateConfig(c), Error);
  c = {};
  c.jobs = 0;
  EXPECT_THROW(ValidateConfig(c), Error);
  c = {};
  c.max_states = 0;
  EXPECT_THROW(ValidateConfig(c), Error);
  EXPECT_NO_THROW(ValidateConfig(SearchConfig{}));
}

TEST(MapRestrictionTest, EmptyMapForbidsNegation) {
  Program p = CorpusProgram("scanner_inline");
  SearchConfig c;
  c.restrict_to_map = ExecutionMap{};
  SearchResult r = DirectedSearch(p, Seed(kDb, 8), kFile,
                                  TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), c);
  EXPECT_EQ(r.verdict, SearchVerdict::kExhausted);
  EXPECT_EQ(r.stats.solver_calls, 0u);
  EXPECT_GT(r.stats.skipped_outside_map, 0u);
}

TEST(MapRestrictionTest, FullMapChangesNothing) {
  Program p = CorpusProgram("scanner_inline");
  Cfg cfg = BuildCfg(p);
  ExecutionMap all;
  for (const Block &b : cfg.blocks()) all.blocks.insert(b.first());
  SearchConfig c;
  c.restrict_to_map = all;
  InputImage seed = Seed(kDb, 8);
  SearchResult a = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt(), c);
  SearchResult b = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt());
  EXPECT_EQ(SearchReportJson(p, a), SearchReportJson(p, b));
}

// Every negated branch lies in the mapped prefix, so each generation's trace
// agrees with some earlier trace up to a mapped block.
TEST(MapRestrictionTest, RandomSubmapsOnlyNegateMappedPrefixes) {
  Program p = CorpusProgram("scanner_inline");
  InputImage seed = Seed(kDb, 8);
  Trace base = cosig::Run(p, LoadImage(p, seed)).trace;
  ExecutionMap full = BuildMap(p, std::vector<Trace>{base});
  std::vector<ModulePc> blocks(full.blocks.begin(), full.blocks.end());
  std::mt19937 rng(5);
  for (int round = 0; round < 20; ++round) {
    ExecutionMap m;
    for (const auto &b : blocks) {
      if (rng() % 4 != 0) m.blocks.insert(b);
    }
    SearchConfig c;
    c.restrict_to_map = m;
    SearchResult r = DirectedSearch(p, seed, kFile, TargetSpec::Label("DETECTED"),
                                    ExternalPolicy::Halt(), c);
    if (r.verdict != SearchVerdict::kWitness) continue;
    const Trace &t = r.witness->trace;
    // The first divergence from the seed happens after a mapped prefix.
    size_t i = 0;
    while (i < t.blocks.size() && i < base.blocks.size() &&
           t.blocks[i] == base.blocks[i]) {
      ++i;
    }
    ASSERT_GT(i, 0u);
    for (size_t j = 0; j < i; ++j) {
      EXPECT_TRUE(m.ContainsBlock(t.blocks[j])) << round;
    }
    if (i < t.blocks.size()) {
      EXPECT_TRUE(m.ContainsBlock(t.blocks[i]) || t.blocks[i] == r.target);
    }
  }
}

TEST(ReportTest, StableKeysAndDeterminism) {
  Program p = CorpusProgram("scanner_inline");
  SearchResult r = DirectedSearch(p, Seed(kDb, 8), kFile,
                                  TargetSpec::Label("DETECTED"),
                                  ExternalPolicy::Halt());
  std::string a = SearchReportJson(p, r);
  SearchResult r2 = DirectedSearch(p, Seed(kDb, 8), kFile,
                                   TargetSpec::Label("DETECTED"),
                                   ExternalPolicy::Halt());
  EXPECT_EQ(a, SearchReportJson(p, r2));
  auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["verdict"], "witness");
  EXPECT_EQ(j["target"], "DETECTED");
  EXPECT_EQ(j["policy"], "halt");
  EXPECT_TRUE(j.contains("statistics"));
  EXPECT_FALSE(j.contains("timestamp"));
  EXPECT_TRUE(nlohmann::json::parse(SearchReportJson(p, r, true))
                  .contains("timestamp"));
  EXPECT_EQ(HexBytes({0x0a, 0xff}), "0aff");
}

}  // namespace
}  // namespace cosig
