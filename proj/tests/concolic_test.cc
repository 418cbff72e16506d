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

#include "cosig/concolic.h"
#include "cosig/error.h"
#include "cosig/search.h"
#include "cosig/sigextract.h"
#include "cosig/solver.h"
#include "gtest/gtest.h"

namespace cosig {
namespace {

const SymbolicMarks kFile{{"file"}};
constexpr std::string_view kDb = "Test:*:414243\n";

std::vector<uint8_t> Bytes(std::string_view s) { return {s.begin(), s.end()}; }

ConcolicOptions Debug() { return {kDefaultFuel, ConsistencyCheck::kEveryStep}; }

ExecutionMap MapFrom(const Program &p, const std::vector<InputImage> &seeds) {
  std::vector<Trace> traces;
  for (const auto &s : seeds) traces.push_back(cosig::Run(p, LoadImage(p, s)).trace);
  return BuildMap(p, traces);
}

ModulePc Label(const Program &p, std::string_view l) {
  return p.FindLabel(l).value();
}

bool Entered(const Trace &t, ModulePc pc) {
  return std::find(t.blocks.begin(), t.blocks.end(), pc) != t.blocks.end();
}

TEST(ConcolicTest, DetectionPathPinsPatternBytes) {
  Program p = CorpusProgram("scanner_inline");
  InputImage in = ScannerInputs(kDb, Bytes("ABC"));
  ConcolicResult r = ExecuteConcolic(p, in, kFile, ExternalPolicy::Halt(), Debug());
  ASSERT_EQ(r.outcome.kind, OutcomeKind::kHalted);
  EXPECT_EQ(r.outcome.exit_code, 1u);
  EXPECT_EQ(r.consistency_violations, 0u);
  // The condition implies each pattern byte: adding its negation is UNSAT.
  const std::vector<uint8_t> pattern = {0x41, 0x42, 0x43};
  for (uint32_t i = 0; i < 3; ++i) {
    std::vector<BoolExpr> cs = Constraints(r.path);
    cs.push_back(BoolExpr::Cmp(CmpOp::kNe, Expr::Var("file", i),
                               Expr::Const(8, pattern[i])));
    EXPECT_EQ(Solve(cs).verdict, Verdict::kUnsat) << i;
  }
  SolveResult s = Solve(r.path);
  ASSERT_EQ(s.verdict, Verdict::kSat);
  RunResult replay = cosig::Run(p, LoadImage(p, PatchInputs(in, s.assignment)));
  EXPECT_EQ(replay.state.exit_code, 1u);
  EXPECT_EQ(replay.trace.branches, r.trace.branches);
}

TEST(ConcolicTest, NoMarksIsConcrete) {
  Program p = CorpusProgram("scanner_inline");
  InputImage in = ScannerInputs(kDb, Bytes("XABCY"));
  ConcolicResult r =
      ExecuteConcolic(p, in, SymbolicMarks{}, ExternalPolicy::Halt(), Debug());
  EXPECT_TRUE(r.path.empty());
  RunResult plain = cosig::Run(p, LoadImage(p, in));
  EXPECT_EQ(r.trace, plain.trace);
  EXPECT_EQ(r.state, plain.state);
}

TEST(ConcolicTest, UnknownMarkedRegion) {
  Program p = CorpusProgram("scanner_inline");
  EXPECT_THROW(ExecuteConcolic(p, ScannerInputs(kDb, {}),
                               SymbolicMarks{{"nope"}}, ExternalPolicy::Halt()),
               Error);
}

TEST(ConcolicTest, ConcretizeLosesLibraryConstraints) {
  Program p = CorpusProgram("scanner_dylib");
  InputImage in = ScannerInputs(kDb, Bytes("XXXXXXXX"));
  ConcolicResult r =
      ExecuteConcolic(p, in, kFile, ExternalPolicy::Concretize(), Debug());
  ASSERT_EQ(r.outcome.kind, OutcomeKind::kHalted);
  EXPECT_EQ(r.outcome.exit_code, 0u);
  const uint32_t lib = *p.ModuleId("str");
  for (const auto &e : r.path) EXPECT_NE(e.site.module, lib);
  // Every negation of what was collected still ends CLEAN.
  for (size_t k = 0; k < r.path.size(); ++k) {
    SolveResult s = Solve(NegateAt(r.path, k));
    if (s.verdict != Verdict::kSat) continue;
    EXPECT_EQ(cosig::Run(p, LoadImage(p, PatchInputs(in, s.assignment)))
                  .state.exit_code,
              0u);
  }
  SearchResult search = DirectedSearch(p, in, kFile, TargetSpec::Label("DETECTED"),
                                       ExternalPolicy::Concretize());
  EXPECT_NE(search.verdict, SearchVerdict::kWitness);
}

TEST(ConcolicTest, MappedCollectsLibraryConstraints) {
  Program p = CorpusProgram("scanner_dylib");
  ExecutionMap map = MapFrom(p, {ScannerInputs(kDb, Bytes("ABC\0\0\0\0\0"))});
  EXPECT_TRUE(map.loads.contains("str"));
  InputImage in = ScannerInputs(kDb, Bytes("AXXXXXXX"));
  ConcolicResult r =
      ExecuteConcolic(p, in, kFile, ExternalPolicy::Mapped(map), Debug());
  ASSERT_EQ(r.outcome.kind, OutcomeKind::kHalted);
  EXPECT_EQ(r.consistency_violations, 0u);
  const uint32_t lib = *p.ModuleId("str");
  size_t in_library = 0;
  for (const auto &e : r.path) in_library += e.site.module == lib;
  EXPECT_GT(in_library, 0u);
  EXPECT_EQ(r.trace, cosig::Run(p, LoadImage(p, in)).trace);
}

TEST(ConcolicTest, MappedHaltsAtUnrecordedCallSite) {
  Program p = CorpusProgram("scanner_dylib");
  ExecutionMap empty_map;
  InputImage in = ScannerInputs(kDb, Bytes("XXXX"));
  ConcolicResult r =
      ExecuteConcolic(p, in, kFile, ExternalPolicy::Mapped(empty_map));
  ASSERT_EQ(r.outcome.kind, OutcomeKind::kPolicyHalt);
  EXPECT_EQ(r.outcome.detail, "str.match");
  EXPECT_THROW(ConcolicMachine(p, in, kFile, ExternalPolicy{PolicyMode::kMapped, nullptr}),
               Error);
}

constexpr std::string_view kLibProgram = R"(main:
  const r7, 0x0F00
  load32 r1, [r7+0]
  load8 r0, [r1+0]
  xcall m.inc
  halt r0
.module m
.export inc
inc:
  const r1, 1
  add r0, r0, r1
  ret
)";

TEST(ApplyExternalTest, HaltWithConcreteArgsMatchesInterp) {
  Program p = AssembleProgram(kLibProgram);
  InputImage in{{{"file", 0x2000, {0x58}}}};
  ConcolicResult r = ExecuteConcolic(p, in, SymbolicMarks{},
                                     ExternalPolicy::Halt(), Debug());
  RunResult plain = cosig::Run(p, LoadImage(p, in));
  EXPECT_EQ(r.trace, plain.trace);
  EXPECT_EQ(r.outcome.exit_code, 0x59u);
}

TEST(ApplyExternalTest, HaltWithSymbolicArgStops) {
  Program p = AssembleProgram(kLibProgram);
  InputImage in{{{"file", 0x2000, {0x58}}}};
  ConcolicResult r = ExecuteConcolic(p, in, kFile, ExternalPolicy::Halt());
  EXPECT_EQ(r.outcome.kind, OutcomeKind::kPolicyHalt);
  EXPECT_EQ(r.outcome.detail, "m.inc");
  EXPECT_EQ(r.outcome.pc, (ModulePc{0, 3}));
}

TEST(ApplyExternalTest, ConcretizeDropsShadow) {
  Program p = AssembleProgram(kLibProgram);
  InputImage in{{{"file", 0x2000, {0x58}}}};
  ConcolicMachine m(p, in, kFile, ExternalPolicy::Concretize(), Debug());
  while (p.at(m.state().pc).op != Opcode::kXcall) ASSERT_TRUE(m.StepOnce());
  ASSERT_TRUE(m.register_shadow(0).has_value());
  m.ApplyExternal();
  EXPECT_FALSE(m.register_shadow(0).has_value());
  m.Run();
  EXPECT_EQ(m.state().exit_code, 0x59u);
  EXPECT_FALSE(m.register_shadow(0).has_value());
  EXPECT_TRUE(m.path().empty());
}

TEST(ApplyExternalTest, MappedPropagatesThroughLibrary) {
  Program p = AssembleProgram(kLibProgram);
  InputImage in{{{"file", 0x2000, {0x58}}}};
  ExecutionMap map = MapFrom(p, {in});
  ConcolicMachine m(p, in, kFile, ExternalPolicy::Mapped(map), Debug());
  m.Run();
  EXPECT_EQ(m.state().exit_code, 0x59u);
  ASSERT_TRUE(m.register_shadow(0).has_value());
  EXPECT_EQ(Eval(m.register_shadow(0)->bv, Assignment{{{"file", 0}, 0x10}}),
            0x11u);
}

TEST(ApplyExternalTest, NativeWithSymbolicArgs) {
  Program p = AssembleProgram(
      "main:\n  const r7, 0x0F00\n  load32 r1, [r7+0]\n  load8 r2, [r1+0]\n"
      "  mov r0, r1\n  xcall mem.eq\n  halt r0\n");
  InputImage in{{{"file", 0x2000, {2, 5}}}};
  ConcolicResult halt = ExecuteConcolic(p, in, kFile, ExternalPolicy::Halt());
  EXPECT_EQ(halt.outcome.kind, OutcomeKind::kPolicyHalt);
  ConcolicResult conc =
      ExecuteConcolic(p, in, kFile, ExternalPolicy::Concretize(), Debug());
  EXPECT_EQ(conc.outcome.kind, OutcomeKind::kHalted);
  EXPECT_EQ(conc.trace, cosig::Run(p, LoadImage(p, in)).trace);
}

TEST(NegateAtTest, Examples) {
  auto eq = [](uint32_t i) {
    return BoolExpr::Cmp(CmpOp::kEq, Expr::Var("f", i), Expr::Const(8, 1));
  };
  PathCondition one = PathFromConstraints({eq(0)});
  PathCondition n1 = NegateAt(one, 0);
  ASSERT_EQ(n1.size(), 1u);
  EXPECT_EQ(Eval(n1[0].constraint, Assignment{{{"f", 0}, 1}}), false);
  PathCondition three = PathFromConstraints({eq(0), eq(1), eq(2)});
  PathCondition n2 = NegateAt(three, 1);
  ASSERT_EQ(n2.size(), 2u);
  EXPECT_EQ(n2[0].constraint, three[0].constraint);
  EXPECT_EQ(n2[1].constraint, Simplify(BoolExpr::Not(eq(1))));
  EXPECT_THROW(NegateAt(three, 3), Error);
}

// Exercises predicates, wide loads/stores, shifts and symbolic addresses.
constexpr std::string_view kMixed = R"(main:
  const r7, 0x0F00
  load32 r1, [r7+0]
  load8 r2, [r1+0]
  load8 r3, [r1+1]
  eq r4, r2, r3
  const r5, 0
  eq r5, r4, r5
  lt r6, r2, r3
  and r6, r6, r5
  xor r6, r6, r4
  add r0, r6, r2
  shl r0, r0, r3
  store32 [r1+4], r0
  load32 r0, [r1+3]
  const r6, 3
  and r6, r2, r6
  add r6, r1, r6
  load8 r5, [r6+0]
  store8 [r6+8], r3
  load32 r4, [r1+8]
  jz r5, skip
  sub r0, r0, r4
skip:
  or r4, r4, r6
  lt r6, r3, r2
  jnz r6, big
  mul r0, r0, r3
big:
  jz r0, zero
  halt r0
zero:
  const r0, 1
  halt r0
)";

TEST(ConsistencyTest, EveryStepOnRandomInputs) {
  Program p = AssembleProgram(kMixed);
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    std::vector<uint8_t> bytes(4);
    for (auto &b : bytes) b = static_cast<uint8_t>(rng() % 8);
    if (i % 2) for (auto &b : bytes) b = static_cast<uint8_t>(rng());
    InputImage in{{{"file", 0x2000, bytes}}};
    ConcolicResult r = ExecuteConcolic(p, in, kFile, ExternalPolicy::Halt(), Debug());
    ASSERT_EQ(r.consistency_violations, 0u) << r.first_violation;
    RunResult plain = cosig::Run(p, LoadImage(p, in));
    ASSERT_EQ(r.trace, plain.trace);
    ASSERT_TRUE(CheckAssignment(r.path, InputAssignment(in, kFile)));
    // Any model of the path follows the same branches.
    SolveResult s = Solve(r.path);
    ASSERT_EQ(s.verdict, Verdict::kSat);
    RunResult replay = cosig::Run(p, LoadImage(p, PatchInputs(in, s.assignment)));
    ASSERT_EQ(replay.trace.branches, r.trace.branches);
  }
}

TEST(ConsistencyTest, CorpusProgramsAllPolicies) {
  const std::vector<std::string> files = {"XABCY", "ABC", "XXXXXXXX", "",
                                          "AB", "RXXXX", "ZABCABC"};
  for (const auto &name : CorpusNames()) {
    Program p = CorpusProgram(name);
    for (const auto &file : files) {
      InputImage in = ScannerInputs(kDb, Bytes(file));
      ExecutionMap map = MapFrom(p, {in});
      for (const ExternalPolicy &policy :
           {ExternalPolicy::Halt(), ExternalPolicy::Concretize(),
            ExternalPolicy::Mapped(map)}) {
        ConcolicResult r = ExecuteConcolic(
            p, in, kFile, policy, {20000, ConsistencyCheck::kEveryStep});
        EXPECT_EQ(r.consistency_violations, 0u)
            << name << " " << file << " " << r.first_violation;
        RunResult plain = cosig::Run(p, LoadImage(p, in), 20000);
        if (r.outcome.kind != OutcomeKind::kPolicyHalt) {
          EXPECT_EQ(r.trace, plain.trace) << name << " " << file;
        }
      }
    }
  }
}

TEST(DivergenceTest, NegationDivergesExactlyAtSite) {
  for (const auto &name : CorpusNames()) {
    Program p = CorpusProgram(name);
    InputImage in = ScannerInputs("A:*:4142\nB:1:43\n", Bytes("XAXCX"));
    ExecutionMap map = MapFrom(p, {in});
    const ExternalPolicy policy = ExternalPolicy::Mapped(map);
    ConcolicResult r = ExecuteConcolic(p, in, kFile, policy);
    ASSERT_FALSE(r.path.empty()) << name;
    for (size_t k = 0; k < r.path.size(); ++k) {
      SolveResult s = Solve(NegateAt(r.path, k));
      if (s.verdict != Verdict::kSat) continue;
      ConcolicResult next =
          ExecuteConcolic(p, PatchInputs(in, s.assignment), kFile, policy);
      ASSERT_GT(next.path.size(), k) << name << " k=" << k;
      for (size_t i = 0; i < k; ++i) {
        EXPECT_EQ(next.path[i].site, r.path[i].site);
        EXPECT_EQ(next.path[i].taken, r.path[i].taken);
      }
      EXPECT_EQ(next.path[k].site, r.path[k].site);
      EXPECT_NE(next.path[k].taken, r.path[k].taken) << name << " k=" << k;
    }
  }
}

TEST(ConcolicTest, EnteredHelperSanity) {
  Program p = CorpusProgram("scanner_inline");
  ConcolicResult r = ExecuteConcolic(p, ScannerInputs(kDb, Bytes("ABC")), kFile,
                                     ExternalPolicy::Halt());
  EXPECT_TRUE(Entered(r.trace, Label(p, "DETECTED")));
}

}  // namespace
}  // namespace cosig
