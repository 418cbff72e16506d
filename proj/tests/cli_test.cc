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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult Cli(const std::string &args) {
  const std::string cmd = std::string(COSIG_BINARY) + " " + args + " 2>&1";
  CliResult r;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("cosig_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string &name, const std::string &content) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  static std::string Read(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, AsmWritesOutput) {
  const std::string src = Write("p.s", "main:\n  const r0, 7\n  halt r0\n");
  const std::string out = (dir_ / "p.out").string();
  CliResult r = Cli("asm " + src + " -o " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_FALSE(Read(out).empty());
}

TEST_F(CliTest, AsmErrorIsInputError) {
  const std::string src = Write("bad.s", "main:\n  frob r0\n");
  CliResult r = Cli("asm " + src);
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("line 2"), std::string::npos) << r.output;
}

TEST_F(CliTest, RunReportsExit) {
  const std::string src = Write("p.s", "main:\n  const r0, 7\n  halt r0\n");
  CliResult r = Cli("run " + src);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("exit=7"), std::string::npos) << r.output;
}

TEST_F(CliTest, ExtractHappyPath) {
  const std::string db = Write("db.txt", "Test:*:414243\n");
  const std::string report = (dir_ / "r.json").string();
  CliResult r = Cli("extract corpus:scanner_inline --db " + db +
                    " --file-len 8 --target DETECTED --ground-truth Test"
                    " --report " + report);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("equality=pass"), std::string::npos) << r.output;
  auto j = nlohmann::json::parse(Read(report));
  EXPECT_EQ(j["recovered_pattern"], "414243");
  EXPECT_EQ(j["verification"], "pass");
}

TEST_F(CliTest, ExtractConcretizeNotReached) {
  const std::string db = Write("db.txt", "Test:*:414243\n");
  CliResult r = Cli("extract corpus:scanner_dylib --db " + db +
                    " --file-len 8 --target DETECTED --policy concretize");
  EXPECT_EQ(r.exit_code, 3) << r.output;
}

TEST_F(CliTest, UnknownLabelNamesIt) {
  CliResult r = Cli("search corpus:scanner_inline --fill file=8@10000"
                    " --symbolic file --target NO_SUCH_LABEL");
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("NO_SUCH_LABEL"), std::string::npos) << r.output;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli("").exit_code, 1);
  EXPECT_EQ(Cli("frobnicate").exit_code, 1);
  EXPECT_EQ(Cli("search corpus:scanner_inline").exit_code, 1);
  EXPECT_EQ(Cli("--help").exit_code, 0);
}

TEST_F(CliTest, SolveOutput) {
  const std::string cs =
      Write("c.txt", "(= (var file 0) (const 8 0x41))\n"
                     "(bvult (var file 1) (const 8 2))\n");
  CliResult r = Cli("solve " + cs);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "sat\nvar file 0 = 0x41\nvar file 1 = 0x00\n");
  const std::string bad = Write("u.txt",
                                "(= (var f 0) (const 8 1))\n"
                                "(= (var f 0) (const 8 2))\n");
  r = Cli("solve " + bad);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "unsat\n");
}

TEST_F(CliTest, CfgDot) {
  CliResult r = Cli("cfg corpus:scanner_inline --dot");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output.rfind("digraph", 0), 0u) << r.output.substr(0, 80);
  EXPECT_NE(r.output.find("->"), std::string::npos);
}

TEST_F(CliTest, TraceAndMappedSearch) {
  const std::string db = Write("db.txt", "Test:*:414243\n");
  const std::string file = Write("f.bin", std::string("ABC\0\0\0\0\0", 8));
  const std::string trace = (dir_ / "t.trace").string();
  CliResult t = Cli("trace corpus:scanner_dylib --input db=" + db +
                    "@1000 --input file=" + file + "@10000 -o " + trace);
  ASSERT_EQ(t.exit_code, 0) << t.output;
  CliResult r = Cli("search corpus:scanner_dylib --input db=" + db +
                    "@1000 --fill file=8@10000 --symbolic file --target DETECTED"
                    " --policy mapped --map " + trace + " --restrict-to-map");
  EXPECT_EQ(r.exit_code, 0) << r.output;
}

TEST_F(CliTest, SearchReportIsDeterministic) {
  const std::string db = Write("db.txt", "Test:*:414243\n");
  const std::string a = (dir_ / "a.json").string();
  const std::string b = (dir_ / "b.json").string();
  const std::string base = "search corpus:scanner_inline --input db=" + db +
                           "@1000 --fill file=8@10000 --symbolic file"
                           " --target DETECTED --report ";
  ASSERT_EQ(Cli(base + a).exit_code, 0);
  ASSERT_EQ(Cli(base + b).exit_code, 0);
  EXPECT_EQ(Read(a), Read(b));
  EXPECT_FALSE(Read(a).empty());
}

}  // namespace
