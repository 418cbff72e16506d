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

#include <map>

#include "cosig/error.h"
#include "cosig/sigextract.h"

namespace cosig {
namespace {

// Scratch variables at 0x300: +0 db cursor, +4 db end, +8 rule offset
// (0xFFFFFFFF for '*'), +12 pattern length, +16.. saved registers.
// The decoded pattern lives at 0x400.

constexpr std::string_view kEntry = R"(.module main
main:
  CONST r7, 0x0F00
  LOAD32 r1, [r7+0]
  LOAD32 r2, [r7+4]
  ADD r2, r1, r2
  CONST r7, 0x300
  STORE32 [r7+0], r1
  STORE32 [r7+4], r2
next_rule:
  CALL parse_rule
  JZ r0, rules_done
  CALL match_rule
  JNZ r0, DETECTED
  JMP next_rule
)";

constexpr std::string_view kEndpoints = R"(rules_done:
  JMP CLEAN
CLEAN:
  CONST r0, 0
  HALT r0
DETECTED:
  CONST r0, 1
  HALT r0
)";

// Restarts the whole scan while the file begins with 'R'.
constexpr std::string_view kRetryEndpoints = R"(rules_done:
  CONST r7, 0x0F00
  LOAD32 r1, [r7+8]
  LOAD32 r2, [r7+12]
  JZ r2, CLEAN
  LOAD8 r3, [r1+0]
  CONST r4, 0x52
  EQ r3, r3, r4
  JNZ r3, rescan
  JMP CLEAN
rescan:
  CONST r7, 0x0F00
  LOAD32 r1, [r7+0]
  CONST r7, 0x300
  STORE32 [r7+0], r1
  JMP next_rule
CLEAN:
  CONST r0, 0
  HALT r0
DETECTED:
  CONST r0, 1
  HALT r0
)";

// parse_rule: decodes the next rule at the db cursor into the scratch
// area. r0 = 1 when a rule was read, 0 at the end of the database.
constexpr std::string_view kParser = R"(parse_rule:
  CONST r7, 0x300
  LOAD32 r1, [r7+0]
  LOAD32 r2, [r7+4]
pr_line:
  EQ r3, r1, r2
  JNZ r3, pr_end
  LOAD8 r3, [r1+0]
  CONST r4, 10
  EQ r4, r3, r4
  JNZ r4, pr_blank
  CONST r4, 13
  EQ r4, r3, r4
  JNZ r4, pr_blank
  CONST r4, 35
  EQ r4, r3, r4
  JNZ r4, pr_comment
pr_name:
  EQ r3, r1, r2
  JNZ r3, pr_end
  LOAD8 r3, [r1+0]
  CONST r5, 1
  ADD r1, r1, r5
  CONST r4, 58
  EQ r4, r3, r4
  JZ r4, pr_name
  LOAD8 r3, [r1+0]
  CONST r4, 42
  EQ r4, r3, r4
  JZ r4, pr_decimal
  CONST r6, 0xFFFFFFFF
  CONST r5, 2
  ADD r1, r1, r5
  JMP pr_hex_start
pr_decimal:
  CONST r6, 0
pr_dec_loop:
  EQ r3, r1, r2
  JNZ r3, pr_end
  LOAD8 r3, [r1+0]
  CONST r5, 1
  ADD r1, r1, r5
  CONST r4, 58
  EQ r4, r3, r4
  JNZ r4, pr_hex_start
  CONST r4, 10
  MUL r6, r6, r4
  CONST r4, 48
  SUB r3, r3, r4
  ADD r6, r6, r3
  JMP pr_dec_loop
pr_hex_start:
  STORE32 [r7+8], r6
  CONST r6, 0
pr_hex_loop:
  EQ r3, r1, r2
  JNZ r3, pr_hex_done
  LOAD8 r3, [r1+0]
  CALL hexval
  CONST r4, 16
  LT r4, r3, r4
  JZ r4, pr_hex_done
  MOV r5, r3
  CONST r4, 4
  SHL r5, r5, r4
  LOAD8 r3, [r1+1]
  CALL hexval
  OR r5, r5, r3
  CONST r4, 0x400
  ADD r4, r4, r6
  STORE8 [r4+0], r5
  CONST r4, 1
  ADD r6, r6, r4
  CONST r4, 2
  ADD r1, r1, r4
  JMP pr_hex_loop
pr_hex_done:
  STORE32 [r7+12], r6
  CALL skip_line
  STORE32 [r7+0], r1
  CONST r0, 1
  RET
pr_blank:
  CONST r5, 1
  ADD r1, r1, r5
  JMP pr_line
pr_comment:
  CALL skip_line
  JMP pr_line
pr_end:
  STORE32 [r7+0], r1
  CONST r0, 0
  RET

; Advances r1 past the next newline, stopping at r2.
skip_line:
  EQ r3, r1, r2
  JNZ r3, sl_done
  LOAD8 r3, [r1+0]
  CONST r5, 1
  ADD r1, r1, r5
  CONST r4, 10
  EQ r4, r3, r4
  JZ r4, skip_line
sl_done:
  RET

; r3 = value of the hex digit in r3, or 0xFF.
hexval:
  CONST r4, 48
  LT r4, r3, r4
  JNZ r4, hv_bad
  CONST r4, 58
  LT r4, r3, r4
  JZ r4, hv_upper
  CONST r4, 48
  SUB r3, r3, r4
  RET
hv_upper:
  CONST r4, 65
  LT r4, r3, r4
  JNZ r4, hv_bad
  CONST r4, 71
  LT r4, r3, r4
  JZ r4, hv_lower
  CONST r4, 55
  SUB r3, r3, r4
  RET
hv_lower:
  CONST r4, 97
  LT r4, r3, r4
  JNZ r4, hv_bad
  CONST r4, 103
  LT r4, r3, r4
  JZ r4, hv_bad
  CONST r4, 87
  SUB r3, r3, r4
  RET
hv_bad:
  CONST r3, 0xFF
  RET
)";

// match_rule prologue: r1 = file base, r3 = pattern length, r4 = first
// offset, r6 = last offset. Returns 0 when no window fits.
constexpr std::string_view kMatchPrologue = R"(match_rule:
  CONST r7, 0x0F00
  LOAD32 r1, [r7+8]
  LOAD32 r2, [r7+12]
  CONST r7, 0x300
  LOAD32 r3, [r7+12]
  LOAD32 r4, [r7+8]
  LT r5, r2, r3
  JNZ r5, no_match
  SUB r6, r2, r3
  CONST r5, 0xFFFFFFFF
  EQ r5, r4, r5
  JNZ r5, any_offset
  LT r5, r6, r4
  JNZ r5, no_match
  MOV r6, r4
  JMP scan_window
any_offset:
  CONST r4, 0
)";

constexpr std::string_view kInlineCompare = R"(scan_window:
  CONST r0, 0
cmp_loop:
  EQ r5, r0, r3
  JNZ r5, matched
  ADD r5, r1, r4
  ADD r5, r5, r0
  LOAD8 r5, [r5+0]
  CONST r7, 0x400
  ADD r7, r7, r0
  LOAD8 r7, [r7+0]
  EQ r5, r5, r7
  JZ r5, window_fail
  CONST r5, 1
  ADD r0, r0, r5
  JMP cmp_loop
)";

constexpr std::string_view kLibraryCompare = R"(scan_window:
  CONST r7, 0x300
  STORE32 [r7+16], r1
  STORE32 [r7+20], r3
  STORE32 [r7+24], r4
  STORE32 [r7+28], r6
  ADD r0, r1, r4
  CONST r1, 0x400
  MOV r2, r3
  XCALL str.match
  CONST r7, 0x300
  LOAD32 r1, [r7+16]
  LOAD32 r3, [r7+20]
  LOAD32 r4, [r7+24]
  LOAD32 r6, [r7+28]
  JNZ r0, matched
)";

constexpr std::string_view kMatchEpilogue = R"(window_fail:
  EQ r5, r4, r6
  JNZ r5, no_match
  CONST r5, 1
  ADD r4, r4, r5
  JMP scan_window
matched:
  CONST r0, 1
  RET
no_match:
  CONST r0, 0
  RET
)";

// str.match(a, b, n): 1 when the n bytes at a and b are equal.
constexpr std::string_view kStrLibrary = R"(
.module str
.export match
match:
  CONST r3, 0
match_loop:
  EQ r4, r3, r2
  JNZ r4, match_yes
  ADD r4, r0, r3
  LOAD8 r4, [r4+0]
  ADD r5, r1, r3
  LOAD8 r5, [r5+0]
  EQ r4, r4, r5
  JZ r4, match_no
  CONST r4, 1
  ADD r3, r3, r4
  JMP match_loop
match_yes:
  CONST r0, 1
  RET
match_no:
  CONST r0, 0
  RET
)";

std::string Compose(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) out += p;
  return out;
}

const std::map<std::string, std::string, std::less<>> &Sources() {
  static const auto *sources = new std::map<std::string, std::string,
                                            std::less<>>{
      {"scanner_inline",
       Compose({kEntry, kEndpoints, kParser, kMatchPrologue, kInlineCompare,
                kMatchEpilogue})},
      {"scanner_dylib",
       Compose({kEntry, kEndpoints, kParser, kMatchPrologue, kLibraryCompare,
                kMatchEpilogue, kStrLibrary})},
      {"scanner_loop",
       Compose({kEntry, kRetryEndpoints, kParser, kMatchPrologue,
                kInlineCompare, kMatchEpilogue})},
  };
  return *sources;
}

}  // namespace

const std::vector<std::string> &CorpusNames() {
  static const std::vector<std::string> names = {
      "scanner_inline", "scanner_dylib", "scanner_loop"};
  return names;
}

std::string_view CorpusSource(std::string_view name) {
  const auto &sources = Sources();
  auto it = sources.find(name);
  if (it == sources.end())
    throw InvalidArgument("unknown corpus program '" + std::string(name) +
                          "'");
  return it->second;
}

Program CorpusProgram(std::string_view name) {
  return AssembleProgram(CorpusSource(name));
}

InputImage ScannerInputs(std::string_view db_text,
                         const std::vector<uint8_t> &file) {
  InputImage image;
  image.regions.push_back(
      {std::string(kDbRegion), kDbBase,
       std::vector<uint8_t>(db_text.begin(), db_text.end())});
  image.regions.push_back({std::string(kFileRegion), kFileBase, file});
  return image;
}

}  // namespace cosig
