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

// Signature extraction: recovers the byte pattern a scanner detects by
// searching for an input that drives it to its detection endpoint.

#ifndef COSIG_SIGEXTRACT_H_
#define COSIG_SIGEXTRACT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosig/concolic.h"
#include "cosig/interp.h"
#include "cosig/program.h"
#include "cosig/search.h"

namespace cosig {

// Signature database: one `Name:Offset:Hex` rule per line, `#` comments.
inline constexpr uint32_t kAnyOffset = 0xFFFFFFFFu;
inline constexpr size_t kMinPatternDigits = 2;
inline constexpr size_t kMaxPatternDigits = 64;

struct SignatureRule {
  std::string name;
  uint32_t offset = kAnyOffset;  // kAnyOffset for '*'
  std::vector<uint8_t> pattern;

  bool operator==(const SignatureRule &) const = default;
};

struct SignatureDb {
  std::vector<SignatureRule> rules;

  const SignatureRule *Find(std::string_view name) const;
  size_t LongestPattern() const;
  bool operator==(const SignatureDb &) const = default;
};

// `offset` is "*" or a decimal byte offset.
std::string GenMinDb(std::string_view name, std::string_view hex,
                     std::string_view offset = "*");
SignatureDb ParseDb(std::string_view text);
std::string FormatDb(const SignatureDb &db);

// Scanner corpus. Every scanner reads the database text from region 0 and
// the file under scan from region 1, halting with 1 at DETECTED and 0 at
// CLEAN.
inline constexpr uint32_t kDbBase = 0x1000;
inline constexpr uint32_t kFileBase = 0x10000;
inline constexpr std::string_view kDbRegion = "db";
inline constexpr std::string_view kFileRegion = "file";
// Label of the block that starts each comparison window.
inline constexpr std::string_view kScanWindowLabel = "scan_window";

const std::vector<std::string> &CorpusNames();
// Throws InvalidArgument for an unknown name.
std::string_view CorpusSource(std::string_view name);
Program CorpusProgram(std::string_view name);

InputImage ScannerInputs(std::string_view db_text,
                         const std::vector<uint8_t> &file);

struct ExtractionRequest {
  std::string db_text;
  uint32_t file_length = 8;
  TargetSpec target = TargetSpec::Label("DETECTED");
  PolicyMode policy = PolicyMode::kHalt;
  SearchConfig config;
  std::vector<InputImage> preruns;
  std::optional<std::string> ground_truth;  // rule name
  uint8_t seed_byte = 0x00;
};

enum class Check : uint8_t { kPass, kFail, kNotChecked };
std::string_view CheckName(Check c);

struct ExtractionReport {
  std::string target_endpoint;
  PolicyMode policy = PolicyMode::kHalt;
  SearchVerdict outcome = SearchVerdict::kExhausted;
  std::vector<std::pair<std::string, std::vector<uint8_t>>> witness_bytes;
  std::optional<uint32_t> matched_offset;
  std::vector<uint8_t> recovered_pattern;
  Check verification = Check::kNotChecked;
  Check equality = Check::kNotChecked;
  SearchStats statistics;
  size_t branch_path_length = 0;
  std::optional<Witness> witness;

  bool success() const {
    return outcome == SearchVerdict::kWitness &&
           verification == Check::kPass;
  }
};

ExtractionReport ExtractSignature(const Program &scanner,
                                  const ExtractionRequest &request);

std::string ExtractionReportJson(const ExtractionReport &report,
                                 bool stamp = false);

}  // namespace cosig

#endif  // COSIG_SIGEXTRACT_H_
