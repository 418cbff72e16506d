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

#ifndef COSIG_ERROR_H_
#define COSIG_ERROR_H_

#include <stdexcept>
#include <string>

namespace cosig {

// Coarse classification used by the command-line frontend to pick an exit
// code.
enum class ErrorKind {
  kParse,            // malformed text input (assembly, constraints, db, trace)
  kInvalidArgument,  // well-formed input that violates a contract
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ParseError(const std::string &what) {
  return Error(ErrorKind::kParse, what);
}
inline Error InvalidArgument(const std::string &what) {
  return Error(ErrorKind::kInvalidArgument, what);
}

}  // namespace cosig

#endif  // COSIG_ERROR_H_
