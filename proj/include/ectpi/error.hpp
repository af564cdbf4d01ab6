// Copyright 2026 The ECTPI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ECTPI_ERROR_HPP_
#define ECTPI_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace ectpi {

// Broad classes of failure. The CLI maps each one onto a stable exit code.
enum class ErrorCategory {
  kDomain,     // argument outside the mathematical domain of an operation
  kConfig,     // malformed or missing user input (files, flags, configs)
  kData,       // measurement incompatible with the database
  kAmbiguity,  // more than one admissible solution
  kModel,      // numerical failure in the forward model or a solver
  kIo,         // filesystem failure
  kFormat,     // corrupted or unsupported database file
};

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::kDomain, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

// Raised when an adaptive scheme cannot meet its tolerance. Carries the best
// error estimate reached so callers can decide whether it is good enough.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved_error)
      : Error(ErrorCategory::kModel, what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

struct CandidatePoint {
  double x = 0.0;
  double y = 0.0;
};

// Several well-separated solutions were found. The candidates are expressed
// in the coordinates of the plane where the intersection was computed.
class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& what, std::vector<CandidatePoint> candidates)
      : Error(ErrorCategory::kAmbiguity, what),
        candidates_(std::move(candidates)) {}

  const std::vector<CandidatePoint>& candidates() const noexcept {
    return candidates_;
  }

 private:
  std::vector<CandidatePoint> candidates_;
};

}  // namespace ectpi

#endif  // ECTPI_ERROR_HPP_
