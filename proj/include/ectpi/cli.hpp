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

// Command-line front end: build-db, estimate, trace, experiment, synth.

#ifndef ECTPI_CLI_HPP_
#define ECTPI_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "ectpi/error.hpp"
#include "ectpi/estimators.hpp"

namespace ectpi::cli {

// Stable exit codes for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;     // bad flags, configs, domain errors
inline constexpr int kExitData = 3;       // incompatible data, ambiguity, bad db
inline constexpr int kExitModel = 4;      // numerical failure
inline constexpr int kExitIo = 5;         // filesystem failure

int exit_code(ErrorCategory category);

// Measurement CSV: header "id,f_hz,dz_re_ohm,dz_im_ohm,group", one row per
// measurement. Empty group fields are allowed.
std::vector<Measurement> parse_measurements(std::istream& in);
std::vector<Measurement> read_measurements(const std::string& path);
void write_measurements(std::ostream& out, const std::vector<Measurement>& ms);

// Runs one invocation; argv[0] is the program name. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ectpi::cli

#endif  // ECTPI_CLI_HPP_
