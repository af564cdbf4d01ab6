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

// Shared fixtures: the default-resolution database (built once per build
// tree and cached on disk), the reference forward model, scratch paths.

#ifndef ECTPI_TESTS_SUPPORT_HPP_
#define ECTPI_TESTS_SUPPORT_HPP_

#include <string>

#include "ectpi/forward_model.hpp"
#include "ectpi/response_grid.hpp"

namespace ectpi::test {

const ImpedanceModel& reference_model();

// Default 64 x 48 x 40 grid for the reference probe.
const ResponseGrid& default_grid();
std::string default_grid_path();

// Unique path under the scratch directory; the file is not created.
std::string scratch_path(const std::string& stem);

// Measured impedance for a physical configuration of the reference probe.
std::complex<double> forward(double sigma, double thickness, double lift_off,
                             double f_hz);

}  // namespace ectpi::test

#endif  // ECTPI_TESTS_SUPPORT_HPP_
