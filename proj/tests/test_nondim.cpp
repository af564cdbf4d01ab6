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


#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ectpi/error.hpp"
#include "ectpi/forward_model.hpp"
#include "ectpi/nondim.hpp"

namespace ectpi {
namespace {

TEST(SkinDepth, AluminiumAtOneKilohertz) {
  // sqrt(2 / (2 pi 1e3 * 4 pi 1e-7 * 34.5e6)) by hand: 2.7097 mm.
  EXPECT_NEAR(skin_depth(angular_frequency(1000.0), 34.5e6), 2.7097e-3, 1e-7);
}

TEST(SkinDepth, ScalesAsInverseSquareRoot) {
  const double d = skin_depth(1000.0, 1e7);
  EXPECT_NEAR(skin_depth(4000.0, 1e7), d / 2.0, 1e-15);
  EXPECT_NEAR(skin_depth(1000.0, 9e7), d / 3.0, 1e-15);
}

TEST(PiGroups, ReferenceConfiguration) {
  const ProbeGeometry p = reference_probe();
  const double d = p.characteristic_length();
  const double omega = angular_frequency(1000.0);
  const PiPoint pi = pi_from_physical(omega, 34.5e6, 1.03e-3, 0.6e-3, d);
  EXPECT_NEAR(pi.pi2, d / skin_depth(omega, 34.5e6), 1e-14);
  EXPECT_DOUBLE_EQ(pi.pi3, 1.03e-3 / d);
  EXPECT_DOUBLE_EQ(pi.pi4, 0.6e-3 / d);
}

TEST(PiGroups, ImpedanceRoundTripAtReference) {
  const ProbeGeometry p = reference_probe();
  const std::complex<double> dz(0.182944797717032, -0.147978273990520);
  const double omega = angular_frequency(1000.0);
  const auto r = nondimensionalize(dz, omega, p.characteristic_length(), p.turns);
  EXPECT_NEAR(r.pi1.real(), 0.218402148250629, 1e-13);
  EXPECT_NEAR(r.pi1.imag(), -0.176658605968881, 1e-13);
  const auto back = redimensionalize(r, omega, p.characteristic_length(), p.turns);
  EXPECT_LT(std::abs(back - dz), 1e-15);
}

TEST(PiGroups, RandomRoundTrips) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ls(5.0, 8.0), lf(1.0, 6.0), lh(-5.0, -1.0),
      ld(-4.0, -1.0);
  for (int i = 0; i < 1000; ++i) {
    const double sigma = std::pow(10.0, ls(rng));
    const double omega = angular_frequency(std::pow(10.0, lf(rng)));
    const double h = std::pow(10.0, lh(rng));
    const double lo = std::pow(10.0, lh(rng));
    const double d = std::pow(10.0, ld(rng));
    const PiPoint pi = pi_from_physical(omega, sigma, h, lo, d);
    const PhysicalTriple t = physical_from_pi(pi, omega, d);
    EXPECT_NEAR(t.sigma, sigma, 1e-12 * sigma);
    EXPECT_NEAR(t.thickness, h, 1e-14 * h);
    EXPECT_NEAR(t.lift_off, lo, 1e-14 * lo);
    EXPECT_NEAR(omega_from_pi2(pi.pi2, sigma, d), omega, 1e-12 * omega);
    EXPECT_NEAR(sigma_from_pi2(pi.pi2, omega, d), sigma, 1e-12 * sigma);
  }
}

TEST(PiGroups, Pi2MonotoneInFrequencyAndConductivity) {
  const double d = 0.01;
  double prev = 0.0;
  for (double f = 10.0; f < 1e6; f *= 1.7) {
    const double pi2 = pi_from_physical(angular_frequency(f), 3e7, 1e-3, 1e-3, d).pi2;
    EXPECT_GT(pi2, prev);
    prev = pi2;
  }
  prev = 0.0;
  for (double s = 1e5; s < 1e8; s *= 1.9) {
    const double pi2 = pi_from_physical(1e4, s, 1e-3, 1e-3, d).pi2;
    EXPECT_GT(pi2, prev);
    prev = pi2;
  }
}

TEST(PiGroups, SameGroupsGiveSameDimensionlessResponse) {
  // Doubling every length and quartering sigma keeps (pi2, pi3, pi4).
  const double omega = angular_frequency(3000.0);
  const PiPoint a = pi_from_physical(omega, 40e6, 1e-3, 0.5e-3, 0.01);
  const PiPoint b = pi_from_physical(omega, 10e6, 2e-3, 1e-3, 0.02);
  EXPECT_NEAR(a.pi2, b.pi2, 1e-13);
  EXPECT_DOUBLE_EQ(a.pi3, b.pi3);
  EXPECT_DOUBLE_EQ(a.pi4, b.pi4);
}

TEST(PiGroups, RejectsInvalidInput) {
  EXPECT_THROW(skin_depth(0.0, 1e7), DomainError);
  EXPECT_THROW(skin_depth(1e3, -1.0), DomainError);
  EXPECT_THROW(pi_from_physical(1e3, 1e7, 0.0, 1e-3, 0.01), DomainError);
  EXPECT_THROW(pi_from_physical(1e3, 1e7, 1e-3, -1e-3, 0.01), DomainError);
  EXPECT_THROW(pi_from_physical(1e3, 1e7, 1e-3, 1e-3, 0.0), DomainError);
  EXPECT_THROW(sigma_from_pi2(0.0, 1e3, 0.01), DomainError);
  EXPECT_THROW(physical_from_pi({1.0, 0.0, 0.1}, 1e3, 0.01), DomainError);
  EXPECT_THROW(nondimensionalize({1.0, 0.0}, 1e3, 0.01, 0.5), DomainError);
  EXPECT_THROW(redimensionalize({{1.0, 0.0}}, -1.0, 0.01, 10.0), DomainError);
  EXPECT_NO_THROW(pi_from_physical(1e3, 1e7, 1e-3, 0.0, 0.01));
}

}  // namespace
}  // namespace ectpi
