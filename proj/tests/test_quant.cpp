// Copyright 2026 the ternsim authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ternsim/quant.hpp"

using namespace ternsim;

namespace {

RealVector random_real(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  RealVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v[i] = (2.0 * u - 1.0) * scale;
  }
  return v;
}

}  // namespace

TEST_CASE("rms matches the closed-form cases") {
  CHECK(rms(RealVector::Zero(32), {1e-6}) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(rms(RealVector::Ones(16), {0.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rms matches an independent double-precision reference") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const RealVector x = random_real(rng, 64, 3.0);
    const double want = oracle::rms_reference(x, 1e-6);
    CHECK(rms(x, {1e-6}) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("quantize_absmax conventions") {
  SUBCASE("all-zero input keeps scale 1") {
    const QuantVector q = quantize_absmax(RealVector::Zero(8));
    CHECK(q.scale == 1.0);
    CHECK(q.values.isZero());
  }

  SUBCASE("the absmax element maps to 127") {
    for (double s : {0.001, 1.0, 512.0}) {
      RealVector x(4);
      x << 127 * s, -3 * s, 0.5 * s, s;
      const QuantVector q = quantize_absmax(x);
      CHECK(q.values.cwiseAbs().maxCoeff() == 127);
    }
  }

  SUBCASE("dequantization error is bounded by half a step") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
      const RealVector x = random_real(rng, 100, 10.0);
      const QuantVector q = quantize_absmax(x);
      const RealVector back = dequantize(q);
      const double bound = q.scale / 2 + 1e-12;
      CHECK((back - x).cwiseAbs().maxCoeff() <= bound);
    }
  }

  SUBCASE("idempotent on its own dequantized output") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
      const QuantVector q = quantize_absmax(random_real(rng, 64, 2.0));
      const QuantVector q2 = quantize_absmax(dequantize(q));
      CHECK(q2.values == q.values);
      CHECK(q2.scale == doctest::Approx(q.scale).epsilon(1e-12));
    }
  }
}

TEST_CASE("reciprocal LUT lookup") {
  const ReciprocalLUT lut = build_reciprocal_lut(12, 0.0625, 16.0);

  SUBCASE("bucket midpoints are exact reciprocals") {
    // Reconstruct a midpoint and query it.
    const double log_span = std::log2(16.0) - std::log2(0.0625);
    const double mid =
        std::exp2(std::log2(0.0625) + 100.5 * log_span / 4096.0);
    CHECK(lut_reciprocal(lut, mid) == doctest::Approx(1.0 / mid).epsilon(1e-12));
  }

  SUBCASE("values below r_min clamp to the first bucket") {
    CHECK(lut_reciprocal(lut, 1e-9) == lut_reciprocal(lut, 0.0625));
  }

  SUBCASE("12 index bits over [2^-4, 2^4] stay within 0.5% of 1/r") {
    double worst = 0.0;
    for (int i = 0; i < 100'000; ++i) {
      const double r =
          0.0625 + (16.0 - 0.0625) * (static_cast<double>(i) + 0.5) / 100'000;
      const double got = lut_reciprocal(lut, r);
      worst = std::max(worst, std::abs(got - 1.0 / r) * r);
    }
    CHECK(worst <= 0.005);
  }

  SUBCASE("entries are monotone non-increasing") {
    for (std::size_t i = 1; i < lut.entries.size(); ++i)
      CHECK(lut.entries[i] <= lut.entries[i - 1]);
  }
}

TEST_CASE("sigmoid LUT lookup") {
  const SigmoidLUT lut = build_sigmoid_lut(12, -8.0, 8.0);

  CHECK(sigmoid_lut(lut, 0.0) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(sigmoid_lut(lut, 20.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(sigmoid_lut(lut, -20.0) == doctest::Approx(0.0).epsilon(1e-3));

  SUBCASE("dense sweep stays within 1e-3 of the exact sigmoid") {
    double worst = 0.0;
    for (int i = 0; i <= 200'000; ++i) {
      const double x = -10.0 + 20.0 * static_cast<double>(i) / 200'000;
      const double exact = 1.0 / (1.0 + std::exp(-x));
      worst = std::max(worst, std::abs(sigmoid_lut(lut, x) - exact));
    }
    CHECK(worst <= 1e-3);
  }

  SUBCASE("entries are monotone non-decreasing and inside (0, 1)") {
    for (std::size_t i = 0; i < lut.entries.size(); ++i) {
      CHECK(lut.entries[i] > 0.0);
      CHECK(lut.entries[i] < 1.0);
      if (i > 0) CHECK(lut.entries[i] >= lut.entries[i - 1]);
    }
  }

  SUBCASE("silu composes lookup and multiply") {
    CHECK(silu_lut(lut, 3.0) ==
          doctest::Approx(3.0 * sigmoid_lut(lut, 3.0)).epsilon(1e-15));
  }
}

TEST_CASE("rmsnorm closed-form cases") {
  const ReciprocalLUT lut = build_reciprocal_lut(12, 0.015625, 1024.0);

  SUBCASE("unit vector with unit weights is nearly unchanged") {
    QuantVector x;
    x.values = Int8Vector::Constant(64, 127);
    x.scale = 1.0 / 127.0;  // dequantizes to ones
    const QuantVector y = rmsnorm(x, RealVector::Ones(64), {1e-12}, lut);
    const RealVector yr = dequantize(y);
    for (Eigen::Index i = 0; i < yr.size(); ++i)
      CHECK(yr[i] == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("zeros stay zero with scale 1") {
    QuantVector x;
    x.values = Int8Vector::Zero(16);
    x.scale = 0.25;
    const QuantVector y = rmsnorm(x, RealVector::Ones(16), {1e-6}, lut);
    CHECK(y.values.isZero());
    CHECK(y.scale == 1.0);
  }

  SUBCASE("norm weight length must match") {
    QuantVector x;
    x.values = Int8Vector::Zero(16);
    CHECK_THROWS_AS(rmsnorm(x, RealVector::Ones(8), {1e-6}, lut),
                    LengthMismatchError);
  }
}

TEST_CASE("rmsnorm tracks the exact-division reference within 1%") {
  const ReciprocalLUT lut = build_reciprocal_lut(12, 0.015625, 1024.0);
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    const RealVector xr = random_real(rng, 1024, 4.0);
    const QuantVector x = quantize_absmax(xr);
    const RealVector w = random_real(rng, 1024, 1.0);
    const QuantVector y = rmsnorm(x, w, {1e-6}, lut);
    const RealVector want = oracle::rmsnorm_exact(dequantize(x), w, 1e-6);
    CHECK(oracle::relative_l2(dequantize(y), want) <= 0.01);
  }
}

TEST_CASE("rmsnorm output RMS is near one for unit weights") {
  const ReciprocalLUT lut = build_reciprocal_lut(12, 0.015625, 1024.0);
  std::mt19937_64 rng(31);
  for (Eigen::Index d : {16, 256, 1024}) {
    for (int rep = 0; rep < 5; ++rep) {
      const QuantVector x = quantize_absmax(random_real(rng, d, 7.0));
      const QuantVector y = rmsnorm(x, RealVector::Ones(d), {1e-9}, lut);
      const double out_rms = oracle::rms_reference(dequantize(y), 0.0);
      CHECK(out_rms == doctest::Approx(1.0).epsilon(0.02));
    }
  }
}

TEST_CASE("rmsnorm is scale invariant at the int8 level") {
  const ReciprocalLUT lut = build_reciprocal_lut(12, 0.015625, 1024.0);
  std::mt19937_64 rng(37);
  for (double alpha : {0.125, 3.0, 64.0}) {
    const RealVector xr = random_real(rng, 256, 1.0);
    const QuantVector q1 = rmsnorm(quantize_absmax(xr), RealVector::Ones(256),
                                   {1e-12}, lut);
    const QuantVector q2 = rmsnorm(quantize_absmax(RealVector(alpha * xr)),
                                   RealVector::Ones(256), {1e-12}, lut);
    REQUIRE(q1.size() == q2.size());
    for (Eigen::Index i = 0; i < q1.size(); ++i)
      CHECK(std::abs(int{q1.values[i]} - int{q2.values[i]}) <= 1);
  }
}
