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

#include "ternsim/quant.hpp"

#include <algorithm>
#include <cmath>

namespace ternsim {

QuantVector quantize_absmax(const RealVector& x) {
  QuantVector q;
  q.values.resize(x.size());
  const double absmax = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (absmax == 0.0) {
    q.scale = 1.0;  // all-zero convention
    q.values.setZero();
    return q;
  }
  q.scale = absmax / 127.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double scaled = std::round(x[i] / q.scale);
    q.values[i] =
        static_cast<std::int8_t>(std::clamp(scaled, -127.0, 127.0));
  }
  return q;
}

RealVector dequantize(const QuantVector& q) {
  return q.values.cast<double>() * q.scale;
}

ReciprocalLUT build_reciprocal_lut(int index_bits, double r_min,
                                   double r_max) {
  ReciprocalLUT lut;
  lut.index_bits = index_bits;
  lut.r_min = r_min;
  lut.r_max = r_max;
  const std::size_t n = std::size_t{1} << index_bits;
  lut.entries.resize(n);
  const double log_min = std::log2(r_min);
  const double log_span = std::log2(r_max) - log_min;
  for (std::size_t i = 0; i < n; ++i) {
    // Geometric midpoint of bucket i.
    const double mid =
        std::exp2(log_min + (static_cast<double>(i) + 0.5) * log_span /
                                static_cast<double>(n));
    lut.entries[i] = 1.0 / mid;
  }
  return lut;
}

double lut_reciprocal(const ReciprocalLUT& lut, double r) {
  const double clamped = std::clamp(r, lut.r_min, lut.r_max);
  const double log_min = std::log2(lut.r_min);
  const double log_span = std::log2(lut.r_max) - log_min;
  const double n = static_cast<double>(lut.entries.size());
  const double pos = (std::log2(clamped) - log_min) / log_span * n;
  const auto idx = static_cast<std::size_t>(std::clamp(
      std::floor(pos), 0.0, n - 1.0));
  return lut.entries[idx];
}

SigmoidLUT build_sigmoid_lut(int index_bits, double x_min, double x_max) {
  SigmoidLUT lut;
  lut.index_bits = index_bits;
  lut.x_min = x_min;
  lut.x_max = x_max;
  const std::size_t n = std::size_t{1} << index_bits;
  lut.entries.resize(n);
  const double width = (x_max - x_min) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = x_min + (static_cast<double>(i) + 0.5) * width;
    lut.entries[i] = 1.0 / (1.0 + std::exp(-mid));
  }
  return lut;
}

double sigmoid_lut(const SigmoidLUT& lut, double x) {
  const double clamped = std::clamp(x, lut.x_min, lut.x_max);
  const double n = static_cast<double>(lut.entries.size());
  const double pos = (clamped - lut.x_min) / (lut.x_max - lut.x_min) * n;
  const auto idx = static_cast<std::size_t>(std::clamp(
      std::floor(pos), 0.0, n - 1.0));
  return lut.entries[idx];
}

double silu_lut(const SigmoidLUT& lut, double x) {
  return x * sigmoid_lut(lut, x);
}

RealVector sigmoid_lut(const SigmoidLUT& lut, const RealVector& x) {
  RealVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = sigmoid_lut(lut, x[i]);
  return out;
}

QuantVector rmsnorm(const QuantVector& x, const RealVector& norm_weights,
                    const RmsParams& params, const ReciprocalLUT& lut) {
  if (x.size() != norm_weights.size())
    throw LengthMismatchError("rmsnorm: norm weight length differs from input");
  const RealVector xr = dequantize(x);
  const double inv_r = lut_reciprocal(lut, rms(xr, params));
  return quantize_absmax(xr.cwiseProduct(norm_weights) * inv_r);
}

}  // namespace ternsim
