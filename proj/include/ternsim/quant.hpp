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
//
// Fixed-point activation quantization, RMS normalization with a LUT-based
// reciprocal, and the LUT-based sigmoid: the non-matmul arithmetic of the
// datapath.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ternsim/errors.hpp"

namespace ternsim {

using RealVector = Eigen::VectorXd;
using Int8Vector = Eigen::Vector<std::int8_t, Eigen::Dynamic>;

/// int8 activation vector with one shared scale:
/// real value of element i is values[i] * scale.
struct QuantVector {
  Int8Vector values;
  double scale = 1.0;

  Eigen::Index size() const { return values.size(); }
};

struct RmsParams {
  double epsilon = 1e-6;
};

/// Root mean square of x plus epsilon: sqrt(mean(x_i^2) + eps). Always > 0
/// for eps > 0.
template <class Derived>
double rms(const Eigen::MatrixBase<Derived>& x, const RmsParams& params) {
  const double d = static_cast<double>(x.size());
  const double mean_sq =
      x.derived().template cast<double>().squaredNorm() / d;
  return std::sqrt(mean_sq + params.epsilon);
}

/// Per-tensor absmax quantization to int8: scale = max|x_i| / 127 (1 when x
/// is all zero), values = round(x_i / scale) clamped to [-127, 127].
QuantVector quantize_absmax(const RealVector& x);

RealVector dequantize(const QuantVector& q);

/// Precomputed reciprocal table indexed by log2(r). The entry for a bucket
/// is the reciprocal of the bucket's geometric midpoint, so entries are
/// monotone non-increasing and the relative error is uniform across the
/// range. Queries outside [r_min, r_max] clamp to the end buckets.
struct ReciprocalLUT {
  int index_bits = 12;
  double r_min = 0.015625;  // 2^-6
  double r_max = 1024.0;    // 2^10
  std::vector<double> entries;
};

ReciprocalLUT build_reciprocal_lut(int index_bits, double r_min, double r_max);
double lut_reciprocal(const ReciprocalLUT& lut, double r);

/// Sigmoid table with uniform buckets over [x_min, x_max]; queries clamp.
struct SigmoidLUT {
  int index_bits = 12;
  double x_min = -8.0;
  double x_max = 8.0;
  std::vector<double> entries;
};

SigmoidLUT build_sigmoid_lut(int index_bits, double x_min, double x_max);
double sigmoid_lut(const SigmoidLUT& lut, double x);

/// x * sigmoid(x) with the sigmoid taken from the table.
double silu_lut(const SigmoidLUT& lut, double x);

/// Elementwise sigmoid of a vector through the table.
RealVector sigmoid_lut(const SigmoidLUT& lut, const RealVector& x);

/// RMSNorm over a quantized vector: dequantize, multiply elementwise by the
/// norm weights and by the table reciprocal of r = rms(x), requantize.
/// The division by r is replaced by a multiplication with the LUT value.
QuantVector rmsnorm(const QuantVector& x, const RealVector& norm_weights,
                    const RmsParams& params, const ReciprocalLUT& lut);

}  // namespace ternsim
