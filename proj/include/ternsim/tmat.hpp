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
// Functional semantics and cycle model of the ternary mat-vec core: a fixed
// core_dim x core_dim array of dot-product lanes, tiled for larger shapes,
// with batch groups sharing one weight stream.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ternsim/codec.hpp"
#include "ternsim/errors.hpp"
#include "ternsim/quant.hpp"

namespace ternsim {

using AccumVector = Eigen::Vector<std::int32_t, Eigen::Dynamic>;

/// Largest reduction dimension for which a 32-bit accumulator cannot
/// overflow: absmax-quantized activations lie in [-127, 127], and
/// 127 * 2^24 < 2^31. Sums are formed in 64 bits and narrowed.
inline constexpr Eigen::Index kMaxReductionDim = Eigen::Index{1} << 24;

struct TMatCoreConfig {
  Eigen::Index core_dim = 256;  // power of two, >= 16
  int reduction_cycles = 8;
  int threads = 1;  // lanes evaluated in parallel; results are schedule-independent
};

/// Partition of the core's dot-product lanes into `batch` equal groups.
struct BatchGroupPlan {
  int batch = 1;
  Eigen::Index lanes_per_group = 256;

  Eigen::Index group_begin(int group) const { return group * lanes_per_group; }
};

BatchGroupPlan make_batch_plan(const TMatCoreConfig& cfg, int batch);

/// Per-call instrumentation: how many weight tiles were fetched and the
/// modeled cycle count. Tile fetches are counted once per tile regardless
/// of the batch size (weights are shared across batch groups).
struct TMatStats {
  std::int64_t weight_tile_fetches = 0;
  std::int64_t cycles = 0;
};

/// Single ternary multiply: returns x, -x or 0 for w in {1, -1, 0}.
constexpr std::int32_t tmul(std::int8_t x, Trit w) {
  return w > 0 ? x : (w < 0 ? -std::int32_t{x} : 0);
}

/// Exact integer dot product of an int8 vector with a trit vector.
std::int32_t tdot(Eigen::Ref<const Int8Vector> x,
                  Eigen::Ref<const Eigen::Vector<Trit, Eigen::Dynamic>> w);

/// One core pass: output j is tdot(x, column j of W) for a core_dim-sized
/// square W. The negated activation vector is computed once and each lane
/// selects {x, -x, 0} per weight.
AccumVector tmat_core(Eigen::Ref<const Int8Vector> x, const TernaryTensor& w,
                      const TMatCoreConfig& cfg = {},
                      TMatStats* stats = nullptr);

/// Mat-vec for tile-aligned shapes: W is d x d' with both dimensions
/// multiples of cfg.core_dim; partial sums accumulate across row tiles.
AccumVector tiled_matvec(Eigen::Ref<const Int8Vector> x,
                         const TernaryTensor& w,
                         const TMatCoreConfig& cfg = {},
                         TMatStats* stats = nullptr);

/// Batched mat-vec sharing one weight stream: output b equals
/// tiled_matvec(xs[b], W); each weight tile is fetched once for all batches.
std::vector<AccumVector> batched_matvec(const std::vector<Int8Vector>& xs,
                                        const TernaryTensor& w,
                                        const BatchGroupPlan& plan,
                                        const TMatCoreConfig& cfg = {},
                                        TMatStats* stats = nullptr);

/// Modeled core occupancy for one mat-vec:
/// (d/core_dim) * (d'/core_dim) * batch + reduction_cycles.
std::int64_t matvec_cycles(Eigen::Index d, Eigen::Index d_out, int batch,
                           const TMatCoreConfig& cfg = {});

}  // namespace ternsim
