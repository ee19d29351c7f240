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

#include "ternsim/tmat.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

namespace ternsim {

namespace {

void validate_core(const TMatCoreConfig& cfg) {
  const bool power_of_two =
      cfg.core_dim > 0 && (cfg.core_dim & (cfg.core_dim - 1)) == 0;
  if (!power_of_two || cfg.core_dim < 16)
    throw ShapeMismatchError("core_dim must be a power of two >= 16");
  if (cfg.reduction_cycles < 0)
    throw ShapeMismatchError("reduction_cycles must be >= 0");
}

void validate_matvec_shapes(Eigen::Index x_len, const TernaryTensor& w,
                            const TMatCoreConfig& cfg) {
  validate_core(cfg);
  const Eigen::Index d = w.rows();
  const Eigen::Index d_out = w.cols();
  if (x_len != d) {
    std::ostringstream msg;
    msg << "activation length " << x_len << " does not match weight rows "
        << d;
    throw ShapeMismatchError(msg.str());
  }
  if (d % cfg.core_dim != 0 || d_out % cfg.core_dim != 0) {
    std::ostringstream msg;
    msg << "dimensions " << d << "x" << d_out
        << " are not multiples of the core dimension " << cfg.core_dim;
    throw ShapeMismatchError(msg.str());
  }
  if (d > kMaxReductionDim)
    throw ShapeMismatchError(
        "reduction dimension exceeds the 32-bit accumulator bound (2^24)");
}

// Invokes fn(j) for j in [0, n), split across `threads`. Each j is computed
// by exactly one thread, so results do not depend on the schedule.
template <class Fn>
void parallel_for(Eigen::Index n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (Eigen::Index j = 0; j < n; ++j) fn(j);
    return;
  }
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const Eigen::Index chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const Eigen::Index begin = t * chunk;
    const Eigen::Index end = std::min(n, begin + chunk);
    pool.emplace_back([begin, end, &fn] {
      for (Eigen::Index j = begin; j < end; ++j) fn(j);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BatchGroupPlan make_batch_plan(const TMatCoreConfig& cfg, int batch) {
  validate_core(cfg);
  if (batch < 1 || cfg.core_dim % batch != 0) {
    std::ostringstream msg;
    msg << "batch " << batch << " does not divide the core dimension "
        << cfg.core_dim;
    throw InvalidBatchError(msg.str());
  }
  BatchGroupPlan plan;
  plan.batch = batch;
  plan.lanes_per_group = cfg.core_dim / batch;
  return plan;
}

std::int32_t tdot(Eigen::Ref<const Int8Vector> x,
                  Eigen::Ref<const Eigen::Vector<Trit, Eigen::Dynamic>> w) {
  if (x.size() != w.size()) {
    std::ostringstream msg;
    msg << "tdot length mismatch: " << x.size() << " vs " << w.size();
    throw LengthMismatchError(msg.str());
  }
  if (x.size() > kMaxReductionDim)
    throw ShapeMismatchError(
        "reduction dimension exceeds the 32-bit accumulator bound (2^24)");
  std::int64_t acc = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += tmul(x[i], w[i]);
  return static_cast<std::int32_t>(acc);
}

AccumVector tmat_core(Eigen::Ref<const Int8Vector> x, const TernaryTensor& w,
                      const TMatCoreConfig& cfg, TMatStats* stats) {
  if (w.rows() != cfg.core_dim || w.cols() != cfg.core_dim)
    throw ShapeMismatchError("tmat_core requires a core_dim-square weight");
  return tiled_matvec(x, w, cfg, stats);
}

std::vector<AccumVector> batched_matvec(const std::vector<Int8Vector>& xs,
                                        const TernaryTensor& w,
                                        const BatchGroupPlan& plan,
                                        const TMatCoreConfig& cfg,
                                        TMatStats* stats) {
  const int batch = static_cast<int>(xs.size());
  if (batch != plan.batch)
    throw InvalidBatchError("batch plan does not match the input count");
  make_batch_plan(cfg, batch);  // re-validates divisibility
  for (const auto& x : xs) validate_matvec_shapes(x.size(), w, cfg);

  const Eigen::Index d = w.rows();
  const Eigen::Index d_out = w.cols();
  const Eigen::Index tile = cfg.core_dim;
  const auto mat = w.matrix();

  std::vector<AccumVector> out(static_cast<std::size_t>(batch));
  std::vector<Eigen::Vector<std::int64_t, Eigen::Dynamic>> acc(
      static_cast<std::size_t>(batch));
  for (auto& a : acc) a = Eigen::Vector<std::int64_t, Eigen::Dynamic>::Zero(d_out);

  // Hoisted negations: each lane selects x, -x or 0 per weight.
  std::vector<Eigen::Vector<std::int32_t, Eigen::Dynamic>> pos(
      static_cast<std::size_t>(batch)),
      neg(static_cast<std::size_t>(batch));
  for (std::size_t b = 0; b < xs.size(); ++b) {
    pos[b] = xs[b].cast<std::int32_t>();
    neg[b] = -pos[b];
  }

  for (Eigen::Index ti = 0; ti < d; ti += tile) {
    for (Eigen::Index tj = 0; tj < d_out; tj += tile) {
      // One weight-tile fetch serves every batch group.
      if (stats) ++stats->weight_tile_fetches;
      parallel_for(tile, cfg.threads, [&](Eigen::Index jj) {
        const Eigen::Index j = tj + jj;
        for (std::size_t b = 0; b < xs.size(); ++b) {
          std::int64_t partial = 0;
          for (Eigen::Index ii = 0; ii < tile; ++ii) {
            const Trit wv = mat(ti + ii, j);
            if (wv > 0)
              partial += pos[b][ti + ii];
            else if (wv < 0)
              partial += neg[b][ti + ii];
          }
          acc[b][j] += partial;
        }
      });
    }
  }

  if (stats) stats->cycles += matvec_cycles(d, d_out, batch, cfg);
  for (std::size_t b = 0; b < xs.size(); ++b)
    out[b] = acc[b].cast<std::int32_t>();
  return out;
}

AccumVector tiled_matvec(Eigen::Ref<const Int8Vector> x,
                         const TernaryTensor& w, const TMatCoreConfig& cfg,
                         TMatStats* stats) {
  std::vector<Int8Vector> xs{x};
  return batched_matvec(xs, w, make_batch_plan(cfg, 1), cfg, stats)[0];
}

std::int64_t matvec_cycles(Eigen::Index d, Eigen::Index d_out, int batch,
                           const TMatCoreConfig& cfg) {
  validate_core(cfg);
  if (batch < 1 || cfg.core_dim % batch != 0)
    throw InvalidBatchError("batch does not divide the core dimension");
  if (d % cfg.core_dim != 0 || d_out % cfg.core_dim != 0)
    throw ShapeMismatchError("matvec_cycles requires tile-aligned dimensions");
  if (d > kMaxReductionDim)
    throw ShapeMismatchError(
        "reduction dimension exceeds the 32-bit accumulator bound (2^24)");
  const std::int64_t tiles =
      (d / cfg.core_dim) * static_cast<std::int64_t>(d_out / cfg.core_dim);
  return tiles * batch + cfg.reduction_cycles;
}

}  // namespace ternsim
