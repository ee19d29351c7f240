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
// Analytical throughput, latency, roofline, power and efficiency model for
// the two architecture variants, calibrated against the measured hardware
// numbers.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ternsim/hw.hpp"
#include "ternsim/model.hpp"

namespace ternsim {

enum class Variant {
  kFullyOnChip,
  kHbmAssisted,
};

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct PerfQuery {
  ModelSpec model;
  Variant variant = Variant::kFullyOnChip;
  int batch = 1;
  int cards = 1;  // HBM-assisted requires cards == 1
};

/// Roofline inputs for the HBM-assisted variant. hbm_efficiency is the
/// fraction of peak HBM bandwidth actually sustained (calibrated once from
/// the measured single-batch rows, not predicted).
struct RooflineParams {
  double hbm_efficiency = 0.75;  // in (0, 1]
};

/// Frozen pipeline-overhead calibration. Non-matmul work per layer scales
/// with the activation dimension (norm, gates and buffers process d
/// elements through 256-wide units), so the constant is per 256 lanes:
///   overhead_cycles_per_layer(d) = overhead_cycles_per_256_lanes * d / 256.
/// 35.75 cycles per 256 lanes == 143 cycles/layer at d = 1024, calibrated
/// once against the measured 370M single-batch throughput and kept fixed
/// for every model and variant.
struct CalibrationConstants {
  double overhead_cycles_per_256_lanes = 35.75;

  double overhead_cycles_per_layer(Eigen::Index dim) const {
    return overhead_cycles_per_256_lanes * static_cast<double>(dim) / 256.0;
  }
};

enum class BoundRegime {
  kMemory,
  kCompute,
  kPipeline,
};

const char* to_string(BoundRegime r);

struct PerfReport {
  std::string model;
  Variant variant = Variant::kFullyOnChip;
  int batch = 1;
  int cards = 1;
  double tokens_per_s = 0;
  double cycles_per_token = 0;
  BoundRegime regime = BoundRegime::kPipeline;
  double power_w = 0;
  double efficiency_tok_per_s_per_w = 0;
  std::vector<std::pair<std::string, double>> dynamic_breakdown;
  double arithmetic_intensity_ops_per_byte = 0;
};

/// Modeled decode cycles for one token: per layer, weight-driven matmul
/// cycles (trits / core_dim^2) + 7 matmuls x reduction cycles + the
/// calibrated per-layer overhead, summed over all layers.
double cycles_per_token(const ModelSpec& model, const CalibrationConstants& calib,
                        const TMatCoreConfig& core = {});

/// As above with the overhead term zeroed: a pure lower bound.
double cycles_per_token_lower_bound(const ModelSpec& model,
                                    const TMatCoreConfig& core = {});

/// Fully on-chip variant. Single-batch throughput is one token traversing
/// all cards serially (interconnect hops included); with batch >= cards the
/// pipeline fills and throughput scales by the card count. Idle cards burn
/// static power only.
PerfReport onchip_throughput(const PerfQuery& query, const BoardSpec& board,
                             const CalibrationConstants& calib);

/// HBM-assisted variant roofline: memory-bound throughput streams the
/// packed weights once per token and scales with batch (weights shared);
/// the compute ceiling is clock / cycles_per_token.
PerfReport hbm_throughput(const PerfQuery& query, const BoardSpec& board,
                          const RooflineParams& roofline,
                          const CalibrationConstants& calib);

/// Batch size at which the HBM variant crosses from memory- to
/// compute-bound (real-valued; the crossing need not be integral).
double batch_threshold(const ModelSpec& model, const BoardSpec& board,
                       const RooflineParams& roofline,
                       const CalibrationConstants& calib);

/// Compute ops per byte streamed from weight memory: one MAC per trit
/// counts as 2 ops, weights cost 1.6 bits each, so intensity = 10 * batch.
double arithmetic_intensity(const ModelSpec& model, int batch);

/// Power and efficiency for a given throughput under the variant's
/// card-activity rules, with the matching dynamic-power breakdown attached.
struct PowerResult {
  double power_w = 0;
  double efficiency_tok_per_s_per_w = 0;
  std::vector<std::pair<std::string, double>> dynamic_breakdown;
};
PowerResult power_and_efficiency(Variant variant, int cards, int active_cards,
                                 double tokens_per_s,
                                 const PowerConstants& power);

/// Scales power by a technology-node factor; throughput is unchanged so
/// efficiency scales by the inverse.
double project_node_scaling(double power_w, double factor);

/// Published full-node power factors relative to the modeled 16 nm board:
/// "7nm" -> 0.35, "8nm" -> 0.5 (the rough same-speed estimate).
double node_scaling_factor(const std::string& node);

/// The 7B same-structure projection: HBM-assisted, single batch.
PerfReport project_7b(const BoardSpec& board, const RooflineParams& roofline,
                      const CalibrationConstants& calib);

/// Published measurements used for ratio columns. These are reported
/// values, not modeled ones.
struct PublishedBaseline {
  const char* hardware;
  const char* model;
  int batch;
  double tokens_per_s;
  double power_w;
};
const std::vector<PublishedBaseline>& published_baselines();

}  // namespace ternsim
