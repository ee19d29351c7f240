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

#include "ternsim/perf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ternsim {

namespace {

// Matmuls per decoder layer: 4 in the token mixer, 3 in the GLU.
constexpr int kMatmulsPerLayer = 7;

double weight_cycles_per_token(const ModelSpec& model,
                               const TMatCoreConfig& core) {
  const double lanes =
      static_cast<double>(core.core_dim) * static_cast<double>(core.core_dim);
  return static_cast<double>(model.storage_trits()) / lanes;
}

double reduction_cycles_per_token(const ModelSpec& model,
                                  const TMatCoreConfig& core) {
  return static_cast<double>(model.layers) * kMatmulsPerLayer *
         core.reduction_cycles;
}

}  // namespace

const char* to_string(Variant v) {
  return v == Variant::kFullyOnChip ? "fully-on-chip" : "hbm-assisted";
}

Variant variant_from_string(const std::string& s) {
  if (s == "onchip" || s == "fully-on-chip") return Variant::kFullyOnChip;
  if (s == "hbm" || s == "hbm-assisted") return Variant::kHbmAssisted;
  throw ConfigError("unknown variant \"" + s + "\" (expected onchip or hbm)");
}

const char* to_string(BoundRegime r) {
  switch (r) {
    case BoundRegime::kMemory: return "memory";
    case BoundRegime::kCompute: return "compute";
    case BoundRegime::kPipeline: return "pipeline";
  }
  return "?";
}

double cycles_per_token_lower_bound(const ModelSpec& model,
                                    const TMatCoreConfig& core) {
  return weight_cycles_per_token(model, core) +
         reduction_cycles_per_token(model, core);
}

double cycles_per_token(const ModelSpec& model,
                        const CalibrationConstants& calib,
                        const TMatCoreConfig& core) {
  return cycles_per_token_lower_bound(model, core) +
         static_cast<double>(model.layers) *
             calib.overhead_cycles_per_layer(model.dim);
}

double arithmetic_intensity(const ModelSpec& model, int batch) {
  // One MAC per streamed trit, 2 ops per MAC, 5 trits per byte.
  const double ops = 2.0 * static_cast<double>(batch) *
                     static_cast<double>(model.storage_trits());
  return ops / static_cast<double>(model.storage_bytes);
}

PowerResult power_and_efficiency(Variant variant, int cards, int active_cards,
                                 double tokens_per_s,
                                 const PowerConstants& power) {
  PowerResult result;
  if (variant == Variant::kHbmAssisted) {
    result.power_w = power.p_hbm_variant_w;
    result.dynamic_breakdown = power.dynamic_breakdown_hbm;
  } else {
    result.power_w = active_cards * power.p0_card_w +
                     (cards - active_cards) * power.p_static_w;
    result.dynamic_breakdown = power.dynamic_breakdown_onchip;
  }
  result.efficiency_tok_per_s_per_w = tokens_per_s / result.power_w;
  return result;
}

PerfReport onchip_throughput(const PerfQuery& query, const BoardSpec& board,
                             const CalibrationConstants& calib) {
  if (query.variant != Variant::kFullyOnChip)
    throw ConfigError("onchip_throughput requires the fully-on-chip variant");
  if (query.batch < 1) throw ConfigError("batch must be >= 1");
  plan_placement(query.model, board, query.cards);  // validates capacity

  const double cycles = cycles_per_token(query.model, calib);
  // One token traverses every card serially, hopping the interconnect
  // between consecutive cards (d int8 activations per hop).
  const double hop_s = interconnect_time_s(query.model.dim, board);
  const double token_latency_s =
      cycles / board.clock_hz + (query.cards - 1) * hop_s;
  const double single_tp = 1.0 / token_latency_s;

  const int active = std::min(query.batch, query.cards);
  PerfReport report;
  report.model = query.model.name;
  report.variant = query.variant;
  report.batch = query.batch;
  report.cards = query.cards;
  report.cycles_per_token = cycles;
  report.tokens_per_s = active * single_tp;
  report.regime = BoundRegime::kPipeline;
  const PowerResult pw = power_and_efficiency(
      query.variant, query.cards, active, report.tokens_per_s, board.power);
  report.power_w = pw.power_w;
  report.efficiency_tok_per_s_per_w = pw.efficiency_tok_per_s_per_w;
  report.dynamic_breakdown = pw.dynamic_breakdown;
  report.arithmetic_intensity_ops_per_byte =
      arithmetic_intensity(query.model, query.batch);
  return report;
}

PerfReport hbm_throughput(const PerfQuery& query, const BoardSpec& board,
                          const RooflineParams& roofline,
                          const CalibrationConstants& calib) {
  if (query.variant != Variant::kHbmAssisted)
    throw ConfigError("hbm_throughput requires the hbm-assisted variant");
  if (query.cards != 1)
    throw InvalidCardsError("the HBM-assisted variant runs on a single card");
  if (query.batch < 1) throw ConfigError("batch must be >= 1");
  if (roofline.hbm_efficiency <= 0.0 || roofline.hbm_efficiency > 1.0)
    throw ConfigError("hbm_efficiency must lie in (0, 1]");
  if (query.model.storage_bytes > board.hbm_capacity_bytes) {
    std::ostringstream msg;
    msg << "model needs " << query.model.storage_bytes
        << " bytes but the HBM holds " << board.hbm_capacity_bytes;
    throw ModelTooLargeError(msg.str());
  }

  // Streaming the packed weights once per token bounds the memory side;
  // batches share the stream, so the memory-bound term scales with batch.
  const double effective_bw =
      roofline.hbm_efficiency * board.hbm_peak_bw_bytes_per_s;
  const double tp_mem1 =
      effective_bw / static_cast<double>(query.model.storage_bytes);
  const double tp_compute =
      board.clock_hz / cycles_per_token(query.model, calib);

  PerfReport report;
  report.model = query.model.name;
  report.variant = query.variant;
  report.batch = query.batch;
  report.cards = query.cards;
  report.cycles_per_token = cycles_per_token(query.model, calib);
  const double tp_mem = query.batch * tp_mem1;
  report.tokens_per_s = std::min(tp_mem, tp_compute);
  report.regime =
      tp_mem < tp_compute ? BoundRegime::kMemory : BoundRegime::kCompute;
  const PowerResult pw = power_and_efficiency(query.variant, 1, 1,
                                              report.tokens_per_s, board.power);
  report.power_w = pw.power_w;
  report.efficiency_tok_per_s_per_w = pw.efficiency_tok_per_s_per_w;
  report.dynamic_breakdown = pw.dynamic_breakdown;
  report.arithmetic_intensity_ops_per_byte =
      arithmetic_intensity(query.model, query.batch);
  return report;
}

double batch_threshold(const ModelSpec& model, const BoardSpec& board,
                       const RooflineParams& roofline,
                       const CalibrationConstants& calib) {
  if (roofline.hbm_efficiency <= 0.0)
    return std::numeric_limits<double>::infinity();
  const double effective_bw =
      roofline.hbm_efficiency * board.hbm_peak_bw_bytes_per_s;
  const double tp_mem1 =
      effective_bw / static_cast<double>(model.storage_bytes);
  const double tp_compute = board.clock_hz / cycles_per_token(model, calib);
  return tp_compute / tp_mem1;
}

double project_node_scaling(double power_w, double factor) {
  return power_w * factor;
}

double node_scaling_factor(const std::string& node) {
  if (node == "7nm") return 0.35;
  if (node == "8nm") return 0.5;
  throw ConfigError("unknown technology node \"" + node +
                    "\" (expected 7nm or 8nm)");
}

PerfReport project_7b(const BoardSpec& board, const RooflineParams& roofline,
                      const CalibrationConstants& calib) {
  PerfQuery query;
  query.model = model_preset("7b");
  query.variant = Variant::kHbmAssisted;
  query.batch = 1;
  query.cards = 1;
  return hbm_throughput(query, board, roofline, calib);
}

const std::vector<PublishedBaseline>& published_baselines() {
  // Reported measurements of other systems, used only for ratio columns.
  static const std::vector<PublishedBaseline> rows = {
      {"prior-fpga", "370m", 1, 62, 13.7},
      {"jetson-orin-nano", "370m", 1, 85, 3.5},
      {"jetson-orin-nano", "370m", 16, 1076, 4.4},
      {"prior-fpga", "1.3b", 1, 24, 13.9},
      {"a100", "1.3b", 1, 499, 119.6},
      {"a100", "1.3b", 16, 7202, 132.5},
      {"a100", "2.7b", 1, 250, 124.0},
      {"a100", "2.7b", 16, 3660, 139.3},
  };
  return rows;
}

}  // namespace ternsim
