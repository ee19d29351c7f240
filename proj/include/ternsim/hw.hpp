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
// Hardware descriptors (on-chip memories, HBM, interconnect, clock, power
// constants) and the multi-card layer-placement planner with
// compute-memory alignment classification.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ternsim/errors.hpp"
#include "ternsim/model.hpp"

namespace ternsim {

/// One kind of on-chip memory (BRAM, URAM, ...).
struct MemoryKind {
  std::string name;
  std::int64_t capacity_bits_per_piece = 0;
  std::int64_t bandwidth_bits_per_cycle_per_piece = 0;
  std::int64_t piece_count = 0;

  std::int64_t total_capacity_bytes() const {
    return capacity_bits_per_piece * piece_count / 8;
  }
  std::int64_t total_bandwidth_bits_per_cycle() const {
    return bandwidth_bits_per_cycle_per_piece * piece_count;
  }
  double total_bandwidth_bytes_per_s(double clock_hz) const {
    return static_cast<double>(total_bandwidth_bits_per_cycle()) * clock_hz /
           8.0;
  }
};

struct PowerConstants {
  double p0_card_w = 31.8;       // single active card, fully on-chip
  double p_static_w = 4.0;       // idle card
  double p_dynamic_w = 27.8;     // p0 - p_static
  double p_hbm_variant_w = 46.2; // HBM-assisted card, any batch

  /// Dynamic power shares in percent; each list sums to 100.
  std::vector<std::pair<std::string, double>> dynamic_breakdown_onchip = {
      {"tmat", 27}, {"bram_buf", 25}, {"uram", 18},
      {"norm", 18}, {"act", 10},      {"gty", 2}};
  std::vector<std::pair<std::string, double>> dynamic_breakdown_hbm = {
      {"tmat", 37}, {"hbm", 24}, {"bram_buf", 15},
      {"fifo", 10}, {"norm", 9}, {"act", 5}};
};

struct BoardSpec {
  std::string name = "u280";
  std::vector<MemoryKind> on_chip;               // [BRAM, URAM]
  std::int64_t onchip_weight_budget_bytes = 0;   // usable for weights
  std::int64_t hbm_capacity_bytes = 0;
  double hbm_peak_bw_bytes_per_s = 0;
  double interconnect_bw_bits_per_s = 0;
  double clock_hz = 0;
  PowerConstants power;
};

/// Built-in board presets: "u280", "d5005-baseline".
BoardSpec board_preset(const std::string& name);
std::vector<std::string> board_preset_names();

/// Loads a board from a `key = value` file ('#' comments; unknown keys are
/// errors). Any subset of keys overrides the u280 defaults.
BoardSpec load_board_file(const std::string& path);

/// Trits storable in a byte budget at 1.6 bits/weight: bytes * 8 / 1.6.
std::int64_t weights_capacity(std::int64_t budget_bytes);

/// Smallest number of cards whose combined weight budget holds the model.
int min_cards(const ModelSpec& model, const BoardSpec& board);

/// Contiguous per-card layer range, [begin, end).
struct LayerRange {
  int begin = 0;
  int end = 0;

  int count() const { return end - begin; }
};

struct Placement {
  int num_cards = 0;
  std::vector<LayerRange> ranges;     // pipeline order, partition of [0, L)
  std::vector<double> card_bytes;     // weight bytes per card
};

/// Splits layers into contiguous ranges balanced by per-layer weight bytes,
/// earlier cards taking the remainder. Capacity feasibility is checked at
/// byte granularity (num_cards * budget >= storage); a card's range may
/// exceed the budget by less than one layer when layer granularity forces
/// it. Throws InvalidCardsError or InsufficientCapacityError.
Placement plan_placement(const ModelSpec& model, const BoardSpec& board,
                         int num_cards);

enum class AlignmentZone {
  kCapacityLimited,   // zone 1: not enough capacity
  kBandwidthLimited,  // zone 2: not enough bandwidth
  kOverProvisioned,   // zone 3: both exceed requirements beyond slack
  kAligned,
};

const char* to_string(AlignmentZone zone);

/// Classifies a memory configuration against a demand. "Aligned" means both
/// provided values cover the requirement and neither exceeds it by more
/// than `slack`.
AlignmentZone alignment_zone(double required_bw_bytes_per_s,
                             double required_cap_bytes,
                             double provided_bw_bytes_per_s,
                             double provided_cap_bytes, double slack = 2.0);

/// Card-to-card transfer time for an activation payload.
double interconnect_time_s(std::int64_t bytes, const BoardSpec& board);

}  // namespace ternsim
