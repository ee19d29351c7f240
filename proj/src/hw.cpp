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

#include "ternsim/hw.hpp"

#include <cmath>
#include <sstream>

#include "ternsim/kv.hpp"

namespace ternsim {

namespace {

BoardSpec u280_defaults() {
  BoardSpec board;
  board.name = "u280";
  // 36 Kb BRAMs (72 b/cycle) and 288 Kb URAMs (144 b/cycle).
  board.on_chip = {
      {"bram", 36 * 1024, 72, 2016},
      {"uram", 288 * 1024, 144, 960},
  };
  board.onchip_weight_budget_bytes = 42'000'000;
  board.hbm_capacity_bytes = 8'000'000'000;
  board.hbm_peak_bw_bytes_per_s = 460e9;
  board.interconnect_bw_bits_per_s = 200e9;  // eight QSFP28 channels
  board.clock_hz = 150e6;
  return board;
}

BoardSpec apply_kv(BoardSpec board, KvFile& kv) {
  board.name = kv.get_string("name", board.name);
  board.clock_hz = kv.get_double("clock_hz", board.clock_hz);
  board.onchip_weight_budget_bytes =
      kv.get_int("onchip_weight_budget_bytes", board.onchip_weight_budget_bytes);
  board.hbm_capacity_bytes =
      kv.get_int("hbm_capacity_bytes", board.hbm_capacity_bytes);
  board.hbm_peak_bw_bytes_per_s =
      kv.get_double("hbm_peak_bw_bytes_per_s", board.hbm_peak_bw_bytes_per_s);
  board.interconnect_bw_bits_per_s = kv.get_double(
      "interconnect_bw_bits_per_s", board.interconnect_bw_bits_per_s);
  for (MemoryKind& mem : board.on_chip) {
    mem.piece_count = kv.get_int(mem.name + "_pieces", mem.piece_count);
    mem.capacity_bits_per_piece = kv.get_int(
        mem.name + "_capacity_bits_per_piece", mem.capacity_bits_per_piece);
    mem.bandwidth_bits_per_cycle_per_piece =
        kv.get_int(mem.name + "_bw_bits_per_cycle_per_piece",
                   mem.bandwidth_bits_per_cycle_per_piece);
  }
  board.power.p0_card_w = kv.get_double("p0_card_w", board.power.p0_card_w);
  board.power.p_static_w = kv.get_double("p_static_w", board.power.p_static_w);
  board.power.p_dynamic_w =
      kv.get_double("p_dynamic_w", board.power.p_dynamic_w);
  board.power.p_hbm_variant_w =
      kv.get_double("p_hbm_variant_w", board.power.p_hbm_variant_w);
  kv.require_all_consumed();
  const double p_sum = board.power.p_static_w + board.power.p_dynamic_w;
  if (std::abs(board.power.p0_card_w - p_sum) > 1e-9) {
    std::ostringstream msg;
    msg << "inconsistent power constants: p0 " << board.power.p0_card_w
        << " != static " << board.power.p_static_w << " + dynamic "
        << board.power.p_dynamic_w;
    throw ConfigError(msg.str());
  }
  return board;
}

}  // namespace

BoardSpec board_preset(const std::string& name) {
  if (name == "u280") return u280_defaults();
  if (name == "d5005-baseline") {
    // The earlier-generation board is modeled only by its published
    // off-chip bandwidth and on-chip SRAM size; unlisted attributes keep
    // the default values.
    BoardSpec board = u280_defaults();
    board.name = "d5005-baseline";
    board.onchip_weight_budget_bytes = 30'500'000;
    board.hbm_peak_bw_bytes_per_s = 77e9;
    return board;
  }
  throw ConfigError("unknown board preset \"" + name +
                    "\" (expected u280 or d5005-baseline)");
}

std::vector<std::string> board_preset_names() {
  return {"u280", "d5005-baseline"};
}

BoardSpec load_board_file(const std::string& path) {
  KvFile kv = KvFile::parse_file(path);
  return apply_kv(u280_defaults(), kv);
}

std::int64_t weights_capacity(std::int64_t budget_bytes) {
  return budget_bytes * 5;  // 8 bits / 1.6 bits per weight
}

int min_cards(const ModelSpec& model, const BoardSpec& board) {
  const std::int64_t budget = board.onchip_weight_budget_bytes;
  if (budget <= 0) throw ConfigError("board has no on-chip weight budget");
  return static_cast<int>((model.storage_bytes + budget - 1) / budget);
}

Placement plan_placement(const ModelSpec& model, const BoardSpec& board,
                         int num_cards) {
  if (num_cards < 1) throw InvalidCardsError("card count must be >= 1");
  if (num_cards > model.layers) {
    std::ostringstream msg;
    msg << num_cards << " cards exceed the layer count " << model.layers
        << " (a card needs at least one pipeline stage)";
    throw InvalidCardsError(msg.str());
  }
  const std::int64_t available =
      static_cast<std::int64_t>(num_cards) * board.onchip_weight_budget_bytes;
  if (model.storage_bytes > available) {
    std::ostringstream msg;
    msg << "model needs " << model.storage_bytes << " weight bytes but "
        << num_cards << " card(s) provide " << available;
    throw InsufficientCapacityError(msg.str());
  }

  // Layers carry equal weight bytes, so the balanced contiguous split gives
  // the remainder to the earlier cards.
  Placement p;
  p.num_cards = num_cards;
  const int base = model.layers / num_cards;
  const int remainder = model.layers % num_cards;
  const double bytes_per_layer =
      static_cast<double>(model.storage_bytes) / model.layers;
  int begin = 0;
  for (int card = 0; card < num_cards; ++card) {
    const int count = base + (card < remainder ? 1 : 0);
    p.ranges.push_back({begin, begin + count});
    p.card_bytes.push_back(count * bytes_per_layer);
    begin += count;
  }
  return p;
}

const char* to_string(AlignmentZone zone) {
  switch (zone) {
    case AlignmentZone::kCapacityLimited: return "capacity-limited";
    case AlignmentZone::kBandwidthLimited: return "bandwidth-limited";
    case AlignmentZone::kOverProvisioned: return "over-provisioned";
    case AlignmentZone::kAligned: return "aligned";
  }
  return "?";
}

AlignmentZone alignment_zone(double required_bw_bytes_per_s,
                             double required_cap_bytes,
                             double provided_bw_bytes_per_s,
                             double provided_cap_bytes, double slack) {
  if (provided_cap_bytes < required_cap_bytes)
    return AlignmentZone::kCapacityLimited;
  if (provided_bw_bytes_per_s < required_bw_bytes_per_s)
    return AlignmentZone::kBandwidthLimited;
  const bool within_slack =
      provided_bw_bytes_per_s <= slack * required_bw_bytes_per_s &&
      provided_cap_bytes <= slack * required_cap_bytes;
  return within_slack ? AlignmentZone::kAligned
                      : AlignmentZone::kOverProvisioned;
}

double interconnect_time_s(std::int64_t bytes, const BoardSpec& board) {
  if (board.interconnect_bw_bits_per_s <= 0)
    throw ConfigError("board has no interconnect bandwidth");
  return static_cast<double>(bytes) * 8.0 / board.interconnect_bw_bits_per_s;
}

}  // namespace ternsim
