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
// ternsim command-line tool: weight packing, model generation, functional
// decoding with oracle verification, placement planning, and performance
// reporting.
//
// Exit codes: 0 success, 1 verification failure, 2 data/format error,
// 3 capacity error, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ternsim/codec.hpp"
#include "ternsim/hw.hpp"
#include "ternsim/kv.hpp"
#include "ternsim/model.hpp"
#include "ternsim/perf.hpp"
#include "ternsim/quant.hpp"
#include "ternsim/tmat.hpp"

namespace {

using nlohmann::json;
using namespace ternsim;

constexpr int kExitVerifyFailure = 1;
constexpr int kExitDataError = 2;
constexpr int kExitCapacityError = 3;
constexpr int kExitUsageError = 64;

bool is_model_preset(const std::string& name) {
  for (const std::string& preset : model_preset_names())
    if (preset == name) return true;
  return false;
}

BoardSpec resolve_board(const std::string& name_or_path) {
  for (const std::string& preset : board_preset_names())
    if (preset == name_or_path) return board_preset(name_or_path);
  return load_board_file(name_or_path);
}

// Spec from a preset name or a manifest path, without loading weights.
ModelSpec resolve_spec(const std::string& name_or_path) {
  if (is_model_preset(name_or_path)) return model_preset(name_or_path);
  KvFile kv = KvFile::parse_file(name_or_path);
  ModelSpec spec;
  spec.name = kv.get_string("name");
  spec.dim = static_cast<Eigen::Index>(kv.get_int("dim"));
  spec.layers = static_cast<int>(kv.get_int("layers"));
  spec.glu_expansion.num = kv.get_int("glu_num", 8);
  spec.glu_expansion.den = kv.get_int("glu_den", 3);
  spec.storage_bytes = kv.get_int("storage_bytes");
  kv.get_string("weights", "");
  kv.get_string("norms", "");
  kv.require_all_consumed();
  return spec;
}

std::uint64_t session_seed(std::uint64_t seed, int session) {
  return seed + static_cast<std::uint64_t>(session) * 0x9E3779B97F4A7C15ull;
}

std::string format_si(double v) {
  std::ostringstream os;
  if (v >= 1e9)
    os << std::fixed << std::setprecision(2) << v / 1e9 << "G";
  else if (v >= 1e6)
    os << std::fixed << std::setprecision(2) << v / 1e6 << "M";
  else if (v >= 1e3)
    os << std::fixed << std::setprecision(1) << v / 1e3 << "k";
  else
    os << std::fixed << std::setprecision(1) << v;
  return os.str();
}

// ---- pack / unpack -------------------------------------------------------

struct PackOptions {
  std::string input;
  std::string output;
  std::string name = "t0";
};

std::vector<Trit> read_raw_trits(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path + " for reading");
  std::vector<char> bytes{std::istreambuf_iterator<char>(is),
                          std::istreambuf_iterator<char>()};
  std::vector<Trit> trits(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const auto v = static_cast<std::int8_t>(bytes[i]);
    if (v < -1 || v > 1) {
      std::ostringstream msg;
      msg << path << ": invalid trit byte 0x" << std::hex
          << (static_cast<unsigned>(bytes[i]) & 0xff) << std::dec
          << " at offset " << i;
      throw InvalidCodeError(msg.str());
    }
    trits[i] = v;
  }
  return trits;
}

void print_compression(std::int64_t trits, std::int64_t packed_bytes) {
  const double two_bit_bytes = std::ceil(static_cast<double>(trits) / 4.0);
  std::cout << "trits:        " << trits << "\n";
  std::cout << "packed bytes: " << packed_bytes << " ("
            << format_si(static_cast<double>(packed_bytes)) << "B)\n";
  std::cout << "vs 2-bit:     " << std::fixed << std::setprecision(4)
            << static_cast<double>(packed_bytes) / two_bit_bytes << "x\n";
}

int cmd_pack(const PackOptions& opt) {
  std::vector<NamedPackedTensor> tensors;
  if (opt.input.size() > 9 &&
      opt.input.substr(opt.input.size() - 9) == ".manifest") {
    const LoadedModel model = load_model(opt.input);
    int layer = 0;
    for (const LayerWeights& lw : model.weights) {
      auto add = [&](const char* field, const TernaryTensor& t) {
        std::ostringstream name;
        name << "layer" << layer << "." << field;
        tensors.emplace_back(name.str(), pack_tensor(t));
      };
      add("w_forget", lw.w_forget);
      add("w_candidate", lw.w_candidate);
      add("w_mix_gate", lw.w_mix_gate);
      add("w_out", lw.w_out);
      add("w_glu_gate", lw.w_glu_gate);
      add("w_glu_up", lw.w_glu_up);
      add("w_glu_down", lw.w_glu_down);
      ++layer;
    }
  } else {
    const std::vector<Trit> trits = read_raw_trits(opt.input);
    if (trits.empty()) throw IoError(opt.input + ": no trits to pack");
    const TernaryTensor t =
        make_tensor({static_cast<Eigen::Index>(trits.size())}, trits);
    tensors.emplace_back(opt.name, pack_tensor(t));
  }
  write_weight_file(opt.output, tensors);

  std::int64_t total_trits = 0;
  std::int64_t total_bytes = 0;
  for (const auto& [name, t] : tensors) {
    total_trits += t.element_count();
    total_bytes += static_cast<std::int64_t>(t.payload.size());
  }
  print_compression(total_trits, total_bytes);
  return 0;
}

struct UnpackOptions {
  std::string input;
  std::string output;
};

int cmd_unpack(const UnpackOptions& opt) {
  const auto tensors = read_weight_file(opt.input);
  std::ofstream os(opt.output, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + opt.output + " for writing");
  std::int64_t total = 0;
  for (const auto& [name, packed] : tensors) {
    const TernaryTensor t = unpack_tensor(packed);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.size()));
    total += t.size();
  }
  if (!os) throw IoError("write failed for " + opt.output);
  std::cout << "tensors: " << tensors.size() << "\n";
  std::cout << "trits:   " << total << "\n";
  return 0;
}

// ---- gen-model -----------------------------------------------------------

struct GenModelOptions {
  std::string model;
  std::int64_t dim = 0;
  int layers = 0;
  std::uint64_t seed = 0;
  double zero_prob = 1.0 / 3.0;
  std::string out_stem;
};

ModelSpec spec_from_flags(const std::string& model, std::int64_t dim,
                          int layers) {
  if (dim > 0 || layers > 0) {
    if (dim <= 0 || layers <= 0)
      throw ConfigError("--dim and --layers must be given together");
    return make_custom_spec(static_cast<Eigen::Index>(dim), layers);
  }
  if (model.empty())
    throw ConfigError("either --model or --dim/--layers is required");
  return resolve_spec(model);
}

int cmd_gen_model(const GenModelOptions& opt) {
  const ModelSpec spec = spec_from_flags(opt.model, opt.dim, opt.layers);
  const ModelWeights weights = random_model(spec, opt.seed, opt.zero_prob);
  const ModelFiles files = model_files_for_stem(opt.out_stem);
  save_model(files, spec, weights);

  std::ifstream packed(files.weights_path, std::ios::binary | std::ios::ate);
  const auto packed_bytes = static_cast<std::int64_t>(packed.tellg());
  const std::int64_t trits =
      spec.allocated_trits_per_layer() * spec.layers;
  std::cout << "model:            " << spec.name << "\n";
  std::cout << "dim:              " << spec.dim << " (glu " << spec.glu_dim()
            << ")\n";
  std::cout << "layers:           " << spec.layers << "\n";
  std::cout << "ternary params:   " << trits << " ("
            << format_si(static_cast<double>(trits)) << ")\n";
  std::cout << "declared storage: " << spec.storage_bytes << " bytes\n";
  std::cout << "packed weights:   " << packed_bytes << " bytes -> "
            << files.weights_path << "\n";
  std::cout << "manifest:         " << files.manifest_path << "\n";
  return 0;
}

// ---- run -----------------------------------------------------------------

struct RunOptions {
  std::string model;
  std::int64_t dim = 0;
  int layers = 0;
  int steps = 8;
  int batch = 1;
  std::uint64_t seed = 0;
  double zero_prob = 1.0 / 3.0;
  int threads = 1;
  bool verify = false;
  double verify_threshold = 0.05;
  std::string out_path;
};

void write_activations(const std::string& path, int batch, int steps,
                       Eigen::Index dim,
                       const std::vector<std::vector<QuantVector>>& outputs) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write("TAC1", 4);
  auto write_u32 = [&os](std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
  };
  write_u32(static_cast<std::uint32_t>(batch));
  write_u32(static_cast<std::uint32_t>(steps));
  write_u32(static_cast<std::uint32_t>(dim));
  for (const auto& session : outputs) {
    for (const QuantVector& q : session) {
      std::uint64_t bits;
      std::memcpy(&bits, &q.scale, 8);
      char b[8];
      for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      os.write(b, 8);
      os.write(reinterpret_cast<const char*>(q.values.data()),
               static_cast<std::streamsize>(q.values.size()));
    }
  }
  if (!os) throw IoError("write failed for " + path);
}

int cmd_run(const RunOptions& opt) {
  if (opt.steps < 1) throw ConfigError("--steps must be >= 1");
  if (opt.batch < 1) throw ConfigError("--batch must be >= 1");

  ModelSpec spec;
  ModelWeights weights;
  const bool from_manifest = !opt.model.empty() && !is_model_preset(opt.model) &&
                             opt.dim == 0 && opt.layers == 0;
  if (from_manifest) {
    LoadedModel loaded = load_model(opt.model);
    spec = loaded.spec;
    weights = std::move(loaded.weights);
  } else {
    spec = spec_from_flags(opt.model, opt.dim, opt.layers);
    weights = random_model(spec, opt.seed, opt.zero_prob);
  }

  const ModelRuntime rt = make_default_runtime(opt.threads);
  std::vector<std::vector<RealVector>> inputs(
      static_cast<std::size_t>(opt.batch));
  for (int b = 0; b < opt.batch; ++b) {
    std::mt19937_64 rng(session_seed(opt.seed, b));
    for (int t = 0; t < opt.steps; ++t)
      inputs[static_cast<std::size_t>(b)].push_back(
          gaussian_vector(rng, spec.dim));
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<QuantVector>> outputs;
  std::int64_t modeled_cycles = 0;
  for (int b = 0; b < opt.batch; ++b) {
    DecodeSession session = make_session(spec, weights, opt.seed);
    outputs.push_back(
        generate(session, inputs[static_cast<std::size_t>(b)], rt));
    modeled_cycles += session.stats.cycles;
  }
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  std::cout << "model:          " << spec.name << " (dim " << spec.dim
            << ", layers " << spec.layers << ")\n";
  std::cout << "steps x batch:  " << opt.steps << " x " << opt.batch << "\n";
  std::cout << "modeled cycles: " << modeled_cycles << "\n";
  std::cout << "wall time:      " << std::fixed << std::setprecision(3)
            << elapsed << " s\n";

  if (!opt.out_path.empty()) {
    write_activations(opt.out_path, opt.batch, opt.steps, spec.dim, outputs);
    std::cout << "activations:    " << opt.out_path << "\n";
  }

  if (opt.verify) {
    double max_err = 0;
    double err_sum = 0;
    int err_count = 0;
    for (int b = 0; b < opt.batch; ++b) {
      const auto want = float_reference_forward(
          spec, weights, inputs[static_cast<std::size_t>(b)], rt.rms);
      for (int t = 0; t < opt.steps; ++t) {
        const RealVector got =
            dequantize(outputs[static_cast<std::size_t>(b)]
                              [static_cast<std::size_t>(t)]);
        const RealVector& ref = want[static_cast<std::size_t>(t)];
        const double denom = ref.norm();
        const double err =
            denom == 0 ? got.norm() : (got - ref).norm() / denom;
        max_err = std::max(max_err, err);
        err_sum += err;
        ++err_count;
      }
    }
    const double mean_err = err_sum / err_count;
    std::cout << "verify:         max rel L2 " << std::scientific
              << std::setprecision(3) << max_err << ", mean " << mean_err
              << " (threshold " << opt.verify_threshold << ")\n";
    if (max_err > opt.verify_threshold) {
      std::cerr << "verification failed: " << max_err << " > "
                << opt.verify_threshold << "\n";
      return kExitVerifyFailure;
    }
  }
  return 0;
}

// ---- plan ----------------------------------------------------------------

struct PlanOptions {
  std::string model;
  std::string board = "u280";
  int cards = 0;  // 0: use min_cards
};

int cmd_plan(const PlanOptions& opt) {
  const ModelSpec spec = resolve_spec(opt.model);
  const BoardSpec board = resolve_board(opt.board);
  const int needed = min_cards(spec, board);
  const int cards = opt.cards > 0 ? opt.cards : needed;
  const Placement placement = plan_placement(spec, board, cards);

  std::cout << "model:        " << spec.name << " (" << spec.storage_bytes
            << " weight bytes, " << spec.layers << " layers)\n";
  std::cout << "board:        " << board.name << " ("
            << board.onchip_weight_budget_bytes << " bytes/card)\n";
  std::cout << "min cards:    " << needed << "\n";
  std::cout << "plan:         " << cards << " card(s)\n";
  for (int c = 0; c < cards; ++c) {
    const LayerRange& r = placement.ranges[static_cast<std::size_t>(c)];
    std::cout << "  card " << std::setw(2) << c << ": layers " << std::setw(3)
              << r.begin << " .. " << std::setw(3) << r.end - 1 << "  ("
              << r.count() << " layers, "
              << format_si(placement.card_bytes[static_cast<std::size_t>(c)])
              << "B)\n";
  }
  return 0;
}

// ---- perf / roofline -----------------------------------------------------

struct PerfOptions {
  std::string model;
  std::string board = "u280";
  std::string variant;
  int batch = 1;
  int cards = 0;  // 0: min_cards for on-chip, 1 for HBM
  double eta = 0.75;
  std::string format = "text";
  std::string out_path;
};

json report_to_json(const PerfReport& r) {
  json breakdown = json::object();
  for (const auto& [name, pct] : r.dynamic_breakdown) breakdown[name] = pct;
  return json{{"model", r.model},
              {"variant", to_string(r.variant)},
              {"batch", r.batch},
              {"cards", r.cards},
              {"tokens_per_s", r.tokens_per_s},
              {"cycles_per_token", r.cycles_per_token},
              {"regime", to_string(r.regime)},
              {"power_w", r.power_w},
              {"efficiency", r.efficiency_tok_per_s_per_w},
              {"breakdown", breakdown},
              {"intensity", r.arithmetic_intensity_ops_per_byte}};
}

void print_report_text(std::ostream& os, const PerfReport& r) {
  os << std::fixed;
  os << "model:            " << r.model << "\n";
  os << "variant:          " << to_string(r.variant) << "\n";
  os << "batch:            " << r.batch << "\n";
  os << "cards:            " << r.cards << "\n";
  os << "tokens/s:         " << std::setprecision(1) << r.tokens_per_s << "\n";
  os << "cycles/token:     " << std::setprecision(1) << r.cycles_per_token
     << "\n";
  os << "regime:           " << to_string(r.regime) << "\n";
  os << "power:            " << std::setprecision(1) << r.power_w << " W\n";
  os << "efficiency:       " << std::setprecision(1)
     << r.efficiency_tok_per_s_per_w << " tok/s/W\n";
  os << "intensity:        " << std::setprecision(1)
     << r.arithmetic_intensity_ops_per_byte << " ops/byte\n";
  os << "dynamic power:    ";
  bool first = true;
  for (const auto& [name, pct] : r.dynamic_breakdown) {
    if (!first) os << " | ";
    os << name << " " << std::setprecision(0) << pct << "%";
    first = false;
  }
  os << "\n";
  for (const PublishedBaseline& row : published_baselines()) {
    if (row.model == r.model && row.batch == r.batch) {
      const double eff = row.tokens_per_s / row.power_w;
      os << "vs " << row.hardware << " (published): throughput "
         << std::setprecision(1) << r.tokens_per_s / row.tokens_per_s
         << "x, efficiency " << r.efficiency_tok_per_s_per_w / eff << "x\n";
    }
  }
}

int cmd_perf(const PerfOptions& opt) {
  const ModelSpec spec = resolve_spec(opt.model);
  const BoardSpec board = resolve_board(opt.board);
  const CalibrationConstants calib;
  const Variant variant = variant_from_string(opt.variant);

  PerfQuery query;
  query.model = spec;
  query.variant = variant;
  query.batch = opt.batch;

  PerfReport report;
  if (variant == Variant::kHbmAssisted) {
    if (opt.cards > 1)
      throw CLI::ValidationError("--cards",
                                 "the hbm variant runs on a single card");
    query.cards = 1;
    report = hbm_throughput(query, board, {opt.eta}, calib);
  } else {
    query.cards = opt.cards > 0 ? opt.cards : min_cards(spec, board);
    report = onchip_throughput(query, board, calib);
  }

  std::ostringstream out;
  if (opt.format == "json")
    out << report_to_json(report).dump(2) << "\n";
  else
    print_report_text(out, report);

  if (opt.out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream os(opt.out_path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + opt.out_path + " for writing");
    os << out.str();
  }
  return 0;
}

struct RooflineOptions {
  std::string model;
  std::string board = "u280";
  int batch_min = 1;
  int batch_max = 16;
  double eta = 0.75;
  std::string out_path;
};

int cmd_roofline(const RooflineOptions& opt) {
  if (opt.batch_min < 1 || opt.batch_max < opt.batch_min)
    throw ConfigError("batch range must satisfy 1 <= min <= max");
  const ModelSpec spec = resolve_spec(opt.model);
  const BoardSpec board = resolve_board(opt.board);
  const CalibrationConstants calib;
  const RooflineParams roofline{opt.eta};

  std::ostringstream out;
  out << "batch,intensity_ops_per_byte,tokens_per_s,regime\n";
  for (int batch = opt.batch_min; batch <= opt.batch_max; ++batch) {
    PerfQuery query;
    query.model = spec;
    query.variant = Variant::kHbmAssisted;
    query.batch = batch;
    query.cards = 1;
    const PerfReport r = hbm_throughput(query, board, roofline, calib);
    out << batch << "," << std::setprecision(12)
        << r.arithmetic_intensity_ops_per_byte << "," << r.tokens_per_s << ","
        << to_string(r.regime) << "\n";
  }

  if (opt.out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream os(opt.out_path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + opt.out_path + " for writing");
    os << out.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bit-exact ternary accelerator datapath model and analytical "
               "performance model"};
  app.require_subcommand(1);
  int exit_code = 0;

  auto pack_opt = std::make_shared<PackOptions>();
  CLI::App* pack = app.add_subcommand(
      "pack", "pack raw trits (or a model manifest) into a weight file");
  pack->add_option("--in", pack_opt->input, "raw trit file or .manifest")
      ->required();
  pack->add_option("--out", pack_opt->output, "packed weight file")->required();
  pack->add_option("--name", pack_opt->name, "tensor name for raw input");
  pack->callback([pack_opt, &exit_code] { exit_code = cmd_pack(*pack_opt); });

  auto unpack_opt = std::make_shared<UnpackOptions>();
  CLI::App* unpack =
      app.add_subcommand("unpack", "unpack a weight file to raw trits");
  unpack->add_option("--in", unpack_opt->input, "packed weight file")
      ->required();
  unpack->add_option("--out", unpack_opt->output, "raw trit file")->required();
  unpack->callback(
      [unpack_opt, &exit_code] { exit_code = cmd_unpack(*unpack_opt); });

  auto gen_opt = std::make_shared<GenModelOptions>();
  CLI::App* gen = app.add_subcommand(
      "gen-model", "generate a random ternary model (manifest + weights)");
  gen->add_option("--model", gen_opt->model, "preset: 370m, 1.3b, 2.7b, 7b");
  gen->add_option("--dim", gen_opt->dim, "custom activation dimension");
  gen->add_option("--layers", gen_opt->layers, "custom layer count");
  gen->add_option("--seed", gen_opt->seed, "RNG seed");
  gen->add_option("--zero-prob", gen_opt->zero_prob, "P(weight == 0)");
  gen->add_option("--out", gen_opt->out_stem, "output path stem")->required();
  gen->callback([gen_opt, &exit_code] { exit_code = cmd_gen_model(*gen_opt); });

  auto run_opt = std::make_shared<RunOptions>();
  CLI::App* run = app.add_subcommand(
      "run", "decode random inputs through the quantized datapath");
  run->add_option("--model", run_opt->model,
                  "preset name or manifest path (random weights for presets)");
  run->add_option("--dim", run_opt->dim, "custom activation dimension");
  run->add_option("--layers", run_opt->layers, "custom layer count");
  run->add_option("--steps", run_opt->steps, "decode steps");
  run->add_option("--batch", run_opt->batch, "independent decode sessions");
  run->add_option("--seed", run_opt->seed, "RNG seed");
  run->add_option("--zero-prob", run_opt->zero_prob, "P(weight == 0)");
  run->add_option("--threads", run_opt->threads, "engine threads");
  run->add_flag("--verify", run_opt->verify,
                "compare against the double-precision reference");
  run->add_option("--verify-threshold", run_opt->verify_threshold,
                  "max relative L2 error");
  run->add_option("--out", run_opt->out_path, "activation output file");
  run->callback([run_opt, &exit_code] { exit_code = cmd_run(*run_opt); });

  auto plan_opt = std::make_shared<PlanOptions>();
  CLI::App* plan =
      app.add_subcommand("plan", "plan multi-card layer placement");
  plan->add_option("--model", plan_opt->model, "model preset or manifest")
      ->required();
  plan->add_option("--board", plan_opt->board, "board preset or config file");
  plan->add_option("--cards", plan_opt->cards, "card count (default: minimum)");
  plan->callback([plan_opt, &exit_code] { exit_code = cmd_plan(*plan_opt); });

  auto perf_opt = std::make_shared<PerfOptions>();
  CLI::App* perf =
      app.add_subcommand("perf", "modeled throughput/power/efficiency report");
  perf->add_option("--model", perf_opt->model, "model preset or manifest")
      ->required();
  perf->add_option("--variant", perf_opt->variant, "onchip or hbm")->required();
  perf->add_option("--batch", perf_opt->batch, "batch size");
  perf->add_option("--cards", perf_opt->cards, "cards (on-chip variant)");
  perf->add_option("--board", perf_opt->board, "board preset or config file");
  perf->add_option("--eta", perf_opt->eta, "delivered HBM bandwidth fraction");
  perf->add_option("--format", perf_opt->format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  perf->add_option("--out", perf_opt->out_path, "write the report to a file");
  perf->callback([perf_opt, &exit_code] { exit_code = cmd_perf(*perf_opt); });

  auto roof_opt = std::make_shared<RooflineOptions>();
  CLI::App* roof = app.add_subcommand(
      "roofline", "CSV roofline sweep over batch sizes (HBM variant)");
  roof->add_option("--model", roof_opt->model, "model preset or manifest")
      ->required();
  roof->add_option("--board", roof_opt->board, "board preset or config file");
  roof->add_option("--batch-min", roof_opt->batch_min, "first batch size");
  roof->add_option("--batch-max", roof_opt->batch_max, "last batch size");
  roof->add_option("--eta", roof_opt->eta, "delivered HBM bandwidth fraction");
  roof->add_option("--out", roof_opt->out_path, "write the CSV to a file");
  roof->callback(
      [roof_opt, &exit_code] { exit_code = cmd_roofline(*roof_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsageError;
  } catch (const InsufficientCapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacityError;
  } catch (const ModelTooLargeError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacityError;
  } catch (const InvalidCardsError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const InvalidBatchError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return exit_code;
}
