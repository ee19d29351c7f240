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

#include "ternsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "ternsim/kv.hpp"

namespace ternsim {

Eigen::Index ModelSpec::glu_dim() const {
  const std::int64_t raw =
      (dim * glu_expansion.num + glu_expansion.den - 1) / glu_expansion.den;
  return static_cast<Eigen::Index>((raw + 255) / 256 * 256);
}

std::int64_t ModelSpec::allocated_trits_per_layer() const {
  const std::int64_t d = dim;
  const std::int64_t g = glu_dim();
  return 4 * d * d + 3 * d * g;
}

ModelSpec model_preset(const std::string& name) {
  // Storage sizes are the published per-model packed-weight footprints; the
  // 7B entry is the same-structure extrapolation (allocated trits / 5).
  ModelSpec spec;
  spec.name = name;
  if (name == "370m") {
    spec.dim = 1024;
    spec.layers = 24;
    spec.storage_bytes = 58'000'000;
  } else if (name == "1.3b") {
    spec.dim = 2048;
    spec.layers = 24;
    spec.storage_bytes = 230'000'000;
  } else if (name == "2.7b") {
    spec.dim = 2560;
    spec.layers = 32;
    spec.storage_bytes = 480'000'000;
  } else if (name == "7b") {
    spec.dim = 4096;
    spec.layers = 32;
    spec.storage_bytes =
        (spec.allocated_trits_per_layer() * spec.layers + 4) / 5;
  } else {
    throw ConfigError("unknown model preset \"" + name +
                      "\" (expected 370m, 1.3b, 2.7b or 7b)");
  }
  return spec;
}

std::vector<std::string> model_preset_names() {
  return {"370m", "1.3b", "2.7b", "7b"};
}

ModelSpec make_custom_spec(Eigen::Index dim, int layers,
                           Rational glu_expansion) {
  if (dim <= 0 || dim % 256 != 0)
    throw ConfigError("model dim must be a positive multiple of 256");
  if (layers < 1) throw ConfigError("model must have at least one layer");
  ModelSpec spec;
  spec.name = "custom";
  spec.dim = dim;
  spec.layers = layers;
  spec.glu_expansion = glu_expansion;
  spec.storage_bytes = (spec.allocated_trits_per_layer() * layers + 4) / 5;
  return spec;
}

ModelRuntime make_default_runtime(int threads) {
  ModelRuntime rt;
  rt.reciprocal = build_reciprocal_lut(12, 0.015625, 1024.0);
  rt.sigmoid = build_sigmoid_lut(12, -8.0, 8.0);
  rt.core.threads = threads;
  return rt;
}

QuantVector bitlinear(const QuantVector& x, const TernaryTensor& w,
                      const RealVector& norm_weights, const ModelRuntime& rt,
                      TMatStats* stats) {
  const QuantVector normed = rmsnorm(x, norm_weights, rt.rms, rt.reciprocal);
  const AccumVector acc = tiled_matvec(normed.values, w, rt.core, stats);
  // The integer accumulator is exact; the normalized scale carries through.
  return quantize_absmax(acc.cast<double>() * normed.scale);
}

MlgruResult mlgru_step(const QuantVector& x, const RealVector& h_prev,
                       const LayerWeights& lw, const ModelRuntime& rt,
                       TMatStats* stats) {
  const RealVector f = sigmoid_lut(
      rt.sigmoid, dequantize(bitlinear(x, lw.w_forget, lw.norm_forget, rt, stats)));
  const RealVector c =
      dequantize(bitlinear(x, lw.w_candidate, lw.norm_candidate, rt, stats));
  const RealVector g = sigmoid_lut(
      rt.sigmoid, dequantize(bitlinear(x, lw.w_mix_gate, lw.norm_mix_gate, rt, stats)));
  // h = f .* h_prev + (1 - f) .* c, written so h == c is an exact fixed
  // point when h_prev == c.
  const RealVector h = c + f.cwiseProduct(h_prev - c);
  MlgruResult result;
  result.output = bitlinear(quantize_absmax(g.cwiseProduct(h)), lw.w_out,
                            lw.norm_out, rt, stats);
  result.hidden = h;
  return result;
}

QuantVector glu_step(const QuantVector& x, const LayerWeights& lw,
                     const ModelRuntime& rt, TMatStats* stats) {
  const RealVector gate = sigmoid_lut(
      rt.sigmoid, dequantize(bitlinear(x, lw.w_glu_gate, lw.norm_glu_gate, rt, stats)));
  const RealVector up =
      dequantize(bitlinear(x, lw.w_glu_up, lw.norm_glu_up, rt, stats));
  const QuantVector p = quantize_absmax(gate.cwiseProduct(up));
  return bitlinear(p, lw.w_glu_down, lw.norm_glu_down, rt, stats);
}

LayerResult layer_forward(const QuantVector& x, const RealVector& hidden,
                          const LayerWeights& lw, const ModelRuntime& rt,
                          TMatStats* stats) {
  const MlgruResult mixer = mlgru_step(x, hidden, lw, rt, stats);
  const QuantVector x1 =
      quantize_absmax(dequantize(x) + dequantize(mixer.output));
  const QuantVector glu_out = glu_step(x1, lw, rt, stats);
  LayerResult result;
  result.output = quantize_absmax(dequantize(x1) + dequantize(glu_out));
  result.hidden = mixer.hidden;
  return result;
}

DecodeSession make_session(const ModelSpec& spec, const ModelWeights& weights,
                           std::uint64_t seed) {
  if (static_cast<int>(weights.size()) != spec.layers)
    throw ShapeMismatchError("weight set does not match the layer count");
  DecodeSession session;
  session.spec = spec;
  session.weights = &weights;
  session.hidden.assign(static_cast<std::size_t>(spec.layers),
                        RealVector::Zero(spec.dim));
  session.seed = seed;
  return session;
}

std::vector<QuantVector> generate(DecodeSession& session,
                                  const std::vector<RealVector>& inputs,
                                  const ModelRuntime& rt) {
  std::vector<QuantVector> outputs;
  outputs.reserve(inputs.size());
  for (const RealVector& input : inputs) {
    QuantVector x = quantize_absmax(input);
    for (std::size_t l = 0; l < session.hidden.size(); ++l) {
      LayerResult r = layer_forward(x, session.hidden[l], (*session.weights)[l],
                                    rt, &session.stats);
      x = std::move(r.output);
      session.hidden[l] = std::move(r.hidden);
    }
    outputs.push_back(std::move(x));
    ++session.step_count;
  }
  return outputs;
}

namespace {

// Trit stream pinned to the raw mt19937_64 output (library distributions
// are not bit-stable across implementations).
class TritSampler {
 public:
  TritSampler(std::uint64_t seed, double zero_prob)
      : rng_(seed), zero_prob_(zero_prob) {}

  Trit next() {
    const std::uint64_t r = rng_();
    const double u =
        static_cast<double>(r >> 11) * 0x1.0p-53;  // uniform in [0, 1)
    if (u < zero_prob_) return 0;
    return (r & 1) ? Trit{1} : Trit{-1};
  }

  void fill(TernaryTensor& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = next();
  }

 private:
  std::mt19937_64 rng_;
  double zero_prob_;
};

}  // namespace

ModelWeights random_model(const ModelSpec& spec, std::uint64_t seed,
                          double zero_prob) {
  if (zero_prob < 0.0 || zero_prob > 1.0)
    throw ConfigError("zero_prob must lie in [0, 1]");
  const Eigen::Index d = spec.dim;
  const Eigen::Index g = spec.glu_dim();
  TritSampler sampler(seed, zero_prob);
  ModelWeights weights;
  weights.reserve(static_cast<std::size_t>(spec.layers));
  for (int l = 0; l < spec.layers; ++l) {
    LayerWeights lw;
    lw.w_forget = make_tensor({d, d});
    lw.w_candidate = make_tensor({d, d});
    lw.w_mix_gate = make_tensor({d, d});
    lw.w_out = make_tensor({d, d});
    lw.w_glu_gate = make_tensor({d, g});
    lw.w_glu_up = make_tensor({d, g});
    lw.w_glu_down = make_tensor({g, d});
    sampler.fill(lw.w_forget);
    sampler.fill(lw.w_candidate);
    sampler.fill(lw.w_mix_gate);
    sampler.fill(lw.w_out);
    sampler.fill(lw.w_glu_gate);
    sampler.fill(lw.w_glu_up);
    sampler.fill(lw.w_glu_down);
    // Variance-preserving norm weights: a d-term ternary matmul of unit-RMS
    // activations has gain ~ sqrt(d), so 1/sqrt(d_in) keeps gate
    // pre-activations O(1).
    const double d_scale = 1.0 / std::sqrt(static_cast<double>(d));
    const double g_scale = 1.0 / std::sqrt(static_cast<double>(g));
    lw.norm_forget = RealVector::Constant(d, d_scale);
    lw.norm_candidate = RealVector::Constant(d, d_scale);
    lw.norm_mix_gate = RealVector::Constant(d, d_scale);
    lw.norm_out = RealVector::Constant(d, d_scale);
    lw.norm_glu_gate = RealVector::Constant(d, d_scale);
    lw.norm_glu_up = RealVector::Constant(d, d_scale);
    lw.norm_glu_down = RealVector::Constant(g, g_scale);
    weights.push_back(std::move(lw));
  }
  return weights;
}

RealVector gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  RealVector out(n);
  Eigen::Index i = 0;
  while (i < n) {
    // Box-Muller on raw engine output.
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    out[i++] = radius * std::cos(angle);
    if (i < n) out[i++] = radius * std::sin(angle);
  }
  return out;
}

namespace {

RealVector float_norm(const RealVector& x, const RealVector& norm_weights,
                      const RmsParams& params) {
  return x.cwiseProduct(norm_weights) / rms(x, params);
}

double exact_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

RealVector exact_sigmoid(const RealVector& x) {
  return x.unaryExpr([](double v) { return exact_sigmoid(v); });
}

}  // namespace

RealVector float_reference_bitlinear(const RealVector& x,
                                     const TernaryTensor& w,
                                     const RealVector& norm_weights,
                                     const RmsParams& params) {
  const RealVector normed = float_norm(x, norm_weights, params);
  return w.matrix().cast<double>().transpose() * normed;
}

FloatLayerResult float_reference_layer(const RealVector& x,
                                       const RealVector& hidden,
                                       const LayerWeights& lw,
                                       const RmsParams& params) {
  const RealVector f = exact_sigmoid(
      float_reference_bitlinear(x, lw.w_forget, lw.norm_forget, params));
  const RealVector c =
      float_reference_bitlinear(x, lw.w_candidate, lw.norm_candidate, params);
  const RealVector g = exact_sigmoid(
      float_reference_bitlinear(x, lw.w_mix_gate, lw.norm_mix_gate, params));
  const RealVector h = c + f.cwiseProduct(hidden - c);
  const RealVector o = float_reference_bitlinear(g.cwiseProduct(h), lw.w_out,
                                                 lw.norm_out, params);
  const RealVector x1 = x + o;
  const RealVector gate = exact_sigmoid(
      float_reference_bitlinear(x1, lw.w_glu_gate, lw.norm_glu_gate, params));
  const RealVector up =
      float_reference_bitlinear(x1, lw.w_glu_up, lw.norm_glu_up, params);
  const RealVector down = float_reference_bitlinear(
      gate.cwiseProduct(up), lw.w_glu_down, lw.norm_glu_down, params);
  FloatLayerResult result;
  result.output = x1 + down;
  result.hidden = h;
  return result;
}

std::vector<RealVector> float_reference_forward(
    const ModelSpec& spec, const ModelWeights& weights,
    const std::vector<RealVector>& inputs, const RmsParams& params) {
  std::vector<RealVector> hidden(static_cast<std::size_t>(spec.layers),
                                 RealVector::Zero(spec.dim));
  std::vector<RealVector> outputs;
  outputs.reserve(inputs.size());
  for (const RealVector& input : inputs) {
    RealVector x = input;
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      FloatLayerResult r =
          float_reference_layer(x, hidden[l], weights[l], params);
      x = std::move(r.output);
      hidden[l] = std::move(r.hidden);
    }
    outputs.push_back(std::move(x));
  }
  return outputs;
}

// --- serialization -------------------------------------------------------

namespace {

constexpr char kNormMagic[4] = {'T', 'N', 'W', '1'};

struct TensorField {
  const char* name;
  TernaryTensor LayerWeights::* tensor;
  RealVector LayerWeights::* norm;
};

constexpr TensorField kLayerFields[] = {
    {"w_forget", &LayerWeights::w_forget, &LayerWeights::norm_forget},
    {"w_candidate", &LayerWeights::w_candidate, &LayerWeights::norm_candidate},
    {"w_mix_gate", &LayerWeights::w_mix_gate, &LayerWeights::norm_mix_gate},
    {"w_out", &LayerWeights::w_out, &LayerWeights::norm_out},
    {"w_glu_gate", &LayerWeights::w_glu_gate, &LayerWeights::norm_glu_gate},
    {"w_glu_up", &LayerWeights::w_glu_up, &LayerWeights::norm_glu_up},
    {"w_glu_down", &LayerWeights::w_glu_down, &LayerWeights::norm_glu_down},
};

std::string layer_field_name(int layer, const char* field) {
  std::ostringstream name;
  name << "layer" << layer << "." << field;
  return name.str();
}

void write_u16(std::ostream& os, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff),
                         static_cast<char>(v >> 8)};
  os.write(bytes, 2);
}

void write_u32(std::ostream& os, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes, 4);
}

void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

std::uint16_t read_u16(std::istream& is, const std::string& path) {
  unsigned char bytes[2];
  is.read(reinterpret_cast<char*>(bytes), 2);
  if (is.gcount() != 2) throw TruncatedPayloadError(path + ": truncated");
  return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  if (is.gcount() != 4) throw TruncatedPayloadError(path + ": truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[i]} << (8 * i);
  return v;
}

float read_f32(std::istream& is, const std::string& path) {
  const std::uint32_t bits = read_u32(is, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void write_norm_file(const std::string& path,
                     const std::vector<std::pair<std::string, RealVector>>& norms) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kNormMagic, 4);
  write_u16(os, 1);
  write_u32(os, static_cast<std::uint32_t>(norms.size()));
  for (const auto& [name, v] : norms) {
    write_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
      write_f32(os, static_cast<float>(v[i]));
  }
  if (!os) throw IoError("write failed for " + path);
}

std::vector<std::pair<std::string, RealVector>> read_norm_file(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path + " for reading");
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, kNormMagic, 4) != 0)
    throw BadMagicError(path + ": bad magic (expected \"TNW1\")");
  const std::uint16_t version = read_u16(is, path);
  if (version != 1)
    throw UnsupportedVersionError(path + ": unsupported norm file version");
  const std::uint32_t count = read_u32(is, path);
  std::vector<std::pair<std::string, RealVector>> norms;
  norms.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = read_u16(is, path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (is.gcount() != name_len)
      throw TruncatedPayloadError(path + ": truncated");
    const std::uint32_t len = read_u32(is, path);
    RealVector v(len);
    for (std::uint32_t j = 0; j < len; ++j) v[j] = read_f32(is, path);
    norms.emplace_back(std::move(name), std::move(v));
  }
  return norms;
}

std::string dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash + 1);
}

std::string base_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

}  // namespace

ModelFiles model_files_for_stem(const std::string& stem) {
  return {stem + ".manifest", stem + ".weights", stem + ".norms"};
}

void save_model(const ModelFiles& files, const ModelSpec& spec,
                const ModelWeights& weights) {
  std::vector<NamedPackedTensor> tensors;
  std::vector<std::pair<std::string, RealVector>> norms;
  for (int l = 0; l < spec.layers; ++l) {
    const LayerWeights& lw = weights[static_cast<std::size_t>(l)];
    for (const TensorField& field : kLayerFields) {
      tensors.emplace_back(layer_field_name(l, field.name),
                           pack_tensor(lw.*(field.tensor)));
      norms.emplace_back(layer_field_name(l, field.name), lw.*(field.norm));
    }
  }
  write_weight_file(files.weights_path, tensors);
  write_norm_file(files.norms_path, norms);

  std::ofstream os(files.manifest_path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + files.manifest_path + " for writing");
  os << "# ternsim model manifest\n";
  os << "name = " << spec.name << "\n";
  os << "dim = " << spec.dim << "\n";
  os << "layers = " << spec.layers << "\n";
  os << "glu_num = " << spec.glu_expansion.num << "\n";
  os << "glu_den = " << spec.glu_expansion.den << "\n";
  os << "storage_bytes = " << spec.storage_bytes << "\n";
  os << "weights = " << base_of(files.weights_path) << "\n";
  os << "norms = " << base_of(files.norms_path) << "\n";
  if (!os) throw IoError("write failed for " + files.manifest_path);
}

LoadedModel load_model(const std::string& manifest_path) {
  KvFile kv = KvFile::parse_file(manifest_path);
  LoadedModel model;
  model.spec.name = kv.get_string("name");
  model.spec.dim = static_cast<Eigen::Index>(kv.get_int("dim"));
  model.spec.layers = static_cast<int>(kv.get_int("layers"));
  model.spec.glu_expansion.num = kv.get_int("glu_num", 8);
  model.spec.glu_expansion.den = kv.get_int("glu_den", 3);
  model.spec.storage_bytes = kv.get_int("storage_bytes");
  const std::string dir = dir_of(manifest_path);
  const std::string weights_path = dir + kv.get_string("weights");
  const std::string norms_path = dir + kv.get_string("norms");
  kv.require_all_consumed();

  auto tensors = read_weight_file(weights_path);
  auto norms = read_norm_file(norms_path);
  std::map<std::string, PackedTensor> tensor_map;
  for (auto& [name, tensor] : tensors) tensor_map.emplace(name, std::move(tensor));
  std::map<std::string, RealVector> norm_map;
  for (auto& [name, v] : norms) norm_map.emplace(name, std::move(v));

  model.weights.reserve(static_cast<std::size_t>(model.spec.layers));
  for (int l = 0; l < model.spec.layers; ++l) {
    LayerWeights lw;
    for (const TensorField& field : kLayerFields) {
      const std::string name = layer_field_name(l, field.name);
      const auto t = tensor_map.find(name);
      if (t == tensor_map.end())
        throw TruncatedPayloadError(weights_path + ": missing tensor " + name);
      lw.*(field.tensor) = unpack_tensor(t->second);
      const auto n = norm_map.find(name);
      if (n == norm_map.end())
        throw TruncatedPayloadError(norms_path + ": missing norm " + name);
      lw.*(field.norm) = n->second;
    }
    model.weights.push_back(std::move(lw));
  }
  return model;
}

}  // namespace ternsim
