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
// MatMul-free decoder layer built from BitLinear blocks: a gated recurrent
// token mixer followed by a GLU channel mixer, int8 activations at every
// matmul boundary, ternary weights everywhere. Includes a double-precision
// reference path used for verification.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ternsim/codec.hpp"
#include "ternsim/quant.hpp"
#include "ternsim/tmat.hpp"

namespace ternsim {

/// GLU expansion ratio as an exact rational (default 8/3).
struct Rational {
  std::int64_t num = 8;
  std::int64_t den = 3;

  double value() const { return static_cast<double>(num) / den; }
};

struct ModelSpec {
  std::string name;
  Eigen::Index dim = 0;  // activation dimension, multiple of 256
  int layers = 0;
  Rational glu_expansion{8, 3};
  std::int64_t storage_bytes = 0;  // declared packed weight bytes

  /// GLU hidden dimension: ceil(dim * expansion) padded up to a multiple
  /// of 256 so every matmul is tile-aligned.
  Eigen::Index glu_dim() const;

  /// Trit count implied by the declared storage (5 trits per packed byte).
  std::int64_t storage_trits() const { return storage_bytes * 5; }

  /// Ternary parameters actually allocated per layer:
  /// 4*d^2 (token mixer) + 3*d*glu_dim (channel mixer).
  std::int64_t allocated_trits_per_layer() const;
};

/// Built-in model presets: "370m", "1.3b", "2.7b", "7b".
ModelSpec model_preset(const std::string& name);
std::vector<std::string> model_preset_names();

/// Custom spec with storage derived from the allocated tensor shapes.
ModelSpec make_custom_spec(Eigen::Index dim, int layers,
                           Rational glu_expansion = {8, 3});

/// Ternary matrices of one decoder layer plus the per-matmul norm weights.
/// Matrices are stored input-dim x output-dim; outputs are x * W.
struct LayerWeights {
  TernaryTensor w_forget;     // d x d, gate f
  TernaryTensor w_candidate;  // d x d, candidate path c
  TernaryTensor w_mix_gate;   // d x d, output gate g
  TernaryTensor w_out;        // d x d, mixer output projection
  TernaryTensor w_glu_gate;   // d x g
  TernaryTensor w_glu_up;     // d x g
  TernaryTensor w_glu_down;   // g x d
  RealVector norm_forget, norm_candidate, norm_mix_gate, norm_out;
  RealVector norm_glu_gate, norm_glu_up, norm_glu_down;
};

using ModelWeights = std::vector<LayerWeights>;

/// Shared lookup tables and core configuration used by the datapath.
struct ModelRuntime {
  ReciprocalLUT reciprocal;
  SigmoidLUT sigmoid;
  RmsParams rms;
  TMatCoreConfig core;
};

ModelRuntime make_default_runtime(int threads = 1);

/// RMSNorm -> ternary mat-vec -> absmax requantization to int8. The
/// accumulator is rescaled by the normalized input's scale before
/// requantizing.
QuantVector bitlinear(const QuantVector& x, const TernaryTensor& w,
                      const RealVector& norm_weights, const ModelRuntime& rt,
                      TMatStats* stats = nullptr);

/// One token-mixer step:
///   f = sigmoid(bitlinear(x, W_f)), c = bitlinear(x, W_c),
///   g = sigmoid(bitlinear(x, W_g)), h = c + f .* (h_prev - c),
///   o = bitlinear(quantize(g .* h), W_o).
/// Gate math runs on dequantized reals; h carries to the next timestep.
struct MlgruResult {
  QuantVector output;
  RealVector hidden;
};
MlgruResult mlgru_step(const QuantVector& x, const RealVector& h_prev,
                       const LayerWeights& lw, const ModelRuntime& rt,
                       TMatStats* stats = nullptr);

/// GLU channel mixer: sigmoid(bitlinear(x, W_gate)) .* bitlinear(x, W_up),
/// requantized and projected down through W_down.
QuantVector glu_step(const QuantVector& x, const LayerWeights& lw,
                     const ModelRuntime& rt, TMatStats* stats = nullptr);

/// Full decoder layer: mixer with residual, then GLU with residual.
/// Returns the new activation and the updated hidden state.
struct LayerResult {
  QuantVector output;
  RealVector hidden;
};
LayerResult layer_forward(const QuantVector& x, const RealVector& hidden,
                          const LayerWeights& lw, const ModelRuntime& rt,
                          TMatStats* stats = nullptr);

/// Autoregressive decode state: one hidden vector per layer.
struct DecodeSession {
  ModelSpec spec;
  const ModelWeights* weights = nullptr;
  std::vector<RealVector> hidden;  // layers x dim
  std::int64_t step_count = 0;
  std::uint64_t seed = 0;
  TMatStats stats;
};

DecodeSession make_session(const ModelSpec& spec, const ModelWeights& weights,
                           std::uint64_t seed = 0);

/// Runs `inputs` through all layers, one step per input vector, carrying
/// hidden states across steps. Inputs are quantized on entry.
std::vector<QuantVector> generate(DecodeSession& session,
    const std::vector<RealVector>& inputs, const ModelRuntime& rt);

/// I.i.d. random ternary weights with P(0) = zero_prob and the remaining
/// mass split evenly between +1 and -1. Norm weights are the
/// variance-preserving constant 1/sqrt(input dim). Reproducible from the
/// seed.
ModelWeights random_model(const ModelSpec& spec, std::uint64_t seed,
                          double zero_prob = 1.0 / 3.0);

/// Standard-normal vector drawn from the engine with a fixed mapping
/// (Box-Muller), so streams are identical across standard libraries.
RealVector gaussian_vector(std::mt19937_64& rng, Eigen::Index n);

// Double-precision reference path: exact division in the norm, exact
// sigmoid, real-valued matmuls, no quantization. Used for verification.
RealVector float_reference_bitlinear(const RealVector& x,
                                     const TernaryTensor& w,
                                     const RealVector& norm_weights,
                                     const RmsParams& params);
struct FloatLayerResult {
  RealVector output;
  RealVector hidden;
};
FloatLayerResult float_reference_layer(const RealVector& x,
                                       const RealVector& hidden,
                                       const LayerWeights& lw,
                                       const RmsParams& params);
std::vector<RealVector> float_reference_forward(
    const ModelSpec& spec, const ModelWeights& weights,
    const std::vector<RealVector>& inputs, const RmsParams& params);

// Model serialization: packed weights in the TER1 container, norm weights
// as 32-bit little-endian floats in a sibling file, and a key = value
// manifest tying them together.
struct ModelFiles {
  std::string manifest_path;
  std::string weights_path;
  std::string norms_path;
};
ModelFiles model_files_for_stem(const std::string& stem);
void save_model(const ModelFiles& files, const ModelSpec& spec,
                const ModelWeights& weights);
struct LoadedModel {
  ModelSpec spec;
  ModelWeights weights;
};
LoadedModel load_model(const std::string& manifest_path);

}  // namespace ternsim
