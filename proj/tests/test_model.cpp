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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "ternsim/model.hpp"

using namespace ternsim;

namespace {

ModelWeights zero_model(const ModelSpec& spec) {
  ModelWeights w = random_model(spec, 0, 1.0);  // P(0) = 1
  return w;
}

QuantVector quant_gaussian(std::mt19937_64& rng, Eigen::Index n) {
  return quantize_absmax(gaussian_vector(rng, n));
}

}  // namespace

TEST_CASE("model presets match the published attribute table") {
  const ModelSpec m370 = model_preset("370m");
  CHECK(m370.dim == 1024);
  CHECK(m370.layers == 24);
  CHECK(m370.storage_bytes == 58'000'000);

  const ModelSpec m13 = model_preset("1.3b");
  CHECK(m13.dim == 2048);
  CHECK(m13.layers == 24);
  CHECK(m13.storage_bytes == 230'000'000);

  const ModelSpec m27 = model_preset("2.7b");
  CHECK(m27.dim == 2560);
  CHECK(m27.layers == 32);
  CHECK(m27.storage_bytes == 480'000'000);

  const ModelSpec m7b = model_preset("7b");
  CHECK(m7b.dim == 4096);
  CHECK(m7b.layers == 32);

  CHECK_THROWS_AS(model_preset("13b"), ConfigError);
}

TEST_CASE("glu dimension rounds up to a tile multiple") {
  CHECK(make_custom_spec(256, 1).glu_dim() == 768);
  CHECK(model_preset("370m").glu_dim() == 2816);   // ceil(8*1024/3) -> 2731
  CHECK(model_preset("1.3b").glu_dim() == 5632);
  CHECK(model_preset("7b").glu_dim() == 11008);
}

TEST_CASE("370m nominal parameter count lands on the storage budget") {
  // L * (4d^2 + 3*e*d^2) with e = 8/3 against the declared 58 MB at
  // 1.6 bits/weight (= 290M trits), within 5%.
  const ModelSpec spec = model_preset("370m");
  const double nominal =
      spec.layers *
      (4.0 + 3.0 * spec.glu_expansion.value()) * spec.dim * spec.dim;
  const double budget_trits = static_cast<double>(spec.storage_trits());
  CHECK(std::abs(nominal - budget_trits) / budget_trits <= 0.05);
}

TEST_CASE("random_model is reproducible and respects the zero probability") {
  const ModelSpec spec = make_custom_spec(256, 2);

  const ModelWeights a = random_model(spec, 99);
  const ModelWeights b = random_model(spec, 99);
  CHECK(a[0].w_forget.data == b[0].w_forget.data);
  CHECK(a[1].w_glu_down.data == b[1].w_glu_down.data);

  const ModelWeights c = random_model(spec, 100);
  CHECK(a[0].w_forget.data != c[0].w_forget.data);

  const ModelWeights zeros = random_model(spec, 1, 1.0);
  CHECK(zeros[0].w_forget.data.isZero());
  CHECK(zeros[1].w_glu_up.data.isZero());

  // With the default 1/3 split the trit counts should be near-even.
  std::int64_t counts[3] = {0, 0, 0};
  for (Eigen::Index i = 0; i < a[0].w_forget.size(); ++i)
    ++counts[a[0].w_forget.data[i] + 1];
  const double total = static_cast<double>(a[0].w_forget.size());
  for (std::int64_t count : counts)
    CHECK(static_cast<double>(count) / total == doctest::Approx(1.0 / 3).epsilon(0.05));
}

TEST_CASE("bitlinear closed-form cases") {
  const ModelRuntime rt = make_default_runtime();
  std::mt19937_64 rng(61);
  const QuantVector x = quant_gaussian(rng, 256);

  SUBCASE("zero weights give zero output") {
    const QuantVector y =
        bitlinear(x, make_tensor({256, 256}), RealVector::Ones(256), rt);
    CHECK(y.values.isZero());
    CHECK(y.scale == 1.0);
  }

  SUBCASE("+1 diagonal with unit norm weights reproduces the normalized input") {
    TernaryTensor w = make_tensor({256, 256});
    for (Eigen::Index i = 0; i < 256; ++i) w.data[i * 256 + i] = 1;
    const QuantVector y = bitlinear(x, w, RealVector::Ones(256), rt);
    const RealVector got = dequantize(y);
    const RealVector want =
        oracle::rmsnorm_exact(dequantize(x), RealVector::Ones(256), rt.rms.epsilon);
    CHECK(oracle::relative_l2(got, want) <= 0.02);
  }

  SUBCASE("random weights track the float oracle within 2%") {
    for (int rep = 0; rep < 5; ++rep) {
      const TernaryTensor w = oracle::random_trits(rng, {256, 256});
      const QuantVector y = bitlinear(x, w, RealVector::Ones(256), rt);
      const RealVector want = float_reference_bitlinear(
          dequantize(x), w, RealVector::Ones(256), rt.rms);
      CHECK(oracle::relative_l2(dequantize(y), want) <= 0.02);
    }
  }
}

TEST_CASE("mlgru_step gate behaviour") {
  const ModelRuntime rt = make_default_runtime();
  const ModelSpec spec = make_custom_spec(256, 1);
  std::mt19937_64 rng(67);
  const ModelWeights weights = random_model(spec, 5);
  const QuantVector x = quant_gaussian(rng, 256);

  SUBCASE("h_prev equal to the candidate path is an exact fixed point") {
    const RealVector c = dequantize(
        bitlinear(x, weights[0].w_candidate, weights[0].norm_candidate, rt));
    const MlgruResult r = mlgru_step(x, c, weights[0], rt);
    CHECK(r.hidden == c);  // bitwise: h = c + f .* (c - c)
  }

  SUBCASE("a strongly positive forget path keeps the previous hidden state") {
    ModelWeights w = random_model(spec, 6);
    w[0].w_forget.data.setConstant(1);  // all +1 columns
    // All-positive activations make the pre-sigmoid sums large positive.
    RealVector pos(256);
    for (Eigen::Index i = 0; i < 256; ++i)
      pos[i] = 1.0 + 0.5 * std::abs(gaussian_vector(rng, 1)[0]);
    const QuantVector xq = quantize_absmax(pos);
    const RealVector h_prev = gaussian_vector(rng, 256);
    const MlgruResult r = mlgru_step(xq, h_prev, w[0], rt);
    // f saturates at 1 up to the sigmoid table's clamp error.
    const RealVector c = dequantize(
        bitlinear(xq, w[0].w_candidate, w[0].norm_candidate, rt));
    const double headroom = (h_prev - c).cwiseAbs().maxCoeff();
    CHECK((r.hidden - h_prev).cwiseAbs().maxCoeff() <= 2e-3 * headroom);
  }

  SUBCASE("random step tracks the float oracle within 3%") {
    const RealVector h_prev = gaussian_vector(rng, 256);
    const MlgruResult got = mlgru_step(x, h_prev, weights[0], rt);

    const RealVector xr = dequantize(x);
    const RealVector f = float_reference_bitlinear(
        xr, weights[0].w_forget, weights[0].norm_forget, rt.rms)
        .unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const RealVector c = float_reference_bitlinear(
        xr, weights[0].w_candidate, weights[0].norm_candidate, rt.rms);
    const RealVector g = float_reference_bitlinear(
        xr, weights[0].w_mix_gate, weights[0].norm_mix_gate, rt.rms)
        .unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const RealVector h = c + f.cwiseProduct(h_prev - c);
    const RealVector o = float_reference_bitlinear(
        g.cwiseProduct(h), weights[0].w_out, weights[0].norm_out, rt.rms);

    CHECK(oracle::relative_l2(got.hidden, h) <= 0.03);
    CHECK(oracle::relative_l2(dequantize(got.output), o) <= 0.03);
  }
}

TEST_CASE("glu_step closed-form cases and oracle") {
  const ModelRuntime rt = make_default_runtime();
  const ModelSpec spec = make_custom_spec(256, 1);
  std::mt19937_64 rng(71);
  const QuantVector x = quant_gaussian(rng, 256);

  SUBCASE("zero up-projection zeroes the output") {
    ModelWeights w = random_model(spec, 7);
    w[0].w_glu_up.data.setZero();
    CHECK(glu_step(x, w[0], rt).values.isZero());
  }

  SUBCASE("all-zero weights zero the output") {
    const ModelWeights w = zero_model(spec);
    CHECK(glu_step(x, w[0], rt).values.isZero());
  }

  SUBCASE("random weights track the float oracle within 3%") {
    const ModelWeights w = random_model(spec, 8);
    const QuantVector got = glu_step(x, w[0], rt);

    const RealVector xr = dequantize(x);
    const RealVector gate = float_reference_bitlinear(
        xr, w[0].w_glu_gate, w[0].norm_glu_gate, rt.rms)
        .unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const RealVector up = float_reference_bitlinear(
        xr, w[0].w_glu_up, w[0].norm_glu_up, rt.rms);
    const RealVector want = float_reference_bitlinear(
        gate.cwiseProduct(up), w[0].w_glu_down, w[0].norm_glu_down, rt.rms);
    CHECK(oracle::relative_l2(dequantize(got), want) <= 0.03);
  }
}

TEST_CASE("layer_forward residual structure") {
  const ModelRuntime rt = make_default_runtime();
  const ModelSpec spec = make_custom_spec(256, 1);
  std::mt19937_64 rng(73);

  SUBCASE("zero weights pass the input through the residuals") {
    const ModelWeights w = zero_model(spec);
    const QuantVector x = quant_gaussian(rng, 256);
    const LayerResult r = layer_forward(x, RealVector::Zero(256), w[0], rt);
    // A canonically quantized input survives both junctions exactly.
    CHECK(r.output.values == x.values);
    CHECK(r.output.scale == doctest::Approx(x.scale).epsilon(1e-12));
  }

  SUBCASE("single layer tracks the float oracle") {
    const ModelWeights w = random_model(spec, 9);
    const QuantVector x = quant_gaussian(rng, 256);
    const RealVector h0 = gaussian_vector(rng, 256);
    const LayerResult got = layer_forward(x, h0, w[0], rt);
    const FloatLayerResult want =
        float_reference_layer(dequantize(x), h0, w[0], rt.rms);
    CHECK(oracle::relative_l2(dequantize(got.output), want.output) <= 0.03);
    CHECK(oracle::relative_l2(got.hidden, want.hidden) <= 0.03);
  }

  SUBCASE("zero forget weights leave h collinear with the candidate path") {
    ModelWeights w = random_model(spec, 10);
    w[0].w_forget.data.setZero();
    const QuantVector x = quant_gaussian(rng, 256);
    const RealVector c = dequantize(
        bitlinear(x, w[0].w_candidate, w[0].norm_candidate, rt));

    RealVector h = RealVector::Zero(256);
    for (int step = 0; step < 2; ++step)
      h = mlgru_step(x, h, w[0], rt).hidden;

    // Two identical inputs with f fixed at sigmoid(0): h is a multiple of c.
    const double lambda = h.dot(c) / c.dot(c);
    CHECK(lambda == doctest::Approx(0.75).epsilon(0.01));
    CHECK((h - lambda * c).norm() <= 1e-9 * c.norm());
  }
}

TEST_CASE("generate runs the stacked layers across steps") {
  const ModelRuntime rt = make_default_runtime();
  std::mt19937_64 rng(79);

  SUBCASE("one layer, one step equals layer_forward") {
    const ModelSpec spec = make_custom_spec(256, 1);
    const ModelWeights w = random_model(spec, 11);
    const RealVector input = gaussian_vector(rng, 256);

    DecodeSession session = make_session(spec, w);
    const auto outs = generate(session, {input}, rt);
    REQUIRE(outs.size() == 1);

    const LayerResult direct =
        layer_forward(quantize_absmax(input), RealVector::Zero(256), w[0], rt);
    CHECK(outs[0].values == direct.output.values);
    CHECK(session.step_count == 1);
  }

  SUBCASE("zero weights reproduce the inputs across steps") {
    const ModelSpec spec = make_custom_spec(256, 3);
    const ModelWeights w = zero_model(spec);
    DecodeSession session = make_session(spec, w);
    std::vector<RealVector> inputs;
    for (int t = 0; t < 3; ++t) inputs.push_back(gaussian_vector(rng, 256));
    const auto outs = generate(session, inputs, rt);
    for (int t = 0; t < 3; ++t) {
      const QuantVector want = quantize_absmax(inputs[static_cast<std::size_t>(t)]);
      CHECK(outs[static_cast<std::size_t>(t)].values == want.values);
    }
  }

  SUBCASE("session stats accumulate the modeled core cycles") {
    const ModelSpec spec = make_custom_spec(256, 2);
    const ModelWeights w = random_model(spec, 14);
    DecodeSession session = make_session(spec, w);
    generate(session, {gaussian_vector(rng, 256)}, rt);

    const Eigen::Index g = spec.glu_dim();
    const std::int64_t per_layer =
        4 * matvec_cycles(256, 256, 1) + 2 * matvec_cycles(256, g, 1) +
        matvec_cycles(g, 256, 1);
    CHECK(session.stats.cycles == spec.layers * per_layer);
    CHECK(session.stats.weight_tile_fetches ==
          spec.layers * (4 + 2 * (g / 256) + (g / 256)));
  }

  SUBCASE("determinism across thread counts") {
    const ModelSpec spec = make_custom_spec(256, 2);
    const ModelWeights w = random_model(spec, 12);
    std::vector<RealVector> inputs;
    for (int t = 0; t < 4; ++t) inputs.push_back(gaussian_vector(rng, 256));

    DecodeSession s1 = make_session(spec, w);
    DecodeSession s4 = make_session(spec, w);
    const ModelRuntime rt4 = make_default_runtime(4);
    const auto out1 = generate(s1, inputs, rt);
    const auto out4 = generate(s4, inputs, rt4);
    for (std::size_t t = 0; t < out1.size(); ++t) {
      CHECK(out1[t].values == out4[t].values);
      CHECK(out1[t].scale == out4[t].scale);
    }
  }
}

TEST_CASE("quantized forward tracks the float oracle per step") {
  const ModelRuntime rt = make_default_runtime();
  const ModelSpec spec = make_custom_spec(256, 4);
  std::mt19937_64 rng(83);

  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ModelWeights w = random_model(spec, seed);
    std::vector<RealVector> inputs;
    for (int t = 0; t < 8; ++t) inputs.push_back(gaussian_vector(rng, 256));

    DecodeSession session = make_session(spec, w);
    const auto got = generate(session, inputs, rt);
    const auto want = float_reference_forward(spec, w, inputs, rt.rms);
    for (std::size_t t = 0; t < got.size(); ++t) {
      const double err = oracle::relative_l2(dequantize(got[t]), want[t]);
      worst = std::max(worst, err);
      CHECK(err <= 0.05);
    }
  }
  MESSAGE("worst per-step relative L2 error: ", worst);
}

TEST_CASE("oracle error grows at most linearly with depth") {
  const ModelRuntime rt = make_default_runtime();
  std::mt19937_64 rng(89);
  std::vector<RealVector> inputs;
  for (int t = 0; t < 2; ++t) inputs.push_back(gaussian_vector(rng, 256));

  double err_at_1 = 0.0;
  double err_at_8 = 0.0;
  for (int layers : {1, 2, 4, 8}) {
    const ModelSpec spec = make_custom_spec(256, layers);
    double err = 0.0;
    for (std::uint64_t seed = 40; seed < 43; ++seed) {
      const ModelWeights w = random_model(spec, seed);
      DecodeSession session = make_session(spec, w);
      const auto got = generate(session, inputs, rt);
      const auto want = float_reference_forward(spec, w, inputs, rt.rms);
      for (std::size_t t = 0; t < got.size(); ++t)
        err = std::max(err, oracle::relative_l2(dequantize(got[t]), want[t]));
    }
    if (layers == 1) err_at_1 = err;
    if (layers == 8) err_at_8 = err;
    CHECK(err <= 0.05);
  }
  // Linear-in-depth budget with an absolute floor for lucky shallow runs.
  CHECK(err_at_8 <= 8.0 * err_at_1 + 0.01);
}

TEST_CASE("convex combination keeps h between h_prev and c") {
  const ModelRuntime rt = make_default_runtime();
  std::mt19937_64 rng(97);
  for (int rep = 0; rep < 10'000; ++rep) {
    const double f = sigmoid_lut(rt.sigmoid, 20.0 * (gaussian_vector(rng, 1)[0]));
    const double h_prev = 100.0 * gaussian_vector(rng, 1)[0];
    const double c = 100.0 * gaussian_vector(rng, 1)[0];
    const double h = c + f * (h_prev - c);
    const double lo = std::min(h_prev, c) - 1e-9 * std::abs(c);
    const double hi = std::max(h_prev, c) + 1e-9 * std::abs(c);
    REQUIRE(h >= lo);
    REQUIRE(h <= hi);
  }
}

TEST_CASE("model save/load roundtrip") {
  const ModelSpec spec = make_custom_spec(256, 2);
  const ModelWeights w = random_model(spec, 13);
  const ModelFiles files = model_files_for_stem("model_test_roundtrip");
  save_model(files, spec, w);

  const LoadedModel loaded = load_model(files.manifest_path);
  CHECK(loaded.spec.dim == spec.dim);
  CHECK(loaded.spec.layers == spec.layers);
  CHECK(loaded.spec.storage_bytes == spec.storage_bytes);
  REQUIRE(loaded.weights.size() == w.size());
  CHECK(loaded.weights[0].w_forget.data == w[0].w_forget.data);
  CHECK(loaded.weights[1].w_glu_down.data == w[1].w_glu_down.data);
  CHECK(loaded.weights[0].norm_forget == w[0].norm_forget);

  // Loaded weights decode identically.
  const ModelRuntime rt = make_default_runtime();
  std::mt19937_64 rng(101);
  const RealVector input = gaussian_vector(rng, 256);
  DecodeSession s1 = make_session(spec, w);
  DecodeSession s2 = make_session(loaded.spec, loaded.weights);
  CHECK(generate(s1, {input}, rt)[0].values ==
        generate(s2, {input}, rt)[0].values);

  for (const std::string& p :
       {files.manifest_path, files.weights_path, files.norms_path})
    std::remove(p.c_str());
}
