#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nsp/error.hpp"
#include "nsp/io/nspw.hpp"
#include "nsp/layer/equivalent.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/net/network.hpp"
#include "nsp/nullspace/nullspace.hpp"
#include "nsp/rng.hpp"

using namespace nsp;

namespace {

std::vector<double> wave(std::size_t count, double phase) {
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) v[k] = 0.5 * std::sin(0.7 * static_cast<double>(k) + phase);
  return v;
}

std::vector<double> bias(std::size_t count, double phase) {
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) v[k] = 0.1 * std::cos(0.5 * static_cast<double>(k) + phase);
  return v;
}

// Same network as tests/oracles/golden_forward.py.
Network golden_network() {
  ConvLayerSpec conv;
  conv.in_channels = 2;
  conv.in_height = 7;
  conv.in_width = 7;
  conv.out_channels = 3;
  conv.kernel_h = 3;
  conv.kernel_w = 3;
  conv.stride = 2;
  conv.zero_padding = 1;
  conv.kernels = wave(54, 0.0);
  conv.bias = bias(3, 0.0);
  FcLayerSpec fc1;
  fc1.in_features = 12;
  fc1.out_features = 5;
  fc1.weight = DenseMatrix(12, 5, wave(60, 1.3));
  fc1.bias = bias(5, 1.0);
  FcLayerSpec fc2;
  fc2.in_features = 5;
  fc2.out_features = 4;
  fc2.weight = DenseMatrix(5, 4, wave(20, 2.6));
  return Network({2, 7, 7}, {conv, ReluLayer{}, PoolLayer{PoolKind::average, 2, 2}, FlattenLayer{}, fc1,
                             ReluLayer{}, fc2});
}

// 3x16x16 -> 10x8x8 first conv keeps a 128-dimensional harmless subspace.
NetworkSpec small_spec() {
  NetworkSpec s;
  s.input_shape = {3, 16, 16};
  s.layers = {ConvTemplate{10, 7, 7, 2, 3, true}, ReluLayer{}, ConvTemplate{4, 3, 3, 2, 1, true}, ReluLayer{},
              PoolLayer{PoolKind::max, 2, 2}, FlattenLayer{}, FcTemplate{16, true}, ReluLayer{},
              FcTemplate{6, true}};
  return s;
}

std::vector<double> image(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(0.0, 1.0);
  return x;
}

}  // namespace

TEST_SUITE("net") {
  TEST_CASE("golden logits from an independent implementation") {
    const Network net = golden_network();
    std::vector<double> x(98);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 + 0.5 * std::cos(0.11 * static_cast<double>(i));
    const std::vector<double> expected{0.0074144347767162123, -0.037212002736808296, -0.064337053909629918,
                                       -0.061203383334554384};
    const auto logits = forward(net, x).logits();
    REQUIRE(logits.size() == 4);
    CHECK(max_abs_diff(logits, expected) <= 1e-14);
  }

  TEST_CASE("init is deterministic and seed-dependent") {
    const NetworkSpec spec = desk_network_spec();
    const Network a = init_network(spec, 7);
    const Network b = init_network(spec, 7);
    const Network c = init_network(spec, 8);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (std::size_t l = 0; l <= a.depth(); ++l) CHECK(a.shape(l) == c.shape(l));
    const auto& conv = std::get<ConvLayerSpec>(a.layers()[0]);
    CHECK(predict_nullspace_dim(conv).dim == 512);
    CHECK(a.shape(1).size() == 2560);
    CHECK(a.output_shape().size() == 10);
    CHECK(a.linear_feature_indices() == std::vector<std::size_t>{0, 2, 6, 8});
  }

  TEST_CASE("invalid chains are rejected") {
    NetworkSpec s;
    s.input_shape = {3, 8, 8};
    s.layers = {FcTemplate{4, false}};
    CHECK_THROWS_AS(init_network(s, 1), ShapeError);
    s.layers = {ReluLayer{}, FlattenLayer{}};
    CHECK_THROWS_AS(init_network(s, 1), ShapeError);
    s.layers = {PoolLayer{PoolKind::average, 9, 1}, FlattenLayer{}, FcTemplate{2, false}};
    CHECK_THROWS_AS(init_network(s, 1), ShapeError);
    s.layers = {ConvTemplate{2, 9, 9, 1, 0, false}};
    CHECK_THROWS_AS(init_network(s, 1), ShapeError);
  }

  TEST_CASE("zero input through a bias-free linear net gives zero logits") {
    NetworkSpec s;
    s.input_shape = {2, 6, 6};
    s.layers = {ConvTemplate{3, 3, 3, 1, 1, false}, FlattenLayer{}, FcTemplate{5, false}};
    const Network net = init_network(s, 3);
    const auto logits = forward(net, std::vector<double>(72, 0.0)).logits();
    CHECK(logits == std::vector<double>(5, 0.0));
  }

  TEST_CASE("relu and pooling") {
    FcLayerSpec id;
    id.in_features = 4;
    id.out_features = 4;
    id.weight = DenseMatrix::identity(4);
    const Network relu_net({4, 1, 1}, {id, ReluLayer{}});
    CHECK(forward(relu_net, std::vector<double>{-1, 2, -0.0, 3}).logits() == std::vector<double>{0, 2, 0, 3});

    ConvLayerSpec ident;
    ident.in_channels = 1;
    ident.in_height = 4;
    ident.in_width = 4;
    ident.out_channels = 1;
    ident.kernel_h = 1;
    ident.kernel_w = 1;
    ident.kernels = {1.0};
    std::vector<double> x(16);
    for (std::size_t i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
    const Network avg({1, 4, 4}, {ident, PoolLayer{PoolKind::average, 2, 2}});
    CHECK(forward(avg, x).logits() == std::vector<double>{2.5, 4.5, 10.5, 12.5});
    const Network mx({1, 4, 4}, {ident, PoolLayer{PoolKind::max, 2, 2}});
    CHECK(forward(mx, x).logits() == std::vector<double>{5, 7, 13, 15});
  }

  TEST_CASE("forward_from_layer resumes the trace") {
    const Network net = init_network(small_spec(), 4);
    const auto x = image(768, 1);
    const FeatureTrace t = forward(net, x);
    CHECK(t.activations.size() == net.depth() + 1);
    CHECK(forward_from_layer(net, 0, x) == t.logits());
    for (std::size_t l = 0; l <= net.depth(); ++l) CHECK(forward_from_layer(net, l, t.activations[l]) == t.logits());
    CHECK_THROWS_AS(forward_from_layer(net, 2, x), ShapeError);
    CHECK_THROWS_AS(forward_from_layer(net, 99, x), ShapeError);
    CHECK_THROWS_AS(forward(net, std::vector<double>(5)), ShapeError);
  }

  TEST_CASE("harmless input perturbations leave logits unchanged at every scale") {
    const Network net = init_network(small_spec(), 4);
    const EquivalentMatrix eq = build_equivalent(net.linear_layer_reading(0));
    const NullspaceBasis basis = harmless_basis(eq);
    CHECK(basis.dim == 128);
    const auto delta = sample_harmless(basis, 9, 8.0 / 255.0, NormKind::linf);
    for (std::uint64_t i = 0; i < 5; ++i) {
      const auto x = image(768, 100 + i);
      const auto clean = forward(net, x).logits();
      for (int k = 0; k <= 8; ++k) {
        const auto logits = forward(net, add_scaled(x, std::ldexp(1.0, k), delta)).logits();
        CHECK(max_abs_diff(logits, clean) <= 1e-9);
        CHECK(argmax(logits) == argmax(clean));
      }
    }
  }

  TEST_CASE("feature-level harmlessness at interior linear layers") {
    const Network net = init_network(small_spec(), 4);
    const auto x = image(768, 2);
    const FeatureTrace t = forward(net, x);
    for (std::size_t l : {std::size_t{2}, std::size_t{8}}) {
      const NullspaceBasis basis = harmless_basis(build_equivalent(net.linear_layer_reading(l)));
      REQUIRE(basis.dim > 0);
      const auto delta = sample_harmless(basis, l, 10.0, NormKind::l2);
      CHECK(max_abs_diff(forward_from_layer(net, l, add(t.activations[l], delta)), t.logits()) <= 1e-9);
    }
  }

  TEST_CASE("least harmful feature perturbation beats random ones") {
    const Network net = init_network(small_spec(), 4);
    // fc 16 -> 16 reading z^(6) has a trivial harmless subspace.
    const EquivalentMatrix eq = build_equivalent(net.linear_layer_reading(6));
    const LeastHarmful lh = least_harmful(eq);
    CHECK_FALSE(lh.harmless);
    const auto x = image(768, 3);
    const FeatureTrace t = forward(net, x);
    const double best = norm2(subtract(forward_from_layer(net, 6, add(t.activations[6], lh.direction)), t.logits()));
    CHECK(best > 0.0);
    Rng rng(55);
    for (int k = 0; k < 100; ++k) {
      const auto d = rng.unit_vector(net.shape(6).size());
      CHECK(best <= norm2(subtract(forward_from_layer(net, 6, add(t.activations[6], d)), t.logits())));
    }
  }

  TEST_CASE("rmse report rows") {
    const Network net = init_network(small_spec(), 4);
    const std::vector<std::vector<double>> inputs{image(768, 1), image(768, 2)};
    const std::vector<double> scales{1, 2, 4, 8, 16, 32};
    const RmseReport zero = rmse_report(net, inputs, std::vector<double>(768, 0.0), scales, 0, "zero");
    REQUIRE(zero.rows.size() == 6);
    for (const RmseRow& r : zero.rows) {
      CHECK(r.rmse == 0.0);
      CHECK(r.kind == "zero");
    }
    Rng rng(8);
    const RmseReport g = rmse_report(net, inputs, rng.gaussian_vector(768, 0.01), scales, 0, "gaussian");
    for (std::size_t i = 0; i < g.rows.size(); ++i) {
      CHECK(g.rows[i].scale == scales[i]);
      CHECK(g.rows[i].rmse > 0.0);
      if (i > 0) CHECK(g.rows[i].rmse > g.rows[i - 1].rmse);
    }
    CHECK_THROWS_AS(rmse_report(net, inputs, std::vector<double>(5), scales, 0, "bad"), ShapeError);
  }

  TEST_CASE("network spec JSON round trip") {
    const NetworkSpec s = small_spec();
    CHECK(network_spec_from_json(to_json(s)) == s);
    const auto j = to_json(desk_network_spec());
    CHECK(j.at("layers")[0].at("kind") == "conv");
    CHECK(j.at("layers")[4].at("kind") == "avgpool");
    CHECK_THROWS_AS(network_spec_from_json(nlohmann::json{{"input_shape", {3, 4}}, {"layers", nlohmann::json::array()}}),
                    FormatError);
    CHECK_THROWS_AS(network_spec_from_json(nlohmann::json{{"input_shape", {1, 4, 4}},
                                                          {"layers", {{{"kind", "softmax"}}}}}),
                    FormatError);
  }

  TEST_CASE("NSPW weights round trip") {
    const Network net = init_network(desk_network_spec(), 11);
    const auto path = std::filesystem::temp_directory_path() / "nsp_test_weights.nspw";
    save_weights(path, net);
    CHECK(load_weights(path, desk_network_spec()) == net);

    const auto tensors = io::read_nspw(path);
    CHECK(tensors.size() == 8);
    CHECK(tensors[0].name == "layer1.kernels");
    CHECK(tensors[0].shape == std::vector<std::uint64_t>{10, 3, 7, 7});
    CHECK(io::find_tensor(tensors, "layer9.weight").shape == std::vector<std::uint64_t>{128, 10});
    CHECK_THROWS_AS(io::find_tensor(tensors, "layer2.weight"), FormatError);

    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
    CHECK_THROWS_AS(io::read_nspw(path), FormatError);
    std::filesystem::remove(path);
  }
}
