// OpenMP kernels against their serial versions, and the batched attention
// layer against the per-node reference.

#include <benchmark/benchmark.h>

#include <random>

#include "hgane/kernels.hpp"
#include "hgane/layer.hpp"
#include "hgane/model.hpp"

using namespace hgane;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double zero_frac = 0.0) {
  Rng rng(seed);
  Matrix m(r, c);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution zero(zero_frac);
  for (double& v : m.flat()) v = zero(rng) ? 0.0 : u(rng);
  return m;
}

template <auto Kernel>
void bm_project(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, 256, 1), w = random_matrix(256, 256, 2);
  Matrix out;
  for (auto _ : state) {
    Kernel(x, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void bm_weight_grad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix xt = transpose(random_matrix(n, 256, 1)), d_out = random_matrix(n, 256, 2);
  Matrix dw(256, 256);
  for (auto _ : state) {
    Kernel(xt, d_out, dw);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <auto Kernel>
void bm_input_grad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix d_out = random_matrix(n, 256, 1), w = random_matrix(256, 256, 2);
  Matrix dx(n, 256);
  for (auto _ : state) {
    Kernel(d_out, w, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}

struct LayerSetup {
  AlignedPair pair;
  NetworkFeatures features;
  ModelConfig model;
  ModelParams params;

  explicit LayerSetup(std::size_t n) : pair(make(n)) {
    model.heads = 4;
    model.hidden_dim = 64;
    features = init_features(pair, model.feature_cap, 1);
    params = init_params(model, {features[0].dim(), features[1].dim()}, 2);
  }
  static AlignedPair make(std::size_t n) {
    SyntheticParams s;
    s.n1 = n;
    s.n2 = n;
    return generate_synthetic(s);
  }
};

void bm_layer_batched(benchmark::State& state) {
  const LayerSetup s(static_cast<std::size_t>(state.range(0)));
  const LayerOptions options = layer1_options(s.model);
  for (auto _ : state) {
    auto out = layer_forward(s.pair, s.features, s.params.layer1, options);
    benchmark::DoNotOptimize(out[0].in.data());
  }
}

void bm_layer_reference(benchmark::State& state) {
  const LayerSetup s(static_cast<std::size_t>(state.range(0)));
  const LayerOptions options = layer1_options(s.model);
  for (auto _ : state) {
    auto out = reference_multi_head_layer(s.pair, s.features, s.params.layer1, options);
    benchmark::DoNotOptimize(out[0].in.data());
  }
}

}  // namespace

BENCHMARK(bm_project<project>)->Name("project/openmp")->Arg(256)->Arg(1024);
BENCHMARK(bm_project<serial::project>)->Name("project/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_weight_grad<accumulate_weight_grad>)->Name("weight_grad/openmp")->Arg(256)->Arg(1024);
BENCHMARK(bm_weight_grad<serial::accumulate_weight_grad>)->Name("weight_grad/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_input_grad<accumulate_input_grad>)->Name("input_grad/openmp")->Arg(256)->Arg(1024);
BENCHMARK(bm_input_grad<serial::accumulate_input_grad>)->Name("input_grad/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_layer_batched)->Name("layer1/batched")->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_layer_reference)->Name("layer1/reference")->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
