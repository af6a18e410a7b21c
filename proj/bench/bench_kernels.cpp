// Serial vs OpenMP kernels: batched MLP forward/backward and batch Frenet transform.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ftrack/commands.hpp"
#include "ftrack/kernels.hpp"

namespace {

using namespace ftrack;

const Network& CriticNet() {
  static const Network net = Network::Init(
      NetworkSpec{{9, 64, 64, 1}, Activation::kRelu, Activation::kIdentity}, 7);
  return net;
}

std::vector<double> RandomVec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <bool Omp>
void BM_Forward(benchmark::State& state) {
  const Network& net = CriticNet();
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::vector<double> in = RandomVec(batch * net.input_dim(), 1);
  for (auto _ : state) {
    auto out = Omp ? kernels::omp::Forward(net, in, batch) : kernels::serial::Forward(net, in, batch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(batch));
}

template <bool Omp>
void BM_Backward(benchmark::State& state) {
  const Network& net = CriticNet();
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::vector<double> in = RandomVec(batch * net.input_dim(), 2);
  const std::vector<double> up = RandomVec(batch, 3);
  for (auto _ : state) {
    auto g = Omp ? kernels::omp::Backward(net, in, up, batch, true)
                 : kernels::serial::Backward(net, in, up, batch, true);
    benchmark::DoNotOptimize(g.input_grads.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(batch));
}

template <bool Omp>
void BM_ToFrenet(benchmark::State& state) {
  static const ReferencePath path(GeneratePath(PathKind::kSine, PathParams{}));
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> s(0.0, path.total_length());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<CartesianState> states(n);
  for (auto& c : states) {
    const PathSample p = path.Sample(s(rng));
    const double l = u(rng);
    c = {p.x - l * std::sin(p.theta), p.y + l * std::cos(p.theta), p.theta + 0.3 * u(rng),
         8.0, u(rng), 0.05 * u(rng)};
  }
  for (auto _ : state) {
    auto out = Omp ? kernels::omp::ToFrenet(path, states) : kernels::serial::ToFrenet(path, states);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(n));
}

}  // namespace

BENCHMARK(BM_Forward<false>)->Arg(128)->Arg(4096);
BENCHMARK(BM_Forward<true>)->Arg(128)->Arg(4096);
BENCHMARK(BM_Backward<false>)->Arg(128)->Arg(4096);
BENCHMARK(BM_Backward<true>)->Arg(128)->Arg(4096);
BENCHMARK(BM_ToFrenet<false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ToFrenet<true>)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
