#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "weaktrans/degeneracy.hpp"
#include "weaktrans/featuremap.hpp"
#include "weaktrans/quadrature.hpp"
#include "weaktrans/transversality.hpp"

using namespace weaktrans;
using Eigen::VectorXd;

namespace {

VectorXd v2(double a, double b) {
  VectorXd out(2);
  out << a, b;
  return out;
}

void BM_IntegrateRealLine(benchmark::State& state) {
  auto f = [](double x) { return std::exp(-0.5 * x * x) / (1.0 + x * x); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate(f, Interval::real_line()).value);
}
BENCHMARK(BM_IntegrateRealLine);

void BM_WeakMomentLognormal(benchmark::State& state) {
  const auto model = ModelSpec::lognormal();
  const auto k = KernelFamily::gaussian(1.0, 1, true);
  const int j = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(weak_moment(model, v2(0.2, 0.9), k, j));
}
BENCHMARK(BM_WeakMomentLognormal)->Arg(0)->Arg(4)->Arg(10);

void BM_WeakMomentCauchy(benchmark::State& state) {
  const auto model = ModelSpec::cauchy_location();
  const auto k = KernelFamily::gaussian(1.0);
  const int j = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(weak_moment(model, VectorXd::Constant(1, 0.5), k, j));
}
BENCHMARK(BM_WeakMomentCauchy)->Arg(0)->Arg(12);

void BM_Jacobian(benchmark::State& state) {
  const auto model = ModelSpec::lognormal();
  const auto k = KernelFamily::gaussian(1.0);
  const auto spec = FeatureSpec::moments_upto(4);
  const auto method = state.range(0) ? JacobianMethod::finite_difference : JacobianMethod::analytic_score;
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(model, v2(0.2, 0.9), k, spec, method).d_theta.sum());
}
BENCHMARK(BM_Jacobian)->Arg(0)->Arg(1)->ArgNames({"fd"});

void BM_NumericalRank(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(numerical_rank(m).numerical_rank);
}
BENCHMARK(BM_NumericalRank)->Arg(4)->Arg(16)->Arg(64);

void BM_StieltjesTest(benchmark::State& state) {
  const int weak[] = {0, 1, 2, 3, 4};
  const int classical[] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto k = KernelFamily::gaussian(1.0, 1, true);
  for (auto _ : state)
    benchmark::DoNotOptimize(stieltjes_test(0.5, v2(0.0, 1.0), k, weak, classical).weak_gaps.sum());
}
BENCHMARK(BM_StieltjesTest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
