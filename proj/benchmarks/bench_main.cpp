#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "degen/bvp.hpp"
#include "degen/geometry.hpp"
#include "degen/obstacle.hpp"
#include "degen/operator.hpp"
#include "degen/perron.hpp"
#include "degen/stencil.hpp"

using namespace degen;

namespace {

CoefficientSet heston_default() {
  return heston_coefficients({0.5, -0.3, 2.0, 0.3, 0.05, 0.0});
}

BvpProblem smooth_problem(const CoefficientSet& cs, const Grid& g) {
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n()), gb(g.n());
  for (int k = 0; k < g.n(); ++k) {
    const auto x = g.at(k);
    f[k] = std::sin(x[0]) * (1.0 + x[1]);
    gb[k] = 0.5 * std::cos(x[0]);
  }
  return BvpProblem{std::move(sys), std::move(f), std::move(gb)};
}

void bm_assemble(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0),
                      static_cast<int>(state.range(0)),
                      static_cast<int>(state.range(0)) / 2 + 1);
  for (auto _ : state) {
    StencilSystem sys = assemble_system(cs, g);
    benchmark::DoNotOptimize(sys.rows.data());
  }
  state.SetItemsProcessed(state.iterations() * g.n());
}
BENCHMARK(bm_assemble)->Arg(33)->Arg(65)->Arg(129);

void bm_solve_direct(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0),
                      static_cast<int>(state.range(0)),
                      static_cast<int>(state.range(0)) / 2 + 1);
  BvpProblem p = smooth_problem(cs, g);
  for (auto _ : state) {
    Field u = solve_bvp(p);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * g.n());
}
BENCHMARK(bm_solve_direct)->Arg(33)->Arg(65)->Arg(129);

void bm_solve_sor(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 33, 17);
  BvpProblem p = smooth_problem(cs, g);
  SolveOptions opt;
  opt.method = SolveMethod::Sor;
  opt.omega = 1.6;
  opt.tol = 1e-8;
  opt.max_iter = 100000;
  for (auto _ : state) {
    Field u = solve_bvp(p, opt);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(bm_solve_sor);

void bm_psor(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0),
                      static_cast<int>(state.range(0)),
                      static_cast<int>(state.range(0)) / 2 + 1);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n(), 0.0), gb(g.n()), psi(g.n());
  for (int k = 0; k < g.n(); ++k) {
    psi[k] = payoff(PayoffKind::Put, 1.0, g.at(k)[0]);
    gb[k] = psi[k];
  }
  ObstacleProblem op{std::move(sys), std::move(f), std::move(gb), std::move(psi)};
  LcpOptions lopt;
  lopt.tol = 1e-8;
  for (auto _ : state) {
    Field u = solve_lcp_psor(op, lopt);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(bm_psor)->Arg(33)->Arg(65);

void bm_chart_round_trip(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  while (pts.size() < 1024) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = u(rng);
    if (x[d - 1] > 1e-6 && x.norm() < 1.0 - 1e-6) pts.push_back(std::move(x));
  }
  std::size_t k = 0;
  for (auto _ : state) {
    const Eigen::VectorXd back = inverse_map(forward_map(pts[k]));
    benchmark::DoNotOptimize(back.data());
    k = (k + 1) % pts.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_chart_round_trip)->Arg(2)->Arg(3)->Arg(5);

void bm_pullback(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> w1(-1.2, 1.2), wd(0.02, 1.55);
  std::vector<Eigen::VectorXd> pts(1024);
  for (auto& w : pts) {
    w.resize(2);
    w << w1(rng), wd(rng);
  }
  std::size_t k = 0;
  for (auto _ : state) {
    PullbackResult pb = pullback_coefficients(cs, pts[k]);
    benchmark::DoNotOptimize(&pb);
    k = (k + 1) % pts.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_pullback);

void bm_perron_sweep(benchmark::State& state) {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 33, 17);
  BvpProblem p = smooth_problem(cs, g);
  const auto patches = make_patches(g, 6, 3);
  SweepOptions opt;
  opt.tol = 1e-8;
  opt.max_sweeps = 500;
  for (auto _ : state) {
    SweepState st = perron_sweep_bvp(p, patches, opt);
    benchmark::DoNotOptimize(&st);
  }
}
BENCHMARK(bm_perron_sweep);

}  // namespace

BENCHMARK_MAIN();
