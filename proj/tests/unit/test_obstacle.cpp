#include <cmath>

#include "degen/obstacle.hpp"
#include "degen/operator.hpp"
#include "degen/verify.hpp"
#include "doctest.h"

using namespace degen;

namespace {

CoefficientSet heston_default() {
  return heston_coefficients({0.5, -0.3, 2.0, 0.3, 0.05, 0.0});
}

StencilSystem single_free_row(double diag) {
  StencilSystem sys;
  sys.n = 1;
  StencilRow row;
  row.center = 0;
  row.diag = diag;
  sys.rows.push_back(row);
  sys.mono = {true, true, true};
  return sys;
}

}  // namespace

TEST_CASE("payoff pinned values") {
  CHECK(payoff(PayoffKind::Put, 1.0, std::log(0.5)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(payoff(PayoffKind::Put, 1.0, 0.0) == 0.0);
  CHECK(payoff(PayoffKind::Put, 1.0, 2.0) == 0.0);
  CHECK(payoff(PayoffKind::Call, 1.0, std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(payoff(PayoffKind::Call, 1.0, -3.0) == 0.0);
  CHECK_THROWS_AS(payoff(PayoffKind::Put, 0.0, 0.0), std::invalid_argument);

  DomainSpec dom = DomainSpec::slab(-3.0, 3.0, 1.0);
  CHECK(payoff_semiconvexity(dom) == doctest::Approx(std::exp(3.0)).epsilon(1e-15));
}

TEST_CASE("mollifier reproduces constants and respects convexity") {
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 17, 9);

  Field c(g.n(), 0.7);
  Field cm = mollify_obstacle(c, 0.5, 0.0, g);
  for (int k = 0; k < g.n(); ++k) CHECK(cm[k] == doctest::Approx(0.7).epsilon(1e-14));

  // linear data: interior coverage is symmetric, boundary clipping shifts
  // the average by at most the bump radius times the slope
  Field lin(g.n());
  for (int k = 0; k < g.n(); ++k) lin[k] = g.at(k)[0];
  Field lm = mollify_obstacle(lin, 0.5, 0.0, g);
  for (int k = 0; k < g.n(); ++k) CHECK(std::abs(lm[k] - lin[k]) <= 0.5 + 1e-12);

  // semiconvexity lift keeps the smoothed obstacle above the kink
  Field psi(g.n());
  for (int k = 0; k < g.n(); ++k) psi[k] = payoff(PayoffKind::Put, 1.0, g.at(k)[0]);
  const double C = payoff_semiconvexity(g.dom);
  Field pm = mollify_obstacle(psi, 0.5, C, g);
  const int kink = g.idx(8, 4);  // x = (0, 0.5), bump fully covered
  CHECK(pm[kink] >= psi[kink] - 1e-12);

  CHECK_THROWS_AS(mollify_obstacle(psi, 0.2, C, g), std::invalid_argument);
  CHECK_THROWS_AS(mollify_obstacle(psi, -1.0, C, g), std::invalid_argument);
}

TEST_CASE("penalty function values and derivative") {
  PenaltySpec pen{1e-3};
  CHECK(pen.beta(0.0) == -0.5);

  // positive branch keeps digits the naive difference loses
  PenaltySpec tight{1e-8};
  const long double t = 1.0L, e = 1e-8L;
  const long double naive = (t - sqrtl(t * t + e * e)) / (2.0L * e);
  CHECK(tight.beta(1.0) == doctest::Approx(static_cast<double>(naive)).epsilon(1e-9));

  PenaltySpec mid{1e-2};
  for (double t0 : {0.3, -0.2, 0.05}) {
    const double h = 1e-6;
    const double fd = (mid.beta(t0 + h) - mid.beta(t0 - h)) / (2.0 * h);
    CHECK(mid.beta_prime(t0) == doctest::Approx(fd).epsilon(1e-6));
  }

  CHECK(std::abs(mid.beta(10.0)) <= mid.epsilon / (2.0 * 10.0));
  // slope approaches 1/eps from below; far out with a tight eps it is exact
  CHECK(tight.beta_prime(-10.0) == doctest::Approx(1.0 / tight.epsilon).epsilon(1e-12));
  CHECK(mid.beta_prime(-10.0) < 1.0 / mid.epsilon);
  CHECK(mid.beta_prime(-10.0) > 0.99 / mid.epsilon);
  CHECK(mid.beta(-2.0) < -0.5);
}

TEST_CASE("psor matches the linear solve when the obstacle never binds") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 17, 9);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n()), gb(g.n(), 0.0);
  for (int k = 0; k < g.n(); ++k) f[k] = std::sin(g.at(k)[0]);

  BvpProblem lin{sys, f, gb};
  Field u_lin = solve_bvp(lin);

  Field psi(g.n(), -1e6);
  ObstacleProblem obs{std::move(sys), std::move(f), std::move(gb), std::move(psi)};
  LcpOptions lopt;
  lopt.tol = 1e-11;
  LcpStats stats;
  Field u_lcp = solve_lcp_psor(obs, lopt, &stats);
  CHECK(stats.final_residual <= 1e-11);

  double worst = 0.0;
  for (int k = 0; k < g.n(); ++k) worst = std::max(worst, std::abs(u_lin[k] - u_lcp[k]));
  CHECK(worst <= 1e-8);
}

TEST_CASE("psor lands on the obstacle when the forcing pushes down") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-1.0, 1.0, 0.5), 9, 5);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n(), -5.0), gb(g.n(), 0.0), psi(g.n(), 0.0);
  ObstacleProblem obs{std::move(sys), std::move(f), std::move(gb), std::move(psi)};
  Field u = solve_lcp_psor(obs);
  for (int k = 0; k < g.n(); ++k) CHECK(std::abs(u[k]) <= 1e-12);
  CHECK(complementarity_residual(obs, u) <= 1e-10);
}

TEST_CASE("psor agrees with active-set enumeration on a small grid") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-1.0, 1.0, 0.5), 5, 4);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n(), 0.0), gb(g.n(), 0.0), psi(g.n());
  for (int k = 0; k < g.n(); ++k) {
    const auto x = g.at(k);
    psi[k] = 0.3 - x[0] * x[0] - x[1];
  }
  for (int k = 0; k < g.n(); ++k)
    if (sys.rows[k].identity) psi[k] = std::min(psi[k], gb[k]);

  Field u_ref = brute_force_lcp(sys, f, gb, psi);

  ObstacleProblem obs{std::move(sys), Field(f), Field(gb), Field(psi)};
  LcpOptions lopt;
  lopt.tol = 1e-12;
  Field u = solve_lcp_psor(obs, lopt);

  int active_psor = 0, active_brute = 0;
  for (int k = 0; k < obs.sys.n; ++k) {
    if (obs.sys.rows[k].identity) continue;
    const bool bp = u[k] <= psi[k] + 1e-9;
    const bool bb = u_ref[k] <= psi[k] + 1e-9;
    CHECK(bp == bb);
    active_psor += bp;
    active_brute += bb;
    CHECK(std::abs(u[k] - u_ref[k]) <= 1e-10);
  }
  CHECK(active_psor == active_brute);
  CHECK(active_psor > 0);
  CHECK(active_psor < 9);
}

TEST_CASE("penalization tracks psor within the epsilon-scaled gap") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 17, 9);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n(), 0.0), gb(g.n()), psi(g.n());
  for (int k = 0; k < g.n(); ++k) {
    psi[k] = payoff(PayoffKind::Put, 1.0, g.at(k)[0]);
    gb[k] = psi[k];
  }
  ObstacleProblem obs{std::move(sys), std::move(f), std::move(gb), std::move(psi)};

  LcpOptions lopt;
  lopt.tol = 1e-11;
  Field u_psor = solve_lcp_psor(obs, lopt);

  PenaltyStats pstats;
  Field u_pen = solve_penalized(obs, {}, &pstats);
  CHECK(pstats.newton_total > 0);

  double worst = 0.0;
  for (int k = 0; k < obs.sys.n; ++k)
    worst = std::max(worst, std::abs(u_psor[k] - u_pen[k]));
  CHECK(worst <= 1e-3 * (1.0 + sup_abs(u_psor)));

  // the penalized iterate may dip below psi, but only at the epsilon scale
  double undershoot = 0.0;
  for (int k = 0; k < obs.sys.n; ++k)
    undershoot = std::max(undershoot, obs.psi[k] - u_pen[k]);
  CHECK(undershoot <= 1e-3 * (1.0 + sup_abs(u_psor)));
}

TEST_CASE("single-unknown enumeration hits both branches") {
  Field g1(1, 0.0), psi(1, 0.0);
  {
    StencilSystem sys = single_free_row(2.0);
    Field f(1, -1.0);
    Field u = brute_force_lcp(sys, f, g1, psi);
    CHECK(u[0] == doctest::Approx(0.0).epsilon(1e-14));
  }
  {
    StencilSystem sys = single_free_row(2.0);
    Field f(1, 1.0);
    Field u = brute_force_lcp(sys, f, g1, psi);
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("continuation split honors the identity-row filter") {
  Field u = {0.5, 0.0, 0.2};
  Field psi(3, 0.0);

  RegionMask all = continuation_region(u, psi, 0.1);
  CHECK(all.continuation == std::vector<bool>({true, false, true}));
  CHECK(all.coincidence == std::vector<bool>({false, true, false}));
  CHECK(all.continuation_count() == 2);
  CHECK(all.coincidence_count() == 1);

  StencilSystem sys;
  sys.n = 3;
  sys.rows.resize(3);
  for (int k = 0; k < 3; ++k) sys.rows[k].center = k;
  sys.rows[1].identity = true;
  RegionMask filt = continuation_region(u, psi, 0.1, &sys);
  CHECK(filt.continuation_count() == 2);
  CHECK(filt.coincidence_count() == 0);
  CHECK_FALSE(filt.continuation[1]);
  CHECK_FALSE(filt.coincidence[1]);
}

TEST_CASE("construction rejects an obstacle above the boundary data") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-1.0, 1.0, 0.5), 5, 4);
  StencilSystem sys = assemble_system(cs, g);
  Field f(g.n(), 0.0), gb(g.n(), 0.0), psi(g.n(), 0.0);
  for (int k = 0; k < g.n(); ++k)
    if (sys.rows[k].identity) psi[k] = 1.0;
  CHECK_THROWS_AS(ObstacleProblem(std::move(sys), std::move(f), std::move(gb), std::move(psi)),
                  std::invalid_argument);
}
