#include <Eigen/Dense>
#include <cmath>

#include "degen/bvp.hpp"
#include "degen/operator.hpp"
#include "degen/stencil.hpp"
#include "doctest.h"

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
    gb[k] = std::cos(0.5 * x[0]);
  }
  return BvpProblem{std::move(sys), std::move(f), std::move(gb)};
}

}  // namespace

TEST_CASE("direct and sor solves agree") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 33, 17);
  BvpProblem p = smooth_problem(cs, g);

  SolveStats direct_stats;
  Field ud = solve_bvp(p, {}, &direct_stats);
  CHECK(direct_stats.final_residual <= 1e-10);

  SolveOptions sopt;
  sopt.method = SolveMethod::Sor;
  sopt.omega = 1.6;
  sopt.tol = 1e-10;
  sopt.max_iter = 20000;
  SolveStats sor_stats;
  Field us = solve_bvp(p, sopt, &sor_stats);
  CHECK(sor_stats.iterations > 0);
  CHECK(sor_stats.final_residual <= 1e-10);
  REQUIRE_FALSE(sor_stats.residual_history.empty());

  double worst = 0.0;
  for (int k = 0; k < g.n(); ++k) worst = std::max(worst, std::abs(ud[k] - us[k]));
  CHECK(worst <= 1e-9);

  for (int k = 0; k < g.n(); ++k)
    if (p.sys.rows[k].identity) CHECK(ud[k] == p.g[k]);
}

TEST_CASE("sor failure carries its residual history") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 17, 9);
  BvpProblem p = smooth_problem(cs, g);
  SolveOptions sopt;
  sopt.method = SolveMethod::Sor;
  sopt.max_iter = 3;
  try {
    solve_bvp(p, sopt);
    FAIL("expected solver_error");
  } catch (const solver_error& e) {
    CHECK(e.residual_history.size() == 3);
  }
}

TEST_CASE("a-priori bound pinned evaluations") {
  CoefficientSet zc;
  zc.dim = 2;
  zc.bounds.c0 = 2.0;
  AprioriBound b0 = apriori_bound(zc, 4.0, 1.0, 0.0, AprioriVariant::ZerothOrder);
  CHECK(b0.value == doctest::Approx(2.0).epsilon(1e-15));

  CoefficientSet dg;
  dg.dim = 2;
  dg.bounds.b0 = 2.0;
  dg.bounds.Lambda = 1.0;
  dg.bounds.nu = 0.5;
  AprioriBound b1 = apriori_bound(dg, 1.0, 0.0, 0.0, AprioriVariant::DriftGauge);
  CHECK(b1.value == doctest::Approx(1.6487212707001282).epsilon(1e-14));

  AprioriBound b2 = apriori_bound(zc, -3.0, 0.0, -1.0, AprioriVariant::Obstacle);
  CHECK(b2.value == 0.0);
  AprioriBound b3 = apriori_bound(zc, 3.0, 0.25, 2.0, AprioriVariant::Obstacle);
  CHECK(b3.value == doctest::Approx(2.0).epsilon(1e-15));

  CoefficientSet bare;
  bare.dim = 2;
  CHECK_THROWS_AS(apriori_bound(bare, 1.0, 1.0, 0.0, AprioriVariant::ZerothOrder),
                  std::invalid_argument);
  CHECK_THROWS_AS(apriori_bound(bare, 1.0, 1.0, 0.0, AprioriVariant::DriftGauge),
                  std::invalid_argument);
}

TEST_CASE("solution respects the zeroth-order bound") {
  CoefficientSet cs = heston_default();
  Grid g = build_grid(DomainSpec::slab(-2.0, 2.0, 1.0), 33, 17);
  BvpProblem p = smooth_problem(cs, g);
  Field u = solve_bvp(p);
  double sup_f = 0.0, sup_g = 0.0;
  for (int k = 0; k < g.n(); ++k) {
    if (p.sys.rows[k].identity)
      sup_g = std::max(sup_g, std::abs(p.g[k]));
    else
      sup_f = std::max(sup_f, std::abs(p.f[k]));
  }
  AprioriBound b = apriori_bound(cs, sup_f, sup_g, 0.0, AprioriVariant::ZerothOrder);
  CHECK(sup_abs(u) <= b.value + 1e-8);
}

TEST_CASE("manufactured linear solutions are exact") {
  CoefficientSet cs = heston_default();
  ManufacturedSolution exact;
  exact.value = [](const Eigen::Vector2d& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1]; };
  exact.grad = [](const Eigen::Vector2d&) { return Eigen::Vector2d(2.0, -3.0); };
  exact.hess = [](const Eigen::Vector2d&) { return Eigen::Matrix2d(Eigen::Matrix2d::Zero()); };
  ConvergenceTable t = mms_convergence(cs, exact, DomainSpec::slab(-2.0, 2.0, 1.0),
                                       {{9, 5}, {17, 9}, {33, 17}});
  REQUIRE(t.rows.size() == 3);
  for (const auto& row : t.rows) {
    CHECK(row.err_interior <= 1e-11);
    CHECK(row.err_degenerate <= 1e-11);
  }
}

TEST_CASE("manufactured smooth solution converges at second order inside") {
  CoefficientSet cs = heston_default();
  ManufacturedSolution exact;
  exact.value = [](const Eigen::Vector2d& x) {
    return std::sin(0.7 * x[0]) * std::exp(0.5 * x[1]);
  };
  exact.grad = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(0.7 * std::cos(0.7 * x[0]) * std::exp(0.5 * x[1]),
                           0.5 * std::sin(0.7 * x[0]) * std::exp(0.5 * x[1]));
  };
  exact.hess = [](const Eigen::Vector2d& x) {
    Eigen::Matrix2d h;
    const double e = std::exp(0.5 * x[1]);
    h(0, 0) = -0.49 * std::sin(0.7 * x[0]) * e;
    h(0, 1) = h(1, 0) = 0.35 * std::cos(0.7 * x[0]) * e;
    h(1, 1) = 0.25 * std::sin(0.7 * x[0]) * e;
    return h;
  };
  ConvergenceTable t = mms_convergence(cs, exact, DomainSpec::slab(-2.0, 2.0, 1.0),
                                       {{9, 9}, {17, 17}, {33, 33}});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.overall_order_interior() >= 1.5);
  CHECK(t.overall_order_degenerate() >= 0.9);
  CHECK(t.rows.back().err_interior < t.rows.front().err_interior);
}

TEST_CASE("mms rejects short level lists") {
  CoefficientSet cs = heston_default();
  ManufacturedSolution exact;
  exact.value = [](const Eigen::Vector2d&) { return 0.0; };
  exact.grad = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); };
  exact.hess = [](const Eigen::Vector2d&) { return Eigen::Matrix2d(Eigen::Matrix2d::Zero()); };
  CHECK_THROWS_AS(
      mms_convergence(cs, exact, DomainSpec::slab(-1.0, 1.0, 1.0), {{9, 5}, {17, 9}}),
      std::invalid_argument);
}
