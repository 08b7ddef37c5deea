#include <Eigen/Dense>
#include <cmath>

#include "degen/operator.hpp"
#include "doctest.h"

using namespace degen;

namespace {

HestonParams base_params() { return {0.5, -0.3, 2.0, 0.3, 0.05, 0.0}; }

Eigen::Vector2d pt(double x1, double x2) { return {x1, x2}; }

}  // namespace

TEST_CASE("ellipticity floor matches the closed form at pinned parameters") {
  CHECK(ellipticity_floor({0.2, 0.0, 1.0, 0.1, 0.0, 0.0}) ==
        doctest::Approx(0.04).epsilon(1e-12));
  CHECK(ellipticity_floor({1.0, 0.5, 1.0, 0.1, 0.0, 0.0}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Eigenvalue cross-check at a third parameter set.
  const HestonParams p = base_params();
  Eigen::Matrix2d m;
  m << 1.0, p.rho * p.sigma, p.rho * p.sigma, p.sigma * p.sigma;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  CHECK(ellipticity_floor(p) ==
        doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-12));
}

TEST_CASE("heston coefficient values and declared bounds") {
  const HestonParams p = base_params();
  CoefficientSet cs = heston_coefficients(p);
  REQUIRE(cs.dim == 2);

  const Eigen::Vector2d x = pt(0.3, 0.2);
  Eigen::MatrixXd a = cs.a(x);
  CHECK(a(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a(0, 1) == doctest::Approx(-0.075).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(-0.075).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(0.125).epsilon(1e-15));
  Eigen::VectorXd b = cs.b(x);
  CHECK(b[0] == doctest::Approx(0.05 - 0.1).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(2.0 * 0.1).epsilon(1e-13));
  CHECK(cs.c(x) == doctest::Approx(0.05));

  REQUIRE(cs.bounds.lambda0.has_value());
  CHECK(*cs.bounds.lambda0 ==
        doctest::Approx(0.5 * ellipticity_floor(p)).epsilon(1e-12));
  REQUIRE(cs.bounds.Lambda.has_value());
  CHECK(*cs.bounds.Lambda == doctest::Approx(0.125).epsilon(1e-15));
  REQUIRE(cs.bounds.b0.has_value());
  CHECK(*cs.bounds.b0 == doctest::Approx(0.6).epsilon(1e-15));
  REQUIRE(cs.bounds.c0.has_value());
  CHECK(*cs.bounds.c0 == doctest::Approx(0.05).epsilon(1e-15));
  REQUIRE(cs.bounds.K.has_value());
  CHECK(*cs.bounds.K ==
        doctest::Approx(0.5 * (1.0 + 0.25) + 0.25 + 0.05 + 0.6).epsilon(1e-12));
}

TEST_CASE("heston parameter validity is enforced") {
  CHECK_THROWS_AS(heston_coefficients({0.0, 0.0, 1.0, 0.1, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(heston_coefficients({0.5, 1.0, 1.0, 0.1, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(heston_coefficients({0.5, -1.5, 1.0, 0.1, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(heston_coefficients({0.5, 0.0, 0.0, 0.1, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(heston_coefficients({0.5, 0.0, 1.0, 0.0, 0.0, 0.0}),
                  std::invalid_argument);
  // Negative rate is allowed; it only suppresses the c floor.
  CoefficientSet cs = heston_coefficients({0.5, 0.0, 1.0, 0.1, -0.02, 0.0});
  CHECK_FALSE(cs.bounds.c0.has_value());
}

TEST_CASE("exponential gauge composes and hits the short-slab margin") {
  CoefficientSet cs = heston_coefficients({0.2, 0.0, 2.0, 0.3, 0.05, 0.0});
  // Lambda = sigma^2/2 = 0.02, b0 = 0.6, so the drift gauge rate is 15 and
  // the gauged zeroth-order coefficient is 9.05 - 34.5 x2.
  const double rate = *cs.bounds.b0 / (2.0 * *cs.bounds.Lambda);
  CHECK(rate == doctest::Approx(15.0).epsilon(1e-13));
  CoefficientSet gs = exponential_gauge(cs, rate);
  CHECK(gs.c(pt(0.3, 0.0)) == doctest::Approx(9.05).epsilon(1e-12));
  CHECK(gs.c(pt(-1.0, 0.1)) == doctest::Approx(9.05 - 3.45).epsilon(1e-12));
  const double threshold = 0.6 * 0.6 / (4.0 * 0.02);
  CHECK(threshold == doctest::Approx(4.5));
  CHECK(gs.c(pt(0.0, 0.1)) >= threshold);
  CHECK(gs.c(pt(0.0, 0.14)) < threshold);

  // b~^1 = b^1 - 2 sigma x2 a^{12} with a^{12} = 0 here; b~^2 picks up the
  // diagonal term.
  const Eigen::Vector2d x = pt(0.4, 0.2);
  CHECK(gs.b(x)[0] == doctest::Approx(cs.b(x)[0]).epsilon(1e-13));
  CHECK(gs.b(x)[1] ==
        doctest::Approx(cs.b(x)[1] - 2.0 * rate * 0.2 * 0.02).epsilon(1e-12));

  CoefficientSet two_step = exponential_gauge(exponential_gauge(cs, 0.7), 0.4);
  CoefficientSet one_step = exponential_gauge(cs, 1.1);
  CHECK(two_step.gauge_sigma == doctest::Approx(1.1).epsilon(1e-15));
  REQUIRE(two_step.gauge_base != nullptr);
  CHECK(two_step.gauge_base->gauge_sigma == 0.0);
  for (double x2 : {0.0, 0.13, 0.37}) {
    const Eigen::Vector2d y = pt(-0.2, x2);
    CHECK(two_step.c(y) == doctest::Approx(one_step.c(y)).epsilon(1e-12));
    CHECK(two_step.b(y)[0] == doctest::Approx(one_step.b(y)[0]).epsilon(1e-12));
    CHECK(two_step.b(y)[1] == doctest::Approx(one_step.b(y)[1]).epsilon(1e-12));
  }
  CHECK(exponential_gauge(cs, 0.0).gauge_sigma == 0.0);
}

TEST_CASE("pointwise operator application") {
  CoefficientSet cs = heston_coefficients(base_params());
  PointState st;
  st.value = 2.0;
  st.grad = Eigen::Vector2d(1.0, -1.0);
  st.hess = (Eigen::Matrix2d() << 2.0, 1.0, 1.0, 0.0).finished();
  // -x2 tr(a H) = -0.2 * (0.5*2 - 0.075*2) = -0.17; -<b,Du> = 0.25; c u = 0.1
  CHECK(apply_operator_pointwise(cs, pt(0.3, 0.2), st) ==
        doctest::Approx(0.18).epsilon(1e-12));
  // On the degenerate face the Hessian must not contribute.
  const double at_face = apply_operator_pointwise(cs, pt(0.3, 0.0), st);
  CHECK(at_face == doctest::Approx(-(0.05 * 1.0 + 0.6 * -1.0) + 0.05 * 2.0)
                       .epsilon(1e-12));
}

TEST_CASE("condition verification over a sample plan") {
  CoefficientSet cs = heston_coefficients(base_params());
  SamplePlan plan;
  for (double x1 : {-1.0, 0.0, 1.0})
    for (double x2 : {0.1, 0.25, 0.5}) plan.domain_points.push_back(pt(x1, x2));
  for (double x1 : {-1.0, 0.0, 1.0}) plan.boundary_points.push_back(pt(x1, 0.0));
  plan.height = 0.5;

  ConditionReport rep = verify_conditions(cs, plan);
  const ConditionEntry* sym = rep.find("a-symmetric");
  REQUIRE(sym != nullptr);
  CHECK(sym->holds);
  const ConditionEntry* bd = rep.find("boundary-drift-positive");
  REQUIRE(bd != nullptr);
  CHECK(bd->holds);
  const ConditionEntry* bf = rep.find("boundary-drift-floor");
  REQUIRE(bf != nullptr);
  CHECK(bf->holds);
  // The vertical drift dips under b0 (and under 0) once x2 > theta, so the
  // domain-wide floor genuinely fails on a tall sample box.
  SamplePlan tall = plan;
  tall.domain_points.push_back(pt(0.0, 0.5));
  const ConditionEntry* df = verify_conditions(cs, tall).find("domain-drift-floor");
  REQUIRE(df != nullptr);
  CHECK_FALSE(df->holds);

  CHECK_THROWS_AS(verify_conditions(cs, SamplePlan{}), std::invalid_argument);
  SamplePlan bad = plan;
  bad.boundary_points.push_back(pt(0.0, 0.2));
  CHECK_THROWS_AS(verify_conditions(cs, bad), std::invalid_argument);
}
