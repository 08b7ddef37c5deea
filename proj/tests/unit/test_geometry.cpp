#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "degen/geometry.hpp"
#include "degen/operator.hpp"
#include "doctest.h"

using namespace degen;

namespace {

const double kPi = 4.0 * std::atan(1.0);

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd random_interior(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::VectorXd x(d);
    for (int i = 0; i + 1 < d; ++i) x[i] = u(rng);
    x[d - 1] = 0.5 * (u(rng) + 1.0);
    if (x.norm() < 1.0 - 1e-3 && x[d - 1] > 1e-3) return x;
  }
}

}  // namespace

TEST_CASE("forward map pinned points") {
  Eigen::VectorXd w = forward_map(vec2(0.0, 1.0));
  CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(kPi / 2).epsilon(1e-14));

  // Double-angle identity: x = (0, sqrt(2)-1) sits at w_d = pi/4.
  w = forward_map(vec2(0.0, std::sqrt(2.0) - 1.0));
  CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(kPi / 4).epsilon(1e-12));

  // w_d vanishes with x_d.
  CHECK(forward_map(vec2(0.0, 1e-9))[1] == doctest::Approx(2e-9).epsilon(1e-6));
  CHECK(forward_map(vec2(0.3, 0.0))[1] == 0.0);
}

TEST_CASE("inverse map pinned points and round trips") {
  Eigen::VectorXd x = inverse_map(vec2(0.0, kPi / 2));
  CHECK(x[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
  x = inverse_map(vec2(0.0, kPi / 4));
  CHECK(x[1] == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));

  std::mt19937_64 rng(21u);
  for (int d : {2, 3, 5}) {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd p = random_interior(rng, d);
      worst = std::max(worst, (inverse_map(forward_map(p)) - p).norm());
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("corner sphere and pole are rejected") {
  CHECK_THROWS_AS(forward_map(vec2(1.0, 0.0)), corner_point_error);
  CHECK_THROWS_AS(forward_map(vec2(-1.0, 1e-12)), corner_point_error);
  Eigen::VectorXd e1 = vec2(1.0 - 1e-12, 0.0);
  CHECK_THROWS_AS(forward_map(e1), corner_point_error);
  CHECK_THROWS_AS(forward_map(vec2(0.0, -0.1)), std::invalid_argument);
}

TEST_CASE("jacobian agrees with finite differences and is holomorphic in 2d") {
  std::mt19937_64 rng(22u);
  for (int d : {2, 3, 5}) {
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd x = random_interior(rng, d);
      ChartDerivatives der = jacobian(x);
      const double h = 1e-6;
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        Eigen::VectorXd col = (forward_map(xp) - forward_map(xm)) / (2.0 * h);
        for (int i = 0; i < d; ++i) {
          const double scale = std::max(1.0, std::abs(col[i]));
          CHECK(std::abs(der.jac(i, j) - col[i]) / scale <= 1e-6);
        }
      }
    }
  }
  // Cauchy-Riemann in the (x1, xd) plane for d = 2.
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd x = random_interior(rng, 2);
    ChartDerivatives der = jacobian(x);
    CHECK(der.jac(0, 0) == doctest::Approx(der.jac(1, 1)).epsilon(1e-12));
    CHECK(der.jac(0, 1) == doctest::Approx(-der.jac(1, 0)).epsilon(1e-12));
  }
  // Chart factor dw_d/dx_d tends to 2/(1-|x|^2), hence 2 at the origin.
  ChartDerivatives near_origin = jacobian(vec2(0.0, 1e-8));
  CHECK(near_origin.jac(1, 1) == doctest::Approx(2.0).epsilon(1e-6));
  ChartDerivatives off_center = jacobian(vec2(0.5, 1e-8));
  CHECK(off_center.jac(1, 1) == doctest::Approx(2.0 / (1.0 - 0.25)).epsilon(1e-6));
}

TEST_CASE("pullback of an identity diffusion is conformal in 2d") {
  CoefficientSet cs;
  cs.dim = 2;
  cs.a = [](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::Matrix2d::Identity());
  };
  cs.b = [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(0, 0)); };
  cs.c = [](const Eigen::VectorXd&) { return 0.0; };
  std::mt19937_64 rng(23u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd w = vec2(-1.5 + 3.0 * u(rng), 0.05 + (kPi / 2 - 0.1) * u(rng));
    PullbackResult pb = pullback_coefficients(cs, w);
    CHECK(std::abs(pb.tilde_a(0, 1)) <= 1e-12);
    CHECK(std::abs(pb.tilde_a(1, 0)) <= 1e-12);
    CHECK(pb.tilde_a(0, 0) ==
          doctest::Approx(pb.tilde_a(1, 1)).epsilon(1e-10));
    CHECK(pb.tilde_a(0, 0) > 0.0);
  }
}

TEST_CASE("pullback reproduces the operator through finite differences") {
  // Independent oracle: apply A to u at x, then apply the transported
  // operator to v = u o Phi^{-1} at w = Phi(x) with numerical derivatives.
  CoefficientSet cs;
  cs.dim = 2;
  cs.a = [](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::Matrix2d::Identity());
  };
  cs.b = [](const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::Vector2d(0.4, 0.7));
  };
  cs.c = [](const Eigen::VectorXd&) { return 0.2; };
  auto uf = [](const Eigen::VectorXd& x) {
    return std::sin(x[0]) + x[1] * x[1] + 0.3 * x[0] * x[1];
  };
  auto vf = [&](const Eigen::VectorXd& w) { return uf(inverse_map(w)); };

  std::mt19937_64 rng(24u);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd x = random_interior(rng, 2);
    if (x[1] < 0.1) continue;
    const double exact =
        -x[1] * (-std::sin(x[0]) + 2.0) -
        (0.4 * (std::cos(x[0]) + 0.3 * x[1]) + 0.7 * (2.0 * x[1] + 0.3 * x[0])) +
        0.2 * uf(x);

    Eigen::VectorXd w = forward_map(x);
    PullbackResult pb = pullback_coefficients(cs, w);
    const double h = 1e-5;
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      grad[i] = (vf(wp) - vf(wm)) / (2.0 * h);
      hess(i, i) = (vf(wp) - 2.0 * vf(w) + vf(wm)) / (h * h);
    }
    Eigen::VectorXd wpp = w, wpm = w, wmp = w, wmm = w;
    wpp[0] += h;
    wpp[1] += h;
    wpm[0] += h;
    wpm[1] -= h;
    wmp[0] -= h;
    wmp[1] += h;
    wmm[0] -= h;
    wmm[1] -= h;
    hess(0, 1) = hess(1, 0) =
        (vf(wpp) - vf(wpm) - vf(wmp) + vf(wmm)) / (4.0 * h * h);

    double transported = 0.2 * vf(w);
    for (int i = 0; i < 2; ++i) {
      transported -= pb.tilde_b[i] * grad[i];
      for (int j = 0; j < 2; ++j)
        transported -= w[1] * pb.tilde_a(i, j) * hess(i, j);
    }
    const double scale = std::max(1.0, std::abs(exact));
    CHECK(std::abs(transported - exact) / scale <= 1e-5);
  }
}

TEST_CASE("flat-face drift form recovers the vertical coefficient") {
  CoefficientSet cs = heston_coefficients({0.5, -0.3, 2.0, 0.3, 0.05, 0.0});
  for (double w1 : {-0.8, 0.0, 0.6}) {
    double fv[3];
    const double hs[3] = {1e-2, 1e-3, 1e-4};
    for (int m = 0; m < 3; ++m)
      fv[m] = pullback_coefficients(cs, vec2(w1, hs[m])).flat_drift_d;
    double extrap = 0.0;
    for (int i = 0; i < 3; ++i) {
      double term = fv[i];
      for (int j = 0; j < 3; ++j)
        if (j != i) term *= -hs[j] / (hs[i] - hs[j]);
      extrap += term;
    }
    const double exact = cs.b(inverse_map(vec2(w1, 0.0)))[1];
    CHECK(extrap == doctest::Approx(exact).epsilon(1e-6));
    // The chain-ruled drift carries the chart factor instead; at w1 = 0 the
    // boundary point is the origin where that factor is exactly 2.
    if (w1 == 0.0) {
      const double chain = pullback_coefficients(cs, vec2(0.0, 1e-6)).tilde_b[1];
      CHECK(chain == doctest::Approx(2.0 * exact).epsilon(1e-4));
    }
  }
}

TEST_CASE("printed 2d closed form frame and limits") {
  Model2dFrame f = model2d_frame(0.0, kPi / 2);
  CHECK(f.denom == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.y == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.D == doctest::Approx(2.0).epsilon(1e-15));

  const Model2dCoeffs m{0.7, -0.4, 0.3};
  // Drift pair limit as theta tends to pi/2.
  const double s = 0.3;
  PullbackResult near_top = model2d_closed_form(m, s, kPi / 2 - 1e-7);
  const double e2s = std::exp(2.0 * s);
  CHECK(near_top.tilde_b[0] ==
        doctest::Approx(m.b1 - 0.5 * (e2s - 1.0) * m.b2).epsilon(1e-5));
  CHECK(near_top.tilde_b[1] ==
        doctest::Approx(0.5 * (e2s - 1.0) * m.b1 + m.b2).epsilon(1e-5));
  // Vertical drift limit as theta tends to 0.
  PullbackResult near_bottom = model2d_closed_form(m, s, 1e-7);
  const double es = std::exp(s);
  CHECK(near_bottom.tilde_b[1] ==
        doctest::Approx(0.5 * (1.0 + es) * (1.0 + es) * m.b2).epsilon(1e-5));
  CHECK(near_bottom.tilde_c == doctest::Approx(m.c).epsilon(1e-15));
  // The printed second-order part is a scalar multiple of the identity.
  PullbackResult mid = model2d_closed_form(m, 0.2, 0.9);
  CHECK(mid.tilde_a(0, 1) == 0.0);
  CHECK(mid.tilde_a(0, 0) == doctest::Approx(mid.tilde_a(1, 1)));
  CHECK(mid.tilde_a(0, 0) > 0.0);
  CHECK_THROWS_AS(model2d_closed_form(m, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(model2d_closed_form(m, 0.0, kPi / 2), std::invalid_argument);
}

TEST_CASE("cycloidal distance pinned values and square-root cap") {
  CHECK(cycloidal_distance(vec2(0.2, 0.4), vec2(0.2, 0.4)) == 0.0);
  CHECK(cycloidal_distance(vec2(0.0, 0.0), vec2(0.0, 1.0)) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  std::mt19937_64 rng(25u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x = vec2(2.0 * u(rng) - 1.0, u(rng));
    Eigen::VectorXd y = vec2(2.0 * u(rng) - 1.0, u(rng));
    const double s = cycloidal_distance(x, y);
    CHECK(s <= std::sqrt((x - y).norm()) + 1e-13);
    CHECK(s == doctest::Approx(cycloidal_distance(y, x)).epsilon(1e-15));
  }
}

TEST_CASE("weighted Holder seminorm on pinned two-node data") {
  std::vector<Eigen::VectorXd> pts = {vec2(0.0, 0.0), vec2(0.0, 1.0)};
  Field f = {0.0, 1.0};
  // |1 - 0| / (1/sqrt(2))^alpha = 2^{alpha/2}
  CHECK(holder_seminorm(f, pts, 0.5) ==
        doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-13));
  Field shifted = {5.0, 6.0};
  CHECK(holder_seminorm(shifted, pts, 0.5) ==
        doctest::Approx(holder_seminorm(f, pts, 0.5)).epsilon(1e-14));
  Field constant = {3.0, 3.0};
  CHECK(holder_seminorm(constant, pts, 0.5) == 0.0);
  CHECK_THROWS_AS(holder_seminorm(Field{1.0}, {vec2(0, 0)}, 0.5),
                  std::invalid_argument);
}
