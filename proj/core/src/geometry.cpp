#include "degen/geometry.hpp"

#include <cmath>
#include <random>

namespace degen {

namespace {

constexpr double kCornerGuard = 1e-9;

// Shared scalars of the chart at x (0-based: x1 = x[0], xd = x[d-1]).
struct ChartFrame {
  double r2, P, A, N, xd;
};

ChartFrame frame_at(const Eigen::VectorXd& x) {
  ChartFrame f;
  f.r2 = x.squaredNorm();
  f.P = 1.0 - f.r2;
  f.A = 1.0 - 2.0 * x[0] + f.r2;
  f.xd = x[x.size() - 1];
  f.N = f.P * f.P + 4.0 * f.xd * f.xd;
  return f;
}

void check_chart_domain(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  if (d < 2) throw std::invalid_argument("forward_map: dim must be >= 2");
  const double xd = x[d - 1];
  const double r = x.norm();
  if (xd < 0.0 || r > 1.0 + 1e-12)
    throw std::invalid_argument("forward_map: point outside the closed upper half-ball");
  // Distance to the corner sphere {|x| = 1, x_d = 0}: project out x_d, snap
  // the rest to the unit sphere of the flat face.
  double rflat = 0.0;
  for (int i = 0; i + 1 < d; ++i) rflat += x[i] * x[i];
  rflat = std::sqrt(rflat);
  const double corner_dist = std::hypot(rflat - 1.0, xd);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1[0] = 1.0;
  const double pole_dist = (x - e1).norm();
  if (corner_dist < kCornerGuard || pole_dist < kCornerGuard)
    throw corner_point_error("forward_map: point within 1e-9 of the corner sphere or e_1");
}

}  // namespace

Eigen::VectorXd forward_map(const Eigen::VectorXd& x) {
  check_chart_domain(x);
  const int d = static_cast<int>(x.size());
  const ChartFrame f = frame_at(x);
  Eigen::VectorXd w(d);
  w[0] = 0.5 * std::log(f.N) - std::log(f.A);
  for (int m = 1; m + 1 < d; ++m) w[m] = 2.0 * x[m] / f.A;
  w[d - 1] = std::atan2(2.0 * f.xd, f.P);
  return w;
}

Eigen::VectorXd inverse_map(const Eigen::VectorXd& w) {
  const int d = static_cast<int>(w.size());
  if (d < 2) throw std::invalid_argument("inverse_map: dim must be >= 2");
  const double wd = w[d - 1];
  if (wd < 0.0 || wd > M_PI)
    throw std::invalid_argument("inverse_map: w_d must lie in [0, pi]");
  const double e = std::exp(w[0]);
  const double xi1 = e * std::cos(wd);
  const double xid = e * std::sin(wd);
  double mid2 = 0.0;
  for (int m = 1; m + 1 < d; ++m) mid2 += w[m] * w[m];
  const double S = (xi1 + 1.0) * (xi1 + 1.0) + xid * xid + mid2;
  const double xinorm2 = e * e + mid2;
  Eigen::VectorXd x(d);
  x[0] = (xinorm2 - 1.0) / S;
  for (int m = 1; m + 1 < d; ++m) x[m] = 2.0 * w[m] / S;
  x[d - 1] = 2.0 * xid / S;
  return x;
}

ChartDerivatives jacobian(const Eigen::VectorXd& x) {
  check_chart_domain(x);
  const int d = static_cast<int>(x.size());
  const ChartFrame f = frame_at(x);
  const double A = f.A, N = f.N, P = f.P, xd = f.xd;

  auto del = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  // A_i = 2 (x_i - del_{i,0}), P_i = -2 x_i, N_i = -4 P x_i + 8 xd del_{i,d-1}
  Eigen::VectorXd Ai(d), Ni(d), ni(d);
  for (int i = 0; i < d; ++i) {
    Ai[i] = 2.0 * (x[i] - del(i, 0));
    Ni[i] = -4.0 * P * x[i] + 8.0 * xd * del(i, d - 1);
    ni[i] = 2.0 * P * del(i, d - 1) + 4.0 * xd * x[i];
  }

  ChartDerivatives out;
  out.jac = Eigen::MatrixXd::Zero(d, d);
  out.hess.assign(d, Eigen::MatrixXd::Zero(d, d));

  for (int i = 0; i < d; ++i) {
    out.jac(0, i) = Ni[i] / (2.0 * N) - Ai[i] / A;
    out.jac(d - 1, i) = ni[i] / N;
  }
  for (int m = 1; m + 1 < d; ++m)
    for (int i = 0; i < d; ++i)
      out.jac(m, i) = 2.0 * del(m, i) / A - 2.0 * x[m] * Ai[i] / (A * A);

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      // d_j N_i = 8 x_j x_i - 4 P del_{ij} + 8 del_{i,d-1} del_{j,d-1}
      const double dNi =
          8.0 * x[j] * x[i] - 4.0 * P * del(i, j) + 8.0 * del(i, d - 1) * del(j, d - 1);
      out.hess[0](i, j) = dNi / (2.0 * N) - Ni[i] * Ni[j] / (2.0 * N * N) -
                          2.0 * del(i, j) / A + Ai[i] * Ai[j] / (A * A);
      // d_j n_i = -4 x_j del_{i,d-1} + 4 x_i del_{j,d-1} + 4 xd del_{ij}
      const double dni =
          -4.0 * x[j] * del(i, d - 1) + 4.0 * x[i] * del(j, d - 1) + 4.0 * xd * del(i, j);
      out.hess[d - 1](i, j) = dni / N - ni[i] * Ni[j] / (N * N);
    }
  }
  for (int m = 1; m + 1 < d; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out.hess[m](i, j) = -2.0 * del(i, m) * Ai[j] / (A * A) -
                            2.0 * del(j, m) * Ai[i] / (A * A) -
                            4.0 * x[m] * del(i, j) / (A * A) +
                            4.0 * x[m] * Ai[i] * Ai[j] / (A * A * A);
  return out;
}

PullbackResult pullback_coefficients(const CoefficientSet& cs, const Eigen::VectorXd& w) {
  const int d = static_cast<int>(w.size());
  if (d != cs.dim) throw std::invalid_argument("pullback_coefficients: dim mismatch");
  PullbackResult out;
  out.w = w;
  out.x = inverse_map(w);
  const ChartDerivatives der = jacobian(out.x);
  const Eigen::MatrixXd a = cs.a(out.x);
  const Eigen::VectorXd b = cs.b(out.x);
  const double xd = out.x[d - 1];
  out.tilde_b = der.jac * b;
  for (int k = 0; k < d; ++k) out.tilde_b[k] += xd * (a * der.hess[k]).trace();
  out.flat_drift_d = b[d - 1] + xd * (a * der.hess[d - 1]).trace();
  out.tilde_c = cs.c(out.x);
  const double wd = w[d - 1];
  if (wd > 0.0)
    out.tilde_a = (xd / wd) * der.jac * a * der.jac.transpose();
  return out;
}

CoefficientSet pullback_coefficient_set(const CoefficientSet& cs) {
  CoefficientSet out;
  out.dim = cs.dim;
  CoefficientSet inner = cs;
  out.a = [inner](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    return pullback_coefficients(inner, w).tilde_a;
  };
  out.b = [inner](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return pullback_coefficients(inner, w).tilde_b;
  };
  out.c = [inner](const Eigen::VectorXd& w) {
    return pullback_coefficients(inner, w).tilde_c;
  };
  out.bounds.c0 = cs.bounds.c0;
  return out;
}

Model2dFrame model2d_frame(double s, double theta) {
  Model2dFrame f;
  const double es = std::exp(s);
  f.denom = 1.0 + 2.0 * es * std::cos(theta) + es * es;
  f.x = (es * es - 1.0) / f.denom;
  f.y = 2.0 * std::sin(theta) / f.denom;
  f.D = 4.0 / f.denom;
  return f;
}

PullbackResult model2d_closed_form(const Model2dCoeffs& m, double s, double theta) {
  if (!(theta > 0.0 && theta < M_PI / 2.0))
    throw std::invalid_argument("model2d_closed_form: theta must lie in (0, pi/2)");
  const Model2dFrame f = model2d_frame(s, theta);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sx = 2.0 * ct / f.D + st * st;
  const double sy = -2.0 * f.x * st / f.D;
  PullbackResult out;
  out.w = Eigen::Vector2d(s, theta);
  out.x = Eigen::Vector2d(f.x, f.y);
  out.tilde_b = Eigen::Vector2d(m.b1 * sx + m.b2 * sy, -m.b1 * sy + m.b2 * sx);
  // Printed second-order factor theta * a~ = sin^2(theta) / (2 y e^{4s}).
  const double theta_a = st * st / (2.0 * f.y * std::exp(4.0 * s));
  out.tilde_a = (theta_a / theta) * Eigen::Matrix2d::Identity();
  out.tilde_c = m.c;
  return out;
}

double cycloidal_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("cycloidal_distance: dim mismatch");
  const int d = static_cast<int>(x.size());
  if (x[d - 1] < 0.0 || y[d - 1] < 0.0)
    throw std::invalid_argument("cycloidal_distance: points must have x_d >= 0");
  const double e = (x - y).norm();
  if (e == 0.0) return 0.0;
  return e / std::sqrt(x[d - 1] + y[d - 1] + e);
}

double holder_seminorm(const Field& f, const std::vector<Eigen::VectorXd>& pts,
                       double alpha) {
  const size_t n = pts.size();
  if (n < 2)
    throw std::invalid_argument("holder_seminorm: need at least two nodes");
  if (f.size() != n)
    throw std::invalid_argument("holder_seminorm: field/point count mismatch");
  const size_t total_pairs = n * (n - 1) / 2;
  constexpr size_t kMaxPairs = 1000000;
  double sup = 0.0;
  auto feed = [&](size_t i, size_t j) {
    const double s = cycloidal_distance(pts[i], pts[j]);
    if (s == 0.0) return;
    sup = std::max(sup, std::abs(f[i] - f[j]) / std::pow(s, alpha));
  };
  if (total_pairs <= kMaxPairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) feed(i, j);
  } else {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // fixed: result is deterministic
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t k = 0; k < kMaxPairs; ++k) {
      size_t i = pick(rng), j = pick(rng);
      if (i != j) feed(i, j);
    }
  }
  return sup;
}

}  // namespace degen
