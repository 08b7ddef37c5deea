#include "degen/operator.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace degen {

int env_thread_cap() {
  const char* s = std::getenv("DEGEN_THREADS");
  if (!s) return 1;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || v < 1) return 1;
  return static_cast<int>(v);
}

double ellipticity_floor(const HestonParams& p) {
  const double s2 = p.sigma * p.sigma;
  const double disc = 1.0 - 2.0 * s2 + 4.0 * p.rho * p.rho * s2 + s2 * s2;
  return 0.5 * (1.0 + s2 - std::sqrt(disc));
}

static void validate_heston(const HestonParams& p) {
  std::ostringstream bad;
  if (p.sigma == 0.0) bad << "sigma must be nonzero; ";
  if (!(std::abs(p.rho) < 1.0)) bad << "|rho| must be < 1; ";
  if (!(p.kappa > 0.0)) bad << "kappa must be > 0; ";
  if (!(p.theta > 0.0)) bad << "theta must be > 0; ";
  if (!bad.str().empty())
    throw std::invalid_argument("heston_coefficients: " + bad.str());
}

CoefficientSet heston_coefficients(const HestonParams& p) {
  validate_heston(p);
  CoefficientSet cs;
  cs.dim = 2;
  Eigen::Matrix2d A;
  A << 0.5, 0.5 * p.rho * p.sigma, 0.5 * p.rho * p.sigma, 0.5 * p.sigma * p.sigma;
  cs.a = [A](const Eigen::VectorXd&) -> Eigen::MatrixXd { return A; };
  const double r = p.r, q = p.q, kappa = p.kappa, theta = p.theta;
  cs.b = [r, q, kappa, theta](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::Vector2d b;
    b << r - q - 0.5 * x[1], kappa * (theta - x[1]);
    return b;
  };
  cs.c = [r](const Eigen::VectorXd&) { return r; };

  // The stored a is half of the matrix whose smaller eigenvalue
  // ellipticity_floor returns, hence the factor 1/2 here.
  cs.bounds.lambda0 = 0.5 * ellipticity_floor(p);
  cs.bounds.Lambda = 0.5 * p.sigma * p.sigma;
  cs.bounds.b0 = kappa * theta;
  if (r > 0.0) cs.bounds.c0 = r;
  // tr(x2 a) + <b, x> <= K (1 + |x|^2) with the crude term-by-term split
  // |x2| <= 1+|x|^2, |x1 x2| <= (1+|x|^2)/2, |x1| <= 1+|x|^2.
  cs.bounds.K = 0.5 * (1.0 + p.sigma * p.sigma) + 0.25 + std::abs(r - q) + kappa * theta;
  return cs;
}

bool ConditionReport::all_hold() const {
  for (const auto& e : entries)
    if (!e.holds) return false;
  return true;
}

const ConditionEntry* ConditionReport::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

namespace {

constexpr double kSlack = 1e-12;  // tie slack for non-strict inequalities

struct MarginTracker {
  double margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd witness;
  void feed(double slack, const Eigen::VectorXd& x) {
    if (slack < margin) {
      margin = slack;
      witness = x;
    }
  }
};

ConditionEntry close_entry(const std::string& id, const MarginTracker& t, bool strict) {
  ConditionEntry e;
  e.id = id;
  e.margin = t.margin;
  e.witness = t.witness;
  e.holds = strict ? (t.margin > 0.0) : (t.margin >= -kSlack);
  return e;
}

double min_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

ConditionReport verify_conditions(const CoefficientSet& cs, const SamplePlan& plan) {
  if (plan.domain_points.empty() && plan.boundary_points.empty())
    throw std::invalid_argument("verify_conditions: empty sample plan");
  for (const auto& x : plan.boundary_points)
    if (x[cs.dim - 1] != 0.0)
      throw std::invalid_argument("verify_conditions: boundary sample with x_d != 0");
  if (cs.bounds.nu && !plan.height)
    throw std::invalid_argument("verify_conditions: nu declared but plan has no height");

  const int d = cs.dim;
  ConditionReport rep;

  auto all_points = [&](auto&& fn) {
    for (const auto& x : plan.domain_points) fn(x);
    for (const auto& x : plan.boundary_points) fn(x);
  };

  {  // symmetry of a is a precondition of everything else; report it too
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) {
      Eigen::MatrixXd A = cs.a(x);
      t.feed(1e-14 - (A - A.transpose()).cwiseAbs().maxCoeff(), x);
    });
    ConditionEntry e;
    e.id = "a-symmetric";
    e.margin = t.margin;
    e.witness = t.witness;
    e.holds = t.margin >= 0.0;
    rep.entries.push_back(e);
  }

  {  // b^d >= 0 and b^d > 0 on the degenerate boundary
    MarginTracker t;
    for (const auto& x : plan.boundary_points) t.feed(cs.b(x)[d - 1], x);
    if (!plan.boundary_points.empty()) {
      rep.entries.push_back(close_entry("boundary-drift-nonneg", t, false));
      rep.entries.push_back(close_entry("boundary-drift-positive", t, true));
    }
  }
  {  // c >= 0 everywhere, c > 0 on the boundary
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) { t.feed(cs.c(x), x); });
    rep.entries.push_back(close_entry("zeroth-order-nonneg", t, false));
    if (!plan.boundary_points.empty()) {
      MarginTracker tb;
      for (const auto& x : plan.boundary_points) tb.feed(cs.c(x), x);
      rep.entries.push_back(close_entry("zeroth-order-positive-boundary", tb, true));
    }
  }

  if (cs.bounds.lambda0) {
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) {
      t.feed(min_eig_sym(cs.a(x)) - *cs.bounds.lambda0, x);
    });
    rep.entries.push_back(close_entry("ellipticity", t, false));
  }
  if (cs.bounds.Lambda) {
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) {
      t.feed(*cs.bounds.Lambda - cs.a(x)(d - 1, d - 1), x);
    });
    rep.entries.push_back(close_entry("normal-diffusion-cap", t, false));
  }
  if (cs.bounds.b0) {
    if (!plan.boundary_points.empty()) {
      MarginTracker t;
      for (const auto& x : plan.boundary_points)
        t.feed(cs.b(x)[d - 1] - *cs.bounds.b0, x);
      rep.entries.push_back(close_entry("boundary-drift-floor", t, false));
    }
    MarginTracker td;
    all_points([&](const Eigen::VectorXd& x) {
      td.feed(cs.b(x)[d - 1] - *cs.bounds.b0, x);
    });
    rep.entries.push_back(close_entry("domain-drift-floor", td, false));
  }
  if (cs.bounds.c0) {
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) { t.feed(cs.c(x) - *cs.bounds.c0, x); });
    rep.entries.push_back(close_entry("zeroth-order-floor", t, false));
  }
  if (cs.bounds.nu) {
    ConditionEntry e;
    e.id = "finite-height";
    e.margin = *cs.bounds.nu - *plan.height;
    e.holds = e.margin >= -kSlack;
    rep.entries.push_back(e);
  }
  if (cs.bounds.K) {
    MarginTracker t;
    all_points([&](const Eigen::VectorXd& x) {
      const double xd = x[d - 1];
      const double lhs = xd * cs.a(x).trace() + cs.b(x).dot(x);
      t.feed(*cs.bounds.K * (1.0 + x.squaredNorm()) - lhs, x);
    });
    rep.entries.push_back(close_entry("quadratic-growth", t, false));
  }
  if (cs.bounds.K && cs.bounds.c0) {
    ConditionEntry e;
    e.id = "strong-quadratic-growth";
    e.margin = *cs.bounds.c0 - 2.0 * *cs.bounds.K;
    e.holds = e.margin >= -kSlack;
    rep.entries.push_back(e);
  }
  return rep;
}

CoefficientSet exponential_gauge(const CoefficientSet& cs, double sigma) {
  if (sigma == 0.0) return cs;
  CoefficientSet out;
  out.dim = cs.dim;
  const int d = cs.dim;
  auto a = cs.a;
  auto b = cs.b;
  auto c = cs.c;
  out.a = a;
  out.b = [a, b, sigma, d](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd v = b(x);
    v -= 2.0 * sigma * x[d - 1] * a(x).col(d - 1);
    return v;
  };
  out.c = [a, b, c, sigma, d](const Eigen::VectorXd& x) {
    return c(x) + sigma * b(x)[d - 1] - sigma * sigma * x[d - 1] * a(x)(d - 1, d - 1);
  };
  out.bounds = cs.bounds;
  out.bounds.c0.reset();  // the gauge shifts c; the old floor no longer applies
  out.gauge_sigma = cs.gauge_sigma + sigma;
  out.gauge_base = cs.gauge_base
                       ? cs.gauge_base
                       : std::make_shared<const CoefficientSet>(cs);
  if (out.gauge_sigma == 0.0) out.gauge_base.reset();
  return out;
}

double apply_operator_pointwise(const CoefficientSet& cs, const Eigen::VectorXd& x,
                                const PointState& s) {
  const int d = cs.dim;
  if (x.size() != d) throw std::invalid_argument("apply_operator_pointwise: bad point dim");
  if (s.grad.size() != d) throw std::invalid_argument("apply_operator_pointwise: bad grad dim");
  const double xd = x[d - 1];
  double out = cs.c(x) * s.value - cs.b(x).dot(s.grad);
  if (xd != 0.0) {
    if (s.hess.rows() != d || s.hess.cols() != d)
      throw std::invalid_argument("apply_operator_pointwise: bad hessian dim");
    if ((s.hess - s.hess.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("apply_operator_pointwise: hessian not symmetric");
    out -= xd * (cs.a(x) * s.hess).trace();
  }
  return out;
}

}  // namespace degen
