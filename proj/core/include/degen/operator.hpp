#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "degen/common.hpp"

namespace degen {

// Constants the operator claims to satisfy. Any may be absent; condition
// checks and a-priori bounds only fire for declared entries.
struct DeclaredBounds {
  std::optional<double> lambda0;  // ellipticity floor of a
  std::optional<double> Lambda;   // cap on a^{dd}
  std::optional<double> b0;       // drift floor in the x_d direction
  std::optional<double> c0;       // floor of the zeroth-order coefficient
  std::optional<double> nu;       // domain height cap in x_d
  std::optional<double> K;        // quadratic growth constant
};

// Coefficients of  A u = -x_d tr(a D^2 u) - <b, Du> + c u  on the upper
// half-space x_d >= 0. a must be symmetric; dim >= 2; x_d is the last
// coordinate. gauge_sigma/gauge_base record an exponential gauge
// v = e^{sigma x_d} u so assembly can realize the gauge exactly.
struct CoefficientSet {
  int dim = 2;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> a;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> b;
  std::function<double(const Eigen::VectorXd&)> c;
  DeclaredBounds bounds;
  double gauge_sigma = 0.0;
  std::shared_ptr<const CoefficientSet> gauge_base;  // set iff gauge_sigma != 0
};

struct HestonParams {
  double sigma;  // vol-of-vol, != 0
  double rho;    // correlation, |rho| < 1
  double kappa;  // mean-reversion speed, > 0
  double theta;  // mean-reversion level, > 0
  double r;      // risk-free rate
  double q;      // dividend yield
};

// Smaller eigenvalue of [[1, rho*sigma], [rho*sigma, sigma^2]]; the stored
// second-order matrix carries an extra factor 1/2, so its own floor is half
// of this value.
double ellipticity_floor(const HestonParams& p);

// d=2 coefficient set: a = (1/2)[[1, rho sigma],[rho sigma, sigma^2]],
// b = (r - q - x2/2, kappa (theta - x2)), c = r. Declares lambda0 (for the
// stored a), Lambda, b0, K, and c0 when r > 0. Throws std::invalid_argument
// on parameter-validity violations.
CoefficientSet heston_coefficients(const HestonParams& p);

struct ConditionEntry {
  std::string id;
  bool holds = false;
  double margin = 0.0;        // min slack of the inequality over samples
  Eigen::VectorXd witness;    // sample attaining the margin (empty if constant-only)
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;
  bool all_hold() const;
  const ConditionEntry* find(const std::string& id) const;
};

// Points at which conditions are sampled. boundary_points must satisfy
// x_d == 0. height is the domain height in x_d (required iff nu declared).
struct SamplePlan {
  std::vector<Eigen::VectorXd> domain_points;
  std::vector<Eigen::VectorXd> boundary_points;
  std::optional<double> height;
};

// Samples the structural inequalities. Sign conditions are always reported;
// floor/cap conditions only when the matching bound is declared. Reports,
// never throws on violation; throws std::invalid_argument on an empty plan
// or a boundary point off x_d = 0.
ConditionReport verify_conditions(const CoefficientSet& cs, const SamplePlan& plan);

// Exponential gauge v = e^{sigma x_d} u: a unchanged,
// b~^i = b^i - 2 sigma x_d a^{id}, c~ = c + sigma b^d - sigma^2 x_d a^{dd}.
// sigma = 0 returns the set unchanged. Gauges compose; gauge_sigma
// accumulates and gauge_base tracks the ungauged ancestor.
CoefficientSet exponential_gauge(const CoefficientSet& cs, double sigma);

// Value, gradient, and Hessian of a function at one point.
struct PointState {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;  // must be symmetric
};

// Evaluates A u(x) from pointwise data. At x_d = 0 the Hessian is ignored
// (the second-order term vanishes identically there).
double apply_operator_pointwise(const CoefficientSet& cs, const Eigen::VectorXd& x,
                                const PointState& s);

}  // namespace degen
