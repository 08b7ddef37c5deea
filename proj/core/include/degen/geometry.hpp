#pragma once

#include <Eigen/Dense>
#include <vector>

#include "degen/common.hpp"
#include "degen/operator.hpp"

namespace degen {

// Chart between the open upper half-ball {|x| < 1, x_d > 0} and the slab
// {w_d in (0, pi/2)} x R^{d-1}. Composition of the Cayley-type involution
//   xi(x) = ((1-|x|^2) e_1 + 2 (x - x_1 e_1)) / |e_1 - x|^2
// with the complex log in the (xi_1, xi_d) plane:
//   w_1 = log|(xi_1, xi_d)|, w_j = xi_j (1 < j < d), w_d = arg(xi_1 + i xi_d).
// Boundary dictionary: flat face {x_d = 0, |x| < 1} <-> {w_d = 0},
// hemisphere {|x| = 1, x_d > 0} <-> {w_d = pi/2}; the corner sphere
// {|x| = 1, x_d = 0} and the puncture e_1 are sent to w_1 = -inf / +inf and
// are rejected as inputs.

// Throws corner_point_error when x is within 1e-9 of the corner sphere or
// of e_1; std::invalid_argument outside the closed upper half-ball.
Eigen::VectorXd forward_map(const Eigen::VectorXd& x);

// Defined for w_d in [0, pi]; the slab chart uses [0, pi/2].
Eigen::VectorXd inverse_map(const Eigen::VectorXd& w);

// First and second derivatives of the forward chart at x.
// jac(k, i) = dw_k/dx_i; hess[k](i, j) = d^2 w_k / dx_i dx_j.
struct ChartDerivatives {
  Eigen::MatrixXd jac;
  std::vector<Eigen::MatrixXd> hess;
};
ChartDerivatives jacobian(const Eigen::VectorXd& x);

// Coefficients of the transported operator at a slab point w:
//   a~^{kl} = (x_d / w_d) a^{ij} w_k,i w_l,j
//   b~^k    = b^i w_k,i + x_d a^{ij} w_k,ij
//   c~      = c
// evaluated at x = inverse_map(w). At w_d = 0 only b~ and c~ are populated
// (the scaled second-order part has no pointwise meaning there).
struct PullbackResult {
  Eigen::MatrixXd tilde_a;
  Eigen::VectorXd tilde_b;
  double tilde_c = 0.0;
  // Vertical drift with its first-order part left in base coordinates,
  // b^d(x(w)) + x_d a^{ij} w_d,ij. Unlike tilde_b[d-1] this tends to
  // b^d at the matched flat-face point as w_d -> 0, which is the form the
  // boundary lower-bound argument runs on. Comparison output only; the
  // assembled operator always uses the chain-ruled tilde_b.
  double flat_drift_d = 0.0;
  Eigen::VectorXd w;
  Eigen::VectorXd x;
};
PullbackResult pullback_coefficients(const CoefficientSet& cs, const Eigen::VectorXd& w);

// Wraps pullback_coefficients as a coefficient set on slab coordinates, for
// assembling half-ball problems on a slab grid. Only c0 survives into the
// declared bounds (c~ = c exactly); the rest do not transport.
CoefficientSet pullback_coefficient_set(const CoefficientSet& cs);

// Constant-coefficient 2d model  -y (u_xx + u_yy) - b1 u_x - b2 u_y + c u
// transported to the slab, in the printed closed form kept verbatim,
// including its known misprints (the intermediate y and D lack a factor e^s
// and the second-order factor inherits that). Deltas against the
// chain-rule pullback are diagnostic output elsewhere, never folded back in.
struct Model2dCoeffs {
  double b1 = 0.0;
  double b2 = 0.0;
  double c = 0.0;
};
// Intermediates of the printed transform at (s, theta), theta in (0, pi/2].
struct Model2dFrame {
  double x = 0.0;
  double y = 0.0;       // printed form: 2 sin(theta) / denom
  double D = 0.0;       // printed form: 4 / denom
  double denom = 0.0;   // 1 + 2 e^s cos(theta) + e^{2s}
};
Model2dFrame model2d_frame(double s, double theta);
// theta must lie in (0, pi/2). tilde_a is the printed scalar times I.
PullbackResult model2d_closed_form(const Model2dCoeffs& m, double s, double theta);

// s(x, y) = |x - y| / sqrt(x_d + y_d + |x - y|) on the closed half-space.
double cycloidal_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// sup |f_i - f_j| / s(p_i, p_j)^alpha over node pairs. Pair sets larger
// than 10^6 are subsampled deterministically. Throws on fewer than 2 nodes.
double holder_seminorm(const Field& f, const std::vector<Eigen::VectorXd>& pts,
                       double alpha);

}  // namespace degen
