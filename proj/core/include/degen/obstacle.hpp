#pragma once

#include <cmath>

#include "degen/bvp.hpp"

namespace degen {

// Discrete complementarity problem min(L_h u - f, u - psi) = 0 with u = g
// on identity rows. Construction rejects psi > g on identity rows; that
// compatibility is what keeps constant supersolutions admissible.
struct ObstacleProblem {
  StencilSystem sys;
  Field f;
  Field g;
  Field psi;
  ObstacleProblem(StencilSystem sys_, Field f_, Field g_, Field psi_);
  Field rhs() const;
};

enum class PayoffKind { Put, Call };

// Perpetual option payoff in log-price x1: put (K - e^{x1})^+, call
// (e^{x1} - K)^+.
double payoff(PayoffKind kind, double strike, double x1);

// Off the kink the put/call payoff has |d2/dx1^2| = e^{x1}; this is the
// semiconvexity constant that makes psi + C|x|^2/2 convex along x1 on the
// truncated domain.
inline double payoff_semiconvexity(const DomainSpec& dom) { return std::exp(dom.hi[0]); }

// psi_delta = J_delta(psi + C|x|^2/2) - C|x|^2/2 with J_delta a discrete
// convolution against a radial bump of radius delta, normalized over the
// nodes it actually covers (so constants are reproduced exactly, boundary
// clipping included). Throws when delta is below the largest node spacing.
Field mollify_obstacle(const Field& psi, double delta, double C, const Grid& g);

struct LcpOptions {
  double omega = 1.5;  // in (0, 2)
  double tol = 1e-10;  // on the combined complementarity residual
  int max_iter = 50000;
};

struct LcpStats {
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// Projected SOR, lexicographic sweeps, projection u := max(psi, sor value)
// after each row update. Requires a system that passes monotonicity_check;
// stops when complementarity_residual drops to tol, throws solver_error
// (with history) at max_iter.
Field solve_lcp_psor(const ObstacleProblem& p, const LcpOptions& opt = {},
                     LcpStats* stats = nullptr);

// beta(t) = (t - sqrt(t^2 + eps^2)) / (2 eps): smooth, negative,
// vanishing as t -> +inf, slope 1/eps as t -> -inf, beta(0) = -1/2.
// For t >= 0 both members evaluate the algebraically identical
// cancellation-free form; the naive difference loses enough digits there
// to put a floor under Newton residuals.
struct PenaltySpec {
  double epsilon;
  double beta(double t) const {
    const double s = std::sqrt(t * t + epsilon * epsilon);
    if (t >= 0.0) return -epsilon / (2.0 * (t + s));
    return (t - s) / (2.0 * epsilon);
  }
  double beta_prime(double t) const {
    const double s = std::sqrt(t * t + epsilon * epsilon);
    if (t >= 0.0) return epsilon / (2.0 * s * (t + s));
    return (1.0 - t / s) / (2.0 * epsilon);
  }
};

struct PenaltyOptions {
  std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tol = 1e-10;
  int max_newton = 100;
};

struct PenaltyStats {
  int newton_total = 0;
  double final_residual = 0.0;  // of the last (smallest-eps) system
  std::vector<double> residual_history;
};

// Solves L_h u + beta_eps(u - psi) = f on non-identity rows by damped
// Newton, warm-starting each epsilon from the previous one; returns the
// smallest-epsilon iterate. Schedule must be positive and strictly
// decreasing.
Field solve_penalized(const ObstacleProblem& p, const PenaltyOptions& opt = {},
                      PenaltyStats* stats = nullptr);

// Max over non-identity rows of |min(r, u - psi)|, (psi - u)^+ and (-r)^+
// with r = L_h u - f; zero exactly at a complementarity solution.
double complementarity_residual(const ObstacleProblem& p, const Field& u);

struct RegionMask {
  std::vector<bool> continuation;  // u - psi > tol
  std::vector<bool> coincidence;   // complement over the considered rows
  int continuation_count() const;
  int coincidence_count() const;
};

// Splits nodes by u - psi > tol. When sys is given its identity rows are
// left out of both sets; otherwise every node is classified.
RegionMask continuation_region(const Field& u, const Field& psi, double tol,
                               const StencilSystem* sys = nullptr);

}  // namespace degen
