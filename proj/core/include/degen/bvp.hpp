#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>

#include "degen/stencil.hpp"

namespace degen {

// Linear problem L_h u = f with Dirichlet data g on the identity rows.
// f is read on non-identity rows only, g on identity rows only; rhs()
// merges the two into the vector the solvers consume.
struct BvpProblem {
  StencilSystem sys;
  Field f;
  Field g;
  Field rhs() const;
};

enum class SolveMethod { Direct, Sor };

struct SolveOptions {
  SolveMethod method = SolveMethod::Direct;
  double omega = 1.5;    // sor only, in (0, 2)
  double tol = 1e-10;    // sup-norm of the algebraic residual
  int max_iter = 20000;  // sor sweep cap
};

struct SolveStats {
  int iterations = 0;  // sor sweeps, or refinement steps for direct
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// Direct: sparse LU with one step of iterative refinement when needed;
// throws solver_error on a singular factorization or an unmet tolerance.
// Sor: lexicographic sweeps, converged when the residual sup-norm over
// non-identity rows drops to tol; throws solver_error carrying the
// residual history when max_iter sweeps are not enough.
// Either way the returned field carries g exactly on identity rows.
Field solve_bvp(const BvpProblem& p, const SolveOptions& opt = {},
                SolveStats* stats = nullptr);

// Row-major sparse view of a stencil system (shared by the direct solver,
// the patch solvers, and tests).
Eigen::SparseMatrix<double> to_sparse(const StencilSystem& sys);

// Sup-norm a priori bounds. ZerothOrder and DriftGauge take absolute sups
// of the data; Obstacle takes signed sups (its max against 0 is part of
// the formula).
enum class AprioriVariant {
  ZerothOrder,  // (1/c0) sup|f| v sup|g|; needs c0 > 0
  DriftGauge,   // e^{b0 nu/(2 Lambda)} ((4 Lambda/b0^2) sup|f| v sup|g|); needs b0, Lambda, nu
  Obstacle,     // 0 v (1/c0) sup f v sup g v sup psi; needs c0 > 0
};

struct AprioriBound {
  double value = 0.0;
  AprioriVariant variant = AprioriVariant::ZerothOrder;
  // inputs echo
  double sup_f = 0.0, sup_g = 0.0, sup_psi = 0.0;
  double c0 = 0.0, b0 = 0.0, Lambda = 0.0, nu = 0.0;  // only the used ones are set
};

AprioriBound apriori_bound(const CoefficientSet& cs, double sup_f, double sup_g,
                           double sup_psi, AprioriVariant variant);

// Smooth reference solution with analytic derivatives; the study never
// differentiates numerically.
struct ManufacturedSolution {
  std::function<double(const Eigen::Vector2d&)> value;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> hess;
};

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double err_interior = 0.0;
  double err_degenerate = 0.0;
  double order_interior = 0.0;    // vs previous row; NaN on the first
  double order_degenerate = 0.0;  // vs previous row; NaN on the first
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  // log-log slope between the first and last rows
  double overall_order_interior() const;
  double overall_order_degenerate() const;
};

// For each (n1, n2) level: builds the grid, manufactures f and g from
// u_exact through the pointwise operator, solves directly, and records
// sup errors split by row class. Corner rows carry exact data and are
// excluded from both error columns.
ConvergenceTable mms_convergence(const CoefficientSet& cs,
                                 const ManufacturedSolution& u_exact,
                                 const DomainSpec& dom,
                                 const std::vector<std::pair<int, int>>& levels,
                                 double grid_stretch = 1.0);

}  // namespace degen
