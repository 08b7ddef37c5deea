#pragma once

#include "degen/bvp.hpp"

namespace degen {

// Outcome of one oracle-vs-candidate comparison, serialization-friendly.
struct OracleReport {
  std::string case_id;
  std::vector<double> oracle_values;
  std::vector<double> candidate_values;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;  // max_deviation <= tolerance
};

OracleReport make_oracle_report(std::string case_id, std::vector<double> oracle,
                                std::vector<double> candidate, double tolerance);

// Active-set enumeration oracle for the complementarity problem: tries all
// 2^m choices of where u binds to psi, solves each reduced dense system,
// and returns the configuration that is feasible (u >= psi - 1e-12,
// residual >= -1e-12 on bound rows). Capped at 12 free unknowns; throws
// when nothing feasible turns up, which points at the assembled system.
Field brute_force_lcp(const StencilSystem& sys, const Field& f, const Field& g,
                      const Field& psi);

// Max over the first interior layer (and its central-difference columns)
// of x2 * max(|Dxx u|, |Dyy u|, |Dxy u|). Needs at least 3 node layers
// above the bottom face.
double boundary_layer_metric(const Field& u, const Grid& g);

struct RegularityEntry {
  double h = 0.0;
  double value = 0.0;
};

struct RegularityReport {
  std::vector<RegularityEntry> levels;
  bool decreasing = false;  // strictly, across consecutive levels
};

// Applies boundary_layer_metric per refinement level (fields and grids
// paired by index, coarse first).
RegularityReport boundary_regularity_check(const std::vector<Field>& us,
                                           const std::vector<Grid>& gs);

struct ObliqueReport {
  double sup_residual = 0.0;
  int argmax = -1;
  int checked = 0;
};

// Residual of -<b, Du> + c u - f at bottom-face non-corner nodes, with a
// second-order 3-point one-sided difference in x2 and central in x1; on
// purpose shares no formula with the assembled first-order rows.
ObliqueReport oblique_residual_check(const Field& u, const Field& f,
                                     const CoefficientSet& cs, const Grid& g);

// Mismatch |-b^1 u_x1 + c u - f| at the corner nodes, one-sided into the
// domain; a diagnostic (large values flag data that is incompatible at the
// corner), not an assertion.
double corner_compatibility_probe(const CoefficientSet& cs, const Field& f,
                                  const Grid& g, const Field& u);

}  // namespace degen
