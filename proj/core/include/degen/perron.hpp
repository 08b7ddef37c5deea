#pragma once

#include <optional>

#include "degen/obstacle.hpp"

namespace degen {

// Overlapping box patch on the grid. HalfBall patches touch the degenerate
// bottom and keep its first-order rows among their unknowns; Ball patches
// hold elliptic rows only. The solved set is the patch's replaceable
// unknowns; nodes on a cut (artificial) box face stay boundary data for the
// local problem even when they are interior to the grid.
struct Patch {
  enum class Kind { Ball, HalfBall };
  Kind kind = Kind::Ball;
  int i0 = 0, j0 = 0, ni = 0, nj = 0;  // node box [i0, i0+ni) x [j0, j0+nj)
  std::vector<int> nodes;              // every node in the box
  std::vector<int> solved;             // unknowns replaced by a lift
  int overlap = 0;                     // requested overlap, echoed
};

// Tiles the grid with boxes of width min(2*radius-1, axis size), stepping
// by width - overlap and shifting the last patch to fit. If the resulting
// solved sets miss any interior or degenerate node the stride is reduced
// until they cover (overlap 1 shares only face nodes, which no patch
// solves, so it always tightens to an effective overlap of 2).
std::vector<Patch> make_patches(const Grid& g, int radius_nodes, int overlap_nodes);

// One lift: replaces state on patch.solved by the local solve with the
// surrounding state as boundary data, leaves everything else unchanged.
// The linear variant solves the restricted rows directly; the obstacle
// variant runs projected Gauss-Seidel from the current values, which on a
// monotone system started at or above the local solution descends onto it.
Field local_lift(const Field& state, const Patch& patch, const BvpProblem& p);
Field local_lift_obstacle(const Field& state, const Patch& patch,
                          const ObstacleProblem& p, double tol = 1e-13);

enum class SweepDirection { Up, Down };

enum class ObstacleLiftMode {
  TwoTier,             // plain lifts on HalfBall patches inside the mask
  ObstacleEverywhere,  // obstacle lifts on every patch
};

struct SweepOptions {
  SweepDirection direction = SweepDirection::Up;  // bvp sweeps; obstacle is Down
  std::optional<Field> init;  // when absent: constant auto start (needs c0 > 0)
  double tol = 1e-8;          // stop when the sup change over a sweep drops here
  int max_sweeps = 500;
  const Field* reference = nullptr;  // tracks sup-gap when given
  double gap_stop = 0.0;             // > 0: also stop once the gap drops here
  ObstacleLiftMode lift_mode = ObstacleLiftMode::TwoTier;
  double mask_tol = 1e-10;   // continuation-region trigger for TwoTier
  double local_tol = 1e-13;  // obstacle patch solves
  bool use_coloring = false;  // colored schedule, threaded within a color
  int threads = 0;            // 0: DEGEN_THREADS cap
};

struct SweepRecord {
  int sweep = 0;
  double max_change = 0.0;
  double min_change = 0.0;
  double gap_to_reference = 0.0;  // NaN without a reference
};

struct SweepState {
  Field current;
  int sweep_index = 0;
  // Largest change against the sweep direction seen in any sweep; on
  // monotone systems this stays at roundoff scale.
  double monotone_violation = 0.0;
  double gap_to_reference = 0.0;  // NaN without a reference
  bool converged = false;
  int demoted_lifts = 0;  // TwoTier plain lifts rerun as obstacle lifts
  std::vector<SweepRecord> history;
};

// Repeated full passes of local lifts. Up starts from the constant
// 0 ^ (1/c0) inf f ^ inf g, Down from 0 v (1/c0) sup f v sup g (identity
// rows always carry g); either constant is an exact discrete sub- or
// supersolution because every non-identity row sum equals its c value.
// Throws solver_error when max_sweeps passes do not reach a stop.
SweepState perron_sweep_bvp(const BvpProblem& p, const std::vector<Patch>& patches,
                            const SweepOptions& opt = {});

// Downward-monotone obstacle version: obstacle lifts on Ball patches; in
// TwoTier mode HalfBall patches whose box sits inside the current
// continuation region get a plain lift, demoted to an obstacle lift if the
// result dips under psi. Auto start adds sup psi to the Down constant.
SweepState perron_sweep_obstacle(const ObstacleProblem& p,
                                 const std::vector<Patch>& patches,
                                 const SweepOptions& opt = {});

struct ComparisonReport {
  bool supersolution_ok = false;
  double min_residual = 0.0;   // of v over non-identity rows
  double min_slack_g = 0.0;    // min of v - g over identity rows
  double min_slack_psi = 0.0;  // min of v - psi (obstacle only, else +inf)
  bool pass = false;           // supersolution_ok and u <= v + tol nodewise
  double max_violation = 0.0;  // max of u - v
  int argmax_row = -1;
};

// Checks that v dominates the candidate after verifying v really is a
// discrete supersolution of the problem. Report-only.
ComparisonReport comparison_check(const Field& u_candidate, const Field& v_super,
                                  const BvpProblem& p, double tol = 1e-10);
ComparisonReport comparison_check(const Field& u_candidate, const Field& v_super,
                                  const ObstacleProblem& p, double tol = 1e-10);

}  // namespace degen
