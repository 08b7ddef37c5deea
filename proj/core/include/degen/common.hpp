#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace degen {

// Node-indexed scalar field. Layout follows Grid::idx (x1-major).
using Field = std::vector<double>;

// Iterative method ran out of budget or a factorization failed.
// residual_history holds the per-sweep sup-norm residuals when available.
struct solver_error : std::runtime_error {
  std::vector<double> residual_history;
  explicit solver_error(const std::string& msg, std::vector<double> hist = {})
      : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

// Point is inside the excluded zone of the half-ball chart (the corner
// sphere {|x|=1, x_d=0} or the puncture e_1), where the map degenerates.
struct corner_point_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline double sup_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

// Thread cap from DEGEN_THREADS (>=1); 1 when unset or unparsable.
int env_thread_cap();

}  // namespace degen
