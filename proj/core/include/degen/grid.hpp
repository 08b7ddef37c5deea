#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "degen/common.hpp"

namespace degen {

// Exactly one tag per node. Degenerate nodes sit on the x2 = 0 face with no
// Dirichlet data; Corner nodes are the intersection of that face with a
// Dirichlet face and behave as Dirichlet rows.
enum class NodeTag : std::uint8_t { Interior, Degenerate, Dirichlet, Corner };

const char* node_tag_name(NodeTag t);

// Rectangles in (x1, x2). Box carries Dirichlet data on all four faces.
// The slab kinds leave the bottom face (x2 = 0, required) degenerate and put
// Dirichlet data on the other three. HalfBallViaSlab is a slab in chart
// coordinates (w1, w_d), w_d-top at most pi/2.
struct DomainSpec {
  enum class Kind { Box, TruncatedSlab, HalfBallViaSlab };
  Kind kind = Kind::Box;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  bool degenerate_bottom() const { return kind != Kind::Box; }
  double height() const { return hi[1] - lo[1]; }

  static DomainSpec box(double x1lo, double x1hi, double x2lo, double x2hi);
  // x2 runs over [0, height].
  static DomainSpec slab(double x1lo, double x1hi, double height);
  static DomainSpec half_ball_slab(double w1lo, double w1hi, double wd_hi);
};

// Tensor-product grid with tagged nodes, x1-major node order.
struct Grid {
  DomainSpec dom;
  int n1 = 0, n2 = 0;
  std::vector<double> x1, x2;    // strictly increasing axis coordinates
  std::vector<NodeTag> tag;      // n1 * n2 entries

  int n() const { return n1 * n2; }
  int idx(int i, int j) const { return i + n1 * j; }
  Eigen::Vector2d at(int i, int j) const { return {x1[i], x2[j]}; }
  Eigen::Vector2d at(int k) const { return at(k % n1, k / n1); }
  std::vector<Eigen::VectorXd> all_coords() const;
  bool uniform1() const;
  bool uniform2() const;
};

// n1, n2 >= 3. stretch is the geometric cell-growth ratio away from x2 = lo
// (1 = uniform); x1 is always uniform. Throws on degenerate bounds or bad
// sizes.
Grid build_grid(const DomainSpec& dom, int n1, int n2, double stretch = 1.0);

}  // namespace degen
