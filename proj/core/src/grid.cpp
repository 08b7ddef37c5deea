#include "degen/grid.hpp"

#include <cmath>

namespace degen {

const char* node_tag_name(NodeTag t) {
  switch (t) {
    case NodeTag::Interior: return "interior";
    case NodeTag::Degenerate: return "degenerate";
    case NodeTag::Dirichlet: return "dirichlet";
    case NodeTag::Corner: return "corner";
  }
  return "?";
}

DomainSpec DomainSpec::box(double x1lo, double x1hi, double x2lo, double x2hi) {
  DomainSpec d;
  d.kind = Kind::Box;
  d.lo = {x1lo, x2lo};
  d.hi = {x1hi, x2hi};
  return d;
}

DomainSpec DomainSpec::slab(double x1lo, double x1hi, double height) {
  DomainSpec d;
  d.kind = Kind::TruncatedSlab;
  d.lo = {x1lo, 0.0};
  d.hi = {x1hi, height};
  return d;
}

DomainSpec DomainSpec::half_ball_slab(double w1lo, double w1hi, double wd_hi) {
  if (wd_hi > M_PI / 2.0 + 1e-12)
    throw std::invalid_argument("half_ball_slab: w_d top must be <= pi/2");
  DomainSpec d;
  d.kind = Kind::HalfBallViaSlab;
  d.lo = {w1lo, 0.0};
  d.hi = {w1hi, wd_hi};
  return d;
}

std::vector<Eigen::VectorXd> Grid::all_coords() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(n());
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) out.push_back(at(i, j));
  return out;
}

static bool uniform_axis(const std::vector<double>& c) {
  if (c.size() < 3) return true;
  const double h = c[1] - c[0];
  for (size_t k = 2; k < c.size(); ++k)
    if (std::abs((c[k] - c[k - 1]) - h) > 1e-12 * std::max(1.0, std::abs(h))) return false;
  return true;
}

bool Grid::uniform1() const { return uniform_axis(x1); }
bool Grid::uniform2() const { return uniform_axis(x2); }

Grid build_grid(const DomainSpec& dom, int n1, int n2, double stretch) {
  if (n1 < 3 || n2 < 3)
    throw std::invalid_argument("build_grid: need at least 3 nodes per axis");
  if (!(dom.lo[0] < dom.hi[0]) || !(dom.lo[1] < dom.hi[1]))
    throw std::invalid_argument("build_grid: lo must be strictly below hi per axis");
  if (dom.degenerate_bottom() && dom.lo[1] != 0.0)
    throw std::invalid_argument("build_grid: degenerate face requires x2-lo == 0");
  if (!(stretch > 0.0))
    throw std::invalid_argument("build_grid: stretch must be positive");

  Grid g;
  g.dom = dom;
  g.n1 = n1;
  g.n2 = n2;
  g.x1.resize(n1);
  g.x2.resize(n2);
  for (int i = 0; i < n1; ++i)
    g.x1[i] = dom.lo[0] + (dom.hi[0] - dom.lo[0]) * i / double(n1 - 1);
  g.x1.back() = dom.hi[0];
  if (stretch == 1.0) {
    for (int j = 0; j < n2; ++j)
      g.x2[j] = dom.lo[1] + (dom.hi[1] - dom.lo[1]) * j / double(n2 - 1);
  } else {
    // Cell widths grow geometrically with ratio `stretch` away from x2-lo,
    // so stretch > 1 clusters nodes near the degenerate face.
    const int cells = n2 - 1;
    const double total = (std::pow(stretch, cells) - 1.0) / (stretch - 1.0);
    double acc = 0.0, w = 1.0;
    g.x2[0] = dom.lo[1];
    for (int j = 1; j < n2; ++j) {
      acc += w;
      w *= stretch;
      g.x2[j] = dom.lo[1] + (dom.hi[1] - dom.lo[1]) * acc / total;
    }
  }
  g.x2.back() = dom.hi[1];

  g.tag.resize(g.n());
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const bool side = (i == 0 || i == n1 - 1);
      const bool top = (j == n2 - 1);
      const bool bottom = (j == 0);
      NodeTag t;
      if (dom.degenerate_bottom() && bottom)
        t = side ? NodeTag::Corner : NodeTag::Degenerate;
      else if (side || top || bottom)
        t = NodeTag::Dirichlet;
      else
        t = NodeTag::Interior;
      g.tag[g.idx(i, j)] = t;
    }
  }
  return g;
}

}  // namespace degen
