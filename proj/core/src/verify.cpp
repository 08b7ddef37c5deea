#include "degen/verify.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace degen {

OracleReport make_oracle_report(std::string case_id, std::vector<double> oracle,
                                std::vector<double> candidate, double tolerance) {
  OracleReport rep;
  rep.case_id = std::move(case_id);
  rep.oracle_values = std::move(oracle);
  rep.candidate_values = std::move(candidate);
  rep.tolerance = tolerance;
  if (rep.oracle_values.size() != rep.candidate_values.size())
    throw std::invalid_argument("make_oracle_report: value count mismatch");
  for (std::size_t k = 0; k < rep.oracle_values.size(); ++k)
    rep.max_deviation = std::max(
        rep.max_deviation, std::abs(rep.oracle_values[k] - rep.candidate_values[k]));
  rep.pass = rep.max_deviation <= rep.tolerance;
  return rep;
}

Field brute_force_lcp(const StencilSystem& sys, const Field& f, const Field& g,
                      const Field& psi) {
  std::vector<int> free_rows;
  for (int i = 0; i < sys.n; ++i)
    if (!sys.rows[i].identity) free_rows.push_back(i);
  const int m = static_cast<int>(free_rows.size());
  if (m > 12)
    throw std::invalid_argument("brute_force_lcp: more than 12 free unknowns");

  std::vector<int> pos(sys.n, -1);
  for (int a = 0; a < m; ++a) pos[free_rows[a]] = a;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs(m), lo(m);
  for (int a = 0; a < m; ++a) {
    const StencilRow& row = sys.rows[free_rows[a]];
    A(a, a) = row.diag;
    double r = f[free_rows[a]];
    for (const auto& [col, w] : row.off) {
      if (pos[col] >= 0)
        A(a, pos[col]) += w;
      else
        r -= w * g[col];
    }
    rhs[a] = r;
    lo[a] = psi[free_rows[a]];
  }

  const double slack = 1e-12;
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    std::vector<int> inactive;
    for (int a = 0; a < m; ++a)
      if (!(mask >> a & 1u)) inactive.push_back(a);
    const int q = static_cast<int>(inactive.size());

    Eigen::VectorXd u(m);
    for (int a = 0; a < m; ++a) u[a] = lo[a];
    if (q > 0) {
      Eigen::MatrixXd Aii(q, q);
      Eigen::VectorXd ri(q);
      for (int p = 0; p < q; ++p) {
        double r = rhs[inactive[p]];
        for (int a = 0; a < m; ++a)
          if (mask >> a & 1u) r -= A(inactive[p], a) * lo[a];
        ri[p] = r;
        for (int s = 0; s < q; ++s) Aii(p, s) = A(inactive[p], inactive[s]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Aii);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd ui = lu.solve(ri);
      for (int p = 0; p < q; ++p) u[inactive[p]] = ui[p];
    }

    bool ok = true;
    for (int p = 0; p < q && ok; ++p)
      if (u[inactive[p]] < lo[inactive[p]] - slack) ok = false;
    const Eigen::VectorXd res = A * u - rhs;
    for (int a = 0; a < m && ok; ++a)
      if (mask >> a & 1u && res[a] < -slack) ok = false;
    if (!ok) continue;

    Field out(sys.n, 0.0);
    for (int i = 0; i < sys.n; ++i)
      out[i] = sys.rows[i].identity ? g[i] : u[pos[i]];
    return out;
  }
  throw solver_error(
      "brute_force_lcp: no active set is feasible; the assembled system is "
      "not a complementarity problem with a solution");
}

double boundary_layer_metric(const Field& u, const Grid& g) {
  if (!g.dom.degenerate_bottom())
    throw std::invalid_argument("boundary_layer_metric: no degenerate bottom face");
  if (g.n2 < 4)
    throw std::invalid_argument("boundary_layer_metric: need >= 3 layers above the face");
  const int j = 1;
  double out = 0.0;
  for (int i = 1; i < g.n1 - 1; ++i) {
    const double hxm = g.x1[i] - g.x1[i - 1], hxp = g.x1[i + 1] - g.x1[i];
    const double hym = g.x2[j] - g.x2[j - 1], hyp = g.x2[j + 1] - g.x2[j];
    auto U = [&](int a, int b) { return u[g.idx(a, b)]; };
    const double dxx = 2.0 * (hxm * U(i + 1, j) - (hxm + hxp) * U(i, j) +
                              hxp * U(i - 1, j)) /
                       (hxm * hxp * (hxm + hxp));
    const double dyy = 2.0 * (hym * U(i, j + 1) - (hym + hyp) * U(i, j) +
                              hyp * U(i, j - 1)) /
                       (hym * hyp * (hym + hyp));
    const double dxy = (U(i + 1, j + 1) - U(i - 1, j + 1) - U(i + 1, j - 1) +
                        U(i - 1, j - 1)) /
                       ((hxm + hxp) * (hym + hyp));
    const double mag = std::max({std::abs(dxx), std::abs(dyy), std::abs(dxy)});
    out = std::max(out, g.x2[j] * mag);
  }
  return out;
}

RegularityReport boundary_regularity_check(const std::vector<Field>& us,
                                           const std::vector<Grid>& gs) {
  if (us.size() != gs.size() || us.size() < 2)
    throw std::invalid_argument("boundary_regularity_check: need >= 2 paired levels");
  RegularityReport rep;
  for (std::size_t k = 0; k < us.size(); ++k) {
    RegularityEntry e;
    double hmax = 0.0;
    for (int j = 1; j < gs[k].n2; ++j)
      hmax = std::max(hmax, gs[k].x2[j] - gs[k].x2[j - 1]);
    e.h = hmax;
    e.value = boundary_layer_metric(us[k], gs[k]);
    rep.levels.push_back(e);
  }
  rep.decreasing = true;
  for (std::size_t k = 1; k < rep.levels.size(); ++k)
    if (!(rep.levels[k].value < rep.levels[k - 1].value)) rep.decreasing = false;
  return rep;
}

namespace {

// 3-point one-sided first derivative at y0 from values at y0, y0+h1,
// y0+h1+h2; second order on smooth data.
struct OneSided {
  double c0, c1, c2;
};

OneSided one_sided_weights(double h1, double h2) {
  return {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2),
          -h1 / (h2 * (h1 + h2))};
}

}  // namespace

ObliqueReport oblique_residual_check(const Field& u, const Field& f,
                                     const CoefficientSet& cs, const Grid& g) {
  ObliqueReport rep;
  if (g.n2 < 3)
    throw std::invalid_argument("oblique_residual_check: need 3 layers in x2");
  for (int i = 0; i < g.n1; ++i) {
    const int k = g.idx(i, 0);
    if (g.tag[k] != NodeTag::Degenerate) continue;
    const double h1 = g.x2[1] - g.x2[0], h2 = g.x2[2] - g.x2[1];
    const OneSided w = one_sided_weights(h1, h2);
    const double uy =
        w.c0 * u[g.idx(i, 0)] + w.c1 * u[g.idx(i, 1)] + w.c2 * u[g.idx(i, 2)];
    const double hxm = g.x1[i] - g.x1[i - 1], hxp = g.x1[i + 1] - g.x1[i];
    // central first difference, exact on quadratics over nonuniform spacing
    const double ux = (hxm * hxm * u[g.idx(i + 1, 0)] -
                       hxp * hxp * u[g.idx(i - 1, 0)] +
                       (hxp * hxp - hxm * hxm) * u[k]) /
                      (hxm * hxp * (hxm + hxp));
    const Eigen::Vector2d x = g.at(i, 0);
    const Eigen::Vector2d b = cs.b(x);
    const double res = -b[0] * ux - b[1] * uy + cs.c(x) * u[k] - f[k];
    ++rep.checked;
    if (std::abs(res) > rep.sup_residual) {
      rep.sup_residual = std::abs(res);
      rep.argmax = k;
    }
  }
  return rep;
}

double corner_compatibility_probe(const CoefficientSet& cs, const Field& f,
                                  const Grid& g, const Field& u) {
  double out = 0.0;
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      const int k = g.idx(i, j);
      if (g.tag[k] != NodeTag::Corner) continue;
      double ux;
      if (i == 0) {
        const double h1 = g.x1[1] - g.x1[0], h2 = g.x1[2] - g.x1[1];
        const OneSided w = one_sided_weights(h1, h2);
        ux = w.c0 * u[g.idx(0, j)] + w.c1 * u[g.idx(1, j)] + w.c2 * u[g.idx(2, j)];
      } else {
        const double h1 = g.x1[i] - g.x1[i - 1], h2 = g.x1[i - 1] - g.x1[i - 2];
        const OneSided w = one_sided_weights(h1, h2);
        ux = -(w.c0 * u[g.idx(i, j)] + w.c1 * u[g.idx(i - 1, j)] +
               w.c2 * u[g.idx(i - 2, j)]);
      }
      const Eigen::Vector2d x = g.at(i, j);
      const double res = -cs.b(x)[0] * ux + cs.c(x) * u[k] - f[k];
      out = std::max(out, std::abs(res));
    }
  }
  return out;
}

}  // namespace degen
