#include "degen/stencil.hpp"

#include <cmath>
#include <sstream>

namespace degen {

double StencilRow::row_sum() const {
  double s = diag;
  for (const auto& [j, w] : off) s += w;
  return s;
}

namespace {

// Accumulates the 3x3 neighborhood of one row before emission.
struct RowAccum {
  double w[3][3] = {};  // [dj+1][di+1]
  double& at(int di, int dj) { return w[dj + 1][di + 1]; }
};

void emit(StencilSystem& sys, const Grid& g, int i, int j, RowAccum& acc, NodeTag cls) {
  StencilRow row;
  row.center = g.idx(i, j);
  row.cls = cls;
  row.diag = acc.at(0, 0);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (di == 0 && dj == 0) continue;
      const double v = acc.at(di, dj);
      if (v != 0.0) row.off.emplace_back(g.idx(i + di, j + dj), v);
    }
  sys.rows[row.center] = std::move(row);
}

[[noreturn]] void fail_degenerate_drift(const Grid& g, int i, double b2) {
  std::ostringstream os;
  os << "assemble_system: degenerate row at x1 = " << g.x1[i]
     << " needs b^2 > 0 for the one-sided closure, got " << b2;
  throw std::invalid_argument(os.str());
}

MonotoneFlags summarize(const StencilSystem& sys) {
  MonotoneFlags f{true, true, true};
  for (const auto& row : sys.rows) {
    if (!(row.diag > 0.0)) f.diag_positive = false;
    for (const auto& [j, w] : row.off)
      if (w > 1e-14) f.offdiag_nonpositive = false;
    if (row.row_sum() < -1e-12) f.rowsum_nonneg = false;
  }
  return f;
}

StencilSystem conjugate_gauged(const CoefficientSet& cs, const Grid& g,
                               AssemblyFault fault) {
  // v = e^{sigma x2} u turns L u = rhs into (E L E^{-1}) v = E rhs; realize
  // the gauged matrix as that exact conjugation so solves commute with the
  // gauge to solver precision.
  StencilSystem sys = assemble_system(*cs.gauge_base, g, fault);
  const double sigma = cs.gauge_sigma;
  for (auto& row : sys.rows) {
    if (row.identity) continue;
    const double yi = g.x2[row.center / g.n1];
    for (auto& [col, w] : row.off) {
      const double yj = g.x2[col / g.n1];
      w *= std::exp(sigma * (yi - yj));
    }
  }
  sys.mono = summarize(sys);
  return sys;
}

}  // namespace

StencilSystem assemble_system(const CoefficientSet& cs, const Grid& g,
                              AssemblyFault fault) {
  if (cs.dim != 2)
    throw std::invalid_argument("assemble_system: only 2d coefficient sets are assembled");
  if (cs.gauge_sigma != 0.0 && cs.gauge_base) return conjugate_gauged(cs, g, fault);

  StencilSystem sys;
  sys.n = g.n();
  sys.rows.resize(sys.n);

  const double drift_flip = (fault == AssemblyFault::FlipDegenerateDrift) ? -1.0 : 1.0;

  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      const NodeTag tag = g.tag[g.idx(i, j)];
      if (tag == NodeTag::Dirichlet || tag == NodeTag::Corner) {
        StencilRow row;
        row.center = g.idx(i, j);
        row.cls = tag;
        row.identity = true;
        row.diag = 1.0;
        sys.rows[row.center] = std::move(row);
        continue;
      }

      const Eigen::Vector2d x = g.at(i, j);
      const Eigen::Vector2d b = cs.b(x);
      const double c = cs.c(x);
      RowAccum acc;

      if (tag == NodeTag::Degenerate) {
        // -<b, D_h u> + c u; one-sided into the domain in x2.
        if (!(b[1] > 0.0)) fail_degenerate_drift(g, i, b[1]);
        const double hyp = g.x2[j + 1] - g.x2[j];
        acc.at(0, 0) += drift_flip * b[1] / hyp;
        acc.at(0, 1) -= drift_flip * b[1] / hyp;
        if (b[0] > 0.0) {
          const double hxp = g.x1[i + 1] - g.x1[i];
          acc.at(0, 0) += b[0] / hxp;
          acc.at(1, 0) -= b[0] / hxp;
        } else if (b[0] < 0.0) {
          const double hxm = g.x1[i] - g.x1[i - 1];
          acc.at(0, 0) -= b[0] / hxm;
          acc.at(-1, 0) += b[0] / hxm;
        }
        acc.at(0, 0) += c;
        emit(sys, g, i, j, acc, tag);
        continue;
      }

      // Interior row.
      const Eigen::Matrix2d a = cs.a(x);
      if (std::abs(a(0, 1) - a(1, 0)) > 1e-14)
        throw std::invalid_argument("assemble_system: a is not symmetric");
      const double x2 = x[1];
      const double hxm = g.x1[i] - g.x1[i - 1], hxp = g.x1[i + 1] - g.x1[i];
      const double hym = g.x2[j] - g.x2[j - 1], hyp = g.x2[j + 1] - g.x2[j];

      const double ax = x2 * a(0, 0);
      acc.at(-1, 0) += -2.0 * ax / (hxm * (hxm + hxp));
      acc.at(1, 0) += -2.0 * ax / (hxp * (hxm + hxp));
      acc.at(0, 0) += 2.0 * ax / (hxm * hxp);

      const double ay = x2 * a(1, 1);
      acc.at(0, -1) += -2.0 * ay / (hym * (hym + hyp));
      acc.at(0, 1) += -2.0 * ay / (hyp * (hym + hyp));
      acc.at(0, 0) += 2.0 * ay / (hym * hyp);

      const double mu = x2 * a(0, 1);
      if (mu > 0.0) {
        // Tilted corners along the (+,+)/(-,-) diagonal keep the corner
        // weights nonpositive for a^{12} > 0.
        const double wp = mu / (hxp * hyp), wm = mu / (hxm * hym);
        acc.at(1, 1) -= wp;
        acc.at(1, 0) += wp;
        acc.at(0, 1) += wp;
        acc.at(0, 0) -= wp;
        acc.at(-1, -1) -= wm;
        acc.at(-1, 0) += wm;
        acc.at(0, -1) += wm;
        acc.at(0, 0) -= wm;
      } else if (mu < 0.0) {
        const double wp = mu / (hxm * hyp), wm = mu / (hxp * hym);
        acc.at(-1, 1) += wp;
        acc.at(0, 1) -= wp;
        acc.at(-1, 0) -= wp;
        acc.at(0, 0) += wp;
        acc.at(1, -1) += wm;
        acc.at(0, -1) -= wm;
        acc.at(1, 0) -= wm;
        acc.at(0, 0) += wm;
      }

      // Drift: central while the row keeps nonpositive neighbor weights,
      // else first-order upwind.
      auto add_drift = [&acc](double bv, double hm, double hp, bool xdir) {
        if (bv == 0.0) return;
        auto& wm = xdir ? acc.at(-1, 0) : acc.at(0, -1);
        auto& wp = xdir ? acc.at(1, 0) : acc.at(0, 1);
        const double cm = bv * hp / (hm * (hm + hp));
        const double cp = -bv * hm / (hp * (hm + hp));
        if (wm + cm <= 0.0 && wp + cp <= 0.0) {
          wm += cm;
          wp += cp;
          acc.at(0, 0) += -bv * (hp - hm) / (hm * hp);
        } else if (bv > 0.0) {
          acc.at(0, 0) += bv / hp;
          wp -= bv / hp;
        } else {
          acc.at(0, 0) -= bv / hm;
          wm += bv / hm;
        }
      };
      add_drift(b[0], hxm, hxp, true);
      add_drift(b[1], hym, hyp, false);

      acc.at(0, 0) += c;
      emit(sys, g, i, j, acc, tag);
    }
  }
  sys.mono = summarize(sys);
  return sys;
}

MonotonicityReport monotonicity_check(const StencilSystem& sys) {
  MonotonicityReport rep;
  for (int i = 0; i < sys.n; ++i) {
    const auto& row = sys.rows[i];
    if (!(row.diag > 0.0))
      rep.violations.push_back({i, "diag", row.diag});
    for (const auto& [j, w] : row.off)
      if (w > 1e-14) rep.violations.push_back({i, "offdiag", w});
    const double rs = row.row_sum();
    if (rs < -1e-12) rep.violations.push_back({i, "rowsum", rs});
  }
  rep.flags = summarize(sys);
  rep.pass = rep.violations.empty();
  return rep;
}

Field apply_system(const StencilSystem& sys, const Field& u) {
  Field out(sys.n, 0.0);
  for (int i = 0; i < sys.n; ++i) {
    const auto& row = sys.rows[i];
    double v = row.diag * u[i];
    for (const auto& [j, w] : row.off) v += w * u[j];
    out[i] = v;
  }
  return out;
}

Field discrete_residual(const StencilSystem& sys, const Field& u, const Field& rhs) {
  Field r = apply_system(sys, u);
  for (int i = 0; i < sys.n; ++i) r[i] -= rhs[i];
  return r;
}

}  // namespace degen
