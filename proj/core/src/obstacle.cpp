#include "degen/obstacle.hpp"

#include <Eigen/SparseLU>
#include <sstream>

namespace degen {

ObstacleProblem::ObstacleProblem(StencilSystem sys_, Field f_, Field g_, Field psi_)
    : sys(std::move(sys_)), f(std::move(f_)), g(std::move(g_)), psi(std::move(psi_)) {
  if (static_cast<int>(f.size()) != sys.n || static_cast<int>(g.size()) != sys.n ||
      static_cast<int>(psi.size()) != sys.n)
    throw std::invalid_argument("ObstacleProblem: field sizes must match the system");
  for (int i = 0; i < sys.n; ++i) {
    if (sys.rows[i].identity && psi[i] > g[i]) {
      std::ostringstream os;
      os << "ObstacleProblem: obstacle exceeds Dirichlet data at row " << i
         << " (psi = " << psi[i] << ", g = " << g[i] << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

Field ObstacleProblem::rhs() const {
  Field r(sys.n, 0.0);
  for (int i = 0; i < sys.n; ++i) r[i] = sys.rows[i].identity ? g[i] : f[i];
  return r;
}

double payoff(PayoffKind kind, double strike, double x1) {
  if (!(strike > 0.0)) throw std::invalid_argument("payoff: strike must be positive");
  const double s = std::exp(x1);
  return kind == PayoffKind::Put ? std::max(strike - s, 0.0) : std::max(s - strike, 0.0);
}

Field mollify_obstacle(const Field& psi, double delta, double C, const Grid& g) {
  if (static_cast<int>(psi.size()) != g.n())
    throw std::invalid_argument("mollify_obstacle: field size must match the grid");
  if (!(delta > 0.0) || C < 0.0)
    throw std::invalid_argument("mollify_obstacle: need delta > 0 and C >= 0");
  double hmax = 0.0;
  for (int i = 1; i < g.n1; ++i) hmax = std::max(hmax, g.x1[i] - g.x1[i - 1]);
  for (int j = 1; j < g.n2; ++j) hmax = std::max(hmax, g.x2[j] - g.x2[j - 1]);
  if (delta < hmax) {
    std::ostringstream os;
    os << "mollify_obstacle: kernel radius " << delta
       << " is unresolved by the node spacing " << hmax;
    throw std::invalid_argument(os.str());
  }

  auto quad = [C](const Eigen::Vector2d& x) { return 0.5 * C * x.squaredNorm(); };
  Field lifted(g.n());
  for (int k = 0; k < g.n(); ++k) lifted[k] = psi[k] + quad(g.at(k));

  Field out(g.n());
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      const Eigen::Vector2d x0 = g.at(i, j);
      double acc = 0.0, norm = 0.0;
      for (int q = 0; q < g.n2; ++q) {
        if (std::abs(g.x2[q] - x0[1]) >= delta) continue;
        for (int p = 0; p < g.n1; ++p) {
          const double r2 = (g.at(p, q) - x0).squaredNorm() / (delta * delta);
          if (r2 >= 1.0) continue;
          const double w = std::exp(-1.0 / (1.0 - r2));
          acc += w * lifted[g.idx(p, q)];
          norm += w;
        }
      }
      out[g.idx(i, j)] = acc / norm - quad(x0);
    }
  }
  return out;
}

namespace {

// Per-row complementarity defect; rhs carries g on identity rows.
double lcp_residual(const ObstacleProblem& p, const Field& u) {
  double r = 0.0;
  for (int i = 0; i < p.sys.n; ++i) {
    const auto& row = p.sys.rows[i];
    if (row.identity) continue;
    double res = row.diag * u[i] - p.f[i];
    for (const auto& [j, w] : row.off) res += w * u[j];
    const double slack = u[i] - p.psi[i];
    double v = std::abs(std::min(res, slack));
    v = std::max(v, std::max(0.0, -slack));
    v = std::max(v, std::max(0.0, -res));
    r = std::max(r, v);
  }
  return r;
}

}  // namespace

double complementarity_residual(const ObstacleProblem& p, const Field& u) {
  if (static_cast<int>(u.size()) != p.sys.n)
    throw std::invalid_argument("complementarity_residual: size mismatch");
  return lcp_residual(p, u);
}

Field solve_lcp_psor(const ObstacleProblem& p, const LcpOptions& opt, LcpStats* stats) {
  if (!(opt.omega > 0.0 && opt.omega < 2.0))
    throw std::invalid_argument("solve_lcp_psor: need 0 < omega < 2");
  if (!monotonicity_check(p.sys).pass)
    throw std::invalid_argument(
        "solve_lcp_psor: system fails the monotonicity check the projection "
        "iteration relies on");
  LcpStats local;
  LcpStats& st = stats ? *stats : local;
  st = LcpStats{};

  Field u(p.sys.n);
  for (int i = 0; i < p.sys.n; ++i)
    u[i] = p.sys.rows[i].identity ? p.g[i] : std::max(p.psi[i], 0.0);

  for (int sweep = 1; sweep <= opt.max_iter; ++sweep) {
    for (int i = 0; i < p.sys.n; ++i) {
      const auto& row = p.sys.rows[i];
      if (row.identity) continue;
      double v = p.f[i] - row.diag * u[i];
      for (const auto& [j, w] : row.off) v -= w * u[j];
      u[i] = std::max(p.psi[i], u[i] + opt.omega * v / row.diag);
    }
    const double res = lcp_residual(p, u);
    st.residual_history.push_back(res);
    if (res <= opt.tol) {
      st.iterations = sweep;
      st.final_residual = res;
      return u;
    }
  }
  throw solver_error("solve_lcp_psor: residual did not reach tol within max_iter",
                     st.residual_history);
}

Field solve_penalized(const ObstacleProblem& p, const PenaltyOptions& opt,
                      PenaltyStats* stats) {
  if (opt.eps_schedule.empty())
    throw std::invalid_argument("solve_penalized: empty epsilon schedule");
  for (std::size_t k = 0; k < opt.eps_schedule.size(); ++k) {
    if (!(opt.eps_schedule[k] > 0.0) ||
        (k > 0 && !(opt.eps_schedule[k] < opt.eps_schedule[k - 1])))
      throw std::invalid_argument(
          "solve_penalized: schedule must be positive and strictly decreasing");
  }
  PenaltyStats local;
  PenaltyStats& st = stats ? *stats : local;
  st = PenaltyStats{};

  const Eigen::SparseMatrix<double> L = to_sparse(p.sys);
  Field u(p.sys.n, 0.0);
  for (int i = 0; i < p.sys.n; ++i)
    if (p.sys.rows[i].identity) u[i] = p.g[i];

  auto semis_residual = [&](const Field& v, const PenaltySpec& pen, Field& out) {
    double sup = 0.0;
    for (int i = 0; i < p.sys.n; ++i) {
      const auto& row = p.sys.rows[i];
      if (row.identity) {
        out[i] = 0.0;
        continue;
      }
      double r = row.diag * v[i] - p.f[i] + pen.beta(v[i] - p.psi[i]);
      for (const auto& [j, w] : row.off) r += w * v[j];
      out[i] = r;
      sup = std::max(sup, std::abs(r));
    }
    return sup;
  };

  Field Fbuf(p.sys.n, 0.0), trial(p.sys.n, 0.0);
  for (double eps : opt.eps_schedule) {
    const PenaltySpec pen{eps};
    double fnorm = semis_residual(u, pen, Fbuf);
    int it = 0;
    while (fnorm > opt.tol && it < opt.max_newton) {
      Eigen::SparseMatrix<double> J = L;
      for (int i = 0; i < p.sys.n; ++i) {
        if (p.sys.rows[i].identity) continue;
        J.coeffRef(i, i) += pen.beta_prime(u[i] - p.psi[i]);
      }
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success)
        throw solver_error("solve_penalized: singular Newton system",
                           st.residual_history);
      Eigen::VectorXd rhs(p.sys.n);
      for (int i = 0; i < p.sys.n; ++i) rhs[i] = -Fbuf[i];
      const Eigen::VectorXd d = lu.solve(rhs);

      double step = 1.0;
      double fnew = 0.0;
      while (true) {
        for (int i = 0; i < p.sys.n; ++i) trial[i] = u[i] + step * d[i];
        fnew = semis_residual(trial, pen, Fbuf);
        if (fnew < fnorm || step < 1e-6) break;
        step *= 0.5;
      }
      if (fnew >= fnorm) {
        st.residual_history.push_back(fnew);
        throw solver_error("solve_penalized: Newton stalled at residual " +
                               std::to_string(fnew),
                           st.residual_history);
      }
      u = trial;
      fnorm = fnew;
      st.residual_history.push_back(fnorm);
      ++it;
      ++st.newton_total;
    }
    if (fnorm > opt.tol)
      throw solver_error("solve_penalized: Newton did not converge for eps = " +
                             std::to_string(eps),
                         st.residual_history);
    st.final_residual = fnorm;
  }
  return u;
}

int RegionMask::continuation_count() const {
  int n = 0;
  for (bool b : continuation) n += b ? 1 : 0;
  return n;
}

int RegionMask::coincidence_count() const {
  int n = 0;
  for (bool b : coincidence) n += b ? 1 : 0;
  return n;
}

RegionMask continuation_region(const Field& u, const Field& psi, double tol,
                               const StencilSystem* sys) {
  if (u.size() != psi.size())
    throw std::invalid_argument("continuation_region: size mismatch");
  const int n = static_cast<int>(u.size());
  RegionMask m;
  m.continuation.assign(n, false);
  m.coincidence.assign(n, false);
  for (int i = 0; i < n; ++i) {
    if (sys && sys->rows[i].identity) continue;
    if (u[i] - psi[i] > tol)
      m.continuation[i] = true;
    else
      m.coincidence[i] = true;
  }
  return m;
}

}  // namespace degen
