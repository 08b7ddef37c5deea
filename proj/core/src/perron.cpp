#include "degen/perron.hpp"

#include <Eigen/SparseLU>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>
#include <unordered_map>

namespace degen {

namespace {

std::vector<int> axis_starts(int n, int width, int stride) {
  std::vector<int> s;
  const int last = n - width;
  for (int k = 0;; ++k) {
    const int v = std::min(k * stride, last);
    s.push_back(v);
    if (v == last) break;
  }
  return s;
}

bool artificial_face(const Grid& g, const Patch& p, int i, int j) {
  const int i1 = p.i0 + p.ni - 1, j1 = p.j0 + p.nj - 1;
  return (i == p.i0 && p.i0 > 0) || (i == i1 && i1 < g.n1 - 1) ||
         (j == p.j0 && p.j0 > 0) || (j == j1 && j1 < g.n2 - 1);
}

std::vector<Patch> tile(const Grid& g, int wx, int wy, int sx, int sy, int overlap) {
  std::vector<Patch> out;
  for (int js : axis_starts(g.n2, wy, sy)) {
    for (int is : axis_starts(g.n1, wx, sx)) {
      Patch p;
      p.i0 = is;
      p.j0 = js;
      p.ni = wx;
      p.nj = wy;
      p.overlap = overlap;
      bool degicity = false;
      for (int j = js; j < js + wy; ++j)
        for (int i = is; i < is + wx; ++i) {
          const int k = g.idx(i, j);
          p.nodes.push_back(k);
          const NodeTag t = g.tag[k];
          if ((t == NodeTag::Interior || t == NodeTag::Degenerate) &&
              !artificial_face(g, p, i, j)) {
            p.solved.push_back(k);
            if (t == NodeTag::Degenerate) degicity = true;
          }
        }
      p.kind = degicity ? Patch::Kind::HalfBall : Patch::Kind::Ball;
      out.push_back(std::move(p));
    }
  }
  return out;
}

bool covers(const Grid& g, const std::vector<Patch>& patches) {
  std::vector<char> hit(g.n(), 0);
  for (const auto& p : patches)
    for (int k : p.solved) hit[k] = 1;
  for (int k = 0; k < g.n(); ++k) {
    const NodeTag t = g.tag[k];
    if ((t == NodeTag::Interior || t == NodeTag::Degenerate) && !hit[k]) return false;
  }
  return true;
}

}  // namespace

std::vector<Patch> make_patches(const Grid& g, int radius_nodes, int overlap_nodes) {
  if (radius_nodes < 2) throw std::invalid_argument("make_patches: radius must be >= 2");
  if (overlap_nodes < 1) throw std::invalid_argument("make_patches: overlap must be >= 1");
  const int wx = std::min(2 * radius_nodes - 1, g.n1);
  const int wy = std::min(2 * radius_nodes - 1, g.n2);
  if (overlap_nodes >= std::min(wx, wy))
    throw std::invalid_argument("make_patches: overlap must be under the patch width");
  int sx = wx - overlap_nodes, sy = wy - overlap_nodes;
  while (true) {
    std::vector<Patch> patches = tile(g, wx, wy, sx, sy, overlap_nodes);
    if (covers(g, patches)) return patches;
    if (sx > 1)
      --sx;
    else if (sy > 1)
      --sy;
    else
      throw std::logic_error("make_patches: unit stride failed to cover");
  }
}

namespace {

// Restricted linear system of one patch: the solved rows over the solved
// columns, prefactored; weights reaching outside become rhs contributions.
struct LocalLinear {
  std::vector<int> solved;
  std::vector<std::vector<std::pair<int, double>>> outside;  // per local row
  std::vector<double> fvals;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
};

LocalLinear build_local(const StencilSystem& sys, const Field& f, const Patch& patch) {
  LocalLinear loc;
  loc.solved = patch.solved;
  const int m = static_cast<int>(loc.solved.size());
  std::unordered_map<int, int> l_of_g;
  l_of_g.reserve(loc.solved.size() * 2);
  for (int a = 0; a < m; ++a) l_of_g.emplace(loc.solved[a], a);

  loc.outside.resize(m);
  loc.fvals.resize(m);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 9);
  for (int a = 0; a < m; ++a) {
    const StencilRow& row = sys.rows[loc.solved[a]];
    trip.emplace_back(a, a, row.diag);
    loc.fvals[a] = f[loc.solved[a]];
    for (const auto& [col, w] : row.off) {
      auto it = l_of_g.find(col);
      if (it != l_of_g.end())
        trip.emplace_back(a, it->second, w);
      else
        loc.outside[a].emplace_back(col, w);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  loc.lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  loc.lu->compute(A);
  if (loc.lu->info() != Eigen::Success)
    throw solver_error("local_lift: patch factorization failed");
  return loc;
}

void lift_linear(const LocalLinear& loc, Field& state) {
  const int m = static_cast<int>(loc.solved.size());
  Eigen::VectorXd rhs(m);
  for (int a = 0; a < m; ++a) {
    double v = loc.fvals[a];
    for (const auto& [col, w] : loc.outside[a]) v -= w * state[col];
    rhs[a] = v;
  }
  const Eigen::VectorXd x = loc.lu->solve(rhs);
  for (int a = 0; a < m; ++a) state[loc.solved[a]] = x[a];
}

// In-place projected Gauss-Seidel over the patch's solved rows, omega 1.
// Started at or above the local solution of a monotone system the sweep
// map is order-preserving, so iterates descend onto it and never overshoot
// by more than the residual tolerance allows.
void lift_obstacle_gs(const StencilSystem& sys, const Field& f, const Field& psi,
                      const std::vector<int>& solved, Field& state, double tol) {
  const int max_inner = 500000;
  for (int it = 0; it < max_inner; ++it) {
    for (int r : solved) {
      const StencilRow& row = sys.rows[r];
      double v = f[r] - row.diag * state[r];
      for (const auto& [col, w] : row.off) v -= w * state[col];
      state[r] = std::max(psi[r], state[r] + v / row.diag);
    }
    double res = 0.0;
    for (int r : solved) {
      const StencilRow& row = sys.rows[r];
      double rr = row.diag * state[r] - f[r];
      for (const auto& [col, w] : row.off) rr += w * state[col];
      const double slack = state[r] - psi[r];
      double val = std::abs(std::min(rr, slack));
      val = std::max(val, std::max(0.0, -slack));
      val = std::max(val, std::max(0.0, -rr));
      res = std::max(res, val);
    }
    if (res <= tol) return;
  }
  throw solver_error("local_lift_obstacle: patch iteration did not converge");
}

// Auto constants. Row sums of non-identity rows reproduce the zeroth-order
// coefficient exactly (the difference weights cancel), so these constants
// are discrete sub/supersolutions up to roundoff, not just up to O(h).
double auto_constant(const StencilSystem& sys, const Field& f, const Field& g,
                     const Field* psi, SweepDirection dir) {
  const bool down = dir == SweepDirection::Down;
  double M = 0.0;
  for (int i = 0; i < sys.n; ++i) {
    const StencilRow& row = sys.rows[i];
    if (row.identity) {
      M = down ? std::max(M, g[i]) : std::min(M, g[i]);
      continue;
    }
    const double rs = row.row_sum();
    if (rs > 1e-9) {
      M = down ? std::max(M, f[i] / rs) : std::min(M, f[i] / rs);
    } else if (down ? (f[i] > 0.0) : (f[i] < 0.0)) {
      throw std::invalid_argument(
          "perron sweep: auto start needs a positive zeroth-order row sum "
          "wherever f pushes past zero");
    }
  }
  if (psi && down)
    for (int i = 0; i < sys.n; ++i) M = std::max(M, (*psi)[i]);
  return M;
}

struct PatchSchedule {
  // color classes in execution order; each class holds patch indices whose
  // boxes are pairwise disjoint, so lifts within a class commute
  std::vector<std::vector<int>> classes;
};

bool boxes_touch(const Patch& a, const Patch& b) {
  const bool xi = a.i0 <= b.i0 + b.ni - 1 && b.i0 <= a.i0 + a.ni - 1;
  const bool yj = a.j0 <= b.j0 + b.nj - 1 && b.j0 <= a.j0 + a.nj - 1;
  return xi && yj;
}

PatchSchedule schedule_patches(const std::vector<Patch>& patches, bool use_coloring) {
  PatchSchedule s;
  const int n = static_cast<int>(patches.size());
  if (!use_coloring) {
    s.classes.emplace_back();
    for (int k = 0; k < n; ++k) s.classes.back().push_back(k);
    return s;
  }
  std::vector<int> color(n, -1);
  for (int k = 0; k < n; ++k) {
    std::vector<char> used;
    for (int m = 0; m < k; ++m)
      if (boxes_touch(patches[k], patches[m])) {
        if (static_cast<int>(used.size()) <= color[m]) used.resize(color[m] + 1, 0);
        used[color[m]] = 1;
      }
    int c = 0;
    while (c < static_cast<int>(used.size()) && used[c]) ++c;
    color[k] = c;
    if (static_cast<int>(s.classes.size()) <= c) s.classes.resize(c + 1);
    s.classes[c].push_back(k);
  }
  return s;
}

struct SweepDriver {
  const StencilSystem& sys;
  const Field& f;
  const Field& g;
  const Field* psi;  // null for the linear sweep
  const std::vector<Patch>& patches;
  const SweepOptions& opt;
  SweepDirection dir;

  std::vector<LocalLinear> lin;
  std::vector<char> lin_ready;
  std::atomic<int> demoted{0};

  SweepDriver(const StencilSystem& s, const Field& f_, const Field& g_,
              const Field* psi_, const std::vector<Patch>& pat, const SweepOptions& o,
              SweepDirection d)
      : sys(s), f(f_), g(g_), psi(psi_), patches(pat), opt(o), dir(d) {
    lin.resize(patches.size());
    lin_ready.assign(patches.size(), 0);
  }

  LocalLinear& linear_for(int k) {
    if (!lin_ready[k]) {
      lin[k] = build_local(sys, f, patches[k]);
      lin_ready[k] = 1;
    }
    return lin[k];
  }

  void lift_one(int k, Field& state, const std::vector<char>* mask) {
    const Patch& p = patches[k];
    if (!psi) {
      lift_linear(linear_for(k), state);
      return;
    }
    bool plain = false;
    if (mask && p.kind == Patch::Kind::HalfBall) {
      plain = true;
      for (int node : p.nodes)
        if (!(*mask)[node]) {
          plain = false;
          break;
        }
    }
    if (plain) {
      std::vector<double> saved(p.solved.size());
      for (std::size_t a = 0; a < p.solved.size(); ++a) saved[a] = state[p.solved[a]];
      lift_linear(linear_for(k), state);
      for (std::size_t a = 0; a < p.solved.size(); ++a)
        if (state[p.solved[a]] < (*psi)[p.solved[a]] - 1e-12) {
          for (std::size_t b = 0; b < p.solved.size(); ++b)
            state[p.solved[b]] = saved[b];
          lift_obstacle_gs(sys, f, *psi, p.solved, state, opt.local_tol);
          demoted.fetch_add(1, std::memory_order_relaxed);
          return;
        }
      return;
    }
    lift_obstacle_gs(sys, f, *psi, p.solved, state, opt.local_tol);
  }

  SweepState run() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Field state;
    if (opt.init) {
      if (static_cast<int>(opt.init->size()) != sys.n)
        throw std::invalid_argument("perron sweep: init size mismatch");
      state = *opt.init;
    } else {
      state.assign(sys.n, auto_constant(sys, f, g, psi, dir));
    }
    for (int i = 0; i < sys.n; ++i)
      if (sys.rows[i].identity) state[i] = g[i];

    const PatchSchedule sched = schedule_patches(patches, opt.use_coloring);
    int nthreads = opt.threads > 0 ? opt.threads : env_thread_cap();
    if (!opt.use_coloring) nthreads = 1;

    SweepState st;
    st.gap_to_reference = nan;
    Field prev = state;
    std::vector<char> mask;
    const bool two_tier = psi && opt.lift_mode == ObstacleLiftMode::TwoTier;

    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
      if (two_tier) {
        mask.assign(sys.n, 0);
        for (int i = 0; i < sys.n; ++i)
          if (state[i] - (*psi)[i] > opt.mask_tol) mask[i] = 1;
      }
      for (const auto& cls : sched.classes) {
        const int nt = std::min<int>(nthreads, static_cast<int>(cls.size()));
        if (nt <= 1) {
          for (int k : cls) lift_one(k, state, two_tier ? &mask : nullptr);
        } else {
          std::vector<std::thread> pool;
          std::vector<std::exception_ptr> errs(nt);
          pool.reserve(nt);
          for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
              try {
                for (std::size_t q = t; q < cls.size(); q += nt)
                  lift_one(cls[q], state, two_tier ? &mask : nullptr);
              } catch (...) {
                errs[t] = std::current_exception();
              }
            });
          for (auto& th : pool) th.join();
          for (const auto& e : errs)
            if (e) std::rethrow_exception(e);
        }
      }

      SweepRecord rec;
      rec.sweep = sweep;
      rec.max_change = -std::numeric_limits<double>::infinity();
      rec.min_change = std::numeric_limits<double>::infinity();
      for (int i = 0; i < sys.n; ++i) {
        const double d = state[i] - prev[i];
        rec.max_change = std::max(rec.max_change, d);
        rec.min_change = std::min(rec.min_change, d);
      }
      rec.gap_to_reference = nan;
      if (opt.reference) {
        double gap = 0.0;
        for (int i = 0; i < sys.n; ++i)
          gap = std::max(gap, std::abs(state[i] - (*opt.reference)[i]));
        rec.gap_to_reference = gap;
      }
      st.history.push_back(rec);
      st.sweep_index = sweep;
      const double wrong = dir == SweepDirection::Up ? std::max(0.0, -rec.min_change)
                                                     : std::max(0.0, rec.max_change);
      st.monotone_violation = std::max(st.monotone_violation, wrong);

      const double sup_change =
          std::max(std::abs(rec.max_change), std::abs(rec.min_change));
      const bool gap_done = opt.gap_stop > 0.0 && opt.reference &&
                            rec.gap_to_reference <= opt.gap_stop;
      if (sup_change <= opt.tol || gap_done) {
        st.converged = true;
        st.current = std::move(state);
        st.gap_to_reference = rec.gap_to_reference;
        st.demoted_lifts = demoted.load();
        return st;
      }
      prev = state;
    }
    std::vector<double> changes;
    for (const auto& r : st.history)
      changes.push_back(std::max(std::abs(r.max_change), std::abs(r.min_change)));
    throw solver_error("perron sweep: no stop within max_sweeps", changes);
  }
};

}  // namespace

Field local_lift(const Field& state, const Patch& patch, const BvpProblem& p) {
  Field out = state;
  LocalLinear loc = build_local(p.sys, p.f, patch);
  lift_linear(loc, out);
  return out;
}

Field local_lift_obstacle(const Field& state, const Patch& patch,
                          const ObstacleProblem& p, double tol) {
  Field out = state;
  lift_obstacle_gs(p.sys, p.f, p.psi, patch.solved, out, tol);
  return out;
}

SweepState perron_sweep_bvp(const BvpProblem& p, const std::vector<Patch>& patches,
                            const SweepOptions& opt) {
  SweepDriver drv(p.sys, p.f, p.g, nullptr, patches, opt, opt.direction);
  return drv.run();
}

SweepState perron_sweep_obstacle(const ObstacleProblem& p,
                                 const std::vector<Patch>& patches,
                                 const SweepOptions& opt) {
  SweepDriver drv(p.sys, p.f, p.g, &p.psi, patches, opt, SweepDirection::Down);
  return drv.run();
}

namespace {

ComparisonReport compare_impl(const Field& u, const Field& v, const StencilSystem& sys,
                              const Field& f, const Field& g, const Field* psi,
                              double tol) {
  ComparisonReport rep;
  rep.min_residual = std::numeric_limits<double>::infinity();
  rep.min_slack_g = std::numeric_limits<double>::infinity();
  rep.min_slack_psi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sys.n; ++i) {
    const StencilRow& row = sys.rows[i];
    if (row.identity) {
      rep.min_slack_g = std::min(rep.min_slack_g, v[i] - g[i]);
    } else {
      double r = row.diag * v[i] - f[i];
      for (const auto& [col, w] : row.off) r += w * v[col];
      rep.min_residual = std::min(rep.min_residual, r);
    }
    if (psi) rep.min_slack_psi = std::min(rep.min_slack_psi, v[i] - (*psi)[i]);
  }
  rep.supersolution_ok = rep.min_residual >= -tol && rep.min_slack_g >= -tol &&
                         (!psi || rep.min_slack_psi >= -tol);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < sys.n; ++i) {
    const double d = u[i] - v[i];
    if (d > rep.max_violation) {
      rep.max_violation = d;
      rep.argmax_row = i;
    }
  }
  rep.pass = rep.supersolution_ok && rep.max_violation <= tol;
  return rep;
}

}  // namespace

ComparisonReport comparison_check(const Field& u_candidate, const Field& v_super,
                                  const BvpProblem& p, double tol) {
  return compare_impl(u_candidate, v_super, p.sys, p.f, p.g, nullptr, tol);
}

ComparisonReport comparison_check(const Field& u_candidate, const Field& v_super,
                                  const ObstacleProblem& p, double tol) {
  return compare_impl(u_candidate, v_super, p.sys, p.f, p.g, &p.psi, tol);
}

}  // namespace degen
