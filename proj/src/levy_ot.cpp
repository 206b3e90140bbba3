#include "levyot/levy_ot.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>

#include "levyot/rng.hpp"

namespace levyot {

namespace {

// ---------------------------------------------------------------------------
// Dense transportation simplex on the balanced bipartite network.
// The basis is a spanning tree over the m + n row/column nodes; Bland's rule
// (first improving arc in row-major order, first argmin leaving arc) prevents
// cycling under degeneracy.
// ---------------------------------------------------------------------------

struct TransportLPResult {
  Mat flow;
  std::vector<double> u, v;
  double objective = 0.0;
};

class TransportSimplex {
 public:
  TransportSimplex(const Mat& cost, Vec supply, Vec demand)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        cost_(cost),
        flow_(Mat::Zero(m_, n_)),
        basic_(Eigen::ArrayXXi::Zero(m_, n_)),
        row_adj_(m_),
        col_adj_(n_),
        u_(m_),
        v_(n_) {
    northwest_corner(std::move(supply), std::move(demand));
    const double scale = 1.0 + cost_.cwiseAbs().maxCoeff();
    enter_eps_ = 1e-12 * scale;
  }

  TransportLPResult solve() {
    compute_potentials();
    const long max_pivots = 2000ll * (m_ + n_) * std::max(m_, n_) + 10000;
    for (long it = 0; it < max_pivots; ++it) {
      int ei, ej;
      if (!find_entering(ei, ej)) {
        TransportLPResult res;
        res.flow = flow_.cwiseMax(0.0);
        res.u = u_;
        res.v = v_;
        res.objective = 0.0;
        for (int i = 0; i < m_; ++i)
          for (int j = 0; j < n_; ++j)
            if (basic_(i, j) && res.flow(i, j) > 0.0)
              res.objective += res.flow(i, j) * cost_(i, j);
        return res;
      }
      pivot(ei, ej);
      compute_potentials();
    }
    throw InternalError("transport simplex failed to converge");
  }

 private:
  void add_basic(int i, int j) {
    basic_(i, j) = 1;
    row_adj_[i].push_back(j);
    col_adj_[j].push_back(i);
  }

  void remove_basic(int i, int j) {
    basic_(i, j) = 0;
    std::erase(row_adj_[i], j);
    std::erase(col_adj_[j], i);
  }

  void northwest_corner(Vec a, Vec b) {
    int i = 0, j = 0;
    while (true) {
      double f;
      if (j == n_ - 1 && i < m_ - 1) {
        f = a[i];
      } else if (i == m_ - 1 && j < n_ - 1) {
        f = b[j];
      } else {
        f = std::min(a[i], b[j]);
      }
      f = std::max(f, 0.0);
      flow_(i, j) = f;
      add_basic(i, j);
      a[i] -= f;
      b[j] -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1) {
        ++i;
      } else if (i == m_ - 1) {
        ++j;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Tree walk from row 0 with u[0] = 0.
  void compute_potentials() {
    std::fill(u_.begin(), u_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    std::vector<char> row_done(m_, 0), col_done(n_, 0);
    std::deque<int> queue;  // rows: id, cols: m_ + id
    row_done[0] = 1;
    queue.push_back(0);
    int visited = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node < m_) {
        for (int j : row_adj_[node]) {
          if (!col_done[j]) {
            v_[j] = cost_(node, j) - u_[node];
            col_done[j] = 1;
            ++visited;
            queue.push_back(m_ + j);
          }
        }
      } else {
        const int j = node - m_;
        for (int i : col_adj_[j]) {
          if (!row_done[i]) {
            u_[i] = cost_(i, j) - v_[j];
            row_done[i] = 1;
            ++visited;
            queue.push_back(i);
          }
        }
      }
    }
    if (visited != m_ + n_) throw InternalError("transport basis lost connectivity");
  }

  bool find_entering(int& ei, int& ej) const {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (basic_(i, j)) continue;
        if (cost_(i, j) - u_[i] - v_[j] < -enter_eps_) {
          ei = i;
          ej = j;
          return true;
        }
      }
    }
    return false;
  }

  // Unique tree path from row ei to column ej; with the entering arc it forms
  // the pivot cycle. Flows alternate -,+ along the path cells.
  std::vector<std::pair<int, int>> tree_path(int ei, int ej) const {
    std::vector<int> parent(m_ + n_, -2);
    std::deque<int> queue;
    parent[ei] = -1;
    queue.push_back(ei);
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == m_ + ej) break;
      if (node < m_) {
        for (int j : row_adj_[node])
          if (parent[m_ + j] == -2) {
            parent[m_ + j] = node;
            queue.push_back(m_ + j);
          }
      } else {
        for (int i : col_adj_[node - m_])
          if (parent[i] == -2) {
            parent[i] = node;
            queue.push_back(i);
          }
      }
    }
    if (parent[m_ + ej] == -2) throw InternalError("transport basis lost connectivity");
    std::vector<int> nodes;
    for (int node = m_ + ej; node != -1; node = parent[node]) nodes.push_back(node);
    std::reverse(nodes.begin(), nodes.end());  // ei, ..., m_ + ej
    std::vector<std::pair<int, int>> cells;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const int a = nodes[k], b = nodes[k + 1];
      cells.push_back(a < m_ ? std::make_pair(a, b - m_) : std::make_pair(b, a - m_));
    }
    return cells;
  }

  void pivot(int ei, int ej) {
    const auto path = tree_path(ei, ej);
    // Leaving arc: first argmin flow among the minus cells.
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = flow_(path[k].first, path[k].second);
      if (f < theta) {
        theta = f;
        leave = static_cast<int>(k);
      }
    }
    if (leave < 0) throw InternalError("pivot cycle without a leaving arc");
    for (std::size_t k = 0; k < path.size(); ++k) {
      double& f = flow_(path[k].first, path[k].second);
      f += (k % 2 == 0) ? -theta : theta;
      if (f < 0.0) f = 0.0;
    }
    flow_(ei, ej) = theta;
    add_basic(ei, ej);
    remove_basic(path[leave].first, path[leave].second);
  }

  int m_, n_;
  Mat cost_;
  Mat flow_;
  Eigen::ArrayXXi basic_;
  std::vector<std::vector<int>> row_adj_, col_adj_;
  std::vector<double> u_, v_;
  double enter_eps_ = 0.0;
};

using LocKey = std::vector<double>;

LocKey key_of(const Vec& v) { return LocKey(v.data(), v.data() + v.size()); }

// Pair-exchange certificate through the origin: cheap necessary condition
// recorded on every solution. The full certificate is
// check_cyclical_monotonicity.
bool two_cycle_certificate(const LevyCoupling& plan) {
  std::vector<CouplingAtom> pts = plan.atoms();
  pts.push_back({Vec::Zero(plan.dim()), Vec::Zero(plan.dim()), 1.0});
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, squared_cost(p.x, p.y));
  const double tolc = 1e-9 * (1.0 + scale);
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double keep = squared_cost(pts[a].x, pts[a].y) + squared_cost(pts[b].x, pts[b].y);
      const double swap = squared_cost(pts[a].x, pts[b].y) + squared_cost(pts[b].x, pts[a].y);
      if (swap < keep - tolc) return false;
    }
  }
  return true;
}

TransportSolution solve_levy_canonical(const DiscreteLevyMeasure& mu,
                                       const DiscreteLevyMeasure& nu) {
  const int d = mu.dim();
  const int m = static_cast<int>(mu.size());
  const int n = static_cast<int>(nu.size());
  const Vec origin = Vec::Zero(d);

  Vec supply(m + 1), demand(n + 1);
  for (int i = 0; i < m; ++i) supply[i] = mu.atoms()[i].w;
  for (int j = 0; j < n; ++j) demand[j] = nu.atoms()[j].w;
  supply[m] = nu.total_mass();
  demand[n] = mu.total_mass();

  Mat cost(m + 1, n + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = squared_cost(mu.atoms()[i].x, nu.atoms()[j].x);
    cost(i, n) = 0.5 * mu.atoms()[i].x.squaredNorm();
  }
  for (int j = 0; j < n; ++j) cost(m, j) = 0.5 * nu.atoms()[j].x.squaredNorm();
  cost(m, n) = 0.0;

  auto lp = TransportSimplex(cost, supply, demand).solve();

  const double flow_floor = 1e-15 * (1.0 + supply.maxCoeff());
  std::vector<CouplingAtom> atoms;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double f = lp.flow(i, j);
      if (f <= flow_floor) continue;
      if (i == m && j == n) continue;  // origin-origin mass is cost-free
      const Vec& x = (i == m) ? origin : mu.atoms()[i].x;
      const Vec& y = (j == n) ? origin : nu.atoms()[j].x;
      atoms.push_back({x, y, f});
    }
  }

  TransportSolution sol;
  sol.plan = LevyCoupling(d, std::move(atoms));
  sol.cost = sol.plan.cost();

  // Node potentials shifted so both origin potentials vanish; the combination
  // u_i + v_origin (resp. v_j + u_origin) is invariant under the LP's
  // constant gauge.
  sol.phi.resize(m);
  sol.psi.resize(n);
  for (int i = 0; i < m; ++i) sol.phi[i] = lp.u[i] + lp.v[n];
  for (int j = 0; j < n; ++j) sol.psi[j] = lp.v[j] + lp.u[m];

  double dual = 0.0;
  for (int i = 0; i < m; ++i) dual += mu.atoms()[i].w * sol.phi[i];
  for (int j = 0; j < n; ++j) dual += nu.atoms()[j].w * sol.psi[j];
  sol.dual_value = dual;
  sol.duality_gap = sol.cost - dual;
  sol.monotone_certified = two_cycle_certificate(sol.plan);
  return sol;
}

}  // namespace

TransportSolution levy_ot_solve(const DiscreteLevyMeasure& mu,
                                const DiscreteLevyMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ValidationError("measure dimension mismatch");
  // Solving in a canonical argument order makes the cost (and plan) of
  // (mu, nu) and (nu, mu) identical bit for bit.
  if (lex_compare(nu, mu) < 0) {
    TransportSolution sol = solve_levy_canonical(nu, mu);
    sol.plan = sol.plan.transposed();
    std::swap(sol.phi, sol.psi);
    return sol;
  }
  return solve_levy_canonical(mu, nu);
}

TransportSolution classical_ot_solve(const DiscreteLevyMeasure& mu,
                                     const DiscreteLevyMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ValidationError("measure dimension mismatch");
  const double mass_mu = mu.total_mass();
  const double mass_nu = nu.total_mass();
  if (std::abs(mass_mu - mass_nu) > tol::marginal * (1.0 + std::max(mass_mu, mass_nu)))
    throw ValidationError("classical transport requires equal total masses");
  if (mu.empty() && nu.empty()) {
    TransportSolution sol;
    sol.plan = LevyCoupling(mu.dim());
    sol.monotone_certified = true;
    return sol;
  }
  if (mu.empty() != nu.empty())
    throw ValidationError("classical transport requires equal total masses");

  if (lex_compare(nu, mu) < 0) {
    TransportSolution sol = classical_ot_solve(nu, mu);
    sol.plan = sol.plan.transposed();
    std::swap(sol.phi, sol.psi);
    return sol;
  }

  const int m = static_cast<int>(mu.size());
  const int n = static_cast<int>(nu.size());
  Vec supply(m), demand(n);
  for (int i = 0; i < m; ++i) supply[i] = mu.atoms()[i].w;
  const double rescale = mass_mu / mass_nu;
  for (int j = 0; j < n; ++j) demand[j] = nu.atoms()[j].w * rescale;

  Mat cost(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = squared_cost(mu.atoms()[i].x, nu.atoms()[j].x);

  auto lp = TransportSimplex(cost, supply, demand).solve();

  const double flow_floor = 1e-15 * (1.0 + supply.maxCoeff());
  std::vector<CouplingAtom> atoms;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (lp.flow(i, j) > flow_floor)
        atoms.push_back({mu.atoms()[i].x, nu.atoms()[j].x, lp.flow(i, j)});

  TransportSolution sol;
  sol.plan = LevyCoupling(mu.dim(), std::move(atoms));
  sol.cost = sol.plan.cost();
  sol.phi.assign(lp.u.begin(), lp.u.end());
  sol.psi.assign(lp.v.begin(), lp.v.end());
  double dual = 0.0;
  for (int i = 0; i < m; ++i) dual += supply[i] * sol.phi[i];
  for (int j = 0; j < n; ++j) dual += demand[j] * sol.psi[j];
  sol.dual_value = dual;
  sol.duality_gap = sol.cost - dual;

  // Plain pair-exchange check on the support (no origin point here).
  bool mono = true;
  const auto& pts = sol.plan.atoms();
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, squared_cost(p.x, p.y));
  for (std::size_t a = 0; a < pts.size() && mono; ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double keep = squared_cost(pts[a].x, pts[a].y) + squared_cost(pts[b].x, pts[b].y);
      const double swap = squared_cost(pts[a].x, pts[b].y) + squared_cost(pts[b].x, pts[a].y);
      if (swap < keep - 1e-9 * (1.0 + scale)) {
        mono = false;
        break;
      }
    }
  sol.monotone_certified = mono;
  return sol;
}

std::pair<std::vector<double>, std::vector<double>> extract_duals(
    const TransportSolution& sol, const DiscreteLevyMeasure& mu,
    const DiscreteLevyMeasure& nu) {
  const int m = static_cast<int>(mu.size());
  const int n = static_cast<int>(nu.size());
  if (static_cast<int>(sol.phi.size()) != m || static_cast<int>(sol.psi.size()) != n)
    throw ValidationError("solution does not match the measures");

  const double scale = 1.0 + 0.5 * (second_moment(mu) + second_moment(nu));
  const double tolf = 1e-9 * scale;

  // Feasibility on the whole grid of atom locations plus the origin, with the
  // origin potentials implicitly zero on both sides.
  for (int i = 0; i < m; ++i) {
    if (sol.phi[i] > 0.5 * mu.atoms()[i].x.squaredNorm() + tolf)
      throw InternalError("dual infeasible against the origin target");
    for (int j = 0; j < n; ++j) {
      if (sol.phi[i] + sol.psi[j] >
          squared_cost(mu.atoms()[i].x, nu.atoms()[j].x) + tolf)
        throw InternalError("dual infeasible on an atom pair");
    }
  }
  for (int j = 0; j < n; ++j)
    if (sol.psi[j] > 0.5 * nu.atoms()[j].x.squaredNorm() + tolf)
      throw InternalError("dual infeasible against the origin source");

  // Complementary slackness: equality on every plan atom.
  std::map<LocKey, int> mu_index, nu_index;
  for (int i = 0; i < m; ++i) mu_index[key_of(mu.atoms()[i].x)] = i;
  for (int j = 0; j < n; ++j) nu_index[key_of(nu.atoms()[j].x)] = j;
  for (const auto& a : sol.plan.atoms()) {
    double lhs = 0.0;
    if (a.x.norm() != 0.0) {
      auto it = mu_index.find(key_of(a.x));
      if (it == mu_index.end()) throw InternalError("plan atom off the source grid");
      lhs += sol.phi[it->second];
    }
    if (a.y.norm() != 0.0) {
      auto it = nu_index.find(key_of(a.y));
      if (it == nu_index.end()) throw InternalError("plan atom off the target grid");
      lhs += sol.psi[it->second];
    }
    if (std::abs(lhs - squared_cost(a.x, a.y)) > tolf)
      throw InternalError("complementary slackness violated on a plan atom");
  }

  double dual = 0.0;
  for (int i = 0; i < m; ++i) dual += mu.atoms()[i].w * sol.phi[i];
  for (int j = 0; j < n; ++j) dual += nu.atoms()[j].w * sol.psi[j];
  if (std::abs(sol.cost - dual) > tol::gap * (1.0 + std::abs(sol.cost)))
    throw InternalError("pairing identity violated");

  return {sol.phi, sol.psi};
}

namespace {

struct CycleScratch {
  const std::vector<CouplingAtom>* pts;
  Mat gram;   // gram(a, b) = <y_a, x_b>
  double tolc = 0.0;
  CyclicalMonotonicityReport report;

  // Cycle margin for sigma(t) = t + 1 mod k; nonnegative margins for every
  // cycle and both orientations are exactly 2-cyclical monotonicity.
  double margin(std::span<const int> cyc) const {
    double s = 0.0;
    for (std::size_t t = 0; t < cyc.size(); ++t) {
      const int a = cyc[t];
      const int b = cyc[(t + 1) % cyc.size()];
      s += gram(a, a) - gram(a, b);
    }
    return s;
  }

  void consider(std::span<const int> cyc) {
    ++report.cycles_checked;
    const double s = margin(cyc);
    if (s < report.worst_margin) {
      report.worst_margin = s;
      if (s < -tolc && report.violating_cycle.empty()) {
        for (int idx : cyc) report.violating_cycle.push_back((*pts)[idx]);
      }
    }
    if (s < -tolc) report.pass = false;
  }
};

void enumerate_cycles(CycleScratch& sc, int n_points, int k, std::vector<int>& cyc,
                      std::vector<char>& used) {
  const int depth = static_cast<int>(cyc.size());
  if (depth == k) {
    sc.consider(cyc);
    return;
  }
  // First element is the smallest index in the cycle, so each cyclic class is
  // visited once per orientation.
  const int lo = depth == 0 ? 0 : cyc[0] + 1;
  const int hi = depth == 0 ? n_points - k + 1 : n_points;
  for (int i = lo; i < hi; ++i) {
    if (used[i]) continue;
    used[i] = 1;
    cyc.push_back(i);
    enumerate_cycles(sc, n_points, k, cyc, used);
    cyc.pop_back();
    used[i] = 0;
  }
}

}  // namespace

CyclicalMonotonicityReport check_cyclical_monotonicity(
    const std::vector<CouplingAtom>& points, int max_cycle, std::uint64_t seed) {
  if (max_cycle < 2) throw ValidationError("max_cycle must be >= 2");
  CyclicalMonotonicityReport empty_report;
  if (points.empty()) return empty_report;

  const int d = static_cast<int>(points.front().x.size());
  std::vector<CouplingAtom> pts = points;
  pts.push_back({Vec::Zero(d), Vec::Zero(d), 0.0});  // (0,0) is always adjoined
  const int n_points = static_cast<int>(pts.size());

  CycleScratch sc;
  sc.pts = &pts;
  sc.gram.resize(n_points, n_points);
  for (int a = 0; a < n_points; ++a)
    for (int b = 0; b < n_points; ++b) sc.gram(a, b) = pts[a].y.dot(pts[b].x);
  sc.tolc = 1e-9 * (1.0 + sc.gram.cwiseAbs().maxCoeff() * max_cycle);

  const int exhaustive_limit = std::min({max_cycle, 6, n_points});
  std::vector<int> cyc;
  std::vector<char> used(n_points, 0);
  for (int k = 2; k <= exhaustive_limit; ++k)
    enumerate_cycles(sc, n_points, k, cyc, used);

  // Random cycles cover lengths beyond the exhaustive horizon (and add noise
  // coverage below it).
  const int cap = std::min(max_cycle, n_points);
  if (cap >= 2) {
    CounterRng rng(seed, 0);
    std::vector<int> pool(n_points);
    for (int it = 0; it < 10000; ++it) {
      const int k = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cap - 1)));
      std::iota(pool.begin(), pool.end(), 0);
      cyc.clear();
      for (int t = 0; t < k; ++t) {
        const int pick = t + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_points - t)));
        std::swap(pool[t], pool[pick]);
        cyc.push_back(pool[t]);
      }
      sc.consider(cyc);
    }
  }
  return sc.report;
}

}  // namespace levyot
