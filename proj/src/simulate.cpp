#include "levyot/simulate.hpp"

#include <algorithm>

#include "levyot/psd_transport.hpp"

namespace levyot {

namespace {

struct Dynamics {
  int d2 = 0;
  Vec drift;             // compensated: eta - sum_k w_k (x'_k, y'_k)
  Mat noise;             // symmetric PSD square root of the coupled diffusion
  bool has_noise = false;
  std::vector<Vec> jump_moves;  // stacked (x', y') per atom
  std::vector<double> cum_rate;
  double total_rate = 0.0;
};

Dynamics build_dynamics(const CoupledTriplet& j) {
  validate_coupled_triplet(j);
  Dynamics dyn;
  dyn.d2 = 2 * j.dim();
  Vec compensator = Vec::Zero(dyn.d2);
  for (const auto& a : j.jumps.atoms()) {
    Vec move(dyn.d2);
    move.head(j.dim()) = a.x;
    move.tail(j.dim()) = a.y;
    compensator += a.w * move;
    dyn.jump_moves.push_back(std::move(move));
    dyn.total_rate += a.w;
    dyn.cum_rate.push_back(dyn.total_rate);
  }
  dyn.drift = j.drift - compensator;
  dyn.has_noise = j.diffusion.cwiseAbs().maxCoeff() > 0.0;
  if (dyn.has_noise) dyn.noise = sqrt_psd(j.diffusion);
  return dyn;
}

int pick_atom(const Dynamics& dyn, double u) {
  // CDF inversion on u in (0, 1].
  const double target = u * dyn.total_rate;
  const auto it = std::lower_bound(dyn.cum_rate.begin(), dyn.cum_rate.end(), target);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - dyn.cum_rate.begin(),
                                                   dyn.cum_rate.size() - 1));
}

// Walks one path, invoking visit(t, state) at t=0, every jump epoch, every
// monitor time and the terminal time, in increasing order. Randomness is
// consumed in a fixed order: jump times, then atom indices, then one Gaussian
// block per traversed interval.
template <typename Visitor>
void walk_path(const Dynamics& dyn, const Vec& start, double T,
               const std::vector<double>& monitors, CounterRng& rng, Visitor&& visit) {
  std::vector<double> jump_times;
  if (dyn.total_rate > 0.0) {
    double t = rng.next_exponential(dyn.total_rate);
    while (t <= T) {
      jump_times.push_back(t);
      t += rng.next_exponential(dyn.total_rate);
    }
  }
  std::vector<int> jump_atoms(jump_times.size());
  for (auto& k : jump_atoms) k = pick_atom(dyn, rng.next_uniform());

  // Merge jump epochs with monitor times (monitors assumed sorted, <= T).
  struct Epoch {
    double t;
    int jump = -1;  // index into jump_times when this epoch is a jump
  };
  std::vector<Epoch> epochs;
  epochs.reserve(jump_times.size() + monitors.size() + 1);
  std::size_t ji = 0, mi = 0;
  while (ji < jump_times.size() || mi < monitors.size()) {
    if (mi == monitors.size() ||
        (ji < jump_times.size() && jump_times[ji] <= monitors[mi])) {
      epochs.push_back({jump_times[ji], static_cast<int>(ji)});
      ++ji;
    } else {
      epochs.push_back({monitors[mi], -1});
      ++mi;
    }
  }
  if (epochs.empty() || epochs.back().t < T) epochs.push_back({T, -1});

  Vec state = start;
  visit(0.0, state);
  double t_prev = 0.0;
  Vec gauss(dyn.d2);
  for (const auto& e : epochs) {
    const double dt = e.t - t_prev;
    if (dt > 0.0) {
      state += dt * dyn.drift;
      if (dyn.has_noise) {
        for (int i = 0; i < dyn.d2; ++i) gauss[i] = rng.next_gaussian();
        state += std::sqrt(dt) * (dyn.noise * gauss);
      }
    }
    if (e.jump >= 0) state += dyn.jump_moves[jump_atoms[e.jump]];
    visit(e.t, state);
    t_prev = e.t;
  }
}

std::vector<double> uniform_grid(double T, int n_grid) {
  std::vector<double> g;
  g.reserve(std::max(n_grid, 0));
  for (int k = 1; k <= n_grid; ++k) g.push_back(T * k / n_grid);
  return g;
}

McEstimate reduce(const std::vector<double>& values) {
  if (values.size() < 2) throw ValidationError("Monte Carlo needs at least 2 paths");
  McEstimate est;
  est.n_paths = static_cast<int>(values.size());
  est.mean = pairwise_sum(values) / est.n_paths;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double c = values[i] - est.mean;
    sq[i] = c * c;
  }
  const double var = pairwise_sum(sq) / (est.n_paths - 1.0);
  est.std_error = std::sqrt(var / est.n_paths);
  return est;
}

}  // namespace

PathSample simulate_path(const CoupledTriplet& j, const Vec& start, double T,
                         std::uint64_t seed, int n_grid) {
  if (!(T > 0.0)) throw ValidationError("time horizon must be > 0");
  if (start.size() != 2 * j.dim()) throw ValidationError("start point must live in R^{2d}");
  const Dynamics dyn = build_dynamics(j);
  CounterRng rng(seed, 0);
  PathSample sample;
  walk_path(dyn, start, T, uniform_grid(T, n_grid), rng, [&](double t, const Vec& z) {
    sample.times.push_back(t);
    sample.states.push_back(z);
  });
  return sample;
}

std::vector<McEstimate> estimate_cost_growth(const CoupledTriplet& j, const Vec& x,
                                             const Vec& y,
                                             const std::vector<double>& t_list,
                                             int n_paths, std::uint64_t seed) {
  if (n_paths < 100) throw ValidationError("growth estimation needs n_paths >= 100");
  if (t_list.empty()) throw ValidationError("empty time list");
  for (double t : t_list)
    if (!(t > 0.0)) throw ValidationError("evaluation times must be > 0");

  const int d = j.dim();
  if (x.size() != d || y.size() != d) throw ValidationError("start point dimension mismatch");
  Vec start(2 * d);
  start.head(d) = x;
  start.tail(d) = y;

  std::vector<double> monitors = t_list;
  std::sort(monitors.begin(), monitors.end());
  const double T = monitors.back();
  const Dynamics dyn = build_dynamics(j);

  std::vector<std::vector<double>> per_time(monitors.size(),
                                            std::vector<double>(n_paths, 0.0));
  for (int p = 0; p < n_paths; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p) + 1);
    std::size_t next = 0;
    walk_path(dyn, start, T, monitors, rng, [&](double t, const Vec& z) {
      while (next < monitors.size() && t >= monitors[next]) {
        if (t == monitors[next]) {
          per_time[next][p] = squared_cost(z.head(d), z.tail(d));
          ++next;
        } else {
          ++next;  // duplicate epochs; value already recorded
        }
      }
    });
  }

  // Undo the sort so estimates line up with the caller's time order.
  std::vector<McEstimate> out(t_list.size());
  for (std::size_t q = 0; q < t_list.size(); ++q) {
    const auto it = std::find(monitors.begin(), monitors.end(), t_list[q]);
    out[q] = reduce(per_time[static_cast<std::size_t>(it - monitors.begin())]);
  }
  return out;
}

McEstimate estimate_sup_distance(const CoupledTriplet& j, double T, int n_paths,
                                 int n_grid, std::uint64_t seed) {
  if (!(T > 0.0)) throw ValidationError("time horizon must be > 0");
  if (n_grid < 64) throw ValidationError("sup estimation needs n_grid >= 64");
  if (n_paths < 2) throw ValidationError("Monte Carlo needs at least 2 paths");
  const int d = j.dim();
  const Vec start = Vec::Zero(2 * d);
  const Dynamics dyn = build_dynamics(j);
  const auto grid = uniform_grid(T, n_grid);

  std::vector<double> sups(n_paths, 0.0);
  for (int p = 0; p < n_paths; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p) + 1);
    double sup = 0.0;
    walk_path(dyn, start, T, grid, rng, [&](double, const Vec& z) {
      sup = std::max(sup, (z.head(d) - z.tail(d)).squaredNorm());
    });
    sups[p] = sup;
  }
  return reduce(sups);
}

double sup_distance_bound(double T, double wg_sq, bool zero_mean) {
  return zero_mean ? 4.0 * T * wg_sq : 8.0 * std::max(T, T * T) * wg_sq;
}

}  // namespace levyot
