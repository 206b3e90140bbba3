#pragma once

#include <cstdint>
#include <vector>

#include "levyot/gen_metric.hpp"
#include "levyot/rng.hpp"

namespace levyot {

/// Skeleton of one coupled path: states recorded at t=0, every jump epoch,
/// a uniform grid of n_grid points, and the terminal time.
struct PathSample {
  std::vector<double> times;
  std::vector<Vec> states;  // 2d each
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_paths = 0;
};

/// Event-driven exact simulation of the coupled process: compound-Poisson
/// jumps with per-atom rate w, Brownian part driven by the symmetric PSD
/// square root of the coupled diffusion, and the jump mean subtracted from
/// the drift continuously (globally compensated form, so the jump part is a
/// martingale and mean behavior comes from the drift alone). Deterministic
/// given the seed.
PathSample simulate_path(const CoupledTriplet& j, const Vec& start, double T,
                         std::uint64_t seed, int n_grid = 64);

/// Monte Carlo estimates of E |X_t - Y_t|^2 / 2 at each requested time,
/// common random numbers across times. Pairwise summation keeps the
/// reduction order fixed.
std::vector<McEstimate> estimate_cost_growth(const CoupledTriplet& j, const Vec& x,
                                             const Vec& y,
                                             const std::vector<double>& t_list,
                                             int n_paths, std::uint64_t seed);

/// Monte Carlo estimate of E sup_{t <= T} |X_t - Y_t|^2 started from (0,0),
/// the sup taken over the jump epochs and a uniform grid of n_grid points.
/// The skeleton sup is a lower estimate of the continuous-time sup.
McEstimate estimate_sup_distance(const CoupledTriplet& j, double T, int n_paths,
                                 int n_grid, std::uint64_t seed);

/// Maximal bound on E sup |X-Y|^2 over [0, T] at squared generator distance
/// wg_sq: 4 T wg_sq when both means vanish, 8 max{T, T^2} wg_sq otherwise.
double sup_distance_bound(double T, double wg_sq, bool zero_mean);

}  // namespace levyot
