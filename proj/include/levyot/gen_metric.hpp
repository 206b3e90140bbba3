#pragma once

#include <vector>

#include "levyot/levy_ot.hpp"
#include "levyot/measure.hpp"
#include "levyot/psd_transport.hpp"

namespace levyot {

/// Squared generator distance and its exact decomposition into drift,
/// diffusion and jump contributions.
struct GeneratorDistance {
  double total_sq = 0.0;
  double drift_sq = 0.0;
  double diffusion_sq = 0.0;
  double jump_sq = 0.0;
};

GeneratorDistance generator_distance(const LevyTriplet& a, const LevyTriplet& b);

/// Transport derivative of the coupled cost at (x, y): the drift-free value
/// at the origin plus the affine term (kappa - zeta)^T (x - y).
double theta2(const LevyTriplet& a, const LevyTriplet& b, const Vec& x, const Vec& y);

/// Generator triplet of a Markovian coupling on R^{2d}: stacked drift, block
/// diffusion with the marginal diffusions on the diagonal, and a jump
/// coupling measure.
struct CoupledTriplet {
  Vec drift;      // 2d
  Mat diffusion;  // 2d x 2d
  LevyCoupling jumps;

  int dim() const { return static_cast<int>(drift.size()) / 2; }
};

void validate_coupled_triplet(const CoupledTriplet& j);

/// Optimal coupling triplet: stacked drifts, cross block from the diffusion
/// program, jump plan from the transport solver.
CoupledTriplet build_optimal_coupling(const LevyTriplet& a, const LevyTriplet& b);

/// Independent-style coupling: zero cross block and the trivial jump coupling.
CoupledTriplet independent_coupling(const LevyTriplet& a, const LevyTriplet& b);

/// Expected coupled cost at time t started from (x, y). Exact for every
/// coupling triplet with marginal drifts kappa, zeta:
///   c2(x,y) + t * [ (kappa-zeta)^T(x-y) + diffusion slope + jump slope ]
///          + t^2/2 * |kappa - zeta|^2.
double predicted_cost_growth(const CoupledTriplet& j, const Vec& x, const Vec& y, double t);

/// Drift-free slope of the coupled cost: tr(alpha + beta - 2K)/2 plus the
/// jump plan cost.
double coupling_cost_slope(const CoupledTriplet& j);

struct TruncationResult {
  DiscreteLevyMeasure measure;
  double error_bound = 0.0;  // upper bound on the squared jump distance
};

/// Drops atoms with |x| < delta and scales the remaining weights by
/// (1 - delta_prime). The bound is
///   (sum_{|x|<delta} w|x|^2 + delta_prime * sum_{|x|>=delta} w|x|^2) / 2.
TruncationResult truncate_measure(const DiscreteLevyMeasure& mu, double delta,
                                  double delta_prime);

struct ConvergenceRow {
  double w_lambda = 0.0;          // jump metric to the target (solver value)
  double second_moment_gap = 0.0; // |m2(mu_n) - m2(target)|
  double battery_defect = 0.0;    // max test-function defect
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool co_trending = false;  // all three diagnostics move together
};

/// Diagnostics for convergence of a measure sequence in the jump metric: the
/// solver distance, the second-moment gap, and the worst defect over a fixed
/// battery of 32 test functions x -> min{1,|x-c|^2} s(x) with bounded
/// Lipschitz s, each dominated by min{1,|x|^2}. Battery centers sit on a
/// Halton sequence over the data's bounding box, so reports are reproducible.
ConvergenceReport lambda_convergence_report(const std::vector<DiscreteLevyMeasure>& seq,
                                            const DiscreteLevyMeasure& target);

/// The battery itself, exposed for tests: value of test function k at x.
double convergence_test_function(int k, const Vec& x, const Vec& box_lo, const Vec& box_hi);

}  // namespace levyot
