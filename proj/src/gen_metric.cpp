#include "levyot/gen_metric.hpp"

#include <algorithm>

namespace levyot {

namespace {

void require_same_dim(const LevyTriplet& a, const LevyTriplet& b) {
  if (a.dim() != b.dim()) throw ValidationError("triplet dimension mismatch");
}

}  // namespace

GeneratorDistance generator_distance(const LevyTriplet& a, const LevyTriplet& b) {
  require_same_dim(a, b);
  GeneratorDistance g;
  g.drift_sq = 0.5 * (a.drift - b.drift).squaredNorm();
  g.diffusion_sq = bures_wasserstein_sq(a.diffusion, b.diffusion);
  g.jump_sq = levy_ot_solve(a.jumps, b.jumps).cost;
  g.total_sq = g.drift_sq + g.diffusion_sq + g.jump_sq;
  return g;
}

double theta2(const LevyTriplet& a, const LevyTriplet& b, const Vec& x, const Vec& y) {
  require_same_dim(a, b);
  if (x.size() != a.dim() || y.size() != a.dim())
    throw ValidationError("evaluation point dimension mismatch");
  const GeneratorDistance g = generator_distance(a, b);
  return g.diffusion_sq + g.jump_sq + (a.drift - b.drift).dot(x - y);
}

void validate_coupled_triplet(const CoupledTriplet& j) {
  const int d2 = static_cast<int>(j.drift.size());
  if (d2 < 2 || d2 % 2 != 0) throw ValidationError("coupled drift must live in R^{2d}");
  require_finite(j.drift, "coupled drift");
  require_finite(j.diffusion, "coupled diffusion");
  if (j.diffusion.rows() != d2 || j.diffusion.cols() != d2)
    throw ValidationError("coupled diffusion shape mismatch");
  if (!is_psd(j.diffusion))
    throw ValidationError("coupled diffusion is not positive semidefinite");
  if (j.jumps.dim() != d2 / 2) throw ValidationError("coupled jump dimension mismatch");
}

namespace {

CoupledTriplet assemble(const LevyTriplet& a, const LevyTriplet& b, Mat cross,
                        LevyCoupling plan) {
  const int d = a.dim();
  CoupledTriplet j;
  j.drift.resize(2 * d);
  j.drift.head(d) = a.drift;
  j.drift.tail(d) = b.drift;
  j.diffusion.resize(2 * d, 2 * d);
  j.diffusion.topLeftCorner(d, d) = a.diffusion;
  j.diffusion.topRightCorner(d, d) = cross;
  j.diffusion.bottomLeftCorner(d, d) = cross.transpose();
  j.diffusion.bottomRightCorner(d, d) = b.diffusion;
  j.jumps = std::move(plan);
  return j;
}

}  // namespace

CoupledTriplet build_optimal_coupling(const LevyTriplet& a, const LevyTriplet& b) {
  require_same_dim(a, b);
  auto diff = optimal_cross_block(a.diffusion, b.diffusion);
  auto jump = levy_ot_solve(a.jumps, b.jumps);
  return assemble(a, b, std::move(diff.cross_block), std::move(jump.plan));
}

CoupledTriplet independent_coupling(const LevyTriplet& a, const LevyTriplet& b) {
  require_same_dim(a, b);
  return assemble(a, b, Mat::Zero(a.dim(), a.dim()), trivial_coupling(a.jumps, b.jumps));
}

double coupling_cost_slope(const CoupledTriplet& j) {
  const int d = j.dim();
  const double diffusion_slope =
      0.5 * (j.diffusion.topLeftCorner(d, d).trace() +
             j.diffusion.bottomRightCorner(d, d).trace()) -
      j.diffusion.topRightCorner(d, d).trace();
  return diffusion_slope + j.jumps.cost();
}

double predicted_cost_growth(const CoupledTriplet& j, const Vec& x, const Vec& y,
                             double t) {
  const int d = j.dim();
  if (x.size() != d || y.size() != d)
    throw ValidationError("evaluation point dimension mismatch");
  const Vec dm = j.drift.head(d) - j.drift.tail(d);
  const double slope = dm.dot(x - y) + coupling_cost_slope(j);
  return squared_cost(x, y) + t * slope + 0.5 * t * t * dm.squaredNorm();
}

TruncationResult truncate_measure(const DiscreteLevyMeasure& mu, double delta,
                                  double delta_prime) {
  if (!(delta > 0.0)) throw ValidationError("delta must be > 0");
  if (!(delta_prime >= 0.0 && delta_prime < 1.0))
    throw ValidationError("delta_prime must lie in [0, 1)");

  std::vector<Atom> kept;
  double inner = 0.0, outer = 0.0;
  for (const auto& a : mu.atoms()) {
    const double nsq = a.x.squaredNorm();
    if (a.x.norm() < delta) {
      inner += a.w * nsq;
    } else {
      outer += a.w * nsq;
      kept.push_back({a.x, a.w * (1.0 - delta_prime)});
    }
  }
  TruncationResult res{DiscreteLevyMeasure(mu.dim(), std::move(kept)),
                       0.5 * (inner + delta_prime * outer)};
  return res;
}

double convergence_test_function(int k, const Vec& x, const Vec& box_lo,
                                 const Vec& box_hi) {
  const int d = static_cast<int>(x.size());
  // Halton centers over the bounding box (bases 2, 3, 5, ...).
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  Vec c(d);
  for (int axis = 0; axis < d; ++axis) {
    const int base = primes[axis % 8];
    double f = 1.0, r = 0.0;
    for (int idx = k + 1; idx > 0; idx /= base) {
      f /= base;
      r += f * (idx % base);
    }
    c[axis] = box_lo[axis] + r * (box_hi[axis] - box_lo[axis]);
  }
  const double dc = (x - c).squaredNorm();
  const double nx = x.squaredNorm();
  const double s = std::min(1.0, nx) / (1.0 + dc);  // bounded Lipschitz factor
  return std::min(1.0, dc) * s;
}

ConvergenceReport lambda_convergence_report(const std::vector<DiscreteLevyMeasure>& seq,
                                            const DiscreteLevyMeasure& target) {
  if (seq.empty()) throw ValidationError("empty measure sequence");
  for (const auto& m : seq)
    if (m.dim() != target.dim()) throw ValidationError("sequence dimension mismatch");

  const int d = target.dim();
  Vec lo = Vec::Constant(d, -1.0), hi = Vec::Constant(d, 1.0);
  auto widen = [&](const DiscreteLevyMeasure& m) {
    for (const auto& a : m.atoms()) {
      lo = lo.cwiseMin(a.x);
      hi = hi.cwiseMax(a.x);
    }
  };
  widen(target);
  for (const auto& m : seq) widen(m);

  constexpr int kBattery = 32;
  auto battery_integral = [&](const DiscreteLevyMeasure& m, int k) {
    double s = 0.0;
    for (const auto& a : m.atoms()) s += a.w * convergence_test_function(k, a.x, lo, hi);
    return s;
  };
  std::vector<double> target_integrals(kBattery);
  for (int k = 0; k < kBattery; ++k) target_integrals[k] = battery_integral(target, k);
  const double target_m2 = second_moment(target);

  ConvergenceReport rep;
  rep.rows.reserve(seq.size());
  for (const auto& m : seq) {
    ConvergenceRow row;
    row.w_lambda = std::sqrt(levy_ot_solve(m, target).cost);
    row.second_moment_gap = std::abs(second_moment(m) - target_m2);
    for (int k = 0; k < kBattery; ++k)
      row.battery_defect =
          std::max(row.battery_defect, std::abs(battery_integral(m, k) - target_integrals[k]));
    rep.rows.push_back(row);
  }

  // Pairwise concordance of the three diagnostic series: co-trending when no
  // pair moves in strictly opposite directions overall.
  auto series = [&](int which) {
    std::vector<double> s;
    for (const auto& r : rep.rows)
      s.push_back(which == 0 ? r.w_lambda : which == 1 ? r.second_moment_gap : r.battery_defect);
    return s;
  };
  bool co_trend = true;
  for (int a = 0; a < 3 && co_trend; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const auto sa = series(a), sb = series(b);
      long concord = 0;
      for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t j = i + 1; j < sa.size(); ++j) {
          const double p = (sa[i] - sa[j]) * (sb[i] - sb[j]);
          concord += p > 0.0 ? 1 : (p < 0.0 ? -1 : 0);
        }
      if (concord < 0) {
        co_trend = false;
        break;
      }
    }
  }
  rep.co_trending = co_trend;
  return rep;
}

}  // namespace levyot
