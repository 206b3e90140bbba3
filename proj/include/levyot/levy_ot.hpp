#pragma once

#include <cstdint>
#include <vector>

#include "levyot/common.hpp"
#include "levyot/measure.hpp"

namespace levyot {

/// Solution of a jump-part transport problem: optimal cost, plan, Kantorovich
/// potentials normalized to vanish at the origin, and certificates.
struct TransportSolution {
  double cost = 0.0;
  LevyCoupling plan;
  // Potentials aligned with the canonical atom order of the input measures;
  // the origin value is implicitly 0 on both sides.
  std::vector<double> phi;
  std::vector<double> psi;
  double dual_value = 0.0;
  double duality_gap = 0.0;  // cost - dual_value
  // Cheap certificate set at solve time (pair exchanges through the origin);
  // the full check is check_cyclical_monotonicity.
  bool monotone_certified = false;
};

/// Exact solver for the transport problem between two finitely supported jump
/// measures, where mass may be created or absorbed at the origin at cost
/// |x|^2/2. Reduces to a balanced transportation problem by adjoining an
/// origin node on each side (supplying |nu| and demanding |mu|) and solves it
/// with a network simplex using Bland's rule.
TransportSolution levy_ot_solve(const DiscreteLevyMeasure& mu,
                                const DiscreteLevyMeasure& nu);

/// Classical balanced transport between measures of equal total mass: the
/// same network without the origin nodes. Potentials are normalized so that
/// the first source potential is 0.
TransportSolution classical_ot_solve(const DiscreteLevyMeasure& mu,
                                     const DiscreteLevyMeasure& nu);

/// Re-derives the dual pair of a solution and checks feasibility on the full
/// location grid (atoms plus origin), complementary slackness on the plan,
/// and the pairing identity against the cost. Throws InternalError when the
/// duals are infeasible, which signals a solver bug.
std::pair<std::vector<double>, std::vector<double>> extract_duals(
    const TransportSolution& sol, const DiscreteLevyMeasure& mu,
    const DiscreteLevyMeasure& nu);

struct CyclicalMonotonicityReport {
  bool pass = true;
  // Most negative cycle margin found (>= 0 when no violation exists).
  double worst_margin = 0.0;
  // Violating cycle as (source, target) pairs, empty when pass.
  std::vector<CouplingAtom> violating_cycle;
  std::uint64_t cycles_checked = 0;
};

/// Checks 2-cyclical monotonicity of a set of support pairs with (0,0) always
/// adjoined. Cycles of length <= min(max_cycle, 6) are enumerated
/// exhaustively; on top of that, 10^4 random cycles of length <= max_cycle
/// are sampled. Uses the inner-product form of the cycle inequality.
/// Exhaustive enumeration visits (k-1)! C(N,k) cycles per length k.
CyclicalMonotonicityReport check_cyclical_monotonicity(
    const std::vector<CouplingAtom>& points, int max_cycle,
    std::uint64_t seed = 0x9e3779b97f4a7c15ull);

}  // namespace levyot
