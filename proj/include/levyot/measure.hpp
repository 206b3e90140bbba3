#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "levyot/common.hpp"

namespace levyot {

/// Weighted atom of a discrete jump measure.
struct Atom {
  Vec x;
  double w = 0.0;
};

/// Finitely supported jump measure on R^d \ {0}: a list of weighted atoms,
/// none at the origin. Canonical form: atoms sorted lexicographically by
/// location, exact duplicates merged on construction.
class DiscreteLevyMeasure {
 public:
  DiscreteLevyMeasure() = default;
  explicit DiscreteLevyMeasure(int dim);
  DiscreteLevyMeasure(int dim, std::vector<Atom> atoms);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  double total_mass() const;

  DiscreteLevyMeasure scaled(double factor) const;
  DiscreteLevyMeasure shifted(const Vec& h) const;

  /// Sum of two measures on the same space (atom lists concatenated and merged).
  friend DiscreteLevyMeasure operator+(const DiscreteLevyMeasure& a,
                                       const DiscreteLevyMeasure& b);

  friend int lex_compare(const DiscreteLevyMeasure& a, const DiscreteLevyMeasure& b);

 private:
  int dim_ = 0;
  std::vector<Atom> atoms_;
};

/// Sum of w_i |x_i|^2.
double second_moment(const DiscreteLevyMeasure& m);

/// Drift + diffusion + jump measure, in the globally compensated form: the
/// jump integral is compensated over all of R^d, so the mean vector is the
/// drift verbatim.
struct LevyTriplet {
  Vec drift;
  Mat diffusion;
  DiscreteLevyMeasure jumps;

  int dim() const { return static_cast<int>(drift.size()); }
};

/// Validates dimensions, finiteness, symmetry and positive semidefiniteness;
/// throws ValidationError on failure.
void validate_triplet(const LevyTriplet& t);

LevyTriplet make_triplet(Vec drift, Mat diffusion, DiscreteLevyMeasure jumps);

/// Mean vector of the generator. Global form: the drift itself.
Vec mean_vector(const LevyTriplet& t);

/// alpha + sum w_i x_i x_i^T.
Mat covariance_matrix(const LevyTriplet& t);

/// Weighted atom of a coupling measure on R^{2d}, stored as a (source, target)
/// pair of d-vectors.
struct CouplingAtom {
  Vec x;
  Vec y;
  double w = 0.0;
};

/// Jump coupling on R^{2d}: marginals match the coupled measures away from the
/// origin; mass may be created or absorbed at the origin on either side.
/// Atoms at the joint origin are dropped on construction (they are cost-free
/// and invisible to both marginals).
class LevyCoupling {
 public:
  LevyCoupling() = default;
  explicit LevyCoupling(int dim);
  LevyCoupling(int dim, std::vector<CouplingAtom> atoms);

  int dim() const { return dim_; }
  const std::vector<CouplingAtom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  double total_mass() const;

  /// Transport cost sum w * |x - y|^2 / 2.
  double cost() const;

  /// Coupling with source and target roles exchanged.
  LevyCoupling transposed() const;

 private:
  int dim_ = 0;
  std::vector<CouplingAtom> atoms_;
};

/// Per-location marginal audit of a coupling against its two measures.
struct MarginalCertificate {
  bool pass = false;
  double worst_defect = 0.0;
  // Location and side (0 = source, 1 = target) of the worst defect, when any
  // location was inspected.
  std::optional<Vec> worst_location;
  int worst_side = -1;
  double tol_source = 0.0;
  double tol_target = 0.0;
};

/// Checks that for every nonzero location the coupling's source weights sum to
/// mu's weight there, and symmetrically for targets against nu. Mass at the
/// origin on either side is unconstrained.
MarginalCertificate validate_coupling(const LevyCoupling& gamma,
                                      const DiscreteLevyMeasure& mu,
                                      const DiscreteLevyMeasure& nu);

/// Independent-style coupling mu (x) delta_0 + delta_0 (x) nu.
LevyCoupling trivial_coupling(const DiscreteLevyMeasure& mu,
                              const DiscreteLevyMeasure& nu);

/// Each atom of mu paired with itself.
LevyCoupling diagonal_coupling(const DiscreteLevyMeasure& mu);

// Symmetry check margin: matrices count as symmetric when the antisymmetric
// part is below tol::sym * (1 + |trace|).
bool is_symmetric(const Mat& m);

// PSD check margin: the smallest eigenvalue may dip to -tol::psd * (1 + trace).
bool is_psd(const Mat& m);
double min_eigenvalue(const Mat& sym);

// Componentwise comparison of canonical forms at the given tolerance.
bool approx_equal(const DiscreteLevyMeasure& a, const DiscreteLevyMeasure& b, double tol);
bool approx_equal(const LevyTriplet& a, const LevyTriplet& b, double tol);

}  // namespace levyot
