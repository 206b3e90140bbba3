#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace levyot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad user input (files, dimensions, weights). CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical machinery broke an internal contract. CLI maps this to exit code 2.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
// Relative to 1 + trace.
inline constexpr double psd = 1e-9;
inline constexpr double sym = 1e-12;
// Relative to 1 + total mass.
inline constexpr double marginal = 1e-9;
// Absolute, for costs of O(1) trace scale.
inline constexpr double num = 1e-8;
// Relative to 1 + cost.
inline constexpr double gap = 1e-8;
}  // namespace tol

inline double squared_cost(const Vec& x, const Vec& y) {
  return 0.5 * (x - y).squaredNorm();
}

inline void require_finite(const Vec& v, const std::string& what) {
  if (!v.allFinite()) throw ValidationError(what + ": non-finite entry");
}

inline void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw ValidationError(what + ": non-finite entry");
}

// Lexicographic order on coefficient sequences; ties broken by length.
int lex_compare(const Vec& a, const Vec& b);

// Deterministic fixed-order reduction used by the Monte Carlo estimators.
double pairwise_sum(std::span<const double> xs);

}  // namespace levyot
