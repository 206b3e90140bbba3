#include "levyot/psd_transport.hpp"

#include <Eigen/SVD>

namespace levyot {

namespace {

void require_pair(const Mat& alpha, const Mat& beta) {
  if (alpha.rows() != alpha.cols() || beta.rows() != beta.cols() ||
      alpha.rows() != beta.rows())
    throw ValidationError("matrix dimension mismatch");
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
}

Eigen::SelfAdjointEigenSolver<Mat> eigen_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw InternalError("eigensolver failure");
  return es;
}

// f applied to the clamped spectrum.
template <typename F>
Mat spectral_map(const Mat& a, F f) {
  auto es = eigen_sym(a);
  Vec lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = f(std::max(lam[i], 0.0));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Mat sqrt_psd(const Mat& a) {
  return spectral_map(a, [](double l) { return std::sqrt(l); });
}

double bures_wasserstein_sq(const Mat& alpha, const Mat& beta) {
  require_pair(alpha, beta);
  // The distance is symmetric; fixing the argument order makes the computed
  // value bitwise symmetric as well.
  const bool swap = lex_compare(Eigen::Map<const Vec>(alpha.data(), alpha.size()),
                                Eigen::Map<const Vec>(beta.data(), beta.size())) > 0;
  const Mat& a = swap ? beta : alpha;
  const Mat& b = swap ? alpha : beta;

  // tr (a^{1/2} b a^{1/2})^{1/2} is the nuclear norm of b^{1/2} a^{1/2};
  // summing singular values avoids the precision loss of clamping tiny
  // eigenvalues of the squared product.
  Eigen::JacobiSVD<Mat> svd(sqrt_psd(b) * sqrt_psd(a));
  const double val = 0.5 * (a.trace() + b.trace() - 2.0 * svd.singularValues().sum());
  if (val < -tol::num) throw InternalError("Bures-Wasserstein cost below numerical floor");
  return std::max(val, 0.0);
}

DiffusionCouplingResult optimal_cross_block(const Mat& alpha, const Mat& beta) {
  require_pair(alpha, beta);
  const Eigen::Index d = alpha.rows();

  const Mat sa = sqrt_psd(alpha);
  const Mat sb = sqrt_psd(beta);

  // K = alpha^{1/2} C beta^{1/2} with a contraction C is exactly feasibility
  // of the joint block matrix; tr K is maximized by the transposed polar
  // factor of beta^{1/2} alpha^{1/2}.
  Eigen::JacobiSVD<Mat> svd(sb * sa, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat c = svd.matrixV() * svd.matrixU().transpose();

  DiffusionCouplingResult res;
  res.cross_block = sa * c * sb;
  res.joint.resize(2 * d, 2 * d);
  res.joint.topLeftCorner(d, d) = alpha;
  res.joint.topRightCorner(d, d) = res.cross_block;
  res.joint.bottomLeftCorner(d, d) = res.cross_block.transpose();
  res.joint.bottomRightCorner(d, d) = beta;
  res.cost = std::max(
      0.5 * (alpha.trace() + beta.trace() - 2.0 * res.cross_block.trace()), 0.0);
  return res;
}

double dual_feasibility_margin(const Mat& a, const Mat& b) {
  const Eigen::Index d = a.rows();
  Mat gap(2 * d, 2 * d);
  gap.topLeftCorner(d, d) = 0.5 * Mat::Identity(d, d) - a;
  gap.topRightCorner(d, d) = -0.5 * Mat::Identity(d, d);
  gap.bottomLeftCorner(d, d) = -0.5 * Mat::Identity(d, d);
  gap.bottomRightCorner(d, d) = 0.5 * Mat::Identity(d, d) - b;
  return min_eigenvalue(gap);
}

DualMatrixPair dual_matrix_certificate(const Mat& alpha, const Mat& beta, double eps) {
  require_pair(alpha, beta);
  if (!(eps > 0.0)) throw ValidationError("regularization scale must be > 0");
  const Eigen::Index d = alpha.rows();
  const Mat id = Mat::Identity(d, d);

  const Mat ar = alpha + eps * id;
  const Mat br = beta + eps * id;

  // Transport map between the regularized Gaussians, and its inverse computed
  // by the mirrored formula (stabler than inverting T).
  auto transport_map = [&](const Mat& from, const Mat& to) {
    auto es = eigen_sym(from);
    Vec lam = es.eigenvalues().cwiseMax(eps);
    const Mat s = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
                  es.eigenvectors().transpose();
    const Mat sinv = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                     es.eigenvectors().transpose();
    return Mat(sinv * sqrt_psd(s * to * s) * sinv);
  };
  const Mat t_fwd = transport_map(ar, br);
  const Mat t_inv = transport_map(br, ar);

  DualMatrixPair pair;
  pair.a = 0.5 * (id - t_fwd);
  pair.b = 0.5 * (id - t_inv);
  pair.a = 0.5 * (pair.a + pair.a.transpose());
  pair.b = 0.5 * (pair.b + pair.b.transpose());

  // The exact optimum touches the constraint boundary, so numerically the
  // margin can dip slightly negative; shrink toward the (feasible) origin
  // until it clears the floor.
  const double floor = -1e-14 * (1.0 + std::abs(alpha.trace()) + std::abs(beta.trace()));
  double s = 1.0;
  if (dual_feasibility_margin(pair.a, pair.b) < floor) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dual_feasibility_margin(mid * pair.a, mid * pair.b) >= floor) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    s = lo;
    pair.a *= s;
    pair.b *= s;
  }
  pair.shrink = s;
  pair.value = (alpha * pair.a).trace() + (beta * pair.b).trace();
  return pair;
}

}  // namespace levyot
