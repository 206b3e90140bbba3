#pragma once

#include "levyot/common.hpp"
#include "levyot/measure.hpp"

namespace levyot {

/// Symmetric PSD square root via eigendecomposition, eigenvalues clamped at 0.
Mat sqrt_psd(const Mat& a);

/// Squared Bures-Wasserstein distance with the 1/2 prefactor:
///   tr[alpha + beta - 2 (alpha^{1/2} beta alpha^{1/2})^{1/2}] / 2,
/// clamped to >= 0.
double bures_wasserstein_sq(const Mat& alpha, const Mat& beta);

/// Optimal coupling of the diffusion parts.
struct DiffusionCouplingResult {
  double cost = 0.0;  // equals bures_wasserstein_sq(alpha, beta)
  Mat cross_block;    // K*, maximizes tr K over [alpha K; K^T beta] >= 0
  Mat joint;          // sigma* = [alpha K*; K*^T beta]
};

/// Maximizes tr K subject to [alpha K; K^T beta] >= 0. The maximizer is
/// alpha^{1/2} V U^T beta^{1/2} from the SVD beta^{1/2} alpha^{1/2} = U S V^T,
/// which stays feasible for singular inputs on either side. When both inputs
/// are singular with non-commuting kernels the maximizer may be non-unique;
/// only the cost is certified in that case.
DiffusionCouplingResult optimal_cross_block(const Mat& alpha, const Mat& beta);

/// Dual certificate for the cross-block program: symmetric matrices feasible
/// for blockdiag(A, B) <= [I -I; -I I]/2 whose value tr(alpha A + beta B)
/// approaches the primal cost from below.
struct DualMatrixPair {
  Mat a;
  Mat b;
  double value = 0.0;   // tr(alpha A + beta B)
  double shrink = 1.0;  // scaling applied to restore feasibility
};

/// Builds the pair from the transport map T between the (eps-regularized)
/// Gaussians, A = (I - T)/2 and B = (I - T^{-1})/2, then shrinks toward zero
/// until the block constraint holds.
DualMatrixPair dual_matrix_certificate(const Mat& alpha, const Mat& beta, double eps);

/// Margin of the block constraint: smallest eigenvalue of
/// [I -I; -I I]/2 - blockdiag(A, B). Feasible pairs have margin >= -tol::psd.
double dual_feasibility_margin(const Mat& a, const Mat& b);

}  // namespace levyot
