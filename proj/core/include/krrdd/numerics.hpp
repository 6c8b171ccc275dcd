#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace krrdd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace numerics {

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kPinvRankTol = 1e-12;

bool all_finite(const Eigen::Ref<const Matrix>& a);

/// Throws InvalidArgument unless `a` is square and symmetric to `rel_tol`
/// (measured against its largest absolute entry).
void require_symmetric(const Eigen::Ref<const Matrix>& a, const char* what,
                       double rel_tol = kSymmetryTol);

/// Cholesky factor of an SPD matrix, kept for repeated solves.
class SpdFactor {
 public:
  /// Throws NotPositiveDefinite on factorization failure.
  explicit SpdFactor(const Eigen::Ref<const Matrix>& a);

  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  Index size() const { return llt_.rows(); }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

 private:
  Eigen::LLT<Matrix> llt_;
};

Matrix spd_solve(const Eigen::Ref<const Matrix>& a, const Matrix& b);
Vector spd_solve(const Eigen::Ref<const Matrix>& a, const Vector& b);

/// Minimum-norm least-squares solution A^+ b. Singular values below
/// rank_tol * sigma_max are treated as zero.
Vector pinv_apply(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b,
                  double rank_tol = kPinvRankTol);

/// Number of singular values >= rel_tol * sigma_max.
Index numerical_rank(const Eigen::Ref<const Matrix>& a, double rel_tol);

/// Lower factor L with L L^T = A + jitter I. On failure throws
/// NeedsLargerJitter carrying the index of the first non-positive pivot.
Matrix chol_lower(const Eigen::Ref<const Matrix>& a, double jitter = 0.0);

/// Eigenvalues of a symmetric matrix in descending order.
Vector sym_eigvals(const Eigen::Ref<const Matrix>& a);

}  // namespace numerics
}  // namespace krrdd
