#include "krrdd/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "krrdd/error.hpp"

namespace krrdd {

namespace numerics {

bool all_finite(const Eigen::Ref<const Matrix>& a) { return a.allFinite(); }

void require_symmetric(const Eigen::Ref<const Matrix>& a, const char* what, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw InvalidArgument(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric");
  }
}

namespace {

void require_nonempty_finite(const Eigen::Ref<const Matrix>& a, const char* what) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw InvalidArgument(std::string(what) + ": empty matrix");
  }
  if (!a.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite entries");
  }
}

// Unblocked right-looking Cholesky, only used to locate the failing pivot
// after Eigen's blocked factorization has already reported failure.
std::size_t first_bad_pivot(Matrix a) {
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    double d = a(k, k);
    for (Index p = 0; p < k; ++p) d -= a(k, p) * a(k, p);
    if (!(d > 0.0)) return static_cast<std::size_t>(k);
    d = std::sqrt(d);
    a(k, k) = d;
    for (Index i = k + 1; i < n; ++i) {
      double v = a(i, k);
      for (Index p = 0; p < k; ++p) v -= a(i, p) * a(k, p);
      a(i, k) = v / d;
    }
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

SpdFactor::SpdFactor(const Eigen::Ref<const Matrix>& a) {
  require_nonempty_finite(a, "spd_solve");
  require_symmetric(a, "spd_solve");
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw NotPositiveDefinite("spd_solve: matrix is not positive definite");
  }
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != llt_.rows()) throw InvalidArgument("spd_solve: right-hand side rows mismatch");
  return llt_.solve(b);
}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.rows() != llt_.rows()) throw InvalidArgument("spd_solve: right-hand side rows mismatch");
  return llt_.solve(b);
}

Matrix spd_solve(const Eigen::Ref<const Matrix>& a, const Matrix& b) {
  require_nonempty_finite(b, "spd_solve");
  return SpdFactor(a).solve(b);
}

Vector spd_solve(const Eigen::Ref<const Matrix>& a, const Vector& b) {
  if (b.size() == 0 || !b.allFinite()) throw InvalidArgument("spd_solve: bad right-hand side");
  return SpdFactor(a).solve(b);
}

Vector pinv_apply(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b,
                  double rank_tol) {
  require_nonempty_finite(a, "pinv_apply");
  if (b.size() != a.rows()) throw InvalidArgument("pinv_apply: rhs length mismatch");
  if (!b.allFinite()) throw InvalidArgument("pinv_apply: non-finite rhs");
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw InvalidArgument("pinv_apply: rank_tol outside (0,1)");

  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = rank_tol * sigma(0);
  Vector coeff = svd.matrixU().transpose() * b;
  for (Index i = 0; i < sigma.size(); ++i) {
    coeff(i) = (sigma(i) > cutoff && sigma(i) > 0.0) ? coeff(i) / sigma(i) : 0.0;
  }
  return svd.matrixV() * coeff;
}

Index numerical_rank(const Eigen::Ref<const Matrix>& a, double rel_tol) {
  require_nonempty_finite(a, "numerical_rank");
  Eigen::BDCSVD<Matrix> svd(a);
  const Vector& sigma = svd.singularValues();
  if (sigma(0) == 0.0) return 0;
  return static_cast<Index>((sigma.array() >= rel_tol * sigma(0)).count());
}

Matrix chol_lower(const Eigen::Ref<const Matrix>& a, double jitter) {
  require_nonempty_finite(a, "chol_lower");
  require_symmetric(a, "chol_lower");
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw InvalidArgument("chol_lower: bad jitter");

  Matrix shifted = a;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw NeedsLargerJitter(first_bad_pivot(shifted), jitter);
  }
  return llt.matrixL();
}

Vector sym_eigvals(const Eigen::Ref<const Matrix>& a) {
  require_nonempty_finite(a, "sym_eigvals");
  require_symmetric(a, "sym_eigvals");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("sym_eigvals: eigensolver did not converge");
  Vector ev = es.eigenvalues();  // ascending
  return ev.reverse();
}

}  // namespace numerics
}  // namespace krrdd
