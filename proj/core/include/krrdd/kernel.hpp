#pragma once

#include "krrdd/numerics.hpp"
#include "krrdd/rng.hpp"

namespace krrdd {

enum class KernelFamily {
  SquaredExponential,  // k(x,x') = exp(-|x-x'|^2 / (2 l^2))
};

/// Shift-invariant kernel: family plus lengthscale.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double lengthscale = 1.0;

  /// Throws InvalidArgument for non-positive or non-finite lengthscale.
  static KernelSpec squared_exponential(double lengthscale);
  void validate() const;
};

/// Frequencies (count x dim) and phases (count) drawn from a kernel's
/// spectral density.
struct SpectralSample {
  Matrix frequencies;
  Vector phases;
};

namespace kernel {

/// Points are rows of a matrix throughout; a single point is a column vector.
double eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
            const Eigen::Ref<const Vector>& xp);

/// Cross Gram matrix, entry (i,j) = k(A_i, B_j).
Matrix gram(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a,
            const Eigen::Ref<const Matrix>& b);

/// Symmetric Gram matrix of the rows of `a`: exactly symmetric, unit diagonal.
Matrix gram(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a);

/// d k(s, x) / d s.
Vector grad_first(const KernelSpec& spec, const Eigen::Ref<const Vector>& s,
                  const Eigen::Ref<const Vector>& x);

/// Row i of the result is sum_j weights(i,j) * grad_first(A_i, B_j), where
/// `kab` = gram(A, B) is supplied by the caller. This is the reverse-mode
/// pullback of a cotangent on gram(A, B) onto the rows of A.
Matrix gram_pullback_first(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a,
                           const Eigen::Ref<const Matrix>& b, const Eigen::Ref<const Matrix>& kab,
                           const Eigen::Ref<const Matrix>& weights);

/// i.i.d. draws from the spectral density (N(0, I / l^2) for squared
/// exponential) and phases uniform on [0, 2 pi).
SpectralSample spectral_sample(const KernelSpec& spec, Index count, Index dim, Rng& rng);

}  // namespace kernel
}  // namespace krrdd
