#pragma once

#include "krrdd/kernel.hpp"
#include "krrdd/numerics.hpp"

namespace krrdd {

/// Exact kernel ridge regression fit. The predictor is
/// f(x) = sum_i alpha_i k(X_i, x) with alpha = (K + n lambda I)^{-1} y.
struct KrrModel {
  Vector alpha;
  Matrix x;
  KernelSpec spec;
  double lambda = 0.0;
};

/// Sizes, bounds and measured losses for one distillation.
struct BoundReport {
  double d_eff = 0.0;
  Index s_phi = 0;
  Index m = 0;
  double compression = 0.0;  // m / n
  double train_loss = 0.0;   // L_lambda of the full fit
  double bound_vs_labels = 0.0;
  double bound_vs_optimal = 0.0;
  double loss_vs_labels = 0.0;   // (1/n) |y - f_S(X)|^2
  double loss_vs_optimal = 0.0;  // (1/n) |f_X(X) - f_S(X)|^2
  double rkhs_scale = 1.0;       // r; multiply losses and bounds by r^2 to undo label scaling

  double scaled(double value) const { return value * (rkhs_scale * rkhs_scale); }
};

struct RescaledLabels {
  Vector y;  // y / r
  double r = 0.0;
  KrrModel model;  // fit on y / r, unit RKHS norm
};

namespace krr {

KrrModel fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
             const KernelSpec& spec, double lambda);

/// Same as fit() with a precomputed Gram matrix of x.
KrrModel fit_with_gram(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& k,
                       const Eigen::Ref<const Vector>& y, const KernelSpec& spec, double lambda);

Vector predict(const KrrModel& model, const Eigen::Ref<const Matrix>& z);

/// (1/n) |y - f(X)|^2
double train_loss(const KrrModel& model, const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Vector>& y);

/// d_eff = sum_i l_i / (l_i + n lambda) over the eigenvalues of K.
double effective_dof(const Eigen::Ref<const Matrix>& k, double lambda);

/// Same quantity from eigenvalues already in hand (n = eigvals.size()).
double effective_dof_from_eigvals(const Eigen::Ref<const Vector>& eigvals, double lambda);

/// s_phi = max(1, ceil(d_eff ln d_eff)); the distilled set has s_phi + 1 points.
Index distilled_size(double d_eff);

/// sqrt(alpha^T K alpha).
double rkhs_norm(const KrrModel& model);
double rkhs_norm(const Eigen::Ref<const Vector>& alpha, const Eigen::Ref<const Matrix>& k);

/// Fits on y, then rescales so the refit predictor has unit RKHS norm.
/// Throws DegenerateLabels when r = 0.
RescaledLabels rescale_labels(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                              const KernelSpec& spec, double lambda);

/// True when n lambda exceeds the top eigenvalue of K, i.e. the fit is
/// dominated by the regularizer.
bool regularizer_dominates(const Eigen::Ref<const Vector>& eigvals_desc, double lambda);

}  // namespace krr
}  // namespace krrdd
