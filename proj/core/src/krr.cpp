#include "krrdd/krr.hpp"

#include <cmath>
#include <string>

#include "krrdd/error.hpp"

namespace krrdd::krr {
namespace {

void require_lambda(double lambda, const char* what) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(std::string(what) + ": lambda must be positive and finite");
  }
}

}  // namespace

KrrModel fit_with_gram(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& k,
                       const Eigen::Ref<const Vector>& y, const KernelSpec& spec, double lambda) {
  require_lambda(lambda, "krr fit");
  const Index n = x.rows();
  if (n < 1) throw InvalidArgument("krr fit: no training points");
  if (y.size() != n || k.rows() != n || k.cols() != n) throw InvalidArgument("krr fit: size mismatch");
  if (!y.allFinite()) throw InvalidArgument("krr fit: non-finite labels");

  Matrix shifted = k;
  shifted.diagonal().array() += static_cast<double>(n) * lambda;
  return KrrModel{numerics::spd_solve(shifted, Vector(y)), x, spec, lambda};
}

KrrModel fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
             const KernelSpec& spec, double lambda) {
  if (!x.allFinite()) throw InvalidArgument("krr fit: non-finite inputs");
  return fit_with_gram(x, kernel::gram(spec, x), y, spec, lambda);
}

Vector predict(const KrrModel& model, const Eigen::Ref<const Matrix>& z) {
  if (z.cols() != model.x.cols()) throw InvalidArgument("krr predict: dimension mismatch");
  return kernel::gram(model.spec, z, model.x) * model.alpha;
}

double train_loss(const KrrModel& model, const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Vector>& y) {
  if (x.rows() != y.size()) throw InvalidArgument("train_loss: size mismatch");
  return (y - predict(model, x)).squaredNorm() / static_cast<double>(y.size());
}

double effective_dof_from_eigvals(const Eigen::Ref<const Vector>& eigvals, double lambda) {
  require_lambda(lambda, "effective_dof");
  const double ridge = static_cast<double>(eigvals.size()) * lambda;
  double sum = 0.0;
  for (Index i = 0; i < eigvals.size(); ++i) {
    double ev = eigvals(i);
    if (ev < -1e-8) throw InvalidArgument("effective_dof: Gram matrix has a negative eigenvalue");
    ev = std::max(ev, 0.0);
    sum += ev / (ev + ridge);
  }
  return sum;
}

double effective_dof(const Eigen::Ref<const Matrix>& k, double lambda) {
  return effective_dof_from_eigvals(numerics::sym_eigvals(k), lambda);
}

Index distilled_size(double d_eff) {
  if (!(d_eff > 0.0) || !std::isfinite(d_eff)) throw InvalidArgument("distilled_size: d_eff must be positive");
  const double s = std::ceil(d_eff * std::log(d_eff));
  return s < 1.0 ? Index{1} : static_cast<Index>(s);
}

double rkhs_norm(const Eigen::Ref<const Vector>& alpha, const Eigen::Ref<const Matrix>& k) {
  const double q = alpha.dot(k * alpha);
  if (q < -1e-10) throw NumericalError("rkhs_norm: negative quadratic form");
  return std::sqrt(std::max(q, 0.0));
}

double rkhs_norm(const KrrModel& model) {
  return rkhs_norm(model.alpha, kernel::gram(model.spec, model.x));
}

RescaledLabels rescale_labels(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                              const KernelSpec& spec, double lambda) {
  const Matrix k = kernel::gram(spec, x);
  const KrrModel raw = fit_with_gram(x, k, y, spec, lambda);
  const double r = rkhs_norm(raw.alpha, k);
  if (!(r > 0.0)) throw DegenerateLabels("rescale_labels: fitted RKHS norm is zero (degenerate labels)");
  RescaledLabels out;
  out.y = y / r;
  out.r = r;
  out.model = fit_with_gram(x, k, out.y, spec, lambda);
  return out;
}

bool regularizer_dominates(const Eigen::Ref<const Vector>& eigvals_desc, double lambda) {
  if (eigvals_desc.size() == 0) return false;
  return static_cast<double>(eigvals_desc.size()) * lambda > eigvals_desc(0);
}

}  // namespace krrdd::krr
