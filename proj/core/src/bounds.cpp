#include "krrdd/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "krrdd/error.hpp"

namespace krrdd::distill {
namespace {

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite and >= 0");
}

double labels_objective(double tau, double train_loss, double lambda) {
  const WeakTriangle c = weak_triangle(tau);
  return c.near * train_loss + (4.0 * c.near + 2.0 * c.far) * lambda;
}

}  // namespace

WeakTriangle weak_triangle(double tau) {
  if (!((tau > 0.0 && tau < 1.0) || tau == 2.0)) {
    throw InvalidArgument("weak_triangle: tau must lie in (0,1) or equal 2");
  }
  return {std::max(tau, 4.0 / (tau * tau)),
          std::min(1.0 + tau, 4.0 * (1.0 + tau) / (3.0 * tau))};
}

BoundValue bound_vs_optimal(double lambda) {
  require_nonneg(lambda, "lambda");
  BoundValue best{INFINITY, 2.0};
  auto consider = [&](double tau) {
    const WeakTriangle c = weak_triangle(tau);
    const double v = (2.0 * c.far + 2.0 * c.near) * lambda;
    if (v < best.value) best = {v, tau};
  };
  consider(2.0);
  for (int i = 1; i <= kEpsilonGridPoints; ++i) {
    consider(static_cast<double>(i) / (kEpsilonGridPoints + 1));
  }
  return best;
}

BoundValue bound_vs_labels(double train_loss, double lambda) {
  require_nonneg(train_loss, "train loss");
  require_nonneg(lambda, "lambda");
  BoundValue best{labels_objective(2.0, train_loss, lambda), 2.0};
  auto consider = [&](double tau) {
    const double v = labels_objective(tau, train_loss, lambda);
    if (v < best.value) best = {v, tau};
  };
  for (int i = 1; i <= kEpsilonGridPoints; ++i) {
    consider(static_cast<double>(i) / (kEpsilonGridPoints + 1));
  }
  const double denom = train_loss + 4.0 * lambda;
  if (denom > 0.0) {
    const double eps = std::cbrt(16.0 * lambda / denom);
    if (eps > 0.0 && eps < 1.0) consider(eps);
  }
  return best;
}

}  // namespace krrdd::distill
