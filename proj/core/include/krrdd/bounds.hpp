#pragma once

namespace krrdd::distill {

/// Coefficients of the relaxed triangle inequality
///   |x-y|^2 <= far * |x-z|^2 + near * |y-z|^2
/// for parameter tau in (0,1) or tau = 2:
///   far = max(tau, 4/tau^2), near = min(1+tau, 4(1+tau)/(3tau)).
struct WeakTriangle {
  double far;
  double near;
};

WeakTriangle weak_triangle(double tau);

/// A bound value together with the tau that attains it.
struct BoundValue {
  double value;
  double tau;
};

inline constexpr int kEpsilonGridPoints = 10000;

/// min over tau of (2 far + 2 near) lambda. Always 8 lambda (tau = 2).
BoundValue bound_vs_optimal(double lambda);

/// min over tau of near * L + (4 near + 2 far) lambda, over tau = 2 and a
/// uniform grid on (0,1) refined with the stationary point
/// eps^3 = 16 lambda / (L + 4 lambda).
BoundValue bound_vs_labels(double train_loss, double lambda);

}  // namespace krrdd::distill
