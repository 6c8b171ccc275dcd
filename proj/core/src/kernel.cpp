#include "krrdd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "krrdd/error.hpp"

namespace krrdd {

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
  KernelSpec spec{KernelFamily::SquaredExponential, lengthscale};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw InvalidArgument("kernel lengthscale must be positive and finite");
  }
}

namespace kernel {
namespace {

// Inputs below this dimension use direct differences, which reproduce eval()
// bit for bit. Wider inputs expand |a-b|^2 = |a|^2 + |b|^2 - 2 a.b so the
// inner products run through GEMM.
constexpr Index kExpandedMinDim = 32;

void require_same_dim(Index da, Index db, const char* what) {
  if (da != db) throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

double inv_two_l2(const KernelSpec& spec) { return 1.0 / (2.0 * spec.lengthscale * spec.lengthscale); }

// Subnormal kernel values carry no usable information and make every later
// GEMM over the Gram matrix an order of magnitude slower, so they are flushed.
constexpr double kFlushBelow = std::numeric_limits<double>::min();

double flush(double v) { return v < kFlushBelow ? 0.0 : v; }

void exp_flushed(Matrix& dist, double c) {
  dist = (dist.array() * c).exp().matrix();
  dist = (dist.array() < kFlushBelow).select(0.0, dist);
}

Matrix squared_distances(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  const Index d = a.cols();
  Matrix dist = Matrix::Zero(a.rows(), b.rows());
  if (d < kExpandedMinDim) {
    for (Index j = 0; j < b.rows(); ++j) {
      auto col = dist.col(j).array();
      for (Index k = 0; k < d; ++k) col += (a.col(k).array() - b(j, k)).square();
    }
    return dist;
  }
  const Vector sq_a = a.rowwise().squaredNorm();
  const Vector sq_b = b.rowwise().squaredNorm();
  dist.noalias() = -2.0 * a * b.transpose();
  dist.colwise() += sq_a;
  dist.rowwise() += sq_b.transpose();
  return dist.cwiseMax(0.0);
}

}  // namespace

double eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
            const Eigen::Ref<const Vector>& xp) {
  require_same_dim(x.size(), xp.size(), "kernel eval");
  if (!x.allFinite() || !xp.allFinite()) throw InvalidArgument("kernel eval: non-finite coordinates");
  double sq = 0.0;
  for (Index k = 0; k < x.size(); ++k) {
    const double diff = x(k) - xp(k);
    sq += diff * diff;
  }
  return flush(std::exp(-sq * inv_two_l2(spec)));
}

Matrix gram(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a,
            const Eigen::Ref<const Matrix>& b) {
  require_same_dim(a.cols(), b.cols(), "gram");
  Matrix k = squared_distances(a, b);
  exp_flushed(k, -inv_two_l2(spec));
  return k;
}

Matrix gram(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a) {
  Matrix k;
  if (a.cols() < kExpandedMinDim) {
    k = squared_distances(a, a);
  } else {
    const Vector sq = a.rowwise().squaredNorm();
    k.setZero(a.rows(), a.rows());
    k.selfadjointView<Eigen::Lower>().rankUpdate(a, -2.0);
    k.colwise() += sq;
    k.rowwise() += sq.transpose();
    k = k.cwiseMax(0.0);
  }
  exp_flushed(k, -inv_two_l2(spec));
  // Direct differences are already exactly symmetric; the expanded form is not.
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  k.diagonal().setOnes();
  return k;
}

Vector grad_first(const KernelSpec& spec, const Eigen::Ref<const Vector>& s,
                  const Eigen::Ref<const Vector>& x) {
  const double kv = eval(spec, s, x);
  const double l2 = spec.lengthscale * spec.lengthscale;
  return -(kv / l2) * (s - x);
}

Matrix gram_pullback_first(const KernelSpec& spec, const Eigen::Ref<const Matrix>& a,
                           const Eigen::Ref<const Matrix>& b, const Eigen::Ref<const Matrix>& kab,
                           const Eigen::Ref<const Matrix>& weights) {
  require_same_dim(a.cols(), b.cols(), "gram_pullback_first");
  if (kab.rows() != a.rows() || kab.cols() != b.rows() || weights.rows() != kab.rows() ||
      weights.cols() != kab.cols()) {
    throw InvalidArgument("gram_pullback_first: shape mismatch");
  }
  // d k(a_i, b_j) / d a_i = -k(a_i, b_j) (a_i - b_j) / l^2
  const Matrix p = weights.cwiseProduct(kab);
  const Vector row_mass = p.rowwise().sum();
  Matrix out = p * b;
  out -= row_mass.asDiagonal() * a;
  out /= spec.lengthscale * spec.lengthscale;
  return out;
}

SpectralSample spectral_sample(const KernelSpec& spec, Index count, Index dim, Rng& rng) {
  spec.validate();
  if (count < 1 || dim < 1) throw InvalidArgument("spectral_sample: count and dim must be >= 1");
  SpectralSample out{Matrix(count, dim), Vector(count)};
  const double scale = 1.0 / spec.lengthscale;
  for (Index i = 0; i < count; ++i) {
    for (Index k = 0; k < dim; ++k) out.frequencies(i, k) = scale * rng.normal();
  }
  for (Index i = 0; i < count; ++i) out.phases(i) = 2.0 * std::numbers::pi * rng.uniform();
  return out;
}

}  // namespace kernel
}  // namespace krrdd
