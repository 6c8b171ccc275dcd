#include "krrdd/rff.hpp"

#include <algorithm>
#include <cmath>

#include "krrdd/error.hpp"

namespace krrdd::rff {
namespace {

Matrix raw_cosines(const SpectralSample& features, const Eigen::Ref<const Matrix>& x) {
  Matrix c = x * features.frequencies.transpose();
  c.rowwise() += features.phases.transpose();
  return c.array().cos().matrix();
}

void require_lambda(double lambda, const char* what) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(std::string(what) + ": lambda must be positive and finite");
  }
}

}  // namespace

FeatureMap plain_map(const KernelSpec& spec, Index s_phi, Index dim, Rng& rng) {
  if (s_phi < 1) throw InvalidArgument("plain_map: s_phi must be >= 1");
  SpectralSample sample = kernel::spectral_sample(spec, s_phi, dim, rng);
  FeatureMap map;
  map.frequencies = std::move(sample.frequencies);
  map.phases = std::move(sample.phases);
  map.weights = Vector::Constant(s_phi, std::sqrt(2.0 / static_cast<double>(s_phi)));
  map.scheme = FeatureScheme::Plain;
  return map;
}

LeveragePool leverage_pool(const KernelSpec& spec, Index pool_size,
                           const Eigen::Ref<const Matrix>& x, double lambda, Rng& rng,
                           bool keep_pool_gram) {
  require_lambda(lambda, "leverage_pool");
  if (pool_size < 1) throw InvalidArgument("leverage_pool: pool size must be >= 1");
  if (x.rows() < 1 || !x.allFinite()) throw InvalidArgument("leverage_pool: bad data matrix");

  LeveragePool pool;
  pool.features = kernel::spectral_sample(spec, pool_size, x.cols(), rng);
  const Matrix c = raw_cosines(pool.features, x);  // n x M
  const Index n = x.rows();
  const double a = 2.0 / static_cast<double>(pool_size);
  const double ridge = static_cast<double>(n) * lambda;

  if (n <= pool_size) {
    Matrix h(n, n);
    h.setZero();
    h.selfadjointView<Eigen::Lower>().rankUpdate(c, a);
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    if (keep_pool_gram) pool.pool_gram = h;
    h.diagonal().array() += ridge;
    const numerics::SpdFactor factor(h);
    const Matrix z = factor.llt().matrixL().solve(c);
    pool.scores = a * z.colwise().squaredNorm().transpose();
  } else {
    // Push-through: c_i^T (a C C^T + r I)^{-1} c_i = [(a G + r I)^{-1} G]_ii, G = C^T C.
    Matrix g(pool_size, pool_size);
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    Matrix h = a * g;
    h.diagonal().array() += ridge;
    const Matrix y = numerics::SpdFactor(h).solve(g);
    pool.scores = a * y.diagonal();
    if (keep_pool_gram) pool.pool_gram = a * c * c.transpose();
  }
  pool.scores = pool.scores.cwiseMax(0.0);
  return pool;
}

FeatureMap resample_weighted(const LeveragePool& pool, Index s_phi, Rng& rng) {
  if (s_phi < 1) throw InvalidArgument("resample_weighted: s_phi must be >= 1");
  const Index m = pool.scores.size();
  if (m < 1 || pool.features.frequencies.rows() != m) {
    throw InvalidArgument("resample_weighted: malformed pool");
  }
  const double total = pool.scores.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw LeverageDegenerate("weighted_map: all ridge leverage scores are zero (leverage degenerate)");
  }

  std::vector<double> cdf(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (Index i = 0; i < m; ++i) {
    acc += pool.scores(i) / total;
    cdf[static_cast<std::size_t>(i)] = acc;
  }

  FeatureMap map;
  map.frequencies.resize(s_phi, pool.features.frequencies.cols());
  map.phases.resize(s_phi);
  map.weights.resize(s_phi);
  map.scheme = FeatureScheme::Weighted;
  for (Index j = 0; j < s_phi; ++j) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    Index i = std::min<Index>(static_cast<Index>(it - cdf.begin()), m - 1);
    // Never select a zero-probability feature; step back to the last positive one.
    while (pool.scores(i) <= 0.0 && i > 0) --i;
    const double q = pool.scores(i) / total;
    map.frequencies.row(j) = pool.features.frequencies.row(i);
    map.phases(j) = pool.features.phases(i);
    map.weights(j) = std::sqrt(2.0 / (static_cast<double>(s_phi) * static_cast<double>(m) * q));
  }
  return map;
}

FeatureMap weighted_map(const KernelSpec& spec, Index s_phi, const Eigen::Ref<const Matrix>& x,
                        double lambda, Index pool_factor, Rng& rng) {
  if (s_phi < 1) throw InvalidArgument("weighted_map: s_phi must be >= 1");
  if (pool_factor < 2) throw InvalidArgument("weighted_map: pool_factor must be >= 2");
  const LeveragePool pool = leverage_pool(spec, pool_factor * s_phi, x, lambda, rng);
  return resample_weighted(pool, s_phi, rng);
}

Matrix apply(const FeatureMap& map, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != map.dim()) throw InvalidArgument("rff apply: dimension mismatch");
  Matrix z = x * map.frequencies.transpose();
  z.rowwise() += map.phases.transpose();
  z = z.array().cos().matrix();
  return z * map.weights.asDiagonal();
}

RffRidgeModel ridge_fit(const Eigen::Ref<const Matrix>& xt, const Eigen::Ref<const Vector>& y,
                        double lambda) {
  require_lambda(lambda, "ridge_fit");
  const Index n = xt.rows();
  const Index s = xt.cols();
  if (n < 1 || s < 1) throw InvalidArgument("ridge_fit: empty feature matrix");
  if (y.size() != n) throw InvalidArgument("ridge_fit: label length mismatch");
  if (!xt.allFinite() || !y.allFinite()) throw InvalidArgument("ridge_fit: non-finite input");

  Matrix normal(s, s);
  normal.setZero();
  normal.selfadjointView<Eigen::Lower>().rankUpdate(xt.transpose(), 1.0);
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  normal.diagonal().array() += static_cast<double>(n) * static_cast<double>(s) * lambda;

  RffRidgeModel model;
  model.weights = numerics::spd_solve(normal, Vector(xt.transpose() * y));
  model.lambda = lambda;
  model.n = n;
  return model;
}

RffRidgeModel ridge_fit(const FeatureMap& map, const Eigen::Ref<const Matrix>& x,
                        const Eigen::Ref<const Vector>& y, double lambda) {
  RffRidgeModel model = ridge_fit(apply(map, x), y, lambda);
  model.map = map;
  return model;
}

Vector ridge_predict(const RffRidgeModel& model, const Eigen::Ref<const Matrix>& z) {
  if (z.cols() != model.weights.size()) throw InvalidArgument("ridge_predict: column count mismatch");
  return z * model.weights;
}

}  // namespace krrdd::rff
