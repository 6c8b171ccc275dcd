#pragma once

#include <optional>

#include "krrdd/kernel.hpp"
#include "krrdd/numerics.hpp"
#include "krrdd/rng.hpp"

namespace krrdd {

enum class FeatureScheme { Plain, Weighted };

/// Random Fourier feature map phi: R^d -> R^s,
/// phi(x)_j = weights_j * cos(frequencies_j . x + phases_j).
struct FeatureMap {
  Matrix frequencies;  // s x d
  Vector phases;       // s, in [0, 2 pi)
  Vector weights;      // s, positive
  FeatureScheme scheme = FeatureScheme::Plain;

  Index s_phi() const { return frequencies.rows(); }
  Index dim() const { return frequencies.cols(); }
};

/// Ridge regressor in feature space, w = (Xt^T Xt + n s lambda I)^{-1} Xt^T y.
struct RffRidgeModel {
  Vector weights;
  double lambda = 0.0;
  Index n = 0;
  std::optional<FeatureMap> map;  // set when fitted from raw points
};

/// Candidate pool for leverage-weighted sampling: `pool_size` plain features
/// with their empirical ridge leverage scores over the data.
struct LeveragePool {
  SpectralSample features;
  Vector scores;  // (2/M) c_i^T (Khat + n lambda I)^{-1} c_i
  Matrix pool_gram;  // Khat = (2/M) C C^T, n x n; empty unless requested
};

namespace rff {

inline constexpr Index kDefaultPoolFactor = 10;

FeatureMap plain_map(const KernelSpec& spec, Index s_phi, Index dim, Rng& rng);

/// Draws M = pool_size plain features and scores each one by its ridge
/// leverage against the pool's own Gram estimate.
LeveragePool leverage_pool(const KernelSpec& spec, Index pool_size,
                           const Eigen::Ref<const Matrix>& x, double lambda, Rng& rng,
                           bool keep_pool_gram = false);

/// Resamples s_phi pool features with replacement, proportionally to their
/// scores, and assigns weight sqrt(2 / (s_phi M q_i)).
FeatureMap resample_weighted(const LeveragePool& pool, Index s_phi, Rng& rng);

/// leverage_pool followed by resample_weighted with M = pool_factor * s_phi.
FeatureMap weighted_map(const KernelSpec& spec, Index s_phi, const Eigen::Ref<const Matrix>& x,
                        double lambda, Index pool_factor, Rng& rng);

/// Feature matrix, row i = phi(X_i).
Matrix apply(const FeatureMap& map, const Eigen::Ref<const Matrix>& x);

RffRidgeModel ridge_fit(const Eigen::Ref<const Matrix>& xt, const Eigen::Ref<const Vector>& y,
                        double lambda);

/// Applies `map` to the raw points and keeps it on the model.
RffRidgeModel ridge_fit(const FeatureMap& map, const Eigen::Ref<const Matrix>& x,
                        const Eigen::Ref<const Vector>& y, double lambda);

/// Z w for feature rows Z.
Vector ridge_predict(const RffRidgeModel& model, const Eigen::Ref<const Matrix>& z);

}  // namespace rff
}  // namespace krrdd
