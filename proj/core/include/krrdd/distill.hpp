#pragma once

#include <optional>

#include "krrdd/bounds.hpp"
#include "krrdd/error.hpp"
#include "krrdd/kernel.hpp"
#include "krrdd/krr.hpp"
#include "krrdd/numerics.hpp"
#include "krrdd/rff.hpp"
#include "krrdd/rng.hpp"

namespace krrdd {

/// m = s_phi + 1 synthetic points with labels y_S and the coefficients of
/// the distilled predictor f_S(x) = sum_i alpha_S_i k(S_i, x).
struct DistilledSet {
  Matrix s;
  Vector y_s;
  Vector alpha_s;
  FeatureMap map;
  double lambda = 0.0;

  Index m() const { return s.rows(); }
};

enum class InitStrategy { Subset, Gaussian };

namespace distill {

inline constexpr double kRankTol = 1e-10;
inline constexpr int kDefaultMaxRetries = 10;

/// Subset: m distinct rows of X, uniformly without replacement.
/// Gaussian: i.i.d. N(0, I) rows.
Matrix init_points(const Eigen::Ref<const Matrix>& x, Index m, InitStrategy strategy, Rng& rng);

/// Labels y_S = (phi(S)^T)^+ b with
/// b = (phi(S)^T phi(S) + n s lambda I) (Xt^T Xt + n s lambda I)^{-1} Xt^T y,
/// so that feature-space ridge on (phi(S), y_S) reproduces ridge on (Xt, y).
/// n is the row count of Xt. Throws ResampleS if phi(S) is column-rank deficient.
Vector solve_labels(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& xt,
                    const Eigen::Ref<const Vector>& y, const FeatureMap& map, double lambda);

/// Same solve without the rank gate: the minimum-norm y_S, which reproduces
/// w_X only to the extent b lies in the range of phi(S)^T.
Vector solve_labels_lstsq(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& xt,
                          const Eigen::Ref<const Vector>& y, const FeatureMap& map, double lambda);

/// Ahat = (1/s) Xt^T ((1/s) Xt Xt^T + n lambda I)^{-1}, an s x n matrix.
Matrix dual_projection(const Eigen::Ref<const Matrix>& xt, double lambda);

struct AlphaSolution {
  Vector alpha;
  Vector beta;             // feature-space ridge weights on (Xt, y)
  double residual = 0.0;   // |A alpha - beta| / |beta|, 0 when beta = 0
  Index rank = 0;          // numerical rank of A at kRankTol
  bool full_rank = false;  // rank == s_phi
};

/// Solves A alpha = beta in the minimum-norm sense, A = Ahat * gram(X, S).
AlphaSolution solve_alpha(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& xt, const Eigen::Ref<const Vector>& y,
                          const KernelSpec& spec, double lambda);

enum class RankPolicy {
  Resample,  // redraw S until phi(S) has full column rank
  Accept,    // keep the first S and use least-squares labels
};

struct ConstructOptions {
  InitStrategy init = InitStrategy::Subset;
  int max_retries = kDefaultMaxRetries;
  RankPolicy rank_policy = RankPolicy::Resample;
};

struct ConstructResult {
  DistilledSet set;
  AlphaSolution alpha;
  int attempts = 0;
  Index label_rank = 0;  // numerical rank of phi(S)
};

/// Draws S, then solves for y_S and alpha_S. Under RankPolicy::Resample a
/// rank-deficient phi(S) triggers a fresh draw, up to opts.max_retries
/// attempts in total. alpha_S never depends on y_S, so RankPolicy::Accept
/// still yields the part (ii) predictor.
ConstructResult construct(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                          const KernelSpec& spec, double lambda, const FeatureMap& map, Rng& rng,
                          const ConstructOptions& opts = {});

Vector predict_distilled(const DistilledSet& dset, const KernelSpec& spec,
                         const Eigen::Ref<const Matrix>& z);

struct EvaluateContext {
  std::optional<double> d_eff;  // computed from gram(X) when absent
  double rkhs_scale = 1.0;
};

/// Measured losses of f_S against the full fit and against the labels,
/// plus both bounds evaluated at the full fit's training loss.
BoundReport evaluate(const DistilledSet& dset, const Eigen::Ref<const Matrix>& x,
                     const Eigen::Ref<const Vector>& y, const KrrModel& full_model,
                     const EvaluateContext& ctx = {});

}  // namespace distill
}  // namespace krrdd
