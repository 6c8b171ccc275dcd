#pragma once

#include <cstdint>
#include <vector>

#include "krrdd/distill.hpp"
#include "krrdd/error.hpp"
#include "krrdd/kernel.hpp"
#include "krrdd/numerics.hpp"

namespace krrdd {

struct OptConfig {
  Index iterations = 20000;
  double learning_rate = 0.002;
  Index batch_size = 0;  // 0 = full batch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double jitter = 1e-6;
  std::uint64_t seed = 0;
  Index checkpoint_every = 100;

  void validate(Index n) const;
};

struct Checkpoint {
  Index iteration = 0;
  double loss = 0.0;  // full-data loss
  double grad_norm_s = 0.0;
  double grad_norm_y = 0.0;
};

struct OptTrace {
  std::vector<Checkpoint> checkpoints;  // strictly increasing iterations

  double initial_loss() const { return checkpoints.front().loss; }
  double final_loss() const { return checkpoints.back().loss; }
};

/// Raised when a checkpoint loss is not finite; carries the trace so far.
class OptimizationDiverged : public NumericalError {
 public:
  OptimizationDiverged(const std::string& what, OptTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const OptTrace& trace() const { return trace_; }

 private:
  OptTrace trace_;
};

struct KipGradient {
  double loss = 0.0;
  Matrix grad_s;  // m x d
  Vector grad_y;  // m
};

struct OptResult {
  DistilledSet set;  // alpha_s = (K_SS + (m lambda + jitter) I)^{-1} y_S
  OptTrace trace;
};

/// Bias-corrected Adam on a flat parameter vector.
class Adam {
 public:
  Adam(Index size, double learning_rate, double beta1, double beta2, double eps);
  void step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad);
  Index steps() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  Index t_ = 0;
};

namespace optdistill {

/// (1/n_b) |y_b - K_XS (K_SS + (m lambda + jitter) I)^{-1} y_S|^2,
/// K_XS = gram(X_b, S), K_SS = gram(S, S).
double kip_loss(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Vector>& y_s,
                const Eigen::Ref<const Matrix>& x_batch, const Eigen::Ref<const Vector>& y_batch,
                const KernelSpec& spec, double lambda, double jitter = 1e-6);

/// kip_loss and its exact gradients with respect to S and y_S.
KipGradient kip_grad(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Vector>& y_s,
                     const Eigen::Ref<const Matrix>& x_batch, const Eigen::Ref<const Vector>& y_batch,
                     const KernelSpec& spec, double lambda, double jitter = 1e-6);

/// m distinct rows of X, uniformly without replacement, carrying their own
/// labels. alpha_s is left empty; optimize() refits it.
DistilledSet subset_init(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, Index m,
                         Rng& rng);

/// Runs Adam on (S, y_S) starting from `init`. Checkpoints record the
/// full-data loss every cfg.checkpoint_every iterations and at the end.
OptResult optimize(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                   const DistilledSet& init, const KernelSpec& spec, double lambda,
                   const OptConfig& cfg);

}  // namespace optdistill
}  // namespace krrdd
