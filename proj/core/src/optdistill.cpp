#include "krrdd/optdistill.hpp"

#include <cmath>
#include <string>

#include "krrdd/rng.hpp"

namespace krrdd {

void OptConfig::validate(Index n) const {
  if (iterations < 1) throw InvalidArgument("optimizer: iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("optimizer: learning rate must be positive");
  if (batch_size < 0 || batch_size > n) throw InvalidArgument("optimizer: batch size must lie in [0, n]");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("optimizer: Adam betas must lie in [0, 1)");
  }
  if (!(eps_adam > 0.0) || !(jitter >= 0.0)) throw InvalidArgument("optimizer: bad eps or jitter");
  if (checkpoint_every < 1) throw InvalidArgument("optimizer: checkpoint interval must be >= 1");
}

Adam::Adam(Index size, double learning_rate, double beta1, double beta2, double eps)
    : m_(Vector::Zero(size)),
      v_(Vector::Zero(size)),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void Adam::step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

namespace optdistill {
namespace {

void check_shapes(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Vector>& y_s,
                  const Eigen::Ref<const Matrix>& x_batch, const Eigen::Ref<const Vector>& y_batch) {
  if (s.rows() < 1) throw InvalidArgument("kip: distilled set is empty");
  if (y_s.size() != s.rows()) throw InvalidArgument("kip: y_S length mismatch");
  if (x_batch.rows() < 1 || y_batch.size() != x_batch.rows()) throw InvalidArgument("kip: batch size mismatch");
  if (x_batch.cols() != s.cols()) throw InvalidArgument("kip: dimension mismatch");
}

Matrix regularized_gram(const KernelSpec& spec, const Eigen::Ref<const Matrix>& s, double lambda,
                        double jitter) {
  if (!(lambda >= 0.0) || !(jitter >= 0.0)) throw InvalidArgument("kip: lambda and jitter must be >= 0");
  Matrix g = kernel::gram(spec, s);
  g.diagonal().array() += static_cast<double>(s.rows()) * lambda + jitter;
  return g;
}

}  // namespace

double kip_loss(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Vector>& y_s,
                const Eigen::Ref<const Matrix>& x_batch, const Eigen::Ref<const Vector>& y_batch,
                const KernelSpec& spec, double lambda, double jitter) {
  check_shapes(s, y_s, x_batch, y_batch);
  const numerics::SpdFactor g(regularized_gram(spec, s, lambda, jitter));
  const Vector alpha = g.solve(Vector(y_s));
  const Vector res = kernel::gram(spec, x_batch, s) * alpha - y_batch;
  return res.squaredNorm() / static_cast<double>(x_batch.rows());
}

KipGradient kip_grad(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Vector>& y_s,
                     const Eigen::Ref<const Matrix>& x_batch, const Eigen::Ref<const Vector>& y_batch,
                     const KernelSpec& spec, double lambda, double jitter) {
  check_shapes(s, y_s, x_batch, y_batch);
  if (!(lambda >= 0.0) || !(jitter >= 0.0)) throw InvalidArgument("kip: lambda and jitter must be >= 0");
  const double scale = 2.0 / static_cast<double>(x_batch.rows());

  const Matrix k_ss = kernel::gram(spec, s);
  Matrix g_mat = k_ss;
  g_mat.diagonal().array() += static_cast<double>(s.rows()) * lambda + jitter;
  const numerics::SpdFactor g(g_mat);
  const Vector alpha = g.solve(Vector(y_s));
  const Matrix k_xs = kernel::gram(spec, x_batch, s);
  const Vector res = k_xs * alpha - y_batch;

  KipGradient out;
  out.loss = res.squaredNorm() / static_cast<double>(x_batch.rows());

  // dL/dalpha = u, alpha = G^{-1} y_S  =>  dL/dy_S = G^{-1} u.
  const Vector k_res = k_xs.transpose() * res;
  out.grad_y = g.solve(Vector(scale * k_res));

  // Both Gram cotangents have low rank:
  //   dL/dK_XS = scale * res alpha^T,  dL/dG = -grad_y alpha^T,
  // and K_SS enters through both arguments, so its cotangent is symmetrized.
  // For a weight matrix u v^T the first-argument pullback of gram(A, B) is
  //   row_i = u_i [ (K (v o B))_i - (K v)_i A_i ] / l^2,
  // which avoids forming any m x n product.
  const double inv_l2 = 1.0 / (spec.lengthscale * spec.lengthscale);
  const Matrix k_res_x = k_xs.transpose() * (res.asDiagonal() * x_batch);
  out.grad_s = (scale * inv_l2) * (alpha.asDiagonal() * (k_res_x - k_res.asDiagonal() * s));

  auto rank1_self = [&](const Vector& u, const Vector& v) {
    const Vector kv = k_ss * v;
    const Matrix kvs = k_ss * (v.asDiagonal() * s);
    return Matrix(inv_l2 * (u.asDiagonal() * (kvs - kv.asDiagonal() * s)));
  };
  out.grad_s -= rank1_self(out.grad_y, alpha);
  out.grad_s -= rank1_self(alpha, out.grad_y);
  return out;
}

DistilledSet subset_init(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, Index m,
                         Rng& rng) {
  if (y.size() != x.rows()) throw InvalidArgument("subset_init: size mismatch");
  if (m < 1 || m > x.rows()) throw InvalidArgument("subset_init: m must lie in [1, n]");
  const auto idx = rng.sample_without_replacement(static_cast<std::size_t>(x.rows()),
                                                  static_cast<std::size_t>(m));
  DistilledSet out;
  out.s.resize(m, x.cols());
  out.y_s.resize(m);
  for (Index i = 0; i < m; ++i) {
    const auto row = static_cast<Index>(idx[static_cast<std::size_t>(i)]);
    out.s.row(i) = x.row(row);
    out.y_s(i) = y(row);
  }
  return out;
}

OptResult optimize(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                   const DistilledSet& init, const KernelSpec& spec, double lambda,
                   const OptConfig& cfg) {
  const Index n = x.rows();
  cfg.validate(n);
  check_shapes(init.s, init.y_s, x, y);

  const Index m = init.s.rows();
  const Index d = init.s.cols();
  Vector params(m * d + m);
  params.head(m * d) = Eigen::Map<const Vector>(Matrix(init.s).data(), m * d);
  params.tail(m) = init.y_s;

  auto points = [&](const Vector& p) { return Eigen::Map<const Matrix>(p.data(), m, d); };
  auto labels = [&](const Vector& p) { return p.tail(m); };

  Adam adam(params.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_adam);
  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size == n;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  OptTrace trace;
  Vector flat_grad(params.size());
  Matrix xb;
  Vector yb;

  auto record = [&](Index t, const KipGradient& g) {
    trace.checkpoints.push_back({t, g.loss, g.grad_s.norm(), g.grad_y.norm()});
    if (!std::isfinite(g.loss)) {
      throw OptimizationDiverged("optimizer: non-finite loss at iteration " + std::to_string(t), trace);
    }
  };

  for (Index t = 0;; ++t) {
    const bool checkpoint = t % cfg.checkpoint_every == 0 || t == cfg.iterations;
    KipGradient grad;
    if (full_batch) {
      grad = kip_grad(points(params), labels(params), x, y, spec, lambda, cfg.jitter);
      if (checkpoint) record(t, grad);
    } else {
      if (checkpoint) {
        record(t, kip_grad(points(params), labels(params), x, y, spec, lambda, cfg.jitter));
      }
      if (t < cfg.iterations) {
        if (cursor >= order.size()) {
          order = rng.permutation(static_cast<std::size_t>(n));
          cursor = 0;
        }
        const std::size_t take =
            std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - cursor);
        xb.resize(static_cast<Index>(take), d);
        yb.resize(static_cast<Index>(take));
        for (std::size_t i = 0; i < take; ++i) {
          const auto row = static_cast<Index>(order[cursor + i]);
          xb.row(static_cast<Index>(i)) = x.row(row);
          yb(static_cast<Index>(i)) = y(row);
        }
        cursor += take;
        grad = kip_grad(points(params), labels(params), xb, yb, spec, lambda, cfg.jitter);
      }
    }
    if (t == cfg.iterations) break;

    flat_grad.head(m * d) = Eigen::Map<const Vector>(grad.grad_s.data(), m * d);
    flat_grad.tail(m) = grad.grad_y;
    adam.step(params, flat_grad);
  }

  OptResult out;
  out.set.s = points(params);
  out.set.y_s = labels(params);
  const numerics::SpdFactor g(regularized_gram(spec, out.set.s, lambda, cfg.jitter));
  out.set.alpha_s = g.solve(out.set.y_s);
  out.set.map = init.map;
  out.set.lambda = lambda;
  out.trace = std::move(trace);
  return out;
}

}  // namespace optdistill
}  // namespace krrdd
