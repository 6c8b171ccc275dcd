#include "krrdd/distill.hpp"

#include <cmath>
#include <string>

#include "krrdd/error.hpp"

namespace krrdd::distill {

Matrix init_points(const Eigen::Ref<const Matrix>& x, Index m, InitStrategy strategy, Rng& rng) {
  if (m < 1) throw InvalidArgument("init_points: m must be >= 1");
  const Index d = x.cols();
  Matrix s(m, d);
  switch (strategy) {
    case InitStrategy::Subset: {
      if (m > x.rows()) {
        throw InvalidArgument("init_points: subset size " + std::to_string(m) +
                              " exceeds dataset size " + std::to_string(x.rows()));
      }
      const auto idx = rng.sample_without_replacement(static_cast<std::size_t>(x.rows()),
                                                      static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) s.row(i) = x.row(static_cast<Index>(idx[static_cast<std::size_t>(i)]));
      break;
    }
    case InitStrategy::Gaussian:
      for (Index i = 0; i < m; ++i) {
        for (Index k = 0; k < d; ++k) s(i, k) = rng.normal();
      }
      break;
  }
  return s;
}

namespace {

Vector labels_from_features(const Matrix& phi_s, const Eigen::Ref<const Matrix>& xt,
                            const Eigen::Ref<const Vector>& y, double lambda) {
  const Index s_phi = phi_s.cols();
  const Vector w_x = rff::ridge_fit(xt, y, lambda).weights;
  const double ridge = static_cast<double>(xt.rows()) * static_cast<double>(s_phi) * lambda;
  Matrix normal = phi_s.transpose() * phi_s;
  normal.diagonal().array() += ridge;
  const Vector b = normal * w_x;
  return numerics::pinv_apply(phi_s.transpose(), b);
}

Matrix checked_features(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& xt,
                        const FeatureMap& map) {
  if (xt.cols() != map.s_phi()) throw InvalidArgument("solve_labels: feature count mismatch");
  if (s.cols() != map.dim()) throw InvalidArgument("solve_labels: dimension mismatch");
  return rff::apply(map, s);
}

}  // namespace

Vector solve_labels(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& xt,
                    const Eigen::Ref<const Vector>& y, const FeatureMap& map, double lambda) {
  const Matrix phi_s = checked_features(s, xt, map);
  const Index rank = numerics::numerical_rank(phi_s, kRankTol);
  if (rank < map.s_phi()) {
    throw ResampleS(static_cast<std::size_t>(rank), static_cast<std::size_t>(map.s_phi()));
  }
  return labels_from_features(phi_s, xt, y, lambda);
}

Vector solve_labels_lstsq(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& xt,
                          const Eigen::Ref<const Vector>& y, const FeatureMap& map, double lambda) {
  return labels_from_features(checked_features(s, xt, map), xt, y, lambda);
}

Matrix dual_projection(const Eigen::Ref<const Matrix>& xt, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("dual_projection: lambda must be positive");
  const Index n = xt.rows();
  const double inv_s = 1.0 / static_cast<double>(xt.cols());
  Matrix h(n, n);
  h.setZero();
  h.selfadjointView<Eigen::Lower>().rankUpdate(xt, inv_s);
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  h.diagonal().array() += static_cast<double>(n) * lambda;
  // H is symmetric, so (Xt^T H^{-1})^T = H^{-1} Xt.
  return inv_s * numerics::spd_solve(h, Matrix(xt)).transpose();
}

AlphaSolution solve_alpha(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& xt, const Eigen::Ref<const Vector>& y,
                          const KernelSpec& spec, double lambda) {
  if (xt.rows() != x.rows() || y.size() != x.rows()) throw InvalidArgument("solve_alpha: size mismatch");
  AlphaSolution out;
  out.beta = rff::ridge_fit(xt, y, lambda).weights;
  const Matrix a = dual_projection(xt, lambda) * kernel::gram(spec, x, s);
  out.alpha = numerics::pinv_apply(a, out.beta);
  out.rank = numerics::numerical_rank(a, kRankTol);
  out.full_rank = out.rank >= xt.cols();
  const double beta_norm = out.beta.norm();
  out.residual = beta_norm > 0.0 ? (a * out.alpha - out.beta).norm() / beta_norm : 0.0;
  return out;
}

ConstructResult construct(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                          const KernelSpec& spec, double lambda, const FeatureMap& map, Rng& rng,
                          const ConstructOptions& opts) {
  if (opts.max_retries < 1) throw InvalidArgument("construct: max_retries must be >= 1");
  const Matrix xt = rff::apply(map, x);
  const Index m = map.s_phi() + 1;

  ConstructResult out;
  for (int attempt = 1;; ++attempt) {
    Matrix s = init_points(x, m, opts.init, rng);
    if (opts.rank_policy == RankPolicy::Accept) {
      out.set.y_s = solve_labels_lstsq(s, xt, y, map, lambda);
      out.label_rank = numerics::numerical_rank(rff::apply(map, s), kRankTol);
    } else {
      try {
        out.set.y_s = solve_labels(s, xt, y, map, lambda);
      } catch (const ResampleS&) {
        if (attempt >= opts.max_retries) throw;
        continue;
      }
      out.label_rank = map.s_phi();
    }
    out.set.s = std::move(s);
    out.attempts = attempt;
    break;
  }
  out.alpha = solve_alpha(out.set.s, x, xt, y, spec, lambda);
  out.set.alpha_s = out.alpha.alpha;
  out.set.map = map;
  out.set.lambda = lambda;
  return out;
}

Vector predict_distilled(const DistilledSet& dset, const KernelSpec& spec,
                         const Eigen::Ref<const Matrix>& z) {
  if (z.cols() != dset.s.cols()) throw InvalidArgument("predict_distilled: dimension mismatch");
  if (dset.alpha_s.size() != dset.s.rows()) throw InvalidArgument("predict_distilled: malformed set");
  return kernel::gram(spec, z, dset.s) * dset.alpha_s;
}

BoundReport evaluate(const DistilledSet& dset, const Eigen::Ref<const Matrix>& x,
                     const Eigen::Ref<const Vector>& y, const KrrModel& full_model,
                     const EvaluateContext& ctx) {
  const Index n = x.rows();
  if (y.size() != n) throw InvalidArgument("evaluate: size mismatch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector f_x = krr::predict(full_model, x);
  const Vector f_s = predict_distilled(dset, full_model.spec, x);

  BoundReport r;
  r.d_eff = ctx.d_eff ? *ctx.d_eff : krr::effective_dof(kernel::gram(full_model.spec, x), full_model.lambda);
  r.s_phi = dset.map.s_phi();
  r.m = dset.m();
  r.compression = static_cast<double>(r.m) / static_cast<double>(n);
  r.train_loss = (y - f_x).squaredNorm() * inv_n;
  r.loss_vs_optimal = (f_x - f_s).squaredNorm() * inv_n;
  r.loss_vs_labels = (y - f_s).squaredNorm() * inv_n;
  r.bound_vs_optimal = bound_vs_optimal(full_model.lambda).value;
  r.bound_vs_labels = bound_vs_labels(r.train_loss, full_model.lambda).value;
  r.rkhs_scale = ctx.rkhs_scale;
  return r;
}

}  // namespace krrdd::distill
