#include "krrdd/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "krrdd/distill.hpp"
#include "krrdd/error.hpp"
#include "krrdd/krr.hpp"

namespace krrdd::experiment {
namespace {

std::string int_field(long long v) { return std::to_string(v); }

LabeledData make_data(ExperimentKind kind, const SweepConfig& cfg, double grid_value,
                      std::uint64_t data_seed, const IdxImages* mnist) {
  switch (kind) {
    case ExperimentKind::Grf:
      return data::gen_grf(cfg.n, grid_value, cfg.sigma_y,
                           KernelSpec::squared_exponential(cfg.lengthscale), data_seed);
    case ExperimentKind::Clusters:
      return data::gen_two_clusters(cfg.n, grid_value, data_seed);
    case ExperimentKind::Mnist: {
      if (mnist == nullptr) throw InvalidArgument("mnist experiment needs loaded images");
      const double rounded = std::round(grid_value);
      if (rounded != grid_value || rounded < 2.0) throw InvalidArgument("mnist grid values must be integers >= 2");
      return data::binary_subset(*mnist, kMnistClassA, kMnistClassB, static_cast<Index>(rounded), data_seed);
    }
  }
  throw InvalidArgument("unknown experiment kind");
}

void run_pipeline(ExperimentKind kind, const SweepConfig& cfg, std::size_t grid_index,
                  std::uint64_t seed, const IdxImages* mnist, ExperimentRow& row) {
  const auto gi = static_cast<std::uint64_t>(grid_index);
  const LabeledData ds = make_data(kind, cfg, row.grid_param, derive_seed(seed, {kStageData}), mnist);
  row.n = ds.n();

  const bool is_mnist = kind == ExperimentKind::Mnist;
  const double lambda = is_mnist ? mnist_lambda(ds.n()) : cfg.lambda;
  const KernelSpec spec =
      KernelSpec::squared_exponential(is_mnist ? kMnistLengthscale : cfg.lengthscale);

  const RescaledLabels scaled = krr::rescale_labels(ds.x, ds.y, spec, lambda);
  row.r = scaled.r;
  const double r2 = scaled.r * scaled.r;

  const Vector eig = numerics::sym_eigvals(kernel::gram(spec, ds.x));
  row.d_eff = krr::effective_dof_from_eigvals(eig, lambda);
  if (krr::regularizer_dominates(eig, lambda)) {
    row.warnings.push_back("n*lambda exceeds the largest Gram eigenvalue");
  }
  row.s_phi = krr::distilled_size(row.d_eff);
  const Index m = row.s_phi + 1;
  row.compression = static_cast<double>(m) / static_cast<double>(ds.n());
  if (m > ds.n()) row.warnings.push_back("distilled set is larger than the data (m > n)");

  Rng feature_rng(derive_seed(seed, {gi, kStageFeatures}));
  const FeatureMap map =
      cfg.features == FeatureScheme::Weighted
          ? rff::weighted_map(spec, row.s_phi, ds.x, lambda, cfg.pool_factor, feature_rng)
          : rff::plain_map(spec, row.s_phi, ds.dim(), feature_rng);

  Rng construct_rng(derive_seed(seed, {gi, kStageConstruct}));
  distill::ConstructOptions copts;
  copts.rank_policy = distill::RankPolicy::Accept;
  if (m > ds.n()) copts.init = InitStrategy::Gaussian;
  const distill::ConstructResult built =
      distill::construct(ds.x, scaled.y, spec, lambda, map, construct_rng, copts);

  distill::EvaluateContext ctx;
  ctx.d_eff = row.d_eff;
  ctx.rkhs_scale = scaled.r;
  const BoundReport rep = distill::evaluate(built.set, ds.x, scaled.y, scaled.model, ctx);
  row.bound_vs_labels_scaled = rep.scaled(rep.bound_vs_labels);
  row.bound_vs_optimal_scaled = rep.scaled(rep.bound_vs_optimal);
  row.loss_construct_vs_labels_scaled = rep.scaled(rep.loss_vs_labels);
  row.loss_construct_vs_optimal_scaled = rep.scaled(rep.loss_vs_optimal);

  if (cfg.run_optimizer) {
    OptConfig opt = cfg.opt;
    opt.seed = derive_seed(seed, {gi, kStageOptimize});
    if (opt.batch_size > ds.n()) opt.batch_size = 0;
    // Start from data rows with their own labels. The constructive labels
    // are a poor start: with phi(S) near rank deficiency they are large.
    Rng init_rng(derive_seed(seed, {gi, kStageOptimizeInit}));
    DistilledSet init;
    if (m <= ds.n()) {
      init = optdistill::subset_init(ds.x, scaled.y, m, init_rng);
    } else {
      init.s = distill::init_points(ds.x, m, InitStrategy::Gaussian, init_rng);
      init.y_s = Vector::Zero(m);
    }
    const OptResult res = optdistill::optimize(ds.x, scaled.y, init, spec, lambda, opt);
    row.loss_optimized_scaled = r2 * res.trace.final_loss();
    row.loss_optimizer_start_scaled = r2 * res.trace.initial_loss();
  }
}

}  // namespace

double mnist_lambda(Index n) {
  if (n < 1) throw InvalidArgument("mnist_lambda: n must be >= 1");
  return 1e-4 * std::sqrt(5000.0 / static_cast<double>(n));
}

const char* name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Grf: return "grf";
    case ExperimentKind::Clusters: return "clusters";
    case ExperimentKind::Mnist: return "mnist";
  }
  return "unknown";
}

const csv::Row& header() {
  static const csv::Row h{"experiment",
                          "grid_param",
                          "seed",
                          "n",
                          "d_eff",
                          "s_phi",
                          "compression",
                          "r",
                          "bound_vs_labels_scaled",
                          "bound_vs_optimal_scaled",
                          "loss_construct_vs_labels_scaled",
                          "loss_construct_vs_optimal_scaled",
                          "loss_optimized_scaled",
                          "wall_time_seconds",
                          "error"};
  return h;
}

csv::Row to_fields(const ExperimentRow& row) {
  using csv::format_double;
  return {row.experiment,
          format_double(row.grid_param),
          std::to_string(row.seed),
          int_field(row.n),
          format_double(row.d_eff),
          int_field(row.s_phi),
          format_double(row.compression),
          format_double(row.r),
          format_double(row.bound_vs_labels_scaled),
          format_double(row.bound_vs_optimal_scaled),
          format_double(row.loss_construct_vs_labels_scaled),
          format_double(row.loss_construct_vs_optimal_scaled),
          format_double(row.loss_optimized_scaled),
          format_double(row.wall_time_seconds),
          row.error};
}

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  csv::write_row(out, header());
  for (const auto& row : rows) csv::write_row(out, to_fields(row));
}

void write_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, rows);
  out.flush();
  if (!out) throw DataError("write failed for '" + path + "'");
}

ExperimentRow run_one(ExperimentKind kind, const SweepConfig& cfg, std::size_t grid_index,
                      std::uint64_t seed, const IdxImages* mnist) {
  if (grid_index >= cfg.grid.size()) throw InvalidArgument("run_one: grid index out of range");
  ExperimentRow row;
  row.experiment = name(kind);
  row.grid_param = cfg.grid[grid_index];
  row.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    run_pipeline(kind, cfg, grid_index, seed, mnist, row);
  } catch (const Error& e) {
    row.error = e.what();
  }
  if (cfg.record_wall_time) {
    row.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

std::vector<ExperimentRow> run_sweep(ExperimentKind kind, const SweepConfig& cfg,
                                     const IdxImages* mnist) {
  if (cfg.grid.empty() || cfg.seeds.empty()) throw InvalidArgument("sweep: empty grid or seed list");
  if (kind == ExperimentKind::Mnist && mnist == nullptr) {
    throw InvalidArgument("sweep: mnist experiment needs loaded images");
  }
  if (kind != ExperimentKind::Mnist && !(cfg.lambda > 0.0)) {
    throw InvalidArgument("sweep: lambda must be positive");
  }
  const std::size_t tasks = cfg.grid.size() * cfg.seeds.size();
  std::vector<ExperimentRow> rows(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t g = t / cfg.seeds.size();
      rows[t] = run_one(kind, cfg, g, cfg.seeds[t % cfg.seeds.size()], mnist);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(cfg.jobs, tasks));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace krrdd::experiment
