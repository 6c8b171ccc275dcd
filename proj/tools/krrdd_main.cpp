#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "krrdd/bounds.hpp"
#include "krrdd/csv.hpp"
#include "krrdd/data.hpp"
#include "krrdd/distill.hpp"
#include "krrdd/error.hpp"
#include "krrdd/experiment.hpp"
#include "krrdd/krr.hpp"
#include "krrdd/optdistill.hpp"
#include "krrdd/rff.hpp"

namespace {

using namespace krrdd;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

const std::map<std::string, FeatureScheme> kSchemes{{"weighted", FeatureScheme::Weighted},
                                                     {"plain", FeatureScheme::Plain}};

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

struct SweepArgs {
  SweepConfig cfg;
  std::string out = "-";
  std::string mnist_images;
  std::string mnist_labels;
  bool no_opt = false;
};

void add_sweep_flags(CLI::App* cmd, SweepArgs& a, bool mnist) {
  auto& c = a.cfg;
  if (mnist) {
    c.grid = {500, 1000, 2000};
    cmd->add_option("--n", c.grid, "Subset sizes (even)")->delimiter(',')->capture_default_str();
    cmd->add_option("--mnist-images", a.mnist_images, "IDX image file")->required();
    cmd->add_option("--mnist-labels", a.mnist_labels, "IDX label file")->required();
  } else {
    c.grid = {0.5, 1.0, 2.0, 4.0};
    cmd->add_option("--sigma", c.grid, "Grid of sigma_x values")->delimiter(',')->capture_default_str();
    cmd->add_option("--n", c.n, "Points per dataset")->capture_default_str();
    cmd->add_option("--lambda", c.lambda, "Ridge parameter")->capture_default_str();
    cmd->add_option("--lengthscale", c.lengthscale, "Kernel lengthscale")->capture_default_str();
  }
  cmd->add_option("--seeds", c.seeds, "Replicate seeds")->delimiter(',')->capture_default_str();
  cmd->add_option("--iters", c.opt.iterations, "Optimizer iterations")->capture_default_str();
  cmd->add_option("--batch", c.opt.batch_size, "Minibatch size, 0 for full batch")->capture_default_str();
  cmd->add_option("--lr", c.opt.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--features", c.features, "Feature map: weighted or plain")
      ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case))
      ->default_str("weighted");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  cmd->add_flag("--timing", c.record_wall_time, "Fill wall_time_seconds (output no longer reproducible)");
  cmd->add_flag("--no-opt", a.no_opt, "Skip the optimizer stage");
  cmd->add_option("--out", a.out, "Output CSV, - for stdout")->capture_default_str();
}

void emit(const std::string& out, const std::vector<ExperimentRow>& rows) {
  if (out == "-") {
    experiment::write_csv(std::cout, rows);
  } else {
    experiment::write_csv(out, rows);
  }
}

int run_sweep(ExperimentKind kind, SweepArgs& a) {
  a.cfg.run_optimizer = !a.no_opt;
  if (a.cfg.jobs < 1) a.cfg.jobs = 1;
  std::vector<ExperimentRow> rows;
  if (kind == ExperimentKind::Mnist) {
    const IdxImages raw = data::load_mnist_idx(a.mnist_images, a.mnist_labels);
    rows = experiment::run_mnist(a.cfg, raw);
  } else {
    rows = experiment::run_sweep(kind, a.cfg);
  }
  emit(a.out, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    for (const auto& w : r.warnings) std::cerr << "row " << r.grid_param << "/" << r.seed << ": warning: " << w << "\n";
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "row " << r.grid_param << "/" << r.seed << ": " << r.error << "\n";
    }
  }
  if (failed) std::cerr << failed << " of " << rows.size() << " rows failed\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Kernel ridge regression dataset distillation with random Fourier features"};
  app.require_subcommand(1);

  SweepArgs grf_args;
  SweepArgs clusters_args;
  SweepArgs mnist_args;
  add_sweep_flags(app.add_subcommand("grf", "Gaussian random field sweep over sigma_x"), grf_args, false);
  add_sweep_flags(app.add_subcommand("clusters", "Two-cluster sweep over sigma_x"), clusters_args, false);
  add_sweep_flags(app.add_subcommand("mnist", "MNIST 0-vs-1 sweep over n"), mnist_args, true);

  Index gen_n = 2000;
  double gen_sigma = 1.0;
  double gen_sigma_y = 0.01;
  double gen_l = 1.5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen_grf = app.add_subcommand("gen-grf", "Write a Gaussian random field dataset");
  auto* gen_clusters = app.add_subcommand("gen-clusters", "Write a two-cluster dataset");
  for (auto* cmd : {gen_grf, gen_clusters}) {
    cmd->add_option("--n", gen_n, "Number of points")->capture_default_str();
    cmd->add_option("--sigma", gen_sigma, "sigma_x")->capture_default_str();
    cmd->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    cmd->add_option("--out", gen_out, "Output CSV")->required();
  }
  gen_grf->add_option("--sigma-y", gen_sigma_y, "Label noise")->capture_default_str();
  gen_grf->add_option("--lengthscale", gen_l, "Kernel lengthscale")->capture_default_str();

  std::string data_path;
  std::string init_path;
  std::string out_path;
  std::string alpha_out;
  std::string trace_out;
  double lambda = 1e-5;
  double lengthscale = 1.5;
  std::uint64_t seed = 0;
  FeatureScheme scheme = FeatureScheme::Weighted;
  bool gaussian_init = false;
  bool strict_rank = false;
  OptConfig opt = sweep_opt_defaults();

  auto* construct = app.add_subcommand("distill-construct", "Constructive distillation of a dataset CSV");
  construct->add_option("--data", data_path, "Input points CSV")->required();
  construct->add_option("--features", scheme, "Feature map: weighted or plain")
      ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case))
      ->default_str("weighted");
  construct->add_flag("--gaussian-init", gaussian_init, "Draw S from N(0, I) instead of a data subset");
  construct->add_flag("--strict-rank", strict_rank, "Redraw S until phi(S) has full column rank");
  construct->add_option("--alpha-out", alpha_out, "Also write the distilled coefficients");

  auto* optimize = app.add_subcommand("distill-opt", "Gradient-based distillation from an initial set");
  optimize->add_option("--data", data_path, "Input points CSV")->required();
  optimize->add_option("--init", init_path, "Initial distilled set CSV")->required();
  optimize->add_option("--iters", opt.iterations, "Iterations")->capture_default_str();
  optimize->add_option("--batch", opt.batch_size, "Minibatch size, 0 for full batch")->capture_default_str();
  optimize->add_option("--lr", opt.learning_rate, "Adam learning rate")->capture_default_str();
  optimize->add_option("--checkpoint-every", opt.checkpoint_every, "Trace interval")->capture_default_str();
  optimize->add_option("--trace", trace_out, "Write the checkpoint trace CSV");

  for (auto* cmd : {construct, optimize}) {
    cmd->add_option("--lambda", lambda, "Ridge parameter")->capture_default_str();
    cmd->add_option("--lengthscale", lengthscale, "Kernel lengthscale")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    cmd->add_option("--out", out_path, "Output distilled set CSV")->required();
  }

  double bound_loss = 0.0;
  double bound_lambda = 1e-5;
  auto* bounds = app.add_subcommand("bounds", "Evaluate both distillation bounds");
  bounds->add_option("--loss", bound_loss, "Training loss of the full fit")->required();
  bounds->add_option("--lambda", bound_lambda, "Ridge parameter")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (app.got_subcommand("grf")) return run_sweep(ExperimentKind::Grf, grf_args);
  if (app.got_subcommand("clusters")) return run_sweep(ExperimentKind::Clusters, clusters_args);
  if (app.got_subcommand("mnist")) return run_sweep(ExperimentKind::Mnist, mnist_args);

  if (app.got_subcommand(gen_grf) || app.got_subcommand(gen_clusters)) {
    const LabeledData ds =
        app.got_subcommand(gen_grf)
            ? data::gen_grf(gen_n, gen_sigma, gen_sigma_y, KernelSpec::squared_exponential(gen_l), gen_seed)
            : data::gen_two_clusters(gen_n, gen_sigma, gen_seed);
    csv::write_points(gen_out, ds.x, ds.y);
    return 0;
  }

  if (app.got_subcommand(bounds)) {
    const auto labels = distill::bound_vs_labels(bound_loss, bound_lambda);
    const auto optimal = distill::bound_vs_optimal(bound_lambda);
    std::cout << "bound_vs_labels " << short_double(labels.value) << "\n"
              << "bound_vs_optimal " << short_double(optimal.value) << "\n";
    return 0;
  }

  const KernelSpec spec = KernelSpec::squared_exponential(lengthscale);
  Matrix x;
  Vector y;
  csv::read_points(data_path, x, y);

  if (app.got_subcommand(construct)) {
    const double d_eff = krr::effective_dof(kernel::gram(spec, x), lambda);
    const Index s_phi = krr::distilled_size(d_eff);
    Rng feature_rng(derive_seed(seed, {experiment::kStageFeatures}));
    const FeatureMap map = scheme == FeatureScheme::Weighted
                               ? rff::weighted_map(spec, s_phi, x, lambda, rff::kDefaultPoolFactor, feature_rng)
                               : rff::plain_map(spec, s_phi, x.cols(), feature_rng);
    Rng rng(derive_seed(seed, {experiment::kStageConstruct}));
    distill::ConstructOptions copts;
    if (gaussian_init) copts.init = InitStrategy::Gaussian;
    copts.rank_policy = strict_rank ? distill::RankPolicy::Resample : distill::RankPolicy::Accept;
    const auto built = distill::construct(x, y, spec, lambda, map, rng, copts);
    csv::write_points(out_path, built.set.s, built.set.y_s);
    if (!alpha_out.empty()) {
      std::ofstream out(alpha_out, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write '" + alpha_out + "'");
      csv::write_row(out, {"alpha"});
      for (Index i = 0; i < built.set.alpha_s.size(); ++i) {
        csv::write_row(out, {csv::format_double(built.set.alpha_s(i))});
      }
    }
    std::cerr << "d_eff " << short_double(d_eff) << " s_phi " << s_phi << " m " << built.set.m()
              << " label_rank " << built.label_rank              << " alpha_residual " << short_double(built.alpha.residual) << "\n";
    return 0;
  }

  // distill-opt
  DistilledSet init;
  csv::read_points(init_path, init.s, init.y_s);
  if (init.s.cols() != x.cols()) throw InvalidArgument("distilled set and data differ in dimension");
  init.lambda = lambda;
  opt.seed = derive_seed(seed, {experiment::kStageOptimize});
  const OptResult res = optdistill::optimize(x, y, init, spec, lambda, opt);
  csv::write_points(out_path, res.set.s, res.set.y_s);
  if (!trace_out.empty()) {
    std::ofstream out(trace_out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + trace_out + "'");
    csv::write_row(out, {"iteration", "loss", "grad_norm_s", "grad_norm_y"});
    for (const auto& c : res.trace.checkpoints) {
      csv::write_row(out, {std::to_string(c.iteration), csv::format_double(c.loss),
                           csv::format_double(c.grad_norm_s), csv::format_double(c.grad_norm_y)});
    }
  }
  std::cerr << "loss " << short_double(res.trace.initial_loss()) << " -> "
            << short_double(res.trace.final_loss()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const krrdd::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const krrdd::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const krrdd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
