#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "krrdd/csv.hpp"
#include "krrdd/data.hpp"
#include "krrdd/optdistill.hpp"
#include "krrdd/rff.hpp"

namespace krrdd {

/// One (grid point, seed) result. Loss and bound columns are multiplied by
/// r^2 so they are on the scale of the original labels. Fields a failed
/// stage never reached stay NaN and are written empty.
struct ExperimentRow {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  std::string experiment;
  double grid_param = kUnset;
  std::uint64_t seed = 0;
  Index n = 0;
  double d_eff = kUnset;
  Index s_phi = 0;
  double compression = kUnset;
  double r = kUnset;
  double bound_vs_labels_scaled = kUnset;
  double bound_vs_optimal_scaled = kUnset;
  double loss_construct_vs_labels_scaled = kUnset;
  double loss_construct_vs_optimal_scaled = kUnset;
  double loss_optimized_scaled = kUnset;
  double wall_time_seconds = 0.0;
  std::string error;  // empty on success

  // Not part of the CSV.
  std::vector<std::string> warnings;
  double loss_optimizer_start_scaled = kUnset;  // first checkpoint of the optimizer trace
};

enum class ExperimentKind { Grf, Clusters, Mnist };

/// Desk-scale optimizer budget; the 20000-iteration protocol is a flag away.
inline OptConfig sweep_opt_defaults() {
  OptConfig c;
  c.iterations = 2000;
  return c;
}

struct SweepConfig {
  std::vector<double> grid;  // sigma_x for grf/clusters, n for mnist
  Index n = 2000;            // ignored for mnist
  double lambda = 1e-5;      // ignored for mnist, which uses mnist_lambda(n)
  double lengthscale = 1.5;
  double sigma_y = 0.01;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  OptConfig opt = sweep_opt_defaults();
  FeatureScheme features = FeatureScheme::Weighted;
  Index pool_factor = rff::kDefaultPoolFactor;
  unsigned jobs = 1;
  bool record_wall_time = false;  // off keeps the CSV byte-reproducible
  bool run_optimizer = true;
};

namespace experiment {

// Stage keys for derive_seed(seed, {grid_index, stage}). The data stream
// omits the grid index so every grid point sees the same base draws.
inline constexpr std::uint64_t kStageData = 1;
inline constexpr std::uint64_t kStageFeatures = 2;
inline constexpr std::uint64_t kStageConstruct = 3;
inline constexpr std::uint64_t kStageOptimize = 4;
inline constexpr std::uint64_t kStageOptimizeInit = 5;

inline constexpr int kMnistClassA = 0;
inline constexpr int kMnistClassB = 1;
inline constexpr double kMnistLengthscale = 13.9;

/// 1e-4 * sqrt(5000 / n).
double mnist_lambda(Index n);

const char* name(ExperimentKind kind);

/// Column names in ExperimentRow declaration order.
const csv::Row& header();
csv::Row to_fields(const ExperimentRow& row);
void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
void write_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

/// Full pipeline for one (grid point, seed). Library errors are caught and
/// stored in row.error.
ExperimentRow run_one(ExperimentKind kind, const SweepConfig& cfg, std::size_t grid_index,
                      std::uint64_t seed, const IdxImages* mnist = nullptr);

/// All grid points x seeds, grid-major and seed-minor, on cfg.jobs threads.
/// The result does not depend on cfg.jobs.
std::vector<ExperimentRow> run_sweep(ExperimentKind kind, const SweepConfig& cfg,
                                     const IdxImages* mnist = nullptr);

inline std::vector<ExperimentRow> run_grf(const SweepConfig& cfg) {
  return run_sweep(ExperimentKind::Grf, cfg);
}
inline std::vector<ExperimentRow> run_clusters(const SweepConfig& cfg) {
  return run_sweep(ExperimentKind::Clusters, cfg);
}
inline std::vector<ExperimentRow> run_mnist(const SweepConfig& cfg, const IdxImages& mnist) {
  return run_sweep(ExperimentKind::Mnist, cfg, &mnist);
}

}  // namespace experiment
}  // namespace krrdd
