#include "krrdd/data.hpp"

#include <algorithm>
#include <cmath>

#include "krrdd/error.hpp"
#include "krrdd/rng.hpp"

namespace krrdd::data {
namespace {

double param(const DataMeta& meta, const char* key) {
  const auto it = meta.params.find(key);
  if (it == meta.params.end()) {
    throw InvalidArgument("replay: meta for '" + meta.generator + "' lacks parameter '" + key + "'");
  }
  return it->second;
}

DataMeta make_meta(std::string generator, std::map<std::string, double> params, std::uint64_t seed) {
  return {std::move(generator), std::move(params), seed, std::string(Rng::kAlgorithm)};
}

}  // namespace

LabeledData gen_grf(Index n, double sigma_x, double sigma_y, const KernelSpec& spec,
                    std::uint64_t seed, Index dim) {
  if (n < 1) throw InvalidArgument("gen_grf: n must be >= 1");
  if (dim < 1) throw InvalidArgument("gen_grf: dim must be >= 1");
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) throw InvalidArgument("gen_grf: sigma_x must be positive");
  if (!(sigma_y >= 0.0) || !std::isfinite(sigma_y)) throw InvalidArgument("gen_grf: sigma_y must be >= 0");
  spec.validate();

  Rng rng(seed);
  LabeledData out;
  out.x.resize(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < dim; ++k) out.x(i, k) = sigma_x * rng.normal();
  }
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = rng.normal();

  const Matrix l = numerics::chol_lower(kernel::gram(spec, out.x), sigma_y * sigma_y);
  out.y = l.triangularView<Eigen::Lower>() * z;
  out.meta = make_meta("grf",
                       {{"n", static_cast<double>(n)},
                        {"sigma_x", sigma_x},
                        {"sigma_y", sigma_y},
                        {"lengthscale", spec.lengthscale},
                        {"dim", static_cast<double>(dim)}},
                       seed);
  return out;
}

void clip_to_margin(Eigen::Ref<Vector> point, double label) {
  if (point.size() < 1) throw InvalidArgument("clip_to_margin: empty point");
  if (label < 0.0) {
    point(0) = std::min(point(0), -kClusterMargin);
  } else {
    point(0) = std::max(point(0), kClusterMargin);
  }
}

LabeledData gen_two_clusters(Index n, double sigma_x, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("gen_two_clusters: n must be even and >= 2");
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) {
    throw InvalidArgument("gen_two_clusters: sigma_x must be positive");
  }
  Rng rng(seed);
  LabeledData out;
  out.x.resize(n, 2);
  out.y.resize(n);
  Vector p(2);
  for (Index i = 0; i < n; ++i) {
    const double label = i < n / 2 ? -1.0 : 1.0;
    p(0) = label * kClusterCenter + sigma_x * rng.normal();
    p(1) = sigma_x * rng.normal();
    clip_to_margin(p, label);
    out.x.row(i) = p.transpose();
    out.y(i) = label;
  }
  out.meta = make_meta("two_clusters", {{"n", static_cast<double>(n)}, {"sigma_x", sigma_x}}, seed);
  return out;
}

LabeledData binary_subset(const IdxImages& raw, int class_a, int class_b, Index n,
                          std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("binary_subset: n must be even and >= 2");
  if (class_a == class_b) throw InvalidArgument("binary_subset: classes must differ");
  if (static_cast<std::size_t>(raw.images.rows()) != raw.labels.size()) {
    throw CountMismatch("binary_subset: image and label counts differ");
  }
  std::vector<std::size_t> pool_a;
  std::vector<std::size_t> pool_b;
  for (std::size_t i = 0; i < raw.labels.size(); ++i) {
    if (raw.labels[i] == class_a) pool_a.push_back(i);
    if (raw.labels[i] == class_b) pool_b.push_back(i);
  }
  const auto half = static_cast<std::size_t>(n / 2);
  if (pool_a.size() < half || pool_b.size() < half) {
    throw InsufficientExamples("binary_subset: need " + std::to_string(half) + " per class, have " +
                               std::to_string(pool_a.size()) + " of class " + std::to_string(class_a) +
                               " and " + std::to_string(pool_b.size()) + " of class " +
                               std::to_string(class_b));
  }

  Rng rng(seed);
  const auto pick_a = rng.sample_without_replacement(pool_a.size(), half);
  const auto pick_b = rng.sample_without_replacement(pool_b.size(), half);

  LabeledData out;
  out.x.resize(n, raw.images.cols());
  out.y.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    const auto r = static_cast<Index>(i);
    out.x.row(r) = raw.images.row(static_cast<Index>(pool_a[pick_a[i]]));
    out.y(r) = -1.0;
    out.x.row(r + static_cast<Index>(half)) = raw.images.row(static_cast<Index>(pool_b[pick_b[i]]));
    out.y(r + static_cast<Index>(half)) = 1.0;
  }
  out.meta = make_meta("binary_subset",
                       {{"n", static_cast<double>(n)},
                        {"class_a", static_cast<double>(class_a)},
                        {"class_b", static_cast<double>(class_b)}},
                       seed);
  return out;
}

LabeledData replay(const DataMeta& meta, const IdxImages* source) {
  if (meta.rng_algorithm != Rng::kAlgorithm) {
    throw InvalidArgument("replay: recorded RNG '" + meta.rng_algorithm + "' is not available");
  }
  if (meta.generator == "grf") {
    return gen_grf(static_cast<Index>(param(meta, "n")), param(meta, "sigma_x"),
                   param(meta, "sigma_y"), KernelSpec::squared_exponential(param(meta, "lengthscale")),
                   meta.seed, static_cast<Index>(param(meta, "dim")));
  }
  if (meta.generator == "two_clusters") {
    return gen_two_clusters(static_cast<Index>(param(meta, "n")), param(meta, "sigma_x"), meta.seed);
  }
  if (meta.generator == "binary_subset") {
    if (source == nullptr) throw InvalidArgument("replay: binary_subset needs the source images");
    return binary_subset(*source, static_cast<int>(param(meta, "class_a")),
                         static_cast<int>(param(meta, "class_b")),
                         static_cast<Index>(param(meta, "n")), meta.seed);
  }
  throw InvalidArgument("replay: unknown generator '" + meta.generator + "'");
}

}  // namespace krrdd::data
