#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "krrdd/kernel.hpp"
#include "krrdd/numerics.hpp"

namespace krrdd {

/// Enough to regenerate a dataset bit for bit.
struct DataMeta {
  std::string generator;  // "grf", "two_clusters", "binary_subset", or "file"
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  std::string rng_algorithm;
};

struct LabeledData {
  Matrix x;
  Vector y;
  DataMeta meta;

  Index n() const { return x.rows(); }
  Index dim() const { return x.cols(); }
};

/// Decoded MNIST-style IDX pair. Pixels are scaled to [0, 1].
struct IdxImages {
  Matrix images;  // count x (rows * cols)
  std::vector<std::uint8_t> labels;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

namespace data {

inline constexpr std::uint32_t kImageMagic = 0x00000803;
inline constexpr std::uint32_t kLabelMagic = 0x00000801;
inline constexpr double kClusterMargin = 0.4;
inline constexpr double kClusterCenter = 2.0;

/// X rows i.i.d. N(0, sigma_x^2 I_dim); y = L z with L L^T = K + sigma_y^2 I.
LabeledData gen_grf(Index n, double sigma_x, double sigma_y, const KernelSpec& spec,
                    std::uint64_t seed, Index dim = 2);

/// First n/2 rows: N((-2, 0), sigma_x^2 I), label -1, first coordinate
/// clamped to <= -0.4. Last n/2 rows: N((2, 0), sigma_x^2 I), label +1,
/// first coordinate clamped to >= 0.4.
LabeledData gen_two_clusters(Index n, double sigma_x, std::uint64_t seed);

/// Clamps the first coordinate of a point onto its side of the margin.
void clip_to_margin(Eigen::Ref<Vector> point, double label);

/// n/2 examples of each class, drawn uniformly without replacement;
/// class_a maps to -1 and comes first, class_b maps to +1.
LabeledData binary_subset(const IdxImages& raw, int class_a, int class_b, Index n,
                          std::uint64_t seed);

/// Regenerates a synthetic dataset from its meta record. binary_subset
/// replays need the source images.
LabeledData replay(const DataMeta& meta, const IdxImages* source = nullptr);

IdxImages load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Raw payload readers. Pixels are returned unscaled.
std::vector<std::uint8_t> read_idx_images(const std::string& path, std::uint32_t& count,
                                          std::uint32_t& rows, std::uint32_t& cols);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

}  // namespace data
}  // namespace krrdd
