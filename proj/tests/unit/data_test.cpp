#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "krrdd/data.hpp"
#include "krrdd/error.hpp"
#include "krrdd/kernel.hpp"

using namespace krrdd;
namespace fs = std::filesystem;

namespace {

const KernelSpec kSe = KernelSpec::squared_exponential(1.5);

std::string temp_path(const std::string& name) {
  return (fs::path(::testing::TempDir()) / ("krrdd_data_" + name)).string();
}

IdxImages toy_images() {
  IdxImages raw;
  raw.rows = 2;
  raw.cols = 2;
  raw.images.resize(10, 4);
  for (Index i = 0; i < 10; ++i) raw.images.row(i).setConstant(static_cast<double>(i));
  raw.labels = {0, 1, 0, 1, 2, 0, 1, 2, 0, 1};
  return raw;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(GenGrf, SingletonVariance) {
  const double sy = 0.3;
  double sq = 0;
  const int draws = 10000;
  for (int seed = 0; seed < draws; ++seed) {
    const double v = data::gen_grf(1, 1.0, sy, kSe, static_cast<std::uint64_t>(seed)).y(0);
    sq += v * v;
  }
  EXPECT_NEAR(sq / draws, 1 + sy * sy, 0.05 * (1 + sy * sy));
}

TEST(GenGrf, WhitenedLabelsHaveIdentityCovariance) {
  // For each draw, z = L^{-1} y with L from the drawn X must be N(0, I).
  const Index n = 5;
  const double sy = 0.1;
  Matrix cov = Matrix::Zero(n, n);
  const int draws = 10000;
  for (int seed = 0; seed < draws; ++seed) {
    const LabeledData ds = data::gen_grf(n, 1.0, sy, kSe, static_cast<std::uint64_t>(seed));
    Matrix k = kernel::gram(kSe, ds.x);
    k.diagonal().array() += sy * sy;
    const Vector z = k.llt().matrixL().solve(ds.y);
    cov += z * z.transpose();
  }
  cov /= draws;
  EXPECT_LE((cov - Matrix::Identity(n, n)).norm() / std::sqrt(static_cast<double>(n)), 0.05);
}

TEST(GenGrf, MarginalStd) {
  const LabeledData ds = data::gen_grf(1, 2.5, 0.0, kSe, 1, 100000);
  // One point with 1e5 coordinates gives the same marginal statistics cheaply.
  const auto row = ds.x.row(0).array();
  const double sd = std::sqrt((row - row.mean()).square().sum() / (row.size() - 1));
  EXPECT_NEAR(sd, 2.5, 0.03 * 2.5);
}

TEST(GenGrf, DeterministicAndReplayable) {
  const LabeledData a = data::gen_grf(50, 1.0, 0.01, kSe, 7);
  const LabeledData b = data::gen_grf(50, 1.0, 0.01, kSe, 7);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  const LabeledData r = data::replay(a.meta);
  EXPECT_EQ(a.x, r.x);
  EXPECT_EQ(a.y, r.y);
  EXPECT_EQ(a.meta.rng_algorithm, std::string(Rng::kAlgorithm));
  EXPECT_THROW(data::gen_grf(0, 1.0, 0.01, kSe, 1), InvalidArgument);
  EXPECT_THROW(data::gen_grf(5, -1.0, 0.01, kSe, 1), InvalidArgument);
}

TEST(TwoClusters, ClippingExample) {
  Vector p(2);
  p << 0.3, 1.0;
  data::clip_to_margin(p, -1.0);
  EXPECT_EQ(p(0), -0.4);
  EXPECT_EQ(p(1), 1.0);
  // Already on the right side: untouched.
  Vector q(2);
  q << 1.7, -3.0;
  const Vector q0 = q;
  data::clip_to_margin(q, 1.0);
  EXPECT_EQ(q, q0);
}

TEST(TwoClusters, MarginsAndBalance) {
  const LabeledData ds = data::gen_two_clusters(400, 1.5, 3);
  EXPECT_EQ(ds.y.sum(), 0.0);
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.y(i) > 0) {
      EXPECT_GE(ds.x(i, 0), 0.4);
    } else {
      EXPECT_LE(ds.x(i, 0), -0.4);
    }
  }
  const LabeledData r = data::replay(ds.meta);
  EXPECT_EQ(ds.x, r.x);
  EXPECT_THROW(data::gen_two_clusters(3, 1.0, 1), InvalidArgument);
}

TEST(BinarySubset, BalancedDistinctDeterministic) {
  const IdxImages raw = toy_images();
  const LabeledData a = data::binary_subset(raw, 0, 1, 4, 5);
  EXPECT_EQ((a.y.array() < 0).count(), 2);
  EXPECT_EQ((a.y.array() > 0).count(), 2);
  std::set<double> rows;
  for (Index i = 0; i < 4; ++i) rows.insert(a.x(i, 0));
  EXPECT_EQ(rows.size(), 4u);
  for (Index i = 0; i < 4; ++i) {
    const int label = raw.labels[static_cast<std::size_t>(a.x(i, 0))];
    EXPECT_EQ(label, a.y(i) < 0 ? 0 : 1);
  }
  const LabeledData b = data::binary_subset(raw, 0, 1, 4, 5);
  EXPECT_EQ(a.x, b.x);
  const LabeledData r = data::replay(a.meta, &raw);
  EXPECT_EQ(a.x, r.x);
}

TEST(BinarySubset, Errors) {
  IdxImages raw = toy_images();
  EXPECT_THROW(data::binary_subset(raw, 0, 2, 6, 1), InsufficientExamples);
  EXPECT_THROW(data::binary_subset(raw, 0, 1, 3, 1), InvalidArgument);
  raw.labels.pop_back();
  EXPECT_THROW(data::binary_subset(raw, 0, 1, 4, 1), CountMismatch);
}

TEST(Idx, RoundTrip) {
  const std::string img = temp_path("rt_images.idx");
  const std::string lab = temp_path("rt_labels.idx");
  std::vector<std::uint8_t> pixels(3 * 4 * 5);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<std::uint8_t>((i * 37) % 256);
  pixels[0] = 255;
  const std::vector<std::uint8_t> labels{3, 0, 9};
  data::write_idx_images(img, pixels, 3, 4, 5);
  data::write_idx_labels(lab, labels);

  std::uint32_t count = 0, rows = 0, cols = 0;
  EXPECT_EQ(data::read_idx_images(img, count, rows, cols), pixels);
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(rows, 4u);
  EXPECT_EQ(cols, 5u);
  EXPECT_EQ(data::read_idx_labels(lab), labels);

  const IdxImages loaded = data::load_mnist_idx(img, lab);
  EXPECT_EQ(loaded.images.rows(), 3);
  EXPECT_EQ(loaded.images.cols(), 20);
  EXPECT_EQ(loaded.images(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(loaded.images(0, 1), 37.0 / 255.0);
  EXPECT_EQ(loaded.labels, labels);
}

TEST(Idx, BigEndianHeader) {
  const std::string lab = temp_path("be_labels.idx");
  write_bytes(lab, {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 7, 4});
  EXPECT_EQ(data::read_idx_labels(lab), (std::vector<std::uint8_t>{7, 4}));
}

TEST(Idx, Errors) {
  const std::string bad = temp_path("bad_magic.idx");
  write_bytes(bad, {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x01, 1});
  try {
    data::read_idx_labels(bad);
    FAIL() << "expected BadMagic";
  } catch (const BadMagic& e) {
    EXPECT_EQ(e.expected(), 2049u);
    EXPECT_EQ(e.found(), 2051u);
  }
  const std::string trunc = temp_path("trunc.idx");
  write_bytes(trunc, {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x05, 1, 2});
  EXPECT_THROW(data::read_idx_labels(trunc), TruncatedFile);
  write_bytes(trunc, {0x00, 0x00});
  EXPECT_THROW(data::read_idx_labels(trunc), TruncatedFile);
  EXPECT_THROW(data::read_idx_labels(temp_path("does_not_exist.idx")), DataError);

  const std::string img = temp_path("cm_images.idx");
  const std::string lab = temp_path("cm_labels.idx");
  data::write_idx_images(img, std::vector<std::uint8_t>(2 * 4, 0), 2, 2, 2);
  data::write_idx_labels(lab, {1, 2, 3});
  EXPECT_THROW(data::load_mnist_idx(img, lab), CountMismatch);
}
