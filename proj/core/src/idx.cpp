#include <fstream>
#include <iterator>

#include "krrdd/data.hpp"
#include "krrdd/error.hpp"

namespace krrdd::data {
namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& buf, std::size_t off) {
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
         (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

void require_size(const std::vector<std::uint8_t>& buf, std::size_t need, const std::string& path,
                  const char* part) {
  if (buf.size() < need) {
    throw TruncatedFile("'" + path + "': truncated " + part + " (" + std::to_string(buf.size()) +
                        " bytes, need " + std::to_string(need) + ")");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_idx_images(const std::string& path, std::uint32_t& count,
                                          std::uint32_t& rows, std::uint32_t& cols) {
  const auto buf = slurp(path);
  require_size(buf, 16, path, "header");
  const std::uint32_t magic = be32(buf, 0);
  if (magic != kImageMagic) throw BadMagic(path, kImageMagic, magic);
  count = be32(buf, 4);
  rows = be32(buf, 8);
  cols = be32(buf, 12);
  const std::size_t payload = std::size_t{count} * rows * cols;
  require_size(buf, 16 + payload, path, "pixel payload");
  return {buf.begin() + 16, buf.begin() + 16 + static_cast<std::ptrdiff_t>(payload)};
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  const auto buf = slurp(path);
  require_size(buf, 8, path, "header");
  const std::uint32_t magic = be32(buf, 0);
  if (magic != kLabelMagic) throw BadMagic(path, kLabelMagic, magic);
  const std::uint32_t count = be32(buf, 4);
  require_size(buf, 8 + std::size_t{count}, path, "label payload");
  return {buf.begin() + 8, buf.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

IdxImages load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  IdxImages out;
  std::uint32_t count = 0;
  const auto pixels = read_idx_images(images_path, count, out.rows, out.cols);
  out.labels = read_idx_labels(labels_path);
  if (out.labels.size() != count) {
    throw CountMismatch("'" + images_path + "' has " + std::to_string(count) + " images but '" +
                        labels_path + "' has " + std::to_string(out.labels.size()) + " labels");
  }
  const Index d = static_cast<Index>(out.rows) * static_cast<Index>(out.cols);
  out.images.resize(count, d);
  for (Index i = 0; i < static_cast<Index>(count); ++i) {
    for (Index k = 0; k < d; ++k) {
      out.images(i, k) = pixels[static_cast<std::size_t>(i * d + k)] / 255.0;
    }
  }
  return out;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != std::size_t{count} * rows * cols) {
    throw InvalidArgument("write_idx_images: payload size does not match dimensions");
  }
  auto out = open_out(path);
  put_be32(out, kImageMagic);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  auto out = open_out(path);
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace krrdd::data
