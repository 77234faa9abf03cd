#include "gl0/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "gl0/error.hpp"
#include "gl0/rng.hpp"

namespace gl0 {
namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  std::uint32_t u32() {
    need(4, "header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = std::span<const std::uint8_t>(bytes_).subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      fail(Errc::format_error, fmt::format("{}: truncated {} ({} bytes, need {} more)",
                                           path_, what, bytes_.size(), n));
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) fail(Errc::io_error, fmt::format("cannot write '{}'", path));
  return out;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img_bytes = read_all(images_path);
  ByteReader img(img_bytes, images_path);
  const std::uint32_t img_magic = img.u32();
  if (img_magic != kIdxImageMagic) {
    fail(Errc::format_error,
         fmt::format("{}: bad magic {:#010x}, expected {:#010x}", images_path, img_magic,
                     kIdxImageMagic));
  }
  const std::size_t count = img.u32();
  const std::size_t rows = img.u32();
  const std::size_t cols = img.u32();
  const auto pixels = img.take(count * rows * cols, "pixel data");

  const auto lab_bytes = read_all(labels_path);
  ByteReader lab(lab_bytes, labels_path);
  const std::uint32_t lab_magic = lab.u32();
  if (lab_magic != kIdxLabelMagic) {
    fail(Errc::format_error,
         fmt::format("{}: bad magic {:#010x}, expected {:#010x}", labels_path, lab_magic,
                     kIdxLabelMagic));
  }
  const std::size_t label_count = lab.u32();
  if (label_count != count) {
    fail(Errc::format_error, fmt::format("count mismatch: {} images but {} labels",
                                         count, label_count));
  }
  const auto labels = lab.take(label_count, "label data");

  Dataset data;
  data.count = count;
  data.rows = rows;
  data.cols = cols;
  data.features = rows * cols;
  data.x.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) data.x[i] = pixels[i] / 255.0;
  data.labels.assign(labels.begin(), labels.end());
  int top = 0;
  for (int y : data.labels) top = std::max(top, y);
  data.classes = count > 0 ? static_cast<std::size_t>(top) + 1 : 0;
  return data;
}

void write_idx_images(const std::string& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  require(rows > 0 && cols > 0 && pixels.size() % (rows * cols) == 0,
          Errc::invalid_argument, "write_idx_images: pixel count not a multiple of rows*cols");
  auto out = open_out(path, std::ios::binary);
  put_u32(out, kIdxImageMagic);
  put_u32(out, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, std::span<const std::uint8_t> labels) {
  auto out = open_out(path, std::ios::binary);
  put_u32(out, kIdxLabelMagic);
  put_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

Dataset make_blobs(std::size_t num_points, std::size_t classes, double spread,
                   std::uint64_t seed, std::size_t features) {
  require(classes >= 2, Errc::invalid_argument, "make_blobs: need at least 2 classes");
  require(features >= 2, Errc::invalid_argument, "make_blobs: need at least 2 features");
  require(spread >= 0.0 && std::isfinite(spread), Errc::invalid_argument,
          "make_blobs: spread must be finite and nonnegative");
  Dataset data;
  data.count = num_points;
  data.features = features;
  data.rows = 1;
  data.cols = features;
  data.classes = classes;
  data.x.resize(num_points * features);
  data.labels.resize(num_points);

  std::vector<double> means(classes * features);
  for (std::size_t c = 0; c < classes; ++c) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(classes);
    for (std::size_t j = 0; j < features; ++j) {
      means[c * features + j] =
          features == 2 ? (j == 0 ? std::cos(theta) : std::sin(theta))
                        : std::cos(theta + static_cast<double>(j) * std::numbers::pi /
                                               static_cast<double>(features));
    }
  }

  Stream stream(seed, 0, 0, StreamTag::dataset);
  for (std::size_t i = 0; i < num_points; ++i) {
    const std::size_t c = i % classes;
    data.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < features; ++j) {
      const double noise = spread > 0.0 ? spread * stream.normal() : 0.0;
      data.x[i * features + j] = means[c * features + j] + noise;
    }
  }
  return data;
}

void write_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < data.count; ++i) {
    std::string line;
    for (double v : data.row(i)) line += fmt::format("{:.17g},", v);
    line += fmt::format("{}\n", data.labels[i]);
    out << line;
  }
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, fmt::format("cannot open '{}'", path));
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  int top = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    require(cells.size() >= 2, Errc::parse_error,
            fmt::format("{}:{}: need features and a label", path, lineno));
    const std::size_t features = cells.size() - 1;
    if (data.count == 0) data.features = features;
    require(features == data.features, Errc::parse_error,
            fmt::format("{}:{}: {} features, expected {}", path, lineno, features,
                        data.features));
    try {
      for (std::size_t j = 0; j < features; ++j) data.x.push_back(std::stod(cells[j]));
      const int y = std::stoi(cells.back());
      require(y >= 0, Errc::parse_error, fmt::format("{}:{}: negative label", path, lineno));
      data.labels.push_back(y);
      top = std::max(top, y);
    } catch (const std::logic_error&) {
      fail(Errc::parse_error, fmt::format("{}:{}: malformed number", path, lineno));
    }
    ++data.count;
  }
  data.rows = 1;
  data.cols = data.features;
  data.classes = data.count > 0 ? static_cast<std::size_t>(top) + 1 : 0;
  return data;
}

}  // namespace gl0
