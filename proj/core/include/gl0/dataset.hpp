#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gl0 {

/// Row-major feature matrix with integer class labels. Image datasets keep
/// their (rows, cols) so models can view a row as a 1 x rows x cols image.
struct Dataset {
  std::size_t count = 0;
  std::size_t features = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t classes = 0;
  std::vector<double> x;
  std::vector<int> labels;

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x).subspan(i * features, features);
  }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image file (unsigned bytes, 3 dimensions, big-endian header)
/// and an IDX label file. Pixels are scaled to [0, 1]. Throws
/// Error(format_error) with "bad magic", "truncated" or "count mismatch" in
/// the message, or Error(io_error) when a file cannot be opened.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

void write_idx_images(const std::string& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::string& path, std::span<const std::uint8_t> labels);

/// Gaussian clusters around class means placed on a circle. For `features`
/// > 2 the circle is embedded linearly: mean_j = cos(theta_c + j * pi /
/// features). Deterministic in `seed`; rejects classes < 2.
Dataset make_blobs(std::size_t num_points, std::size_t classes, double spread,
                   std::uint64_t seed, std::size_t features = 2);

/// One row per sample: features then label, comma separated, 17 significant
/// digits.
void write_csv(const std::string& path, const Dataset& data);
Dataset read_csv(const std::string& path);

}  // namespace gl0
