#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace specvo {

// Row-major grid of doubles. Used for spectra, PSDs and resampled domains.
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, double fill = 0.0);
  Grid(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<double> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const double> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double sum() const;
  double max() const;

  // Bilinear sample at continuous pixel coordinates; 0 outside [0, w-1]x[0, h-1].
  double sample(double x, double y) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Single-channel intensity image, values in [0,1]. Dimensions are even and at
// least 64 so the FFT centre bin is well defined.
class Image {
 public:
  static constexpr int kMinSide = 64;

  Image() = default;
  // Throws Error(kInputDomain) when any invariant is violated.
  Image(int width, int height, std::vector<double> data);
  explicit Image(Grid grid);

  int width() const noexcept { return grid_.width(); }
  int height() const noexcept { return grid_.height(); }
  double at(int x, int y) const { return grid_.at(x, y); }
  std::span<const double> data() const noexcept { return grid_.data(); }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
};

// 8-bit grayscale PNG or binary PGM (P5), scaled by 1/255.
Image load_image(const std::filesystem::path& path);
// Writes an 8-bit grayscale PNG or PGM, depending on the extension.
void save_image(const Image& img, const std::filesystem::path& path);
// Normalises a grid to [0,255] by its maximum and writes it (debug dumps).
void save_grid_pgm(const Grid& grid, const std::filesystem::path& path);

}  // namespace specvo
