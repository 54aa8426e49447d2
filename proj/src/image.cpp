#include "specvo/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>

#include "specvo/error.hpp"

namespace specvo {

Grid::Grid(int width, int height, double fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, fill) {
  Require(width >= 0 && height >= 0, ErrorCode::kContract, "negative grid size");
}

Grid::Grid(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  Require(width >= 0 && height >= 0 &&
              data_.size() == static_cast<std::size_t>(width) * height,
          ErrorCode::kContract, "grid data does not match its dimensions");
}

double Grid::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Grid::max() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double Grid::sample(double x, double y) const {
  // Coordinates within this slack of the border count as on the border, so
  // exact grid rotations do not lose their edge rows to rounding.
  constexpr double kSlack = 1e-9;
  if (width_ < 2 || height_ < 2) return 0.0;
  if (!(x >= -kSlack && y >= -kSlack && x <= width_ - 1 + kSlack &&
        y <= height_ - 1 + kSlack)) {
    return 0.0;
  }
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double* p = data_.data() + static_cast<std::size_t>(y0) * width_ + x0;
  const double top = p[0] * (1.0 - fx) + p[1] * fx;
  const double bottom = p[width_] * (1.0 - fx) + p[width_ + 1] * fx;
  return top * (1.0 - fy) + bottom * fy;
}

namespace {

void validate_image(const Grid& g) {
  Require(g.width() >= Image::kMinSide && g.height() >= Image::kMinSide,
          ErrorCode::kInputDomain,
          "image must be at least 64x64, got " + std::to_string(g.width()) + "x" +
              std::to_string(g.height()));
  Require(g.width() % 2 == 0 && g.height() % 2 == 0, ErrorCode::kInputDomain,
          "image dimensions must be even");
  for (double v : g.data()) {
    Require(std::isfinite(v), ErrorCode::kInputDomain, "image contains non-finite samples");
    Require(v >= 0.0 && v <= 1.0, ErrorCode::kInputDomain, "image samples must lie in [0,1]");
  }
}

bool has_extension(const std::filesystem::path& p, const char* ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

struct FileCloser {
  void operator()(FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

Image load_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  std::vector<double> data(buf.size());
  std::transform(buf.begin(), buf.end(), data.begin(), [](std::uint8_t v) { return v / 255.0; });
  return Image(static_cast<int>(img.width), static_cast<int>(img.height), std::move(data));
}

void skip_pgm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(ErrorCode::kIo, path.string() + ": only binary PGM (P5) is supported");
  int w = 0, h = 0, maxval = 0;
  skip_pgm_space(in);
  in >> w;
  skip_pgm_space(in);
  in >> h;
  skip_pgm_space(in);
  in >> maxval;
  in.get();
  if (!in || w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::kIo, path.string() + ": malformed or non-8-bit PGM header");
  }
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": truncated PGM data");
  std::vector<double> data(buf.size());
  std::transform(buf.begin(), buf.end(), data.begin(), [](std::uint8_t v) { return v / 255.0; });
  return Image(w, h, std::move(data));
}

std::vector<std::uint8_t> quantize(std::span<const double> values, double scale) {
  std::vector<std::uint8_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [scale](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v * scale, 0.0, 255.0)));
  });
  return out;
}

void write_gray(std::span<const std::uint8_t> bytes, int w, int h,
                const std::filesystem::path& path) {
  if (has_extension(path, ".png")) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
      throw Error(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + img.message);
    }
    return;
  }
  FilePtr f = open_file(path, "wb");
  std::fprintf(f.get(), "P5\n%d %d\n255\n", w, h);
  if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size()) {
    throw Error(ErrorCode::kIo, "short write to " + path.string());
  }
}

}  // namespace

Image::Image(int width, int height, std::vector<double> data)
    : grid_(width, height, std::move(data)) {
  validate_image(grid_);
}

Image::Image(Grid grid) : grid_(std::move(grid)) { validate_image(grid_); }

Image load_image(const std::filesystem::path& path) {
  if (has_extension(path, ".png")) return load_png(path);
  if (has_extension(path, ".pgm")) return load_pgm(path);
  throw Error(ErrorCode::kIo, "unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  write_gray(quantize(img.data(), 255.0), img.width(), img.height(), path);
}

void save_grid_pgm(const Grid& grid, const std::filesystem::path& path) {
  const double m = grid.max();
  write_gray(quantize(grid.data(), m > 0.0 ? 255.0 / m : 0.0), grid.width(), grid.height(), path);
}

}  // namespace specvo
