#pragma once

#include <complex>
#include <vector>

namespace specvo::detail {

using ComplexGrid = std::vector<std::complex<double>>;

// In-place 2-D DFT of a row-major width x height array. The inverse transform
// includes the 1/(width*height) factor. Thread-safe: FFTW planning is
// serialised, execution uses new-array calls on cached plans.
void fft2(ComplexGrid& data, int width, int height, bool inverse);

// Moves the zero-frequency bin of an even-sized grid to (width/2, height/2).
template <typename T>
std::vector<T> fftshift(const std::vector<T>& in, int width, int height) {
  std::vector<T> out(in.size());
  const int hx = width / 2;
  const int hy = height / 2;
  for (int y = 0; y < height; ++y) {
    const int ty = (y + hy) % height;
    for (int x = 0; x < width; ++x) {
      out[static_cast<std::size_t>(ty) * width + (x + hx) % width] =
          in[static_cast<std::size_t>(y) * width + x];
    }
  }
  return out;
}

}  // namespace specvo::detail
