#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "specvo/image.hpp"

namespace testsupport {

inline constexpr double kPi = std::numbers::pi;

// Uniform noise smoothed by a circular 3x3 box filter, rescaled to [0,1].
// Circular so that integer circular shifts stay exact.
inline specvo::Grid random_texture(int w, int h, std::uint64_t seed, int passes = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  specvo::Grid g(w, h);
  for (double& v : g.data()) v = u(rng);
  for (int p = 0; p < passes; ++p) {
    specvo::Grid s(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) acc += g.at((x + dx + w) % w, (y + dy + h) % h);
        }
        s.at(x, y) = acc / 9.0;
      }
    }
    g = std::move(s);
  }
  double lo = 1e9, hi = -1e9;
  for (double v : g.data()) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double& v : g.data()) v = (v - lo) / (hi - lo);
  return g;
}

inline specvo::Image random_image(int w, int h, std::uint64_t seed, int passes = 1) {
  return specvo::Image(random_texture(w, h, seed, passes));
}

// out(x, y) = in(x - dx, y - dy), circularly: content moves by (dx, dy).
inline specvo::Grid circular_shift(const specvo::Grid& in, int dx, int dy) {
  const int w = in.width(), h = in.height();
  specvo::Grid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = in.at(((x - dx) % w + w) % w, ((y - dy) % h + h) % h);
  }
  return out;
}

// Window of a larger grid starting at (x0, y0).
inline specvo::Grid crop(const specvo::Grid& in, int x0, int y0, int w, int h) {
  specvo::Grid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = in.at(x0 + x, y0 + y);
  }
  return out;
}

// Direct O(N^4) DFT by definition.
inline std::vector<std::complex<double>> naive_dft(const specvo::Grid& g) {
  const int w = g.width(), h = g.height();
  std::vector<std::complex<double>> tw_x(w), tw_y(h);
  for (int k = 0; k < w; ++k) tw_x[k] = std::polar(1.0, -2.0 * kPi * k / w);
  for (int k = 0; k < h; ++k) tw_y[k] = std::polar(1.0, -2.0 * kPi * k / h);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < h; ++y) {
        const std::complex<double> ry = tw_y[(static_cast<long>(v) * y) % h];
        std::complex<double> row = 0.0;
        for (int x = 0; x < w; ++x) row += g.at(x, y) * tw_x[(static_cast<long>(u) * x) % w];
        acc += ry * row;
      }
      out[static_cast<std::size_t>(v) * w + u] = acc;
    }
  }
  return out;
}

// Circular cross-correlation c(d) = sum_x a(x) b(x + d), zero-mean inputs.
inline specvo::Grid brute_cross_correlation(const specvo::Grid& a, const specvo::Grid& b, int max_shift) {
  const int w = a.width(), h = a.height();
  double ma = 0.0, mb = 0.0;
  for (double v : a.data()) ma += v;
  for (double v : b.data()) mb += v;
  ma /= a.size();
  mb /= b.size();
  const int n = 2 * max_shift + 1;
  specvo::Grid c(n, n);
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          acc += (a.at(x, y) - ma) * (b.at((x + dx + w) % w, (y + dy + h) % h) - mb);
        }
      }
      c.at(dx + max_shift, dy + max_shift) = acc;
    }
  }
  return c;
}

// Wrapped angular distance in degrees over the given period.
inline double angle_distance(double a, double b, double period = 360.0) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

inline double gaussian(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z);
}

}  // namespace testsupport
