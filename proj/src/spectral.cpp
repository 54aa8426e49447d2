#include "specvo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "specvo/error.hpp"

namespace specvo {

namespace {

using detail::ComplexGrid;

constexpr double kPi = std::numbers::pi;
constexpr double kCrossPowerFloor = 1e-12;

std::vector<double> hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

ComplexGrid to_complex(const Grid& g) {
  ComplexGrid c(g.size());
  std::copy(g.data().begin(), g.data().end(), c.begin());
  return c;
}

}  // namespace

Peak argmax(const Grid& grid) {
  Peak best{0, 0, -std::numeric_limits<double>::infinity()};
  for (int y = 0; y < grid.height(); ++y) {
    auto row = grid.row(y);
    for (int x = 0; x < grid.width(); ++x) {
      if (row[x] > best.value) best = {x, y, row[x]};
    }
  }
  return best;
}

Grid hann_windowed(const Grid& g) {
  const auto wx = hann(g.width());
  const auto wy = hann(g.height());
  Grid out(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out.at(x, y) = g.at(x, y) * wx[x] * wy[y];
  }
  return out;
}

Grid preprocess_spectrum(const Image& img, const SpectrumOptions& options) {
  const int w = img.width();
  const int h = img.height();
  ComplexGrid spec = to_complex(options.window ? hann_windowed(img.grid()) : img.grid());
  detail::fft2(spec, w, h, false);

  std::vector<double> mag(spec.size());
  std::transform(spec.begin(), spec.end(), mag.begin(), [](auto c) { return std::abs(c); });
  mag = detail::fftshift(mag, w, h);

  if (options.highpass) {
    std::vector<double> cu(w), cv(h);
    for (int x = 0; x < w; ++x) cu[x] = std::cos(kPi * (x - w / 2) / w);
    for (int y = 0; y < h; ++y) cv[y] = std::cos(kPi * (y - h / 2) / h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double c = cu[x] * cv[y];
        mag[static_cast<std::size_t>(y) * w + x] *= (1.0 - c) * (2.0 - c);
      }
    }
  }
  return Grid(w, h, std::move(mag));
}

PhaseShiftDiagram phase_correlate(const Grid& a, const Grid& b) {
  Require(a.width() == b.width() && a.height() == b.height(), ErrorCode::kContract,
          "phase_correlate: dimension mismatch (" + std::to_string(a.width()) + "x" +
              std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
              std::to_string(b.height()) + ")");
  Require(a.width() > 0 && a.height() > 0, ErrorCode::kContract, "phase_correlate: empty grid");
  const int w = a.width();
  const int h = a.height();
  ComplexGrid fa = to_complex(a);
  ComplexGrid fb = to_complex(b);
  detail::fft2(fa, w, h, false);
  detail::fft2(fb, w, h, false);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const auto cross = fb[i] * std::conj(fa[i]);
    fa[i] = cross / std::max(std::abs(cross), kCrossPowerFloor);
  }
  detail::fft2(fa, w, h, true);
  std::vector<double> energy(fa.size());
  std::transform(fa.begin(), fa.end(), energy.begin(), [](auto c) { return std::abs(c); });
  return {Grid(w, h, detail::fftshift(energy, w, h))};
}

LogPolarGrid to_log_polar(const Grid& magnitude, int n_angle, int n_scale, double angle_span_deg) {
  Require(magnitude.width() >= 4 && magnitude.height() >= 4, ErrorCode::kInputDomain,
          "to_log_polar: grid too small");
  Require(angle_span_deg > 0.0 && angle_span_deg <= 360.0, ErrorCode::kContract,
          "to_log_polar: angle span must lie in (0, 360]");
  if (n_angle <= 0) n_angle = magnitude.height();
  if (n_scale <= 0) n_scale = magnitude.width();

  const double cx = magnitude.width() / 2;
  const double cy = magnitude.height() / 2;
  const double r_max = std::min(magnitude.width(), magnitude.height()) / 2.0;
  const double log_base = std::log(r_max) / n_scale;

  std::vector<double> radii(n_scale);
  for (int j = 0; j < n_scale; ++j) radii[j] = std::exp(log_base * j);

  Grid out(n_scale, n_angle);
  for (int i = 0; i < n_angle; ++i) {
    const double a = i * angle_span_deg / n_angle * kPi / 180.0;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    auto row = out.row(i);
    for (int j = 0; j < n_scale; ++j) {
      row[j] = magnitude.sample(cx + radii[j] * ca, cy + radii[j] * sa);
    }
  }
  return {std::move(out), std::exp(log_base), angle_span_deg};
}

Image warp_rotate_zoom(const Image& img, double theta_deg, double zoom) {
  Require(zoom >= 0.25 && zoom <= 4.0, ErrorCode::kContract,
          "warp_rotate_zoom: zoom " + std::to_string(zoom) + " outside [0.25, 4]");
  Require(std::isfinite(theta_deg), ErrorCode::kContract, "warp_rotate_zoom: non-finite angle");
  const int w = img.width();
  const int h = img.height();
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double t = std::fmod(theta_deg, 360.0) * kPi / 180.0;
  // Inverse map: source = c + R(-theta) (p - c) / zoom.
  const double c = std::cos(t) / zoom;
  const double s = std::sin(t) / zoom;
  const Grid& src = img.grid();

  std::vector<double> out(src.size());
  for (int y = 0; y < h; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double sx = cx + c * dx + s * dy;
      const double sy = cy - s * dx + c * dy;
      out[static_cast<std::size_t>(y) * w + x] = std::clamp(src.sample(sx, sy), 0.0, 1.0);
    }
  }
  return Image(w, h, std::move(out));
}

PolarTranslationGrid remap_translation_psd(const PhaseShiftDiagram& psd, int n_angle,
                                           int n_radius) {
  const Grid& e = psd.energy;
  Require(n_angle > 0, ErrorCode::kContract, "remap_translation_psd: n_angle must be positive");
  if (n_radius <= 0) n_radius = std::min(e.width(), e.height()) / 2;
  const double cx = psd.center_x();
  const double cy = psd.center_y();

  Grid out(n_radius, n_angle);
  for (int i = 0; i < n_angle; ++i) {
    const double a = i * 360.0 / n_angle * kPi / 180.0;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    auto row = out.row(i);
    for (int j = 0; j < n_radius; ++j) row[j] = std::max(0.0, e.sample(cx + j * ca, cy + j * sa));
  }
  return {std::move(out), 1.0};
}

}  // namespace specvo
