#pragma once

#include "specvo/image.hpp"

namespace specvo {

// Correlation surface of two grids, stored centre-shifted: a displacement of
// (dx, dy) lands on bin (width/2 + dx, height/2 + dy), circularly.
struct PhaseShiftDiagram {
  Grid energy;

  int center_x() const { return energy.width() / 2; }
  int center_y() const { return energy.height() / 2; }
};

struct Peak {
  int x = 0;
  int y = 0;
  double value = 0.0;
};

// Location of the largest entry (first one in row-major order on ties).
Peak argmax(const Grid& grid);

// Log-polar resampling of a centred magnitude grid. Rows are angles
// (i * angle_span / n_angle), columns are radii epsilon^j.
struct LogPolarGrid {
  Grid data;
  double epsilon = 1.0;
  double angle_span_deg = 180.0;

  int n_angle() const { return data.height(); }
  int n_scale() const { return data.width(); }
  double angle_step_deg() const { return angle_span_deg / n_angle(); }
};

// Polar resampling of a centred translation PSD. Rows span [0, 360) degrees,
// column j is radius j * radius_step pixels.
struct PolarTranslationGrid {
  Grid data;
  double radius_step = 1.0;

  int n_angle() const { return data.height(); }
  int n_radius() const { return data.width(); }
  double angle_step_deg() const { return 360.0 / n_angle(); }
};

struct SpectrumOptions {
  bool window = true;    // separable Hann window before the FFT
  bool highpass = true;  // (1 - cos pi u cos pi v)(2 - cos pi u cos pi v)
};

// |FFT(w * img)| * H, centre-shifted (DC at width/2, height/2).
Grid preprocess_spectrum(const Image& img, const SpectrumOptions& options = {});

// Separable Hann window applied to a grid (translation front-end).
Grid hann_windowed(const Grid& g);

// |IFFT(F_b conj(F_a) / max(|F_b conj(F_a)|, 1e-12))|, centre-shifted. The peak
// sits at the displacement of b relative to a.
PhaseShiftDiagram phase_correlate(const Grid& a, const Grid& b);

// n_angle / n_scale of 0 select the defaults (source height / width).
LogPolarGrid to_log_polar(const Grid& magnitude, int n_angle = 0, int n_scale = 0,
                          double angle_span_deg = 180.0);

// Rotates by theta degrees (x towards y, image coordinates) and zooms by s
// about the pixel-grid centre; inverse-mapped bilinear, zero outside.
Image warp_rotate_zoom(const Image& img, double theta_deg, double zoom);

// n_radius of 0 selects min(width, height) / 2.
PolarTranslationGrid remap_translation_psd(const PhaseShiftDiagram& psd, int n_angle = 360,
                                           int n_radius = 0);

}  // namespace specvo
