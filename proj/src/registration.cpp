#include "specvo/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specvo/error.hpp"
#include "specvo/spectral.hpp"

namespace specvo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap_deg(double a, double period = 360.0) {
  a = std::fmod(a, period);
  if (a < 0.0) a += period;
  return a >= period ? 0.0 : a;
}

struct RotScale {
  PhaseShiftDiagram psd;
  double epsilon = 1.0;
  double angle_step_deg = 0.0;
};

// Tapers the log-radius axis. The disc edge and the filtered-out core sit at
// the same columns in both grids and would otherwise pin the correlation peak
// to zero zoom.
Grid scale_windowed(Grid g) {
  const int w = g.width();
  for (int j = 0; j < w; ++j) {
    const double k = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (j + 0.5) / w);
    for (int i = 0; i < g.height(); ++i) g.at(j, i) *= k;
  }
  return g;
}

RotScale rot_scale_psd(const Image& a, const Image& b, const RegistrationOptions& options) {
  const int na = options.log_polar_angles, ns = options.log_polar_scales;
  const LogPolarGrid la = to_log_polar(preprocess_spectrum(a), na, ns);
  const LogPolarGrid lb = to_log_polar(preprocess_spectrum(b), na, ns);
  return {phase_correlate(scale_windowed(la.data), scale_windowed(lb.data)), la.epsilon,
          la.angle_step_deg()};
}

// Mirrors a PSD row about its centre so that the bin index grows with the
// zoom of b relative to a (the spectrum shrinks when the image is enlarged).
EnergyVector zoom_axis_vector(std::span<const double> psd_row, double epsilon) {
  const int n = static_cast<int>(psd_row.size());
  const int c = n / 2;
  EnergyVector v;
  v.values.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int src = 2 * c - j;
    if (src >= 0 && src < n) v.values[j] = std::max(psd_row[src], 0.0);
  }
  v.axis = AxisKind::kLogScale;
  v.step = epsilon;
  v.center = c;
  return v;
}

struct TranslationCandidate {
  PhaseShiftDiagram psd;
  double peak = 0.0;
  double theta_deg = 0.0;
};

// Re-rotates and re-zooms a by both theta and theta + 180 and keeps the
// candidate whose translation PSD has the stronger peak.
TranslationCandidate resolve_half_turn(const Image& a, const Grid& b_front, double theta_deg,
                                       double zoom, const RegistrationOptions& options) {
  zoom = std::clamp(zoom, 0.25, 4.0);
  TranslationCandidate best;
  best.peak = -1.0;
  for (double candidate : {theta_deg, theta_deg + 180.0}) {
    candidate = wrap_deg(candidate);
    const Image warped = warp_rotate_zoom(a, candidate, zoom);
    const Grid a_front = options.window_translation ? hann_windowed(warped.grid()) : warped.grid();
    PhaseShiftDiagram psd = phase_correlate(a_front, b_front);
    const double peak = psd.energy.max();
    if (peak > best.peak) best = {std::move(psd), peak, candidate};
  }
  return best;
}

double psd_quality(const PhaseShiftDiagram& psd) {
  const double total = psd.energy.sum();
  return total > 0.0 ? std::clamp(psd.energy.max() / total, 0.0, 1.0) : 0.0;
}

void check_pair(const Image& a, const Image& b) {
  Require(a.width() == b.width() && a.height() == b.height(), ErrorCode::kContract,
          "register_pair: images differ in size");
}

}  // namespace

double refined_argmax(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto it = std::max_element(values.begin(), values.end());
  const int j = static_cast<int>(it - values.begin());
  if (j == 0 || j + 1 >= static_cast<int>(values.size())) return j;
  const double ym = values[j - 1], y0 = values[j], yp = values[j + 1];
  const double denom = ym - 2.0 * y0 + yp;
  if (!(denom < 0.0)) return j;
  return j + std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
}

double dominant_zoom(const EnergyVector& zoom_vector) {
  Require(zoom_vector.axis == AxisKind::kLogScale, ErrorCode::kContract,
          "dominant_zoom: vector is not on a log-scale axis");
  const double j = refined_argmax(zoom_vector.values);
  return std::pow(zoom_vector.step, j - zoom_vector.center);
}

PairRegistration register_pair(const Image& a, const Image& b, const RegistrationOptions& options) {
  check_pair(a, b);
  PairRegistration out;

  // Rotation and zoom.
  const RotScale rs = rot_scale_psd(a, b, options);
  FusionResult rot;
  try {
    rot = fuse_energy_vector(rs.psd.energy, {options.fusion_radius, true, 0});
  } catch (const Error& e) {
    throw RegistrationError(RegistrationError::Stage::kRotationScale,
                            std::string("rotation/zoom fusion failed: ") + e.what());
  }
  const double theta = wrap_deg((rot.peak_row_mu - rs.psd.center_y()) * rs.angle_step_deg, 180.0);
  out.sigma_theta_deg = rot.sigma * rs.angle_step_deg;
  out.zoom_vector = zoom_axis_vector(rot.fused, rs.epsilon);
  out.zoom = dominant_zoom(out.zoom_vector);

  // Translation.
  const Grid b_front = options.window_translation ? hann_windowed(b.grid()) : b.grid();
  TranslationCandidate tc = resolve_half_turn(a, b_front, theta, out.zoom, options);
  out.theta_deg = tc.theta_deg;
  out.quality = psd_quality(tc.psd);

  const PolarTranslationGrid polar = remap_translation_psd(tc.psd, options.translation_angles);
  FusionResult trans;
  try {
    try {
      trans = fuse_energy_vector(polar.data,
                                 {options.fusion_radius, true, options.min_direction_radius});
    } catch (const Error& e) {
      // All energy inside the guard radius: no motion. Let every radius vote;
      // the direction then carries the rho = 0 uncertainty below.
      if (e.code() != ErrorCode::kDegenerateBlock || options.min_direction_radius <= 0) throw;
      trans = fuse_energy_vector(polar.data, {options.fusion_radius, true, 0});
    }
  } catch (const Error& e) {
    throw RegistrationError(RegistrationError::Stage::kTranslation,
                            std::string("translation fusion failed: ") + e.what());
  }
  out.phi_deg = wrap_deg(trans.peak_row_mu * polar.angle_step_deg());
  out.translation_vector.values = std::move(trans.fused);
  out.translation_vector.axis = AxisKind::kRadius;
  out.translation_vector.step = polar.radius_step;
  out.translation_vector.center = 0;

  // A peak at radius rho cannot resolve its direction better than
  // atan(0.5 / rho); at rho = 0 the direction is unconstrained.
  const double rho = refined_argmax(out.translation_vector.values) * polar.radius_step;
  out.sigma_phi_deg =
      std::max(trans.sigma * polar.angle_step_deg(), std::atan2(0.5, rho) * kRadToDeg);

  if (!options.dump_dir.empty()) {
    save_grid_pgm(rs.psd.energy, options.dump_dir / "rot_scale_psd.pgm");
    save_grid_pgm(tc.psd.energy, options.dump_dir / "translation_psd.pgm");
    save_grid_pgm(polar.data, options.dump_dir / "translation_polar.pgm");
  }
  return out;
}

SinglePeakRegistration register_pair_single_peak(const Image& a, const Image& b,
                                                 const RegistrationOptions& options) {
  check_pair(a, b);
  SinglePeakRegistration out;
  const RotScale rs = rot_scale_psd(a, b, options);
  const Peak p = argmax(rs.psd.energy);
  const double theta = wrap_deg((p.y - rs.psd.center_y()) * rs.angle_step_deg, 180.0);
  out.zoom = std::clamp(std::pow(rs.epsilon, rs.psd.center_x() - p.x), 0.25, 4.0);

  const Grid b_front = options.window_translation ? hann_windowed(b.grid()) : b.grid();
  const TranslationCandidate tc = resolve_half_turn(a, b_front, theta, out.zoom, options);
  out.theta_deg = tc.theta_deg;
  const Peak t = argmax(tc.psd.energy);
  out.dx = t.x - tc.psd.center_x();
  out.dy = t.y - tc.psd.center_y();
  out.quality = psd_quality(tc.psd);
  return out;
}

}  // namespace specvo
