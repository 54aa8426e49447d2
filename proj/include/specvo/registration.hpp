#pragma once

#include <filesystem>

#include "specvo/energy_vector.hpp"
#include "specvo/image.hpp"

namespace specvo {

struct RegistrationOptions {
  // Row block radius of both energy-vector fusions.
  int fusion_radius = 2;
  // Log-polar resolution of the rotation/zoom domain; 0 selects the image
  // height (angles) and width (log-radius bins).
  int log_polar_angles = 0;
  int log_polar_scales = 0;
  // Direction bins of the polar translation grid.
  int translation_angles = 360;
  // Radii below this (pixels) do not vote for the translation direction.
  int min_direction_radius = 2;
  // Hann-window both images before the translation phase correlation.
  bool window_translation = true;
  // When set, rot-scale and translation PSDs are written here as PGM.
  std::filesystem::path dump_dir;
};

// Two-image registration. theta is the rotation of b's content relative to a
// (image coordinates, x towards y), phi the direction of b's content
// displacement after a has been re-rotated and re-zoomed onto b.
struct PairRegistration {
  double theta_deg = 0.0;
  double sigma_theta_deg = 0.0;
  double phi_deg = 0.0;
  double sigma_phi_deg = 0.0;
  EnergyVector zoom_vector;         // S, log-scale axis
  EnergyVector translation_vector;  // T, radius axis
  double quality = 0.0;             // peak / total energy of the translation PSD
  double zoom = 1.0;                // dominant zoom used for the re-warp
};

// Classical single-peak reading of the same PSDs: argmax rotation, zoom and
// translation. Used for the FMT baseline.
struct SinglePeakRegistration {
  double theta_deg = 0.0;
  double zoom = 1.0;
  double dx = 0.0;
  double dy = 0.0;
  double quality = 0.0;
};

PairRegistration register_pair(const Image& a, const Image& b,
                               const RegistrationOptions& options = {});

SinglePeakRegistration register_pair_single_peak(const Image& a, const Image& b,
                                                 const RegistrationOptions& options = {});

// epsilon^(j* - center), j* the argmax bin refined by a 3-point parabola.
double dominant_zoom(const EnergyVector& zoom_vector);

// Fractional argmax of a vector, refined by a 3-point parabola.
double refined_argmax(std::span<const double> values);

}  // namespace specvo
