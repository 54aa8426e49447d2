#pragma once

#include <span>
#include <vector>

#include "specvo/image.hpp"

namespace specvo {

enum class AxisKind {
  kLogScale,  // bin j is zoom epsilon^(j - center)
  kRadius,    // bin j is j * step pixels
};

// 1-D non-negative profile over a log-zoom or translation-radius axis.
struct EnergyVector {
  std::vector<double> values;
  AxisKind axis = AxisKind::kRadius;
  // epsilon for kLogScale, pixels per bin for kRadius.
  double step = 1.0;
  // Bin of zoom 1 (kLogScale) or radius 0 (kRadius).
  int center = 0;

  int size() const { return static_cast<int>(values.size()); }
};

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
};

inline constexpr double kMinRowSigma = 0.25;

// Moment fit of a block of 2r+1 row energies whose middle entry is row k.
// Throws Error(kDegenerateBlock) when the block carries no energy.
GaussianFit fit_row_gaussian(std::span<const double> row_sums, int k);

struct FusionOptions {
  int radius = 2;
  // Row indices wrap (angular axes) instead of clamping to the grid.
  bool circular = false;
  // Columns below this index are ignored when ranking rows by energy.
  int min_column = 0;
};

struct FusionResult {
  std::vector<double> fused;
  double peak_row_mu = 0.0;
  double sigma = 0.0;
  int block_center = 0;
  int block_radius = 0;
};

// Gaussian-weighted fusion of the 2r+1 rows around the most energetic row.
FusionResult fuse_energy_vector(const Grid& grid, const FusionOptions& options = {});

// Normalised Gaussian convolution truncated at 3 sigma, half-sample reflective
// boundary. Preserves mass and non-negativity.
EnergyVector smooth_vector(const EnergyVector& v, double sigma_g = 1.0);

}  // namespace specvo
