#include "specvo/energy_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specvo/error.hpp"

namespace specvo {

namespace {

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

// Half-sample symmetric reflection: -1 -> 0, n -> n-1, periodic in 2n.
int reflect_index(int i, int n) {
  const int period = 2 * n;
  i = ((i % period) + period) % period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

GaussianFit fit_row_gaussian(std::span<const double> row_sums, int k) {
  Require(row_sums.size() >= 3 && row_sums.size() % 2 == 1, ErrorCode::kContract,
          "fit_row_gaussian: need an odd block of at least 3 rows");
  const int r = static_cast<int>(row_sums.size()) / 2;
  double total = 0.0;
  double first = 0.0;
  for (int d = -r; d <= r; ++d) {
    const double w = row_sums[d + r];
    Require(std::isfinite(w) && w >= 0.0, ErrorCode::kContract,
            "fit_row_gaussian: row energies must be finite and non-negative");
    total += w;
    first += w * d;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kDegenerateBlock, "row block carries no energy");
  const double offset = first / total;
  double second = 0.0;
  for (int d = -r; d <= r; ++d) second += row_sums[d + r] * (d - offset) * (d - offset);
  return {k + offset, std::max(std::sqrt(second / total), kMinRowSigma)};
}

FusionResult fuse_energy_vector(const Grid& grid, const FusionOptions& options) {
  const int r = options.radius;
  const int rows = grid.height();
  Require(r >= 1, ErrorCode::kContract, "fuse_energy_vector: block radius must be >= 1");
  Require(rows >= 2 * r + 1, ErrorCode::kContract,
          "fuse_energy_vector: grid has " + std::to_string(rows) + " rows, block needs " +
              std::to_string(2 * r + 1));
  const int first_col = std::clamp(options.min_column, 0, grid.width());

  std::vector<double> energy(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    auto row = grid.row(i);
    for (int j = first_col; j < grid.width(); ++j) energy[i] += row[j];
  }
  const int peak = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
  const int k = options.circular ? peak : std::clamp(peak, r, rows - 1 - r);

  auto row_index = [&](int i) { return options.circular ? wrap_index(i, rows) : i; };

  std::vector<double> block(2 * r + 1);
  for (int d = -r; d <= r; ++d) block[d + r] = energy[row_index(k + d)];
  const GaussianFit fit = fit_row_gaussian(block, k);

  FusionResult result;
  result.fused.assign(grid.width(), 0.0);
  double weight_sum = 0.0;
  for (int i = k - r; i <= k + r; ++i) {
    const double z = (i - fit.mu) / fit.sigma;
    const double g = std::exp(-0.5 * z * z);
    weight_sum += g;
    auto row = grid.row(row_index(i));
    for (int j = 0; j < grid.width(); ++j) result.fused[j] += g * row[j];
  }
  for (double& v : result.fused) v /= weight_sum;

  result.peak_row_mu = fit.mu;
  result.sigma = fit.sigma;
  result.block_center = k;
  result.block_radius = r;
  return result;
}

EnergyVector smooth_vector(const EnergyVector& v, double sigma_g) {
  Require(sigma_g >= 0.5 && sigma_g <= 5.0, ErrorCode::kContract,
          "smooth_vector: sigma must lie in [0.5, 5]");
  const int n = v.size();
  if (n == 0) return v;
  const int half = static_cast<int>(std::ceil(3.0 * sigma_g));
  std::vector<double> kernel(2 * half + 1);
  double ksum = 0.0;
  for (int d = -half; d <= half; ++d) {
    kernel[d + half] = std::exp(-0.5 * (d / sigma_g) * (d / sigma_g));
    ksum += kernel[d + half];
  }
  for (double& k : kernel) k /= ksum;

  EnergyVector out = v;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int d = -half; d <= half; ++d) acc += kernel[d + half] * v.values[reflect_index(i - d, n)];
    out.values[i] = std::max(acc, 0.0);
  }
  return out;
}

}  // namespace specvo
