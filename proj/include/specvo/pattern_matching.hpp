#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "specvo/energy_vector.hpp"

namespace specvo {

enum class MatchMode { kTranslation, kScale };

inline constexpr int kTranslationCandidates = 121;
// Matching overlap below this fraction of the vector length is rejected.
inline constexpr double kMinOverlapFraction = 0.25;

// Translation: up to 121 log-spaced multiplicative factors in [1/bound, bound]
// (never closer than 0.1% apart). Scale: integer bin shifts within
// +-round(ln(bound) / ln(epsilon)).
std::vector<double> candidate_factors(MatchMode mode, double bound, double epsilon = 0.0);

struct MatchResult {
  double lambda = 1.0;
  double sigma_lambda = 0.0;
  int index = 0;
  std::vector<double> error_curve;
  std::vector<double> candidates;
};

struct FactorSelection {
  int index = 0;
  double sigma_lambda = 0.0;
};

// Picks, among the interior local minima of the error curve, the one with the
// largest discrete Laplacian L = e[i-1] - 2 e[i] + e[i+1] relative to its
// error e[i]. sigma = step * sqrt(2 e / L), clamped to [step, 10 step]. Throws
// Error(kMatchingFailure) when there is no local minimum.
FactorSelection select_factor(std::span<const double> error_curve,
                              std::span<const double> candidates);

// Gaussian smoothing followed by L2 normalisation.
EnergyVector prepare_for_matching(const EnergyVector& v, double sigma_g = 1.0);

// lambda such that next(x) ~ prev(x / lambda) over the overlapping radii.
MatchResult match_translation(const EnergyVector& prev, const EnergyVector& next,
                              double bound = 3.0);

// Integer shift k such that next(j) ~ prev(j - k) over the overlapping bins.
MatchResult match_scale(const EnergyVector& prev, const EnergyVector& next, double bound = 3.0);

struct MotionState {
  double rho = 1.0;  // translation length relative to the unit first pair
  double s = 1.0;    // zoom factor
};

// rho' = lambda_t * rho, s' = s / epsilon^lambda_s. lambda_s counts bins on the
// spectral log-radius axis.
MotionState update_motion(const MotionState& prev, double lambda_t, double lambda_s,
                          double epsilon);

// candidate,error rows.
void write_match_curve_csv(const MatchResult& m, const std::filesystem::path& path);

}  // namespace specvo
