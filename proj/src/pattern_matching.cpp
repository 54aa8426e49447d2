#include "specvo/pattern_matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "specvo/error.hpp"

namespace specvo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinLogStep = 1e-3;
constexpr double kCurvatureFloor = 1e-12;

void l2_normalize(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (double& x : v) x *= inv;
  }
}

// Mean squared difference of the two profiles after each is scaled to unit
// RMS over the overlap. Infinite when either side has no energy there.
double overlap_error(std::span<const double> a, std::span<const double> b) {
  double aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double n = static_cast<double>(a.size());
  if (!(aa > 0.0) || !(bb > 0.0)) return kInf;
  const double sa = std::sqrt(n / aa);
  const double sb = std::sqrt(n / bb);
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] * sa - b[i] * sb;
    err += d * d;
  }
  return err / n;
}

double linear_sample(const std::vector<double>& v, double x) {
  if (x < 0.0 || x > static_cast<double>(v.size() - 1)) return 0.0;
  const std::size_t i = std::min(static_cast<std::size_t>(x), v.size() - 2);
  const double f = x - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

std::vector<double> normalized_copy(const EnergyVector& v) {
  std::vector<double> out = v.values;
  l2_normalize(out);
  return out;
}

MatchResult finish(std::vector<double> candidates, std::vector<double> errors) {
  MatchResult m;
  m.candidates = std::move(candidates);
  m.error_curve = std::move(errors);
  const int n = static_cast<int>(m.candidates.size());
  int finite = 0;
  for (double e : m.error_curve) finite += std::isfinite(e) ? 1 : 0;
  if (finite == 0) throw Error(ErrorCode::kMatchingFailure, "no candidate factor has any overlap");

  if (n < 5) {
    // Too few candidates for a curvature test; plain argmin.
    m.index = static_cast<int>(std::min_element(m.error_curve.begin(), m.error_curve.end()) -
                               m.error_curve.begin());
    const double span = std::abs(m.candidates.back() - m.candidates.front());
    m.sigma_lambda = std::max(n > 1 ? span / (n - 1) : 0.0, 1e-6);
  } else {
    const FactorSelection sel = select_factor(m.error_curve, m.candidates);
    m.index = sel.index;
    m.sigma_lambda = sel.sigma_lambda;
  }
  m.lambda = m.candidates[m.index];
  return m;
}

// Error of prev stretched by lambda against next, or infinite below the overlap
// threshold.
double stretched_error(const std::vector<double>& a, const std::vector<double>& b, double lambda,
                       std::vector<double>& scratch) {
  const int n = static_cast<int>(a.size());
  const int overlap = std::min(n, static_cast<int>(std::floor((n - 1) * lambda + 1e-9)) + 1);
  if (overlap < kMinOverlapFraction * n) return kInf;
  scratch.resize(n);
  for (int x = 0; x < overlap; ++x) scratch[x] = linear_sample(a, x / lambda);
  return overlap_error(std::span(scratch).first(overlap), std::span(b).first(overlap));
}

double symmetric_error(const std::vector<double>& a, const std::vector<double>& b, double lambda) {
  std::vector<double> scratch;
  return 0.5 * (stretched_error(a, b, lambda, scratch) + stretched_error(b, a, 1.0 / lambda, scratch));
}

// Parabolic refinement of a translation factor in log space, between the
// neighbouring candidates.
// The parabola is fitted to the error averaged over both stretch directions:
// the one-sided curve is lopsided in log space (the overlap differs for
// lambda and 1 / lambda), which biases the vertex and compounds along a chain.
void refine_log_factor(MatchResult& m, const std::vector<double>& a, const std::vector<double>& b) {
  const int i = m.index;
  if (i <= 0 || i + 1 >= static_cast<int>(m.candidates.size())) return;
  const double em = symmetric_error(a, b, m.candidates[i - 1]);
  const double e0 = symmetric_error(a, b, m.candidates[i]);
  const double ep = symmetric_error(a, b, m.candidates[i + 1]);
  if (!std::isfinite(em) || !std::isfinite(ep)) return;
  const double denom = em - 2.0 * e0 + ep;
  if (!(denom > 0.0)) return;
  const double t = std::clamp(0.5 * (em - ep) / denom, -0.5, 0.5);
  const double lo = std::log(m.candidates[i]);
  const double step = t < 0.0 ? lo - std::log(m.candidates[i - 1]) : std::log(m.candidates[i + 1]) - lo;
  m.lambda = std::exp(lo + t * step);
}

}  // namespace

std::vector<double> candidate_factors(MatchMode mode, double bound, double epsilon) {
  Require(bound > 1.0 && std::isfinite(bound), ErrorCode::kContract,
          "candidate_factors: bound must be finite and > 1");
  const double log_bound = std::log(bound);
  std::vector<double> out;
  if (mode == MatchMode::kTranslation) {
    const int half = std::min((kTranslationCandidates - 1) / 2,
                              static_cast<int>(std::floor(log_bound / kMinLogStep)));
    const int n = 2 * half + 1;
    out.resize(n);
    for (int i = 0; i < n; ++i) {
      out[i] = half == 0 ? 1.0 : std::exp(log_bound * (static_cast<double>(i - half) / half));
    }
    out[half] = 1.0;
  } else {
    Require(epsilon > 1.0, ErrorCode::kContract, "candidate_factors: scale mode needs epsilon > 1");
    const int half = static_cast<int>(std::lround(log_bound / std::log(epsilon)));
    for (int k = -half; k <= half; ++k) out.push_back(k);
  }
  return out;
}

FactorSelection select_factor(std::span<const double> error_curve,
                              std::span<const double> candidates) {
  const int n = static_cast<int>(error_curve.size());
  Require(static_cast<int>(candidates.size()) == n, ErrorCode::kContract,
          "select_factor: curve and candidates differ in length");
  int finite = 0;
  for (double e : error_curve) finite += std::isfinite(e) ? 1 : 0;
  Require(finite >= 5, ErrorCode::kContract, "select_factor: need at least 5 finite errors");

  // Valleys are ranked by curvature relative to their depth, i.e. by the
  // narrowness of the implied uncertainty below; a shallow ripple on a high
  // plateau can be as curved as the true valley.
  int best = -1;
  double best_laplacian = 0.0;
  double best_score = -kInf;
  for (int i = 1; i + 1 < n; ++i) {
    const double em = error_curve[i - 1], e0 = error_curve[i], ep = error_curve[i + 1];
    if (!std::isfinite(em) || !std::isfinite(e0) || !std::isfinite(ep)) continue;
    if (!(e0 < em && e0 <= ep)) continue;
    const double lap = em - 2.0 * e0 + ep;
    const double score = lap / std::max(e0, kCurvatureFloor);
    if (score > best_score) {
      best_score = score;
      best_laplacian = lap;
      best = i;
    }
  }
  if (best < 0) throw Error(ErrorCode::kMatchingFailure, "error curve has no local minimum");

  const double step = 0.5 * std::abs(candidates[best + 1] - candidates[best - 1]);
  const double raw = step * std::sqrt(2.0 * error_curve[best] / std::max(best_laplacian, kCurvatureFloor));
  return {best, std::clamp(raw, step, 10.0 * step)};
}

EnergyVector prepare_for_matching(const EnergyVector& v, double sigma_g) {
  EnergyVector out = smooth_vector(v, sigma_g);
  l2_normalize(out.values);
  return out;
}

MatchResult match_translation(const EnergyVector& prev, const EnergyVector& next, double bound) {
  Require(prev.size() == next.size() && prev.size() >= 8, ErrorCode::kContract,
          "match_translation: vectors must share a length of at least 8");
  const std::vector<double> a = normalized_copy(prev);
  const std::vector<double> b = normalized_copy(next);
  const int n = static_cast<int>(a.size());

  std::vector<double> candidates = candidate_factors(MatchMode::kTranslation, bound);
  std::vector<double> errors(candidates.size(), kInf);
  std::vector<double> stretched(n);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    errors[c] = stretched_error(a, b, candidates[c], stretched);
  }
  MatchResult m = finish(std::move(candidates), std::move(errors));
  refine_log_factor(m, a, b);
  return m;
}

MatchResult match_scale(const EnergyVector& prev, const EnergyVector& next, double bound) {
  Require(prev.size() == next.size() && prev.size() >= 8, ErrorCode::kContract,
          "match_scale: vectors must share a length of at least 8");
  Require(prev.axis == AxisKind::kLogScale, ErrorCode::kContract,
          "match_scale: vectors must be on a log-scale axis");
  const std::vector<double> a = normalized_copy(prev);
  const std::vector<double> b = normalized_copy(next);
  const int n = static_cast<int>(a.size());

  std::vector<double> candidates = candidate_factors(MatchMode::kScale, bound, prev.step);
  std::vector<double> errors(candidates.size(), kInf);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const int k = static_cast<int>(candidates[c]);
    const int lo = std::max(0, k);
    const int hi = std::min(n, n + k);
    const int overlap = hi - lo;
    if (overlap < kMinOverlapFraction * n) continue;
    errors[c] = overlap_error(std::span(a).subspan(lo - k, overlap), std::span(b).subspan(lo, overlap));
  }
  return finish(std::move(candidates), std::move(errors));
}

MotionState update_motion(const MotionState& prev, double lambda_t, double lambda_s,
                          double epsilon) {
  return {lambda_t * prev.rho, prev.s / std::pow(epsilon, lambda_s)};
}

void write_match_curve_csv(const MatchResult& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "candidate,error\n";
  out.precision(12);
  for (std::size_t i = 0; i < m.candidates.size(); ++i) {
    out << m.candidates[i] << ",";
    if (std::isfinite(m.error_curve[i])) out << m.error_curve[i];
    else out << "inf";
    out << "\n";
  }
}

}  // namespace specvo
