#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "specvo/error.hpp"
#include "specvo/registration.hpp"
#include "specvo/spectral.hpp"
#include "support.hpp"

using namespace specvo;
using testsupport::angle_distance;

namespace {

// Views of a large texture: a centred crop before and after a warp about the
// texture centre, so no wrap-around content enters the frame.
struct WarpPair {
  Image a, b;
};

WarpPair warped_pair(std::uint64_t seed, double theta, double zoom, int n = 256) {
  const int big = n + n / 2;
  const Image tex(testsupport::random_texture(big, big, seed, 2));
  const Image warped = warp_rotate_zoom(tex, theta, zoom);
  const int off = n / 4;
  return {Image(testsupport::crop(tex.grid(), off, off, n, n)),
          Image(testsupport::crop(warped.grid(), off, off, n, n))};
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  Grid g = img.grid();
  for (double& v : g.data()) v = std::clamp(v + d(rng), 0.0, 1.0);
  return Image(std::move(g));
}

// Image with three horizontal bands whose content moves by different amounts,
// like three planes at different depths under a sideways camera step.
WarpPair three_band_pair(const int shifts[3]) {
  const int n = 256;
  const Grid tex = testsupport::random_texture(n + 64, n, 31, 2);
  Grid a(n, n), b(n, n);
  for (int y = 0; y < n; ++y) {
    const int band = std::min(y * 3 / n, 2);
    for (int x = 0; x < n; ++x) {
      a.at(x, y) = tex.at(x + 32, y);
      b.at(x, y) = tex.at(x + 32 - shifts[band], y);
    }
  }
  return {Image(a), Image(b)};
}

}  // namespace

TEST(RegisterPair, IdentityHasNoMotion) {
  const Image a = testsupport::random_image(256, 256, 1, 2);
  const PairRegistration r = register_pair(a, a);
  EXPECT_LT(angle_distance(r.theta_deg, 0.0), 0.5);
  EXPECT_NEAR(r.zoom, 1.0, 0.01);
  EXPECT_LT(refined_argmax(r.translation_vector.values), 0.5);
  EXPECT_GT(r.quality, 0.3);
  EXPECT_GT(r.sigma_phi_deg, 30.0);
}

TEST(RegisterPair, ExactCopyKeepsTranslationMassInFirstColumns) {
  // Bit-identical frames give a delta translation PSD at the origin.
  const Image a = testsupport::random_image(128, 128, 14, 2);
  RegistrationOptions o;
  o.window_translation = false;
  const PairRegistration r = register_pair(a, a, o);
  const auto& t = r.translation_vector.values;
  double head = t[0] + t[1], all = 0.0;
  for (double v : t) all += v;
  EXPECT_GT(head / all, 0.9);
  EXPECT_GT(r.sigma_phi_deg, 30.0);
}

TEST(RegisterPair, RecoversTenDegreeRotation) {
  const WarpPair p = warped_pair(2, 10.0, 1.0);
  const PairRegistration r = register_pair(p.a, p.b);
  EXPECT_LT(angle_distance(r.theta_deg, 10.0), 0.75);
  EXPECT_NEAR(r.zoom, 1.0, 0.02);
  EXPECT_GT(r.sigma_theta_deg, 0.0);
}

TEST(RegisterPair, RecoversTranslationDirectionAndLength) {
  // Camera window moves by (-12, -5) over the texture: content moves by (12, 5).
  const Grid big = testsupport::random_texture(384, 384, 3, 2);
  const Image a(testsupport::crop(big, 80, 80, 256, 256));
  const Image b(testsupport::crop(big, 68, 75, 256, 256));
  const PairRegistration r = register_pair(a, b);
  const double want_phi = std::atan2(5.0, 12.0) * 180.0 / testsupport::kPi;
  EXPECT_LT(angle_distance(r.phi_deg, want_phi), 1.5);
  EXPECT_NEAR(refined_argmax(r.translation_vector.values), 13.0, 0.5);
  EXPECT_LT(angle_distance(r.theta_deg, 0.0), 0.5);
  // A 13 px peak resolves the direction to about atan(0.5 / 13).
  EXPECT_GE(r.sigma_phi_deg, std::atan2(0.5, 13.5) * 180.0 / testsupport::kPi);
}

TEST(RegisterPair, AntisymmetricUnderSwap) {
  const WarpPair p = warped_pair(4, 23.0, 1.1);
  const PairRegistration ab = register_pair(p.a, p.b);
  const PairRegistration ba = register_pair(p.b, p.a);
  EXPECT_LT(angle_distance(ab.theta_deg, -ba.theta_deg), 1.0);
  EXPECT_NEAR(std::log(ab.zoom), -std::log(ba.zoom), 2.0 * std::log(ab.zoom_vector.step));
}

TEST(RegisterPair, PureRotationKeepsTranslationMassAtOrigin) {
  const WarpPair p = warped_pair(5, 40.0, 1.0);
  const PairRegistration r = register_pair(p.a, p.b);
  const auto& t = r.translation_vector.values;
  EXPECT_LT(std::max_element(t.begin(), t.end()) - t.begin(), 2);
  double head = t[0] + t[1], all = 0.0;
  for (double v : t) all += v;
  EXPECT_GE(head / all, 0.6);
}

TEST(RegisterPair, QualityDropsWithNoise) {
  const Grid big = testsupport::random_texture(384, 384, 6, 2);
  const Image a(testsupport::crop(big, 64, 64, 256, 256));
  const Image b(testsupport::crop(big, 70, 60, 256, 256));
  double last = 2.0;
  for (double sigma : {0.0, 0.1, 0.3}) {
    const PairRegistration r = register_pair(add_noise(a, sigma, 1), add_noise(b, sigma, 2));
    EXPECT_LT(r.quality, last) << "sigma=" << sigma;
    EXPECT_GE(r.quality, 0.0);
    EXPECT_LE(r.quality, 1.0);
    last = r.quality;
  }
}

TEST(RegisterPair, ThreeBandParallaxGivesThreeTranslationPeaks) {
  const int shifts[3] = {6, 10, 16};
  const WarpPair p = three_band_pair(shifts);
  const PairRegistration r = register_pair(p.a, p.b);
  EXPECT_LT(angle_distance(r.phi_deg, 0.0), 2.0);
  const auto& t = r.translation_vector.values;
  for (int s : shifts) {
    // Each depth leaves a local maximum within one bin of its shift.
    bool found = false;
    for (int j = std::max(1, s - 1); j <= s + 1; ++j) {
      found = found || (t[j] >= t[j - 1] && t[j] >= t[j + 1] && t[j] > 0.05 * t[s]);
    }
    EXPECT_TRUE(found) << "shift " << s;
  }
}

TEST(RegisterPair, BlackImagesFailRegistration) {
  // No spectral energy at all: the rotation/zoom PSD is empty.
  const Image flat(128, 128, std::vector<double>(128 * 128, 0.0));
  try {
    register_pair(flat, flat);
    FAIL() << "expected a registration failure";
  } catch (const RegistrationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRegistrationFailure);
    EXPECT_EQ(e.stage(), RegistrationError::Stage::kRotationScale);
  }
}

TEST(RegisterPair, RejectsMismatchedSizes) {
  try {
    register_pair(testsupport::random_image(128, 128, 1), testsupport::random_image(64, 128, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContract);
  }
}

TEST(RegisterPair, DumpsPsdImages) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "specvo_dump_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  RegistrationOptions o;
  o.dump_dir = dir;
  const Image a = testsupport::random_image(128, 128, 8);
  register_pair(a, a, o);
  EXPECT_TRUE(std::filesystem::exists(dir / "rot_scale_psd.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "translation_psd.pgm"));
  std::filesystem::remove_all(dir);
}

TEST(DominantZoom, ReadsPeakBinThroughEpsilon) {
  EnergyVector v;
  v.axis = AxisKind::kLogScale;
  v.step = 1.02;
  v.center = 10;
  v.values.assign(21, 0.0);
  v.values[13] = 1.0;
  EXPECT_NEAR(dominant_zoom(v), std::pow(1.02, 3), 1e-12);
  v.values[13] = 0.0;
  v.values[10] = 1.0;
  EXPECT_DOUBLE_EQ(dominant_zoom(v), 1.0);
}

TEST(DominantZoom, ParabolaRefinesBetweenBins) {
  EnergyVector v;
  v.axis = AxisKind::kLogScale;
  v.step = 1.02;
  v.center = 10;
  v.values.assign(21, 0.0);
  v.values[12] = 1.0;
  v.values[13] = 1.0;
  // Equal neighbours put the vertex halfway.
  EXPECT_NEAR(dominant_zoom(v), std::pow(1.02, 2.5), 1e-12);
}

TEST(DominantZoom, RejectsRadiusAxis) {
  EnergyVector v;
  v.values.assign(5, 1.0);
  EXPECT_THROW(dominant_zoom(v), Error);
}

TEST(RegisterPairSinglePeak, RecoversIntegerTranslation) {
  const Grid big = testsupport::random_texture(384, 384, 9, 2);
  const Image a(testsupport::crop(big, 64, 64, 256, 256));
  const Image b(testsupport::crop(big, 55, 71, 256, 256));
  const SinglePeakRegistration r = register_pair_single_peak(a, b);
  EXPECT_EQ(r.dx, 9.0);
  EXPECT_EQ(r.dy, -7.0);
  EXPECT_NEAR(r.zoom, 1.0, 0.02);
}

TEST(RegisterPairProperty, RandomWarpsWithinTolerance) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> theta(0.0, 180.0), logs(std::log(0.8), std::log(1.25));
  int ok = 0;
  const int trials = 12;
  for (int t = 0; t < trials; ++t) {
    const double th = theta(rng), s = std::exp(logs(rng));
    const WarpPair p = warped_pair(100 + t, th, s);
    const PairRegistration r = register_pair(p.a, p.b);
    const double step = 180.0 / 256;
    const bool angle_ok = angle_distance(std::fmod(r.theta_deg, 180.0), th, 180.0) <= std::max(0.5, step);
    const bool zoom_ok = std::abs(std::log(r.zoom / s)) <= std::log(r.zoom_vector.step);
    ok += angle_ok && zoom_ok ? 1 : 0;
  }
  EXPECT_GE(ok, trials - 1);
}
