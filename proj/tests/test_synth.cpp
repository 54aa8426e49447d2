#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "specvo/energy_vector.hpp"
#include "specvo/error.hpp"
#include "specvo/registration.hpp"
#include "specvo/spectral.hpp"
#include "specvo/synth.hpp"
#include "support.hpp"

using namespace specvo;

namespace {

double chord(const CameraPose& a, const CameraPose& b) { return std::hypot(b.x - a.x, b.y - a.y); }

SceneSpec single_plane(double depth) {
  PlaneSpec p;
  p.name = "ground";
  p.depth = depth;
  p.texture_seed = 3;
  return {{p}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

// Sub-bin position of the local maximum of v nearest to guess.
double local_peak(const std::vector<double>& v, double guess) {
  int best = static_cast<int>(std::lround(guess));
  for (int j = std::max(1, best - 2); j <= best + 2; ++j) {
    if (v[j] > v[best]) best = j;
  }
  const double em = v[best - 1], e0 = v[best], ep = v[best + 1];
  return best + 0.5 * (em - ep) / (em - 2.0 * e0 + ep);
}

}  // namespace

TEST(TrackPose, CircleClosesOnItself) {
  const TrackSpec t = dataset_preset("desk").track;
  const CameraPose start = track_pose(t, 0);
  const CameraPose end = track_pose_at(t, 1.0);
  EXPECT_NEAR(start.x, end.x, 1e-9);
  EXPECT_NEAR(start.y, end.y, 1e-9);
}

TEST(TrackPose, CircleChordsAreEqual) {
  const TrackSpec t = dataset_preset("desk").track;
  const double first = chord(track_pose(t, 0), track_pose(t, 1));
  for (int i = 1; i + 1 < t.frame_count; ++i) {
    EXPECT_NEAR(chord(track_pose(t, i), track_pose(t, i + 1)) / first, 1.0, 1e-3) << i;
  }
  // Closing chord too.
  EXPECT_NEAR(chord(track_pose(t, t.frame_count - 1), track_pose(t, 0)) / first, 1.0, 1e-3);
}

TEST(TrackPose, AnalemmaLengthMatchesItsSpec) {
  TrackSpec t = dataset_preset("desk_analemma").track;
  // Oracle: dense polyline of x = a sin s, y = a sin s cos s, integrated
  // independently of the track's own arc-length table.
  const int n = 200000;
  double unit_length = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s0 = 2.0 * testsupport::kPi * k / n, s1 = 2.0 * testsupport::kPi * (k + 1) / n;
    unit_length += std::hypot(std::sin(s1) - std::sin(s0), std::sin(s1) * std::cos(s1) - std::sin(s0) * std::cos(s0));
  }
  const double a = t.length / unit_length;
  // Track amplitude equals the oracle's scale: the x extent is +-a.
  double xmax = 0.0;
  for (int i = 0; i < 4000; ++i) xmax = std::max(xmax, std::abs(track_pose_at(t, i / 4000.0).x - t.center_x));
  EXPECT_NEAR(xmax / a, 1.0, 1e-3);

  t.frame_count = 2000;
  double polyline = 0.0;
  for (int i = 0; i < t.frame_count; ++i) {
    polyline += chord(track_pose(t, i), track_pose_at(t, (i + 1.0) / t.frame_count));
  }
  EXPECT_NEAR(polyline / t.length, 1.0, 5e-3);
}

TEST(TrackPose, ConstantSpeedTracksHaveEqualSteps) {
  for (const char* preset : {"desk", "depth_change", "full"}) {
    const TrackSpec t = dataset_preset(preset).track;
    const double first = chord(track_pose(t, 0), track_pose(t, 1));
    for (int i = 1; i + 1 < t.frame_count; ++i) {
      EXPECT_NEAR(chord(track_pose(t, i), track_pose(t, i + 1)) / first, 1.0, 1e-3) << preset << " " << i;
    }
  }
}

TEST(TrackPose, AnalemmaStepsFollowArcLength) {
  // Chords of a curved track are shorter than the arc; the arc-length steps
  // themselves are equal.
  const TrackSpec t = dataset_preset("desk_analemma").track;
  const double step = t.length / t.frame_count;
  for (int i = 0; i + 1 < t.frame_count; ++i) {
    double arc = 0.0;
    const int sub = 200;
    for (int k = 0; k < sub; ++k) {
      arc += chord(track_pose_at(t, (i + static_cast<double>(k) / sub) / t.frame_count),
                   track_pose_at(t, (i + static_cast<double>(k + 1) / sub) / t.frame_count));
    }
    EXPECT_NEAR(arc / step, 1.0, 1e-3) << i;
  }
}

TEST(TrackPose, YawFollowsHeadingOnlyWhenAsked) {
  TrackSpec t = dataset_preset("desk").track;
  EXPECT_EQ(track_pose(t, 5).yaw_deg, 0.0);
  t.heading_along_track = true;
  // Circle tangent at angle a is a + 90 degrees.
  EXPECT_NEAR(track_pose(t, 0).yaw_deg, 90.0, 1e-9);
  EXPECT_NEAR(track_pose(t, 16).yaw_deg, 180.0, 1e-9);
}

TEST(TrackPose, RejectsOutOfRangeIndex) {
  const TrackSpec t = dataset_preset("desk").track;
  for (int i : {-1, t.frame_count}) {
    try {
      track_pose(t, i);
      FAIL() << i;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kContract);
    }
  }
}

TEST(RenderFrame, SidewaysStepShiftsByFocalOverDepth) {
  const SceneSpec scene = single_plane(80.0);
  const CameraIntrinsics k = CameraIntrinsics::centered(128, 128, 160.0);
  const double dx = 3.0, dy = -2.0;
  const Image a = render_frame(scene, {}, k);
  const Image b = render_frame(scene, {dx, dy, 0.0, 0.0}, k);
  const PhaseShiftDiagram psd = phase_correlate(hann_windowed(a.grid()), hann_windowed(b.grid()));
  const Peak p = argmax(psd.energy);
  // Image x follows body +x and image y points down (body -y); content moves
  // against the camera.
  EXPECT_NEAR(p.x - psd.center_x(), -160.0 * dx / 80.0, 0.5);
  EXPECT_NEAR(p.y - psd.center_y(), 160.0 * dy / 80.0, 0.5);
}

TEST(RenderFrame, DoublingTheDistanceHalvesTheImage) {
  const SceneSpec scene = single_plane(50.0);
  const CameraIntrinsics k = CameraIntrinsics::centered(256, 256, 200.0);
  const Image near = render_frame(scene, {}, k);
  const Image far = render_frame(scene, {0.0, 0.0, 50.0, 0.0}, k);
  // Pinhole oracle: far(c + d) = near(c + 2d) sampled directly.
  double err = 0.0;
  int n = 0;
  for (int v = 96; v < 160; ++v) {
    for (int u = 96; u < 160; ++u) {
      const double su = k.cx + 2.0 * (u - k.cx), sv = k.cy + 2.0 * (v - k.cy);
      const int iu = static_cast<int>(std::floor(su)), iv = static_cast<int>(std::floor(sv));
      const double fu = su - iu, fv = sv - iv;
      const double ref = (1 - fu) * (1 - fv) * near.at(iu, iv) + fu * (1 - fv) * near.at(iu + 1, iv) +
                         (1 - fu) * fv * near.at(iu, iv + 1) + fu * fv * near.at(iu + 1, iv + 1);
      err += std::abs(far.at(u, v) - ref);
      ++n;
    }
  }
  EXPECT_LT(err / n, 0.05);
  // And the registration reads a zoom of two.
  const PairRegistration r = register_pair(near, far);
  EXPECT_NEAR(std::abs(std::log(r.zoom)), std::log(2.0), 2.0 * std::log(r.zoom_vector.step));
}

TEST(RenderFrame, IsDeterministic) {
  const DatasetSpec spec = dataset_preset("desk");
  const CameraPose pose = track_pose(spec.track, 7);
  const Image a = render_frame(spec.scene, pose, spec.camera);
  const Image b = render_frame(spec.scene, pose, spec.camera);
  ASSERT_EQ(a.width(), b.width());
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  for (double v : a.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(RenderFrame, SeedsGiveDistinctTextures) {
  const CameraIntrinsics k = CameraIntrinsics::centered(64, 64, 64.0);
  const Image a = render_frame(single_plane(50.0), {}, k);
  SceneSpec other = single_plane(50.0);
  other.planes[0].texture_seed = 4;
  const Image b = render_frame(other, {}, k);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) diff += std::abs(a.data()[i] - b.data()[i]);
  EXPECT_GT(diff / a.data().size(), 0.02);
}

TEST(RenderFrame, RayMissingEveryPlaneIsACoverageError) {
  SceneSpec scene = single_plane(50.0);
  scene.planes[0].extent = {-10.0, -10.0, 10.0, 10.0};
  try {
    render_frame(scene, {}, CameraIntrinsics::centered(64, 64, 16.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSceneCoverage);
  }
}

TEST(RenderFrame, PresetTracksStayInsideTheScene) {
  for (const char* preset : {"desk", "desk_analemma", "depth_change"}) {
    DatasetSpec spec = dataset_preset(preset);
    spec.camera = CameraIntrinsics::centered(64, 64, spec.camera.focal / 4.0);
    for (int i = 0; i < spec.track.frame_count; i += 4) {
      EXPECT_NO_THROW(render_frame(spec.scene, track_pose(spec.track, i), spec.camera, 1)) << preset << " " << i;
    }
  }
}

TEST(RenderFrame, DefaultNearPlaneIsInclined) {
  const SceneSpec s = default_scene();
  ASSERT_EQ(s.planes.size(), 3u);
  EXPECT_EQ(s.planes[2].inclination_deg, 6.0);
  EXPECT_LT(s.planes[2].depth, s.planes[1].depth);
  EXPECT_LT(s.planes[1].depth, s.planes[0].depth);
}

TEST(SynthProperty, ParallaxRatioMatchesDepthRatio) {
  // Left half of the view on a near plane, right half on the background; the
  // camera steps along y so the split stays put.
  SceneSpec scene = single_plane(100.0);
  PlaneSpec near;
  near.name = "near";
  near.depth = 60.0;
  near.extent.x1 = 0.0;
  near.texture_seed = 9;
  scene.planes.push_back(near);
  const CameraIntrinsics k = CameraIntrinsics::centered(256, 256, 200.0);
  const double step = 5.0;
  const Image a = render_frame(scene, {0.0, 0.0, 0.0, 0.0}, k);
  const Image b = render_frame(scene, {0.0, step, 0.0, 0.0}, k);
  const PairRegistration r = register_pair(a, b);
  const double far_px = 200.0 * step / 100.0, near_px = 200.0 * step / 60.0;
  const double far_peak = local_peak(r.translation_vector.values, far_px);
  const double near_peak = local_peak(r.translation_vector.values, near_px);
  EXPECT_NEAR((near_peak / far_peak) / (100.0 / 60.0), 1.0, 0.02);
}

TEST(Manifest, RoundTripsThroughText) {
  DatasetSpec spec = dataset_preset("depth_change");
  spec.track.heading_along_track = true;
  spec.scene.planes[1].inclination_deg = 2.5;
  const std::string text = format_manifest(spec);
  const DatasetSpec back = parse_manifest(text);
  EXPECT_EQ(format_manifest(back), text);
  EXPECT_EQ(back.track.kind, TrackKind::kLine);
  EXPECT_EQ(back.scene.planes.size(), 3u);
  EXPECT_EQ(back.scene.planes[1].inclination_deg, 2.5);
}

TEST(Manifest, RejectsBadLines) {
  EXPECT_THROW(parse_manifest("track.frames\n"), Error);
  EXPECT_THROW(parse_manifest("track.frames=abc\n"), Error);
  EXPECT_THROW(parse_manifest("track.kind=spiral\n"), Error);
  EXPECT_THROW(load_manifest("/nonexistent/manifest"), Error);
}

TEST(Overrides, ChangeOnlyWhatIsAsked) {
  const DatasetSpec base = dataset_preset("desk");
  DatasetOverrides o;
  o.width = 128;
  o.height = 128;
  o.frames = 12;
  const DatasetSpec s = apply_overrides(base, o);
  EXPECT_EQ(s.camera.width, 128);
  EXPECT_EQ(s.camera.focal, 100.0);  // same field of view
  EXPECT_EQ(s.track.frame_count, 12);
  EXPECT_EQ(s.track.length, base.track.length);
  EXPECT_EQ(s.scene.planes[0].texture_seed, base.scene.planes[0].texture_seed);

  DatasetOverrides seeded;
  seeded.seed = 7;
  const DatasetSpec r = apply_overrides(base, seeded);
  EXPECT_NE(r.scene.planes[0].texture_seed, r.scene.planes[1].texture_seed);
  EXPECT_NE(r.scene.planes[0].texture_seed, base.scene.planes[0].texture_seed);

  DatasetOverrides line;
  line.track = TrackKind::kLine;
  EXPECT_EQ(apply_overrides(base, line).track.kind, TrackKind::kLine);

  DatasetOverrides odd;
  odd.width = 65;
  EXPECT_THROW(apply_overrides(base, odd), Error);
}

TEST(GenerateDataset, WritesFramesGroundTruthAndManifest) {
  DatasetSpec spec = dataset_preset("desk");
  DatasetOverrides o;
  o.frames = 3;
  o.width = 64;
  o.height = 64;
  spec = apply_overrides(spec, o);
  const auto dir = fresh_dir("specvo_gen_a");
  const DatasetManifest m = generate_dataset(spec, dir);
  ASSERT_EQ(m.frames.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "%06d.png", i);
    EXPECT_TRUE(std::filesystem::exists(dir / "frames" / name));
  }
  std::ifstream gt(m.groundtruth);
  std::string line;
  std::getline(gt, line);
  EXPECT_EQ(line, "frame,x,y,z,yaw");
  int rows = 0;
  while (std::getline(gt, line)) rows += line.empty() ? 0 : 1;
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest"));

  // The saved frame decodes to the rendered one within 8-bit quantisation.
  const Image rendered = render_frame(spec.scene, track_pose(spec.track, 1), spec.camera);
  const Image loaded = load_image(m.frames[1]);
  for (std::size_t i = 0; i < rendered.data().size(); ++i) {
    EXPECT_NEAR(loaded.data()[i], rendered.data()[i], 0.5 / 255 + 1e-9);
  }

  // Regenerating from the manifest reproduces every byte.
  const auto dir2 = fresh_dir("specvo_gen_b");
  generate_dataset(load_manifest(m.manifest), dir2);
  for (const auto& f : {std::filesystem::path("frames/000000.png"), std::filesystem::path("frames/000002.png"),
                        std::filesystem::path("groundtruth.csv"), std::filesystem::path("manifest")}) {
    EXPECT_EQ(slurp(dir / f), slurp(dir2 / f)) << f;
  }
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST(GenerateDataset, UnwritableTargetIsAnIoError) {
  const auto file = fresh_dir("specvo_gen_blocker");
  std::ofstream(file) << "x";
  DatasetSpec spec = dataset_preset("desk");
  spec.track.frame_count = 3;
  try {
    generate_dataset(spec, file / "sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  std::filesystem::remove_all(file);
}
