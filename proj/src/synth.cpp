#include "specvo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "specvo/error.hpp"

namespace specvo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform [0,1) lattice value.
double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(ix));
  h = mix64(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = quintic(x - fx);
  const double ty = quintic(y - fy);
  const double v00 = lattice(ix, iy, seed);
  const double v10 = lattice(ix + 1, iy, seed);
  const double v01 = lattice(ix, iy + 1, seed);
  const double v11 = lattice(ix + 1, iy + 1, seed);
  const double top = v00 + (v10 - v00) * tx;
  const double bottom = v01 + (v11 - v01) * tx;
  return top + (bottom - top) * ty;
}

struct PlaneGeometry {
  const PlaneSpec* spec;
  double px, py, pz;  // point on the plane
  double nx, ny, nz;  // unit normal
  double cos_incl;
};

PlaneGeometry plane_geometry(const PlaneSpec& p) {
  const double xc = p.extent.bounded() ? 0.5 * (p.extent.x0 + p.extent.x1) : 0.0;
  const double yc = p.extent.bounded() ? 0.5 * (p.extent.y0 + p.extent.y1) : 0.0;
  const double a = p.inclination_deg * kDegToRad;
  return {&p, xc, yc, -p.depth, 0.0, -std::sin(a), std::cos(a), std::cos(a)};
}

double wrap360(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

// Unit-parameter Gerono lemniscate, arc-length tabulated.
struct Lemniscate {
  static constexpr int kSamples = 20000;
  std::vector<double> t;
  std::vector<double> s;

  Lemniscate() : t(kSamples + 1), s(kSamples + 1, 0.0) {
    for (int i = 0; i <= kSamples; ++i) {
      t[i] = 2.0 * kPi * i / kSamples;
      if (i == 0) continue;
      // Trapezoid on the speed |r'(t)|.
      auto speed = [](double tt) {
        const double dx = std::cos(tt);
        const double dy = std::cos(2.0 * tt);
        return std::hypot(dx, dy);
      };
      s[i] = s[i - 1] + 0.5 * (speed(t[i - 1]) + speed(t[i])) * (t[i] - t[i - 1]);
    }
  }

  double total() const { return s.back(); }

  double param_at_length(double len) const {
    len = std::clamp(len, 0.0, total());
    const auto it = std::lower_bound(s.begin(), s.end(), len);
    if (it == s.begin()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(it - s.begin());
    const double f = (len - s[i - 1]) / (s[i] - s[i - 1]);
    return t[i - 1] + f * (t[i] - t[i - 1]);
  }
};

const Lemniscate& lemniscate() {
  static const Lemniscate table;
  return table;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "manifest key '" + key + "': not a number: '" + v + "'");
  }
}

}  // namespace

const char* track_kind_name(TrackKind k) {
  switch (k) {
    case TrackKind::kCircle: return "circle";
    case TrackKind::kAnalemma: return "analemma";
    case TrackKind::kLine: return "line";
  }
  return "circle";
}

TrackKind parse_track_kind(const std::string& s) {
  if (s == "circle") return TrackKind::kCircle;
  if (s == "analemma") return TrackKind::kAnalemma;
  if (s == "line") return TrackKind::kLine;
  throw Error(ErrorCode::kParse, "unknown track kind '" + s + "'");
}

bool Rect::bounded() const {
  return std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1);
}

CameraIntrinsics CameraIntrinsics::centered(int width, int height, double focal) {
  return {focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height};
}

double plane_texture(const PlaneSpec& plane, double u, double v) {
  static constexpr double kOctaveAmp[] = {1.0, 0.8, 0.65, 0.5};
  double acc = 0.0;
  double amp_sum = 0.0;
  double cell = plane.noise_cell * 8.0;
  for (int o = 0; o < 4; ++o) {
    acc += kOctaveAmp[o] * value_noise(u / cell, v / cell, plane.texture_seed * 131 + o);
    amp_sum += kOctaveAmp[o];
    cell *= 0.5;
  }
  const double fbm = acc / amp_sum;
  const auto bx = static_cast<std::int64_t>(std::floor(u / plane.block_size));
  const auto by = static_cast<std::int64_t>(std::floor(v / plane.block_size));
  const double block = 0.25 * (lattice(bx, by, ~plane.texture_seed) - 0.5);
  return std::clamp(plane.brightness + 2.0 * plane.contrast * (fbm - 0.5) + block, 0.0, 1.0);
}

CameraPose track_pose_at(const TrackSpec& track, double u) {
  CameraPose p;
  p.z = track.camera_height;
  double tangent = 0.0;
  switch (track.kind) {
    case TrackKind::kCircle: {
      const double radius = track.length / (2.0 * kPi);
      const double a = 2.0 * kPi * u;
      p.x = track.center_x + radius * std::cos(a);
      p.y = track.center_y + radius * std::sin(a);
      tangent = a / kDegToRad + 90.0;
      break;
    }
    case TrackKind::kAnalemma: {
      const Lemniscate& lem = lemniscate();
      const double scale = track.length / lem.total();
      const double t = lem.param_at_length(u * lem.total());
      p.x = track.center_x + scale * std::sin(t);
      p.y = track.center_y + scale * std::sin(t) * std::cos(t);
      tangent = std::atan2(std::cos(2.0 * t), std::cos(t)) / kDegToRad;
      break;
    }
    case TrackKind::kLine: {
      const double a = track.direction_deg * kDegToRad;
      p.x = track.center_x + u * track.length * std::cos(a);
      p.y = track.center_y + u * track.length * std::sin(a);
      tangent = track.direction_deg;
      break;
    }
  }
  p.yaw_deg = track.heading_along_track ? wrap360(tangent) : 0.0;
  return p;
}

CameraPose track_pose(const TrackSpec& track, int i) {
  Require(track.frame_count >= 3, ErrorCode::kContract, "track needs at least 3 frames");
  Require(i >= 0 && i < track.frame_count, ErrorCode::kContract,
          "track_pose: frame " + std::to_string(i) + " outside [0, " +
              std::to_string(track.frame_count) + ")");
  const double u = track.kind == TrackKind::kLine
                       ? static_cast<double>(i) / (track.frame_count - 1)
                       : static_cast<double>(i) / track.frame_count;
  return track_pose_at(track, u);
}

Image render_frame(const SceneSpec& scene, const CameraPose& pose, const CameraIntrinsics& k,
                   int supersample) {
  Require(k.focal > 0.0, ErrorCode::kContract, "render_frame: focal length must be positive");
  Require(supersample >= 1, ErrorCode::kContract, "render_frame: supersample must be >= 1");
  std::vector<PlaneGeometry> planes;
  planes.reserve(scene.planes.size());
  for (const auto& p : scene.planes) planes.push_back(plane_geometry(p));

  const double cy_ = std::cos(pose.yaw_deg * kDegToRad);
  const double sy_ = std::sin(pose.yaw_deg * kDegToRad);
  const double inv_ss = 1.0 / supersample;
  std::vector<double> out(static_cast<std::size_t>(k.width) * k.height);

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      double acc = 0.0;
      for (int sv = 0; sv < supersample; ++sv) {
        for (int su = 0; su < supersample; ++su) {
          const double pu = u + (su + 0.5) * inv_ss - 0.5;
          const double pv = v + (sv + 0.5) * inv_ss - 0.5;
          const double bx = (pu - k.cx) / k.focal;
          const double by = -(pv - k.cy) / k.focal;
          const double dx = cy_ * bx - sy_ * by;
          const double dy = sy_ * bx + cy_ * by;
          constexpr double dz = -1.0;

          double best_t = std::numeric_limits<double>::infinity();
          const PlaneGeometry* hit = nullptr;
          double hx = 0.0, hy = 0.0;
          for (const auto& g : planes) {
            const double denom = g.nx * dx + g.ny * dy + g.nz * dz;
            if (std::abs(denom) < 1e-12) continue;
            const double t =
                (g.nx * (g.px - pose.x) + g.ny * (g.py - pose.y) + g.nz * (g.pz - pose.z)) / denom;
            if (!(t > 0.0) || t >= best_t) continue;
            const double x = pose.x + t * dx;
            const double y = pose.y + t * dy;
            if (!g.spec->extent.contains(x, y)) continue;
            best_t = t;
            hit = &g;
            hx = x;
            hy = y;
          }
          if (!hit) {
            throw Error(ErrorCode::kSceneCoverage,
                        "render_frame: ray through pixel (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") misses every plane");
          }
          acc += plane_texture(*hit->spec, hx - hit->px, (hy - hit->py) / hit->cos_incl);
        }
      }
      out[static_cast<std::size_t>(v) * k.width + u] = acc * inv_ss * inv_ss;
    }
  }
  return Image(k.width, k.height, std::move(out));
}

SceneSpec default_scene() {
  SceneSpec scene;
  PlaneSpec background;
  background.name = "background";
  background.depth = 100.0;
  background.texture_seed = 11;
  background.noise_cell = 1.5;
  background.block_size = 14.0;
  background.brightness = 0.5;
  background.contrast = 0.7;

  PlaneSpec far_plane;
  far_plane.name = "far";
  far_plane.depth = 80.0;
  far_plane.extent = {-140.0, -30.0, -15.0, 130.0};
  far_plane.texture_seed = 23;
  far_plane.noise_cell = 1.2;
  far_plane.block_size = 10.0;
  far_plane.brightness = 0.45;
  far_plane.contrast = 0.75;

  PlaneSpec near_plane;
  near_plane.name = "near";
  near_plane.depth = 60.0;
  near_plane.extent = {15.0, -140.0, 140.0, 10.0};
  near_plane.inclination_deg = 6.0;
  near_plane.texture_seed = 37;
  near_plane.noise_cell = 0.9;
  near_plane.block_size = 8.0;
  near_plane.brightness = 0.55;
  near_plane.contrast = 0.7;

  scene.planes = {background, far_plane, near_plane};
  return scene;
}

DatasetSpec dataset_preset(const std::string& name) {
  DatasetSpec spec;
  spec.preset = name;
  spec.scene = default_scene();
  spec.camera = CameraIntrinsics::centered(256, 256, 200.0);
  if (name == "desk") {
    spec.track = {TrackKind::kCircle, 320.0, 64};
  } else if (name == "desk_analemma") {
    spec.track = {TrackKind::kAnalemma, 480.0, 96};
  } else if (name == "depth_change") {
    spec.track = {TrackKind::kLine, 200.0, 41};
    spec.track.center_x = -60.0;
    spec.track.center_y = -60.0;
  } else if (name == "full") {
    spec.camera = CameraIntrinsics::centered(512, 512, 400.0);
    spec.track = {TrackKind::kCircle, 491.0, 200};
  } else if (name == "full_analemma") {
    spec.camera = CameraIntrinsics::centered(512, 512, 400.0);
    spec.track = {TrackKind::kAnalemma, 880.0, 300};
  } else {
    throw Error(ErrorCode::kParse, "unknown scene preset '" + name + "'");
  }
  return spec;
}

std::string format_manifest(const DatasetSpec& spec) {
  std::ostringstream os;
  os << "preset=" << spec.preset << "\n";
  os << "camera.focal=" << fmt_double(spec.camera.focal) << "\n";
  os << "camera.cx=" << fmt_double(spec.camera.cx) << "\n";
  os << "camera.cy=" << fmt_double(spec.camera.cy) << "\n";
  os << "camera.width=" << spec.camera.width << "\n";
  os << "camera.height=" << spec.camera.height << "\n";
  os << "track.kind=" << track_kind_name(spec.track.kind) << "\n";
  os << "track.length=" << fmt_double(spec.track.length) << "\n";
  os << "track.frames=" << spec.track.frame_count << "\n";
  os << "track.camera_height=" << fmt_double(spec.track.camera_height) << "\n";
  os << "track.center_x=" << fmt_double(spec.track.center_x) << "\n";
  os << "track.center_y=" << fmt_double(spec.track.center_y) << "\n";
  os << "track.direction=" << fmt_double(spec.track.direction_deg) << "\n";
  os << "track.heading_along_track=" << (spec.track.heading_along_track ? 1 : 0) << "\n";
  os << "planes=" << spec.scene.planes.size() << "\n";
  for (std::size_t i = 0; i < spec.scene.planes.size(); ++i) {
    const PlaneSpec& p = spec.scene.planes[i];
    const std::string k = "plane." + std::to_string(i) + ".";
    os << k << "name=" << p.name << "\n";
    os << k << "depth=" << fmt_double(p.depth) << "\n";
    os << k << "x0=" << fmt_double(p.extent.x0) << "\n";
    os << k << "y0=" << fmt_double(p.extent.y0) << "\n";
    os << k << "x1=" << fmt_double(p.extent.x1) << "\n";
    os << k << "y1=" << fmt_double(p.extent.y1) << "\n";
    os << k << "inclination=" << fmt_double(p.inclination_deg) << "\n";
    os << k << "seed=" << p.texture_seed << "\n";
    os << k << "noise_cell=" << fmt_double(p.noise_cell) << "\n";
    os << k << "block_size=" << fmt_double(p.block_size) << "\n";
    os << k << "brightness=" << fmt_double(p.brightness) << "\n";
    os << k << "contrast=" << fmt_double(p.contrast) << "\n";
  }
  return os.str();
}

DatasetSpec parse_manifest(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kParse, "manifest line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  // Missing keys fall back to the preset (or the desk preset).
  DatasetSpec spec = dataset_preset(kv.count("preset") ? kv["preset"] : "desk");
  auto num = [&](const std::string& key, double& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = parse_double(key, it->second);
  };
  auto integer = [&](const std::string& key, int& dst) {
    double d = dst;
    num(key, d);
    dst = static_cast<int>(d);
  };
  num("camera.focal", spec.camera.focal);
  num("camera.cx", spec.camera.cx);
  num("camera.cy", spec.camera.cy);
  integer("camera.width", spec.camera.width);
  integer("camera.height", spec.camera.height);
  if (auto it = kv.find("track.kind"); it != kv.end()) spec.track.kind = parse_track_kind(it->second);
  num("track.length", spec.track.length);
  integer("track.frames", spec.track.frame_count);
  num("track.camera_height", spec.track.camera_height);
  num("track.center_x", spec.track.center_x);
  num("track.center_y", spec.track.center_y);
  num("track.direction", spec.track.direction_deg);
  if (auto it = kv.find("track.heading_along_track"); it != kv.end()) {
    spec.track.heading_along_track = it->second == "1" || it->second == "true";
  }
  if (auto it = kv.find("planes"); it != kv.end()) {
    const int n = static_cast<int>(parse_double("planes", it->second));
    spec.scene.planes.resize(n);
    for (int i = 0; i < n; ++i) {
      PlaneSpec& p = spec.scene.planes[i];
      const std::string k = "plane." + std::to_string(i) + ".";
      if (auto nit = kv.find(k + "name"); nit != kv.end()) p.name = nit->second;
      num(k + "depth", p.depth);
      num(k + "x0", p.extent.x0);
      num(k + "y0", p.extent.y0);
      num(k + "x1", p.extent.x1);
      num(k + "y1", p.extent.y1);
      num(k + "inclination", p.inclination_deg);
      double seed = static_cast<double>(p.texture_seed);
      num(k + "seed", seed);
      p.texture_seed = static_cast<std::uint64_t>(seed);
      num(k + "noise_cell", p.noise_cell);
      num(k + "block_size", p.block_size);
      num(k + "brightness", p.brightness);
      num(k + "contrast", p.contrast);
    }
  }
  return spec;
}

DatasetSpec load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_manifest(os.str());
}

DatasetSpec apply_overrides(DatasetSpec spec, const DatasetOverrides& o) {
  if (o.track && *o.track != spec.track.kind) {
    // The desk geometries are the ones that stay inside the default scene.
    const char* sibling = *o.track == TrackKind::kCircle     ? "desk"
                          : *o.track == TrackKind::kAnalemma ? "desk_analemma"
                                                             : "depth_change";
    spec.track = dataset_preset(sibling).track;
  }
  if (o.frames > 0) {
    Require(o.frames >= 3, ErrorCode::kContract, "a dataset needs at least 3 frames");
    spec.track.frame_count = o.frames;
  }
  if (o.width > 0 || o.height > 0) {
    const int w = o.width > 0 ? o.width : spec.camera.width;
    const int h = o.height > 0 ? o.height : spec.camera.height;
    Require(w >= 64 && h >= 64 && w % 2 == 0 && h % 2 == 0, ErrorCode::kContract,
            "resolution must be even and at least 64x64");
    // Keep the horizontal field of view.
    spec.camera = CameraIntrinsics::centered(w, h, spec.camera.focal * w / spec.camera.width);
  }
  if (o.seed) {
    for (std::size_t k = 0; k < spec.scene.planes.size(); ++k) {
      spec.scene.planes[k].texture_seed = *o.seed * 1000 + k + 1;
    }
  }
  return spec;
}

DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  Require(spec.track.frame_count >= 3, ErrorCode::kContract, "dataset needs at least 3 frames");
  namespace fs = std::filesystem;
  DatasetManifest m;
  m.spec = spec;
  m.root = out_dir;
  const fs::path frames_dir = out_dir / "frames";
  std::error_code ec;
  fs::create_directories(frames_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + frames_dir.string() + ": " + ec.message());

  m.groundtruth = out_dir / "groundtruth.csv";
  std::ofstream gt(m.groundtruth);
  if (!gt) throw Error(ErrorCode::kIo, "cannot write " + m.groundtruth.string());
  gt << "frame,x,y,z,yaw\n";

  for (int i = 0; i < spec.track.frame_count; ++i) {
    const CameraPose pose = track_pose(spec.track, i);
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i);
    const fs::path frame_path = frames_dir / name;
    save_image(render_frame(spec.scene, pose, spec.camera), frame_path);
    m.frames.push_back(frame_path);
    gt << i << "," << fmt_double(pose.x) << "," << fmt_double(pose.y) << "," << fmt_double(pose.z)
       << "," << fmt_double(pose.yaw_deg) << "\n";
  }
  if (!gt) throw Error(ErrorCode::kIo, "write failed: " + m.groundtruth.string());

  m.manifest = out_dir / "manifest";
  std::ofstream mf(m.manifest);
  mf << format_manifest(spec);
  if (!mf) throw Error(ErrorCode::kIo, "cannot write " + m.manifest.string());
  return m;
}

}  // namespace specvo
