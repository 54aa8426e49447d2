#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specvo/image.hpp"

namespace specvo {

// Axis-aligned rectangle in world XY (metres).
struct Rect {
  double x0 = -std::numeric_limits<double>::infinity();
  double y0 = -std::numeric_limits<double>::infinity();
  double x1 = std::numeric_limits<double>::infinity();
  double y1 = std::numeric_limits<double>::infinity();

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool bounded() const;
};

struct PlaneSpec {
  std::string name;
  // Depth below the z = 0 reference plane at the centre of the extent (metres).
  double depth = 100.0;
  Rect extent;
  // Tilt about the world X axis through the extent centre (degrees).
  double inclination_deg = 0.0;
  std::uint64_t texture_seed = 1;
  double noise_cell = 2.0;   // finest value-noise cell (metres)
  double block_size = 12.0;  // block grid pitch (metres)
  double brightness = 0.5;
  double contrast = 0.6;
};

struct SceneSpec {
  std::vector<PlaneSpec> planes;
};

enum class TrackKind { kCircle, kAnalemma, kLine };

struct TrackSpec {
  TrackKind kind = TrackKind::kCircle;
  double length = 320.0;  // metres, full track
  int frame_count = 64;
  double camera_height = 0.0;  // camera z above the reference plane
  double center_x = 0.0;       // circle / analemma centre, line start
  double center_y = 0.0;
  double direction_deg = 0.0;  // line heading
  bool heading_along_track = false;
};

struct CameraIntrinsics {
  double focal = 200.0;  // pixels
  double cx = 127.5;
  double cy = 127.5;
  int width = 256;
  int height = 256;

  // Principal point at the pixel-grid centre.
  static CameraIntrinsics centered(int width, int height, double focal);
};

// World pose of the down-looking camera. yaw rotates the body x axis from
// world +X towards +Y (degrees).
struct CameraPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw_deg = 0.0;
};

// Pose at arc-length fraction u in [0, 1] of a closed or open track.
CameraPose track_pose_at(const TrackSpec& track, double u);
// Pose of frame i, 0 <= i < frame_count; constant speed along the track.
CameraPose track_pose(const TrackSpec& track, int i);

// Pinhole render: image x is body +x, image y (down) is body -y. Every ray
// must hit a plane, otherwise Error(kSceneCoverage).
Image render_frame(const SceneSpec& scene, const CameraPose& pose, const CameraIntrinsics& k,
                   int supersample = 2);

// Procedural texture of a plane at in-plane coordinates (metres), in [0,1].
double plane_texture(const PlaneSpec& plane, double u, double v);

struct DatasetSpec {
  SceneSpec scene;
  TrackSpec track;
  CameraIntrinsics camera;
  std::string preset;
};

// Built-in presets: "desk" (circle), "desk_analemma", "depth_change" (straight
// line crossing onto the near plane), "full" (circle at 512x512, 200 frames),
// "full_analemma" (300 frames).
DatasetSpec dataset_preset(const std::string& name);
SceneSpec default_scene();

const char* track_kind_name(TrackKind kind);
TrackKind parse_track_kind(const std::string& name);

// Command-line style changes to a dataset. A different track kind takes the
// desk geometry of that kind; a new resolution keeps the field of view; a seed
// reseeds every plane texture.
struct DatasetOverrides {
  std::optional<TrackKind> track;
  int frames = 0;
  int width = 0;
  int height = 0;
  std::optional<std::uint64_t> seed;
};
DatasetSpec apply_overrides(DatasetSpec spec, const DatasetOverrides& overrides);

// Key-value manifest text round trip.
std::string format_manifest(const DatasetSpec& spec);
DatasetSpec parse_manifest(const std::string& text);
DatasetSpec load_manifest(const std::filesystem::path& path);

struct DatasetManifest {
  DatasetSpec spec;
  std::filesystem::path root;
  std::vector<std::filesystem::path> frames;
  std::filesystem::path groundtruth;
  std::filesystem::path manifest;
};

// Writes frames/%06d.png, groundtruth.csv (frame,x,y,z,yaw) and manifest.
DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

}  // namespace specvo
