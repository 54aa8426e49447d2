#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specvo/image.hpp"
#include "specvo/registration.hpp"
#include "specvo/triplet.hpp"

namespace specvo {

enum class Mode { kFmt, kEfmt, kOefmt };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct PipelineConfig {
  Mode mode = Mode::kOefmt;
  // Abort on the first failing frame instead of carrying the motion forward.
  bool strict = false;
  RegistrationOptions registration;
  double sigma_g = 1.0;
  double bound_translation = 3.0;
  double bound_scale = 3.0;
  OptimizerOptions optimizer;
  // Translation peaks closer than this to the origin (pixels) count as no
  // motion: the pose does not advance and the length chain is left alone.
  double static_threshold = 1.0;
  // A triplet whose loop can only close by moving some measurement further
  // than this many sigmas holds an outlier; its measurements are kept as they
  // are. Zero disables the check.
  double triplet_gate = 3.0;
};

// key = value lines; '#' starts a comment. Unknown keys are a parse error.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
std::string format_config(const PipelineConfig& config);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double log_zoom = 0.0;
  double yaw = 0.0;  // degrees, [0, 360)
};

// yaw += theta; (x, y) += rho * u(prev.yaw + phi); log_zoom += ln(s).
Pose accumulate_pose(const Pose& prev, double theta_deg, double phi_deg, double rho, double s);

struct TrajectoryEntry {
  int frame = 0;
  Pose pose;
  // Set when registration or matching failed and the previous motion was
  // carried forward.
  bool flagged = false;
  // Length actually advanced to reach this pose (0 for the first pose and for
  // static edges).
  double step = 0.0;
};

struct TripletLog {
  int frame = 0;  // index of the newest frame of the triplet
  std::array<double, 3> residual_before{};
  std::array<double, 3> residual_after{};
  bool converged = false;
  int iterations = 0;
  // Largest measurement move in sigmas, and whether the gate threw it out.
  double max_move_sigma = 0.0;
  bool rejected = false;
};

struct Trajectory {
  std::vector<TrajectoryEntry> entries;
  std::vector<TripletLog> triplets;
  // Config snapshot of the run that produced it.
  std::string meta;

  std::size_t size() const { return entries.size(); }
};

using FrameLoader = std::function<Image(int index)>;

// Streams frame_count frames through the loader; at most three are held at a
// time. Throws PipelineError in strict mode.
Trajectory process_sequence(int frame_count, const FrameLoader& loader, const PipelineConfig& config);
Trajectory process_sequence(std::span<const Image> frames, const PipelineConfig& config);

class PipelineError : public Error {
 public:
  PipelineError(ErrorCode code, int frame, const std::string& what)
      : Error(code, "frame " + std::to_string(frame) + ": " + what), frame_(frame) {}
  int frame() const noexcept { return frame_; }

 private:
  int frame_;
};

// PNG and PGM files of a directory in lexicographic order.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace specvo
