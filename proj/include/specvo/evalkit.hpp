#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "specvo/pipeline.hpp"

namespace specvo {

// frame,x,y,log_zoom,yaw
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
// The config snapshot of a run, one key = value per line.
void write_run_manifest(const Trajectory& traj, const std::filesystem::path& path);

// Reads either a trajectory (frame,x,y,log_zoom,yaw) or a ground-truth file
// (frame,x,y,z,yaw). Ground-truth z is dropped: evaluation is planar.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Polyline length of the XY track.
double path_length(const Trajectory& traj);

// Moves pose 0 onto its ground-truth pose, scales about it by the ratio of
// path lengths (times n_traj / n_gt when the trajectory is sparser than the
// ground truth), then shifts by the mean residual. Poses are associated by
// frame index.
Trajectory align_and_scale(const Trajectory& traj, const Trajectory& gt);

struct AteReport {
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  int n = 0;
  std::vector<double> per_pose_errors;
};

// Per-pose XY distance between associated poses. Throws Error(kAssociation)
// when a trajectory frame has no ground-truth counterpart.
AteReport ate(const Trajectory& traj_aligned, const Trajectory& gt);

// metric,value rows (max, mean, median, n, path_length, mean_percent).
void write_report_csv(const AteReport& report, double gt_length, const std::filesystem::path& path);
// frame,error rows.
void write_pose_errors_csv(const Trajectory& traj_aligned, const AteReport& report,
                           const std::filesystem::path& path);

struct NamedTrajectory {
  std::string name;
  Trajectory traj;
};

// SVG overlay of XY tracks with a legend; y grows upwards.
std::string render_svg(const std::vector<NamedTrajectory>& tracks);
void emit_plots(const std::vector<NamedTrajectory>& tracks, const std::filesystem::path& out);

}  // namespace specvo
