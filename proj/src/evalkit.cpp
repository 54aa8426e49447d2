#include "specvo/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace specvo {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

std::unordered_map<int, const TrajectoryEntry*> index_by_frame(const Trajectory& t) {
  std::unordered_map<int, const TrajectoryEntry*> m;
  for (const auto& e : t.entries) m[e.frame] = &e;
  return m;
}

const TrajectoryEntry& lookup(const std::unordered_map<int, const TrajectoryEntry*>& m, int frame) {
  const auto it = m.find(frame);
  if (it == m.end()) {
    throw Error(ErrorCode::kAssociation, "frame " + std::to_string(frame) + " has no ground-truth pose");
  }
  return *it->second;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "frame,x,y,log_zoom,yaw\n";
  for (const auto& e : traj.entries) {
    out << e.frame << "," << fmt("%.12g", e.pose.x) << "," << fmt("%.12g", e.pose.y) << ","
        << fmt("%.12g", e.pose.log_zoom) << "," << fmt("%.12g", e.pose.yaw) << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void write_run_manifest(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << traj.meta;
  int flagged = 0;
  for (const auto& e : traj.entries) flagged += e.flagged ? 1 : 0;
  out << "poses = " << traj.entries.size() << "\n";
  out << "flagged_poses = " << flagged << "\n";
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, path.string() + ": empty file");
  const std::vector<std::string> header = split_csv(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cf = column("frame"), cx = column("x"), cy = column("y"), cyaw = column("yaw");
  const int cz = column("log_zoom");
  if (cf < 0 || cx < 0 || cy < 0 || cyaw < 0) {
    throw Error(ErrorCode::kParse, path.string() + ": header must contain frame,x,y,...,yaw");
  }
  Trajectory t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv(line);
    try {
      TrajectoryEntry e;
      e.frame = std::stoi(cells.at(cf));
      e.pose.x = std::stod(cells.at(cx));
      e.pose.y = std::stod(cells.at(cy));
      e.pose.yaw = std::stod(cells.at(cyaw));
      if (cz >= 0) e.pose.log_zoom = std::stod(cells.at(cz));
      if (!t.entries.empty() && e.frame <= t.entries.back().frame) {
        throw Error(ErrorCode::kParse, "frame indices must increase");
      }
      t.entries.push_back(e);
    } catch (const Error& err) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(lineno) + ": " + err.what());
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return t;
}

double path_length(const Trajectory& traj) {
  double len = 0.0;
  for (std::size_t i = 1; i < traj.entries.size(); ++i) {
    len += std::hypot(traj.entries[i].pose.x - traj.entries[i - 1].pose.x,
                      traj.entries[i].pose.y - traj.entries[i - 1].pose.y);
  }
  return len;
}

Trajectory align_and_scale(const Trajectory& traj, const Trajectory& gt) {
  Require(traj.entries.size() >= 2, ErrorCode::kDegenerateTrajectory,
          "align_and_scale: trajectory needs at least 2 poses");
  Require(gt.entries.size() >= 2, ErrorCode::kDegenerateTrajectory,
          "align_and_scale: ground truth needs at least 2 poses");
  const double l_traj = path_length(traj);
  const double l_gt = path_length(gt);
  Require(l_traj > 0.0 && std::isfinite(l_traj), ErrorCode::kDegenerateTrajectory,
          "align_and_scale: trajectory has zero length");
  const auto gt_index = index_by_frame(gt);

  const Pose origin = traj.entries.front().pose;
  const Pose& anchor = lookup(gt_index, traj.entries.front().frame).pose;
  double scale = l_gt / l_traj;
  if (traj.entries.size() < gt.entries.size()) {
    scale *= static_cast<double>(traj.entries.size()) / static_cast<double>(gt.entries.size());
  }

  Trajectory out = traj;
  for (auto& e : out.entries) {
    e.pose.x = anchor.x + scale * (e.pose.x - origin.x);
    e.pose.y = anchor.y + scale * (e.pose.y - origin.y);
  }
  double mx = 0.0, my = 0.0;
  for (const auto& e : out.entries) {
    const Pose& g = lookup(gt_index, e.frame).pose;
    mx += g.x - e.pose.x;
    my += g.y - e.pose.y;
  }
  mx /= static_cast<double>(out.entries.size());
  my /= static_cast<double>(out.entries.size());
  for (auto& e : out.entries) {
    e.pose.x += mx;
    e.pose.y += my;
  }
  return out;
}

AteReport ate(const Trajectory& traj_aligned, const Trajectory& gt) {
  Require(!traj_aligned.entries.empty(), ErrorCode::kAssociation, "ate: empty trajectory");
  const auto gt_index = index_by_frame(gt);
  AteReport r;
  r.n = static_cast<int>(traj_aligned.entries.size());
  r.per_pose_errors.reserve(traj_aligned.entries.size());
  double sum = 0.0;
  for (const auto& e : traj_aligned.entries) {
    const Pose& g = lookup(gt_index, e.frame).pose;
    const double d = std::hypot(e.pose.x - g.x, e.pose.y - g.y);
    r.per_pose_errors.push_back(d);
    sum += d;
    r.max = std::max(r.max, d);
  }
  r.mean = sum / r.n;
  std::vector<double> sorted = r.per_pose_errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  r.median = sorted.size() % 2 == 1 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return r;
}

void write_report_csv(const AteReport& report, double gt_length, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "metric,value\n";
  out << "max," << fmt("%.12g", report.max) << "\n";
  out << "mean," << fmt("%.12g", report.mean) << "\n";
  out << "median," << fmt("%.12g", report.median) << "\n";
  out << "n," << report.n << "\n";
  out << "path_length," << fmt("%.12g", gt_length) << "\n";
  const double pct = gt_length > 0.0 ? 100.0 * report.mean / gt_length : 0.0;
  out << "mean_percent," << fmt("%.12g", pct) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void write_pose_errors_csv(const Trajectory& traj_aligned, const AteReport& report,
                           const std::filesystem::path& path) {
  Require(traj_aligned.entries.size() == report.per_pose_errors.size(), ErrorCode::kContract,
          "write_pose_errors_csv: report does not belong to this trajectory");
  std::ofstream out = open_out(path);
  out << "frame,error\n";
  for (std::size_t i = 0; i < report.per_pose_errors.size(); ++i) {
    out << traj_aligned.entries[i].frame << "," << fmt("%.12g", report.per_pose_errors[i]) << "\n";
  }
}

std::string render_svg(const std::vector<NamedTrajectory>& tracks) {
  Require(!tracks.empty(), ErrorCode::kContract, "render_svg: no trajectories");
  static const char* kColors[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c",
                                  "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  constexpr double kWidth = 800.0, kHeight = 600.0, kMargin = 40.0, kLegend = 160.0;

  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& t : tracks) {
    for (const auto& e : t.traj.entries) {
      x0 = std::min(x0, e.pose.x);
      x1 = std::max(x1, e.pose.x);
      y0 = std::min(y0, e.pose.y);
      y1 = std::max(y1, e.pose.y);
    }
  }
  if (!std::isfinite(x0)) x0 = y0 = 0.0, x1 = y1 = 1.0;
  const double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double plot_w = kWidth - kLegend - 2.0 * kMargin;
  const double plot_h = kHeight - 2.0 * kMargin;
  const double scale = std::min(plot_w, plot_h) / span;
  auto px = [&](double x) { return kMargin + (x - x0) * scale; };
  auto py = [&](double y) { return kHeight - kMargin - (y - y0) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& e : tracks[i].traj.entries) {
      svg << (first ? "" : " ") << fmt("%.3f", px(e.pose.x)) << "," << fmt("%.3f", py(e.pose.y));
      first = false;
    }
    svg << "\"/>\n";
  }
  svg << "<g font-family=\"sans-serif\" font-size=\"14\">\n";
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    const double ly = kMargin + 22.0 * static_cast<double>(i);
    const double lx = kWidth - kLegend;
    svg << "<line x1=\"" << fmt("%.1f", lx) << "\" y1=\"" << fmt("%.1f", ly) << "\" x2=\""
        << fmt("%.1f", lx + 24.0) << "\" y2=\"" << fmt("%.1f", ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"3\"/>\n";
    std::string name;
    for (char ch : tracks[i].name) {
      if (ch == '<') name += "&lt;";
      else if (ch == '>') name += "&gt;";
      else if (ch == '&') name += "&amp;";
      else name += ch;
    }
    svg << "<text x=\"" << fmt("%.1f", lx + 30.0) << "\" y=\"" << fmt("%.1f", ly + 5.0) << "\">" << name
        << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit_plots(const std::vector<NamedTrajectory>& tracks, const std::filesystem::path& out) {
  const std::string svg = render_svg(tracks);
  std::ofstream f = open_out(out);
  f << svg;
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + out.string());
}

}  // namespace specvo
