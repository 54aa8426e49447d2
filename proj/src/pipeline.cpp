#include "specvo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "specvo/pattern_matching.hpp"

namespace specvo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double move_sigma(const Measurement& m, double value, bool angle) {
  double d = value - m.value;
  if (angle) d = std::remainder(d, 360.0);
  return m.sigma > 0.0 ? std::abs(d) / m.sigma : (d == 0.0 ? 0.0 : HUGE_VAL);
}

double max_move_sigma(const TripletMeasurements& m, const TripletState& s) {
  return std::max({move_sigma(m.theta12, s.theta12, true), move_sigma(m.phi12, s.phi12, true),
                   move_sigma(m.theta02, s.theta02, true), move_sigma(m.phi02, s.phi02, true),
                   move_sigma(m.lambda_t12, s.lambda_t12, false),
                   move_sigma(m.lambda_t02, s.lambda_t02, false),
                   move_sigma(m.lambda_s12, s.lambda_s12, false),
                   move_sigma(m.lambda_s02, s.lambda_s02, false)});
}

double wrap360(double a) {
  a = std::fmod(a, 360.0);
  if (a < 0.0) a += 360.0;
  return a >= 360.0 ? 0.0 : a;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "config: '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw Error(ErrorCode::kParse, "config: '" + key + "' expects an integer");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::kParse, "config: '" + key + "' expects a boolean, got '" + v + "'");
}

// Camera-frame reading of one registration: rotation and direction of the
// camera's own motion, in degrees with y pointing forward-left of x.
struct Edge {
  double theta = 0.0, sigma_theta = 1.0;
  double phi = 0.0, sigma_phi = 1.0;
  bool is_static = false;
  EnergyVector translation;  // smoothed and normalised
  EnergyVector zoom;         // smoothed and normalised
  double length_px = 0.0;    // single-peak displacement length (fmt)
  double zoom_factor = 1.0;  // single-peak zoom (fmt)
};

// Image content moving by (dx, dy) with y down means the camera moved by
// (-dx, +dy) in its own frame with y up.
double camera_direction(double phi_img_deg) { return wrap360(180.0 - phi_img_deg); }

Edge measure_efmt(const Image& a, const Image& b, const PipelineConfig& cfg) {
  const PairRegistration r = register_pair(a, b, cfg.registration);
  Edge e;
  e.theta = r.theta_deg;
  e.sigma_theta = r.sigma_theta_deg;
  e.phi = camera_direction(r.phi_deg);
  e.sigma_phi = r.sigma_phi_deg;
  const double radius = refined_argmax(r.translation_vector.values) * r.translation_vector.step;
  e.is_static = radius < cfg.static_threshold;
  e.translation = prepare_for_matching(r.translation_vector, cfg.sigma_g);
  e.zoom = prepare_for_matching(r.zoom_vector, cfg.sigma_g);
  e.zoom_factor = r.zoom;
  e.length_px = radius;
  return e;
}

Edge measure_fmt(const Image& a, const Image& b, const PipelineConfig& cfg) {
  const SinglePeakRegistration r = register_pair_single_peak(a, b, cfg.registration);
  Edge e;
  e.theta = r.theta_deg;
  e.length_px = std::hypot(r.dx, r.dy);
  e.phi = camera_direction(std::atan2(r.dy, r.dx) * kRadToDeg);
  e.is_static = e.length_px < cfg.static_threshold;
  e.zoom_factor = r.zoom;
  return e;
}

struct Motion {
  double theta = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  double s = 1.0;
};

class Runner {
 public:
  Runner(const PipelineConfig& cfg) : cfg_(cfg) {}

  Trajectory run(int frame_count, const FrameLoader& loader) {
    Require(frame_count >= 3, ErrorCode::kContract, "process_sequence: need at least 3 frames");
    Trajectory traj;
    traj.meta = format_config(cfg_);
    traj.entries.push_back({0, Pose{}, false, 0.0});

    std::deque<Image> window;
    window.push_back(load(loader, 0));
    for (int i = 1; i < frame_count; ++i) {
      window.push_back(load(loader, i));
      if (window.size() > 3) window.pop_front();
      Require(window.back().width() == window.front().width() &&
                  window.back().height() == window.front().height(),
              ErrorCode::kContract, "process_sequence: frames differ in size");

      bool flagged = false;
      Motion m;
      try {
        m = step(i, window, traj);
      } catch (const Error& e) {
        if (cfg_.strict) throw PipelineError(e.code(), i, e.what());
        flagged = true;
        m = last_;
        prev_edge_.reset();
      }
      last_ = m;
      const Pose pose = accumulate_pose(traj.entries.back().pose, m.theta, m.theta + m.phi, m.rho, m.s);
      traj.entries.push_back({i, pose, flagged, m.rho});
    }
    return traj;
  }

 private:
  Image load(const FrameLoader& loader, int i) {
    try {
      return loader(i);
    } catch (const Error& e) {
      throw PipelineError(e.code(), i, e.what());
    }
  }

  Edge measure(const Image& a, const Image& b) const {
    return cfg_.mode == Mode::kFmt ? measure_fmt(a, b, cfg_) : measure_efmt(a, b, cfg_);
  }

  Motion step(int i, const std::deque<Image>& window, Trajectory& traj) {
    const Image& prev = window[window.size() - 2];
    const Image& cur = window.back();
    Edge e = measure(prev, cur);
    Motion m;
    m.theta = e.theta;
    m.phi = e.phi;

    if (cfg_.mode == Mode::kFmt) {
      if (!zoom_unit_) zoom_unit_ = e.zoom_factor;
      m.s = e.zoom_factor / *zoom_unit_;
      if (e.is_static) {
        m.rho = 0.0;
      } else {
        if (!length_unit_) length_unit_ = e.length_px;
        m.rho = e.length_px / *length_unit_;
      }
      prev_edge_ = std::move(e);
      return m;
    }

    // Zoom chain: consecutive edges, shift converted to the log-radius sense.
    double lambda_s = 0.0, sigma_s = 1.0;
    if (prev_edge_) {
      const MatchResult ms = match_scale(prev_edge_->zoom, e.zoom, cfg_.bound_scale);
      lambda_s = -ms.lambda;
      sigma_s = ms.sigma_lambda;
    }
    const double s_prev = prev_edge_ ? last_.s : 1.0;

    // Length chain against the last edge that moved.
    double lambda_t = 1.0, sigma_t = 1.0;
    if (!e.is_static && ref_) {
      const MatchResult mt = match_translation(ref_->edge.translation, e.translation, cfg_.bound_translation);
      lambda_t = mt.lambda;
      sigma_t = mt.sigma_lambda;
    }

    const bool triplet = cfg_.mode == Mode::kOefmt && window.size() == 3 && prev_edge_ &&
                         !prev_edge_->is_static && !e.is_static && ref_ && ref_->frame == i - 1;
    if (triplet) {
      const Edge e02 = measure(window.front(), cur);
      const MatchResult mt02 =
          match_translation(prev_edge_->translation, e02.translation, cfg_.bound_translation);
      const MatchResult ms02 = match_scale(prev_edge_->zoom, e02.zoom, cfg_.bound_scale);

      TripletProblem prob;
      prob.measured.theta01 = {last_.theta, prev_edge_->sigma_theta};
      prob.measured.phi01 = {last_.phi, prev_edge_->sigma_phi};
      prob.measured.theta12 = {e.theta, e.sigma_theta};
      prob.measured.phi12 = {e.phi, e.sigma_phi};
      prob.measured.theta02 = {e02.theta, e02.sigma_theta};
      prob.measured.phi02 = {e02.phi, e02.sigma_phi};
      prob.measured.lambda_t12 = {lambda_t, sigma_t};
      prob.measured.lambda_t02 = {mt02.lambda, mt02.sigma_lambda};
      prob.measured.lambda_s12 = {lambda_s, sigma_s};
      prob.measured.lambda_s02 = {-ms02.lambda, ms02.sigma_lambda};
      prob.epsilon = e.zoom.step;
      prob.rho01 = ref_->rho;
      prob.s01 = 1.0;

      const TripletEstimate est = optimize_triplet(prob, cfg_.optimizer);
      const double move = max_move_sigma(prob.measured, est.state);
      const bool rejected = cfg_.triplet_gate > 0.0 && move > cfg_.triplet_gate;
      traj.triplets.push_back({i, est.residual_before, est.residual_after, est.converged,
                               est.iterations, move, rejected});
      if (!rejected) {
        m.theta = est.state.theta12;
        m.phi = est.state.phi12;
        lambda_t = est.state.lambda_t12;
        lambda_s = est.state.lambda_s12;
      }
    }

    m.s = s_prev / std::pow(e.zoom.step, lambda_s);
    if (e.is_static) {
      m.rho = 0.0;
    } else {
      const double rho = ref_ ? lambda_t * ref_->rho : 1.0;
      m.rho = rho;
      ref_ = Reference{e, rho, i};
    }
    prev_edge_ = std::move(e);
    return m;
  }

  struct Reference {
    Edge edge;
    double rho = 1.0;
    int frame = 0;
  };

  const PipelineConfig& cfg_;
  Motion last_;
  std::optional<Edge> prev_edge_;
  std::optional<Reference> ref_;
  std::optional<double> length_unit_;
  std::optional<double> zoom_unit_;
};

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kFmt: return "fmt";
    case Mode::kEfmt: return "efmt";
    case Mode::kOefmt: return "oefmt";
  }
  return "oefmt";
}

Mode parse_mode(const std::string& name) {
  if (name == "fmt") return Mode::kFmt;
  if (name == "efmt") return Mode::kEfmt;
  if (name == "oefmt") return Mode::kOefmt;
  throw Error(ErrorCode::kParse, "unknown mode '" + name + "' (expected fmt, efmt or oefmt)");
}

PipelineConfig parse_config(const std::string& text, PipelineConfig c) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    auto& reg = c.registration;
    if (k == "mode") c.mode = parse_mode(v);
    else if (k == "strict") c.strict = to_bool(k, v);
    else if (k == "r" || k == "fusion_radius") reg.fusion_radius = to_int(k, v);
    else if (k == "log_polar_angles") reg.log_polar_angles = to_int(k, v);
    else if (k == "log_polar_scales") reg.log_polar_scales = to_int(k, v);
    else if (k == "translation_angles") reg.translation_angles = to_int(k, v);
    else if (k == "min_direction_radius") reg.min_direction_radius = to_int(k, v);
    else if (k == "window_translation") reg.window_translation = to_bool(k, v);
    else if (k == "dump_dir") reg.dump_dir = v;
    else if (k == "sigma_g") c.sigma_g = to_double(k, v);
    else if (k == "bound") c.bound_translation = c.bound_scale = to_double(k, v);
    else if (k == "bound_translation") c.bound_translation = to_double(k, v);
    else if (k == "bound_scale") c.bound_scale = to_double(k, v);
    else if (k == "max_iter") c.optimizer.max_iter = to_int(k, v);
    else if (k == "tol") c.optimizer.tol = to_double(k, v);
    else if (k == "loop_weight") c.optimizer.loop_weight = to_double(k, v);
    else if (k == "static_threshold") c.static_threshold = to_double(k, v);
    else if (k == "triplet_gate") c.triplet_gate = to_double(k, v);
    else throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": unknown key '" + k + "'");
  }
  Require(c.registration.fusion_radius >= 1, ErrorCode::kParse, "config: r must be >= 1");
  Require(c.sigma_g >= 0.5 && c.sigma_g <= 5.0, ErrorCode::kParse, "config: sigma_g must be in [0.5, 5]");
  Require(c.bound_translation > 1.0 && c.bound_scale > 1.0, ErrorCode::kParse, "config: bounds must be > 1");
  Require(c.optimizer.max_iter >= 1, ErrorCode::kParse, "config: max_iter must be >= 1");
  Require(c.optimizer.loop_weight >= 0.0, ErrorCode::kParse, "config: loop_weight must be >= 0");
  Require(c.triplet_gate >= 0.0, ErrorCode::kParse, "config: triplet_gate must be >= 0");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const PipelineConfig& c) {
  std::string out;
  char buf[128];
  auto num = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", k, v);
    out += buf;
  };
  auto str = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  str("mode", mode_name(c.mode));
  str("strict", c.strict ? "true" : "false");
  num("r", c.registration.fusion_radius);
  num("log_polar_angles", c.registration.log_polar_angles);
  num("log_polar_scales", c.registration.log_polar_scales);
  num("translation_angles", c.registration.translation_angles);
  num("min_direction_radius", c.registration.min_direction_radius);
  str("window_translation", c.registration.window_translation ? "true" : "false");
  if (!c.registration.dump_dir.empty()) str("dump_dir", c.registration.dump_dir.string());
  num("sigma_g", c.sigma_g);
  num("bound_translation", c.bound_translation);
  num("bound_scale", c.bound_scale);
  num("max_iter", c.optimizer.max_iter);
  num("tol", c.optimizer.tol);
  num("loop_weight", c.optimizer.loop_weight);
  num("static_threshold", c.static_threshold);
  num("triplet_gate", c.triplet_gate);
  return out;
}

Pose accumulate_pose(const Pose& prev, double theta_deg, double phi_deg, double rho, double s) {
  Pose p;
  const double dir = (prev.yaw + phi_deg) * kDegToRad;
  p.x = prev.x + rho * std::cos(dir);
  p.y = prev.y + rho * std::sin(dir);
  p.yaw = wrap360(prev.yaw + theta_deg);
  p.log_zoom = prev.log_zoom + std::log(s);
  return p;
}

Trajectory process_sequence(int frame_count, const FrameLoader& loader, const PipelineConfig& config) {
  return Runner(config).run(frame_count, loader);
}

Trajectory process_sequence(std::span<const Image> frames, const PipelineConfig& config) {
  return process_sequence(static_cast<int>(frames.size()),
                          [&](int i) { return frames[static_cast<std::size_t>(i)]; }, config);
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png" || ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specvo
