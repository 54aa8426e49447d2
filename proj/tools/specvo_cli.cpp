#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include "specvo/specvo.h"

namespace fs = std::filesystem;

namespace {

int report(specvo_status st, const std::string& what) {
  if (st == SPECVO_OK) return 0;
  std::fprintf(stderr, "specvo: %s failed (%s): %s\n", what.c_str(), specvo_status_name(st),
               specvo_last_error());
  return static_cast<int>(st);
}

// Owns a C handle for the lifetime of a command.
struct Trajectory {
  specvo_trajectory* h = nullptr;
  Trajectory() = default;
  Trajectory(const Trajectory&) = delete;
  Trajectory(Trajectory&& o) noexcept : h(o.h) { o.h = nullptr; }
  ~Trajectory() { specvo_trajectory_destroy(h); }
};

struct Config {
  specvo_config* h = nullptr;
  ~Config() { specvo_config_destroy(h); }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral visual odometry: dataset generation, odometry, evaluation and plots"};
  app.require_subcommand(1);

  // generate
  std::string scene, track, res, gen_out;
  int frames = 0;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("generate", "Render a synthetic multi-depth dataset");
  gen->add_option("--scene", scene, "Preset (desk, desk_analemma, depth_change, full, full_analemma) or manifest file")
      ->required();
  gen->add_option("--track", track, "Track kind")->check(CLI::IsMember({"circle", "analemma", "line"}));
  gen->add_option("--frames", frames, "Frame count (default: from the scene)")->check(CLI::Range(3, 100000));
  gen->add_option("--res", res, "Resolution WxH (default: from the scene)");
  auto* seed_opt = gen->add_option("--seed", seed, "Texture seed (default: the scene's seeds)");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // run
  std::string frames_dir, mode = "oefmt", config_path, run_out;
  bool strict = false;
  auto* run = app.add_subcommand("run", "Estimate a trajectory from a frame directory");
  run->add_option("--frames", frames_dir, "Frame directory, or a dataset directory containing frames/")
      ->required();
  run->add_option("--mode", mode, "Estimator")->check(CLI::IsMember({"fmt", "efmt", "oefmt"}));
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--out", run_out, "Trajectory CSV; the run manifest goes next to it")->required();
  run->add_flag("--strict", strict, "Abort on the first failing frame");

  // eval
  std::string eval_traj, eval_gt, eval_out, eval_errors;
  auto* ev = app.add_subcommand("eval", "Align a trajectory to ground truth and report the ATE");
  ev->add_option("--traj", eval_traj, "Trajectory CSV")->required();
  ev->add_option("--gt", eval_gt, "Ground-truth CSV")->required();
  ev->add_option("--out", eval_out, "Report CSV")->required();
  ev->add_option("--errors", eval_errors, "Optional per-pose error CSV");

  // plot
  std::string plot_traj, plot_gt, plot_out;
  auto* pl = app.add_subcommand("plot", "Overlay trajectories as SVG");
  pl->add_option("--traj", plot_traj, "Comma-separated trajectory CSVs")->required();
  pl->add_option("--gt", plot_gt, "Ground-truth CSV");
  pl->add_option("--out", plot_out, "SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    int w = 0, h = 0;
    if (!res.empty()) {
      std::smatch m;
      if (!std::regex_match(res, m, std::regex(R"((\d+)x(\d+))"))) {
        std::fprintf(stderr, "specvo: --res expects WxH, got '%s'\n", res.c_str());
        return SPECVO_ERR_INVALID_ARGUMENT;
      }
      w = std::stoi(m[1]);
      h = std::stoi(m[2]);
    }
    const specvo_status st = specvo_generate(scene.c_str(), track.empty() ? nullptr : track.c_str(), frames,
                                             w, h, seed_opt->count() > 0, seed, gen_out.c_str());
    if (st == SPECVO_OK) std::printf("wrote dataset to %s\n", gen_out.c_str());
    return report(st, "generate");
  }

  if (*run) {
    Config cfg;
    if (int rc = report(specvo_config_create(&cfg.h), "config")) return rc;
    if (!config_path.empty()) {
      if (int rc = report(specvo_config_load(cfg.h, config_path.c_str()), "config")) return rc;
    }
    // Command-line flags win over the file.
    if (run->count("--mode") > 0 || config_path.empty()) {
      if (int rc = report(specvo_config_set(cfg.h, "mode", mode.c_str()), "config")) return rc;
    }
    if (strict) {
      if (int rc = report(specvo_config_set(cfg.h, "strict", "true"), "config")) return rc;
    }
    fs::path dir = frames_dir;
    if (fs::is_directory(dir / "frames")) dir /= "frames";
    Trajectory t;
    if (int rc = report(specvo_run(dir.string().c_str(), cfg.h, &t.h), "run")) return rc;
    const std::string manifest = run_out + ".manifest";
    if (int rc = report(specvo_trajectory_save(t.h, run_out.c_str(), manifest.c_str()), "run")) return rc;
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < specvo_trajectory_size(t.h); ++i) {
      specvo_pose p;
      specvo_trajectory_pose(t.h, i, &p);
      flagged += p.flagged ? 1 : 0;
    }
    std::printf("%zu poses (%zu flagged) -> %s\n", specvo_trajectory_size(t.h), flagged, run_out.c_str());
    return 0;
  }

  if (*ev) {
    Trajectory t, g;
    if (int rc = report(specvo_trajectory_load(eval_traj.c_str(), &t.h), "eval")) return rc;
    if (int rc = report(specvo_trajectory_load(eval_gt.c_str(), &g.h), "eval")) return rc;
    specvo_ate_report r;
    const char* errors = eval_errors.empty() ? nullptr : eval_errors.c_str();
    if (int rc = report(specvo_evaluate(t.h, g.h, &r, nullptr, errors), "eval")) return rc;
    if (int rc = report(specvo_write_report(&r, eval_out.c_str()), "eval")) return rc;
    std::printf("ATE max %.6g  mean %.6g  median %.6g  (n=%d, %.3f%% of path length)\n", r.max, r.mean,
                r.median, r.n, r.gt_length > 0 ? 100.0 * r.mean / r.gt_length : 0.0);
    return 0;
  }

  if (*pl) {
    std::vector<Trajectory> trajs;
    std::vector<std::string> names;
    for (const std::string& path : split_list(plot_traj)) {
      Trajectory t;
      if (int rc = report(specvo_trajectory_load(path.c_str(), &t.h), "plot")) return rc;
      trajs.push_back(std::move(t));
      names.push_back(fs::path(path).stem().string());
    }
    Trajectory g;
    if (!plot_gt.empty()) {
      if (int rc = report(specvo_trajectory_load(plot_gt.c_str(), &g.h), "plot")) return rc;
    }
    std::vector<const specvo_trajectory*> handles;
    std::vector<const char*> cnames;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      handles.push_back(trajs[i].h);
      cnames.push_back(names[i].c_str());
    }
    if (int rc = report(specvo_plot(handles.data(), cnames.data(), handles.size(), g.h, plot_out.c_str()), "plot"))
      return rc;
    std::printf("wrote %s\n", plot_out.c_str());
    return 0;
  }
  return 0;
}
