#include "specvo/specvo.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "specvo/evalkit.hpp"
#include "specvo/pipeline.hpp"
#include "specvo/synth.hpp"

struct specvo_config {
  specvo::PipelineConfig value;
};

struct specvo_trajectory {
  specvo::Trajectory value;
};

namespace {

thread_local std::string g_last_error;

specvo_status fail(specvo_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Runs fn and converts exceptions into status codes.
template <typename Fn>
specvo_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SPECVO_OK;
  } catch (const specvo::Error& e) {
    return fail(static_cast<specvo_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPECVO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPECVO_ERR_INTERNAL, e.what());
  }
}

#define SPECVO_CHECK_ARG(cond, msg) \
  do {                              \
    if (!(cond)) return fail(SPECVO_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

}  // namespace

extern "C" {

const char* specvo_last_error(void) { return g_last_error.c_str(); }

const char* specvo_status_name(specvo_status status) {
  switch (status) {
    case SPECVO_OK: return "ok";
    case SPECVO_ERR_INPUT_DOMAIN: return "input-domain error";
    case SPECVO_ERR_CONTRACT: return "contract error";
    case SPECVO_ERR_DEGENERATE_BLOCK: return "degenerate-block error";
    case SPECVO_ERR_REGISTRATION: return "registration failure";
    case SPECVO_ERR_MATCHING: return "matching failure";
    case SPECVO_ERR_OPTIMIZER: return "optimizer failure";
    case SPECVO_ERR_SCENE_COVERAGE: return "scene-coverage error";
    case SPECVO_ERR_IO: return "i/o error";
    case SPECVO_ERR_DEGENERATE_TRAJECTORY: return "degenerate-trajectory error";
    case SPECVO_ERR_ASSOCIATION: return "association error";
    case SPECVO_ERR_PARSE: return "parse error";
    case SPECVO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPECVO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

specvo_status specvo_generate(const char* scene, const char* track, int frames, int width, int height,
                              int has_seed, uint64_t seed, const char* out_dir) {
  SPECVO_CHECK_ARG(scene && out_dir, "scene and out_dir are required");
  SPECVO_CHECK_ARG(frames >= 0 && width >= 0 && height >= 0, "frames and resolution must not be negative");
  return guarded([&] {
    specvo::DatasetSpec spec;
    if (std::filesystem::is_regular_file(scene)) {
      spec = specvo::load_manifest(scene);
    } else {
      spec = specvo::dataset_preset(scene);
    }
    specvo::DatasetOverrides o;
    if (track) o.track = specvo::parse_track_kind(track);
    o.frames = frames;
    o.width = width;
    o.height = height;
    if (has_seed) o.seed = seed;
    specvo::generate_dataset(specvo::apply_overrides(spec, o), out_dir);
  });
}

specvo_status specvo_config_create(specvo_config** out) {
  SPECVO_CHECK_ARG(out, "out is required");
  return guarded([&] { *out = new specvo_config{}; });
}

void specvo_config_destroy(specvo_config* config) { delete config; }

specvo_status specvo_config_load(specvo_config* config, const char* path) {
  SPECVO_CHECK_ARG(config && path, "config and path are required");
  return guarded([&] { config->value = specvo::load_config(path, config->value); });
}

specvo_status specvo_config_set(specvo_config* config, const char* key, const char* value) {
  SPECVO_CHECK_ARG(config && key && value, "config, key and value are required");
  SPECVO_CHECK_ARG(!std::strchr(key, '\n') && !std::strchr(value, '\n'), "key and value must be single-line");
  return guarded([&] {
    config->value = specvo::parse_config(std::string(key) + " = " + value, config->value);
  });
}

specvo_status specvo_config_format(const specvo_config* config, char* buf, size_t cap, size_t* needed) {
  SPECVO_CHECK_ARG(config, "config is required");
  return guarded([&] {
    const std::string text = specvo::format_config(config->value);
    if (needed) *needed = text.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

specvo_status specvo_run(const char* frames_dir, const specvo_config* config, specvo_trajectory** out) {
  SPECVO_CHECK_ARG(frames_dir && config && out, "frames_dir, config and out are required");
  *out = nullptr;
  return guarded([&] {
    const std::vector<std::filesystem::path> paths = specvo::list_frames(frames_dir);
    auto loader = [&](int i) { return specvo::load_image(paths[static_cast<size_t>(i)]); };
    auto traj = std::make_unique<specvo_trajectory>();
    traj->value = specvo::process_sequence(static_cast<int>(paths.size()), loader, config->value);
    *out = traj.release();
  });
}

specvo_status specvo_trajectory_load(const char* csv_path, specvo_trajectory** out) {
  SPECVO_CHECK_ARG(csv_path && out, "csv_path and out are required");
  *out = nullptr;
  return guarded([&] {
    auto traj = std::make_unique<specvo_trajectory>();
    traj->value = specvo::read_trajectory_csv(csv_path);
    *out = traj.release();
  });
}

specvo_status specvo_trajectory_save(const specvo_trajectory* traj, const char* csv_path,
                                     const char* manifest_path) {
  SPECVO_CHECK_ARG(traj && csv_path, "traj and csv_path are required");
  return guarded([&] {
    specvo::write_trajectory_csv(traj->value, csv_path);
    if (manifest_path) specvo::write_run_manifest(traj->value, manifest_path);
  });
}

size_t specvo_trajectory_size(const specvo_trajectory* traj) { return traj ? traj->value.size() : 0; }

specvo_status specvo_trajectory_pose(const specvo_trajectory* traj, size_t index, specvo_pose* out) {
  SPECVO_CHECK_ARG(traj && out, "traj and out are required");
  SPECVO_CHECK_ARG(index < traj->value.size(), "pose index out of range");
  const specvo::TrajectoryEntry& e = traj->value.entries[index];
  *out = {e.frame, e.pose.x, e.pose.y, e.pose.log_zoom, e.pose.yaw, e.flagged ? 1 : 0};
  g_last_error.clear();
  return SPECVO_OK;
}

void specvo_trajectory_destroy(specvo_trajectory* traj) { delete traj; }

specvo_status specvo_evaluate(const specvo_trajectory* traj, const specvo_trajectory* gt,
                              specvo_ate_report* report, specvo_trajectory** aligned,
                              const char* errors_csv) {
  SPECVO_CHECK_ARG(traj && gt && report, "traj, gt and report are required");
  if (aligned) *aligned = nullptr;
  return guarded([&] {
    specvo::Trajectory al = specvo::align_and_scale(traj->value, gt->value);
    const specvo::AteReport r = specvo::ate(al, gt->value);
    *report = {r.max, r.mean, r.median, r.n, specvo::path_length(gt->value)};
    if (errors_csv) specvo::write_pose_errors_csv(al, r, errors_csv);
    if (aligned) *aligned = new specvo_trajectory{std::move(al)};
  });
}

specvo_status specvo_write_report(const specvo_ate_report* report, const char* path) {
  SPECVO_CHECK_ARG(report && path, "report and path are required");
  return guarded([&] {
    specvo::AteReport r;
    r.max = report->max;
    r.mean = report->mean;
    r.median = report->median;
    r.n = report->n;
    specvo::write_report_csv(r, report->gt_length, path);
  });
}

specvo_status specvo_plot(const specvo_trajectory* const* trajs, const char* const* names, size_t count,
                          const specvo_trajectory* gt, const char* out_svg) {
  SPECVO_CHECK_ARG(out_svg, "out_svg is required");
  SPECVO_CHECK_ARG(count == 0 || (trajs && names), "trajs and names are required");
  SPECVO_CHECK_ARG(count > 0 || gt, "nothing to plot");
  return guarded([&] {
    std::vector<specvo::NamedTrajectory> tracks;
    if (gt) tracks.push_back({"groundtruth", gt->value});
    for (size_t i = 0; i < count; ++i) {
      if (!trajs[i] || !names[i]) throw specvo::Error(specvo::ErrorCode::kContract, "null trajectory or name");
      specvo::Trajectory t = gt ? specvo::align_and_scale(trajs[i]->value, gt->value) : trajs[i]->value;
      tracks.push_back({names[i], std::move(t)});
    }
    specvo::emit_plots(tracks, out_svg);
  });
}

}  // extern "C"
