#ifndef SPECVO_SPECVO_H
#define SPECVO_SPECVO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SPECVO_BUILDING_LIBRARY)
#define SPECVO_API __attribute__((visibility("default")))
#else
#define SPECVO_API
#endif

typedef enum specvo_status {
  SPECVO_OK = 0,
  SPECVO_ERR_INPUT_DOMAIN = 1,
  SPECVO_ERR_CONTRACT = 2,
  SPECVO_ERR_DEGENERATE_BLOCK = 3,
  SPECVO_ERR_REGISTRATION = 4,
  SPECVO_ERR_MATCHING = 5,
  SPECVO_ERR_OPTIMIZER = 6,
  SPECVO_ERR_SCENE_COVERAGE = 7,
  SPECVO_ERR_IO = 8,
  SPECVO_ERR_DEGENERATE_TRAJECTORY = 9,
  SPECVO_ERR_ASSOCIATION = 10,
  SPECVO_ERR_PARSE = 11,
  SPECVO_ERR_INVALID_ARGUMENT = 50,
  SPECVO_ERR_INTERNAL = 99
} specvo_status;

typedef struct specvo_config specvo_config;
typedef struct specvo_trajectory specvo_trajectory;

typedef struct specvo_pose {
  int frame;
  double x;
  double y;
  double log_zoom;
  double yaw;
  int flagged;
} specvo_pose;

typedef struct specvo_ate_report {
  double max;
  double mean;
  double median;
  int n;
  double gt_length;
} specvo_ate_report;

/* Message of the last failing call on this thread; "" after a success. */
SPECVO_API const char* specvo_last_error(void);
SPECVO_API const char* specvo_status_name(specvo_status status);

/* Dataset generation. scene is a preset name or a manifest file. track may be
   NULL, frames/width/height 0 and has_seed 0 to keep the scene's values. */
SPECVO_API specvo_status specvo_generate(const char* scene, const char* track, int frames, int width,
                                         int height, int has_seed, uint64_t seed, const char* out_dir);

/* Pipeline configuration, initialised with the built-in defaults. */
SPECVO_API specvo_status specvo_config_create(specvo_config** out);
SPECVO_API void specvo_config_destroy(specvo_config* config);
SPECVO_API specvo_status specvo_config_load(specvo_config* config, const char* path);
SPECVO_API specvo_status specvo_config_set(specvo_config* config, const char* key, const char* value);
/* Writes the key = value text into buf (NUL terminated, truncated to cap) and
   the untruncated length into *needed. */
SPECVO_API specvo_status specvo_config_format(const specvo_config* config, char* buf, size_t cap,
                                              size_t* needed);

/* Runs the odometry over the PNG/PGM frames of a directory. */
SPECVO_API specvo_status specvo_run(const char* frames_dir, const specvo_config* config,
                                    specvo_trajectory** out);

SPECVO_API specvo_status specvo_trajectory_load(const char* csv_path, specvo_trajectory** out);
/* manifest_path may be NULL. */
SPECVO_API specvo_status specvo_trajectory_save(const specvo_trajectory* traj, const char* csv_path,
                                                const char* manifest_path);
SPECVO_API size_t specvo_trajectory_size(const specvo_trajectory* traj);
SPECVO_API specvo_status specvo_trajectory_pose(const specvo_trajectory* traj, size_t index,
                                                specvo_pose* out);
SPECVO_API void specvo_trajectory_destroy(specvo_trajectory* traj);

/* Aligns traj to gt and computes the absolute trajectory error. aligned and
   errors_csv may be NULL. */
SPECVO_API specvo_status specvo_evaluate(const specvo_trajectory* traj, const specvo_trajectory* gt,
                                         specvo_ate_report* report, specvo_trajectory** aligned,
                                         const char* errors_csv);
SPECVO_API specvo_status specvo_write_report(const specvo_ate_report* report, const char* path);

/* SVG overlay. Each trajectory is aligned to gt first when gt is not NULL;
   gt itself is drawn as "groundtruth". */
SPECVO_API specvo_status specvo_plot(const specvo_trajectory* const* trajs, const char* const* names,
                                     size_t count, const specvo_trajectory* gt, const char* out_svg);

#ifdef __cplusplus
}
#endif

#endif
