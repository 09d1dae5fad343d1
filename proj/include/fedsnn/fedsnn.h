/* fedsnn: federated spiking-network simulator, public C API.
 *
 * All functions return a status code; on failure, fedsnn_last_error() holds a
 * thread-local description of the most recent error. Handles are opaque and
 * must be released with their destroy function.
 */
#ifndef FEDSNN_H
#define FEDSNN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fedsnn_status {
    FEDSNN_OK = 0,
    FEDSNN_ERR_CONFIG = 1,  /* bad configuration, arguments or file format */
    FEDSNN_ERR_RUNTIME = 2, /* anything that fails after validation */
} fedsnn_status;

typedef struct fedsnn_config fedsnn_config;

const char* fedsnn_version(void);

/* Description of the last error on this thread; empty string if none. */
const char* fedsnn_last_error(void);

/* Configuration with all defaults in place. */
fedsnn_status fedsnn_config_create(fedsnn_config** out);

/* Parse a key = value config file ('#' comments, unknown keys rejected). */
fedsnn_status fedsnn_config_load(const char* path, fedsnn_config** out);

/* Set one key with the same validation as the file parser. */
fedsnn_status fedsnn_config_set(fedsnn_config* cfg, const char* key, const char* value);

/* Render the fully resolved configuration. Writes up to cap-1 bytes plus a
 * terminating NUL into buf; *written receives the full rendered length. */
fedsnn_status fedsnn_config_render(const fedsnn_config* cfg, char* buf, size_t cap,
                                   size_t* written);

void fedsnn_config_destroy(fedsnn_config* cfg);

/* Run a federated experiment; writes metrics.csv, model.ckpt, energy.csv and
 * config.resolved into out_dir. */
fedsnn_status fedsnn_run_train(const fedsnn_config* cfg, const char* out_dir);

/* One run per value of the given axis (clients | samples | noise | alpha |
 * timestep | leak | dirichlet); writes per-run directories plus combined.csv. */
fedsnn_status fedsnn_run_sweep(const fedsnn_config* cfg, const char* axis, const double* values,
                               size_t count, const char* out_dir);

/* Rebuild a model from a checkpoint, measure spike rates on the dataset and
 * write energy.csv into out_dir. cfg may be NULL for defaults. */
fedsnn_status fedsnn_run_energy(const fedsnn_config* cfg, const char* checkpoint_path,
                                const char* dataset_path, const char* out_dir);

/* Generate a synthetic FDS1 dataset file. */
fedsnn_status fedsnn_make_synth(uint32_t classes, uint32_t per_class, uint32_t side,
                                uint32_t channels, uint64_t seed, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* FEDSNN_H */
