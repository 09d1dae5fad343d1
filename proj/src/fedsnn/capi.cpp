#include "fedsnn/fedsnn.h"

#include <cstring>
#include <string>
#include <vector>

#include "fedsnn/config.hpp"
#include "fedsnn/runner.hpp"

struct fedsnn_config {
    fedsnn::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

fedsnn_status fail(fedsnn_status code, const char* what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
fedsnn_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FEDSNN_OK;
    } catch (const fedsnn::ConfigError& e) {
        return fail(FEDSNN_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(FEDSNN_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(FEDSNN_ERR_RUNTIME, e.what());
    }
}

}  // namespace

extern "C" {

const char* fedsnn_version(void) { return "0.1.0"; }

const char* fedsnn_last_error(void) { return g_last_error.c_str(); }

fedsnn_status fedsnn_config_create(fedsnn_config** out) {
    if (!out) return fail(FEDSNN_ERR_CONFIG, "config_create: null output pointer");
    return guarded([&] { *out = new fedsnn_config{}; });
}

fedsnn_status fedsnn_config_load(const char* path, fedsnn_config** out) {
    if (!path || !out) return fail(FEDSNN_ERR_CONFIG, "config_load: null argument");
    return guarded([&] { *out = new fedsnn_config{fedsnn::parse_config(path)}; });
}

fedsnn_status fedsnn_config_set(fedsnn_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(FEDSNN_ERR_CONFIG, "config_set: null argument");
    return guarded([&] { fedsnn::config_set(cfg->cfg, key, value); });
}

fedsnn_status fedsnn_config_render(const fedsnn_config* cfg, char* buf, size_t cap,
                                   size_t* written) {
    if (!cfg) return fail(FEDSNN_ERR_CONFIG, "config_render: null config");
    return guarded([&] {
        fedsnn::ExperimentConfig resolved = cfg->cfg;
        fedsnn::validate_config(resolved);
        const std::string text = fedsnn::render_config(resolved);
        if (written) *written = text.size();
        if (buf && cap > 0) {
            const size_t n = std::min(cap - 1, text.size());
            std::memcpy(buf, text.data(), n);
            buf[n] = '\0';
        }
    });
}

void fedsnn_config_destroy(fedsnn_config* cfg) { delete cfg; }

fedsnn_status fedsnn_run_train(const fedsnn_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail(FEDSNN_ERR_CONFIG, "run_train: null argument");
    return guarded([&] { fedsnn::run_train(cfg->cfg, out_dir); });
}

fedsnn_status fedsnn_run_sweep(const fedsnn_config* cfg, const char* axis, const double* values,
                               size_t count, const char* out_dir) {
    if (!cfg || !axis || !values || !out_dir)
        return fail(FEDSNN_ERR_CONFIG, "run_sweep: null argument");
    return guarded([&] {
        fedsnn::ExperimentConfig resolved = cfg->cfg;
        fedsnn::validate_config(resolved);
        fedsnn::run_sweep(resolved, axis, std::vector<double>(values, values + count), out_dir);
    });
}

fedsnn_status fedsnn_run_energy(const fedsnn_config* cfg, const char* checkpoint_path,
                                const char* dataset_path, const char* out_dir) {
    if (!checkpoint_path || !dataset_path || !out_dir)
        return fail(FEDSNN_ERR_CONFIG, "run_energy: null argument");
    return guarded([&] {
        fedsnn::ExperimentConfig base = cfg ? cfg->cfg : fedsnn::ExperimentConfig{};
        fedsnn::run_energy(base, checkpoint_path, dataset_path, out_dir);
    });
}

fedsnn_status fedsnn_make_synth(uint32_t classes, uint32_t per_class, uint32_t side,
                                uint32_t channels, uint64_t seed, const char* out_path) {
    if (!out_path) return fail(FEDSNN_ERR_CONFIG, "make_synth: null output path");
    return guarded([&] {
        fedsnn::make_synth(static_cast<int>(classes), static_cast<int>(per_class),
                           static_cast<int>(side), static_cast<int>(channels), seed, out_path);
    });
}

}  // extern "C"
