// fedsnn command-line runner; links only the public C API.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsnn/fedsnn.h"

namespace {

struct ConfigDeleter {
    void operator()(fedsnn_config* c) const { fedsnn_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<fedsnn_config, ConfigDeleter>;

int exit_code(fedsnn_status status) {
    if (status != FEDSNN_OK) std::fprintf(stderr, "fedsnn: %s\n", fedsnn_last_error());
    return static_cast<int>(status);
}

// Loads the config (or defaults when no path is given) and applies the
// FEDSNN_SEED override.
fedsnn_status open_config(const std::string& path, ConfigPtr& out) {
    fedsnn_config* raw = nullptr;
    fedsnn_status status =
        path.empty() ? fedsnn_config_create(&raw) : fedsnn_config_load(path.c_str(), &raw);
    if (status != FEDSNN_OK) return status;
    out.reset(raw);
    if (const char* seed = std::getenv("FEDSNN_SEED"))
        return fedsnn_config_set(out.get(), "seed", seed);
    return FEDSNN_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated spiking-network training simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, ckpt_path, data_path, out_path;
    std::vector<double> values;
    uint32_t classes = 4, per_class = 100, side = 28, channels = 3;
    uint64_t seed = 42;

    auto* train = app.add_subcommand("train", "Run one federated experiment");
    train->add_option("--config", config_path, "Config file (key = value lines)")->required();
    train->add_option("--out", out_dir, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run one experiment per axis value");
    sweep->add_option("--config", config_path, "Config file")->required();
    sweep->add_option("--axis", axis,
                      "clients | samples | noise | alpha | timestep | leak | dirichlet")
        ->required();
    sweep->add_option("--values", values, "Comma-separated axis values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", out_dir, "Output directory")->required();

    auto* energy = app.add_subcommand("energy", "Per-layer energy report for a checkpoint");
    energy->add_option("--ckpt", ckpt_path, "Model checkpoint")->required();
    energy->add_option("--data", data_path, "Probe dataset (FDS1)")->required();
    energy->add_option("--out", out_dir, "Output directory")->required();
    energy->add_option("--config", config_path, "Optional config for dynamics overrides");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic FDS1 dataset");
    synth->add_option("--classes", classes, "Number of classes")->required();
    synth->add_option("--per-class", per_class, "Samples per class")->required();
    synth->add_option("--out", out_path, "Output dataset path")->required();
    synth->add_option("--side", side, "Image side length (default 28)");
    synth->add_option("--channels", channels, "Channels (default 3)");
    synth->add_option("--seed", seed, "Generator seed (default 42)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (train->parsed() || sweep->parsed()) {
        ConfigPtr cfg;
        fedsnn_status status = open_config(config_path, cfg);
        if (status != FEDSNN_OK) return exit_code(status);
        status = train->parsed()
                     ? fedsnn_run_train(cfg.get(), out_dir.c_str())
                     : fedsnn_run_sweep(cfg.get(), axis.c_str(), values.data(), values.size(),
                                        out_dir.c_str());
        return exit_code(status);
    }
    if (energy->parsed()) {
        ConfigPtr cfg;
        fedsnn_status status = open_config(config_path, cfg);
        if (status != FEDSNN_OK) return exit_code(status);
        return exit_code(fedsnn_run_energy(cfg.get(), ckpt_path.c_str(), data_path.c_str(),
                                           out_dir.c_str()));
    }
    if (synth->parsed()) {
        if (const char* env = std::getenv("FEDSNN_SEED")) seed = std::strtoull(env, nullptr, 10);
        return exit_code(
            fedsnn_make_synth(classes, per_class, side, channels, seed, out_path.c_str()));
    }
    return 1;
}
