#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fedsnn/config.hpp"
#include "fedsnn/federated.hpp"

namespace fedsnn {

// Materialized experiment built from a validated config: datasets, partition
// and the initialized global model.
struct BuiltExperiment {
    LabeledDataset train;
    LabeledDataset test;
    std::unique_ptr<Experiment> experiment;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg);

// fedsnn train: writes metrics.csv, model.ckpt, energy.csv and
// config.resolved into out_dir (each atomically).
void run_train(const ExperimentConfig& cfg, const std::string& out_dir);

// fedsnn sweep: one run per value under out_dir/<axis>_<value>/, plus a
// combined.csv with a leading sweep_value column. Run i uses seed + i.
void run_sweep(const ExperimentConfig& cfg, const std::string& axis,
               const std::vector<double>& values, const std::string& out_dir);

// fedsnn energy: rebuilds the model from a checkpoint (architecture inferred
// from tensor shapes), measures spike rates on the dataset and writes
// energy.csv into out_dir.
void run_energy(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                const std::string& dataset_path, const std::string& out_dir);

// fedsnn synth: writes a synthetic FDS1 dataset.
void make_synth(int classes, int per_class, int side, int channels, uint64_t seed,
                const std::string& out_path);

// Applies a sweep axis value to a config copy; axis names:
// clients (participation fraction), samples, noise, alpha, timestep, leak,
// dirichlet.
ExperimentConfig apply_sweep_axis(const ExperimentConfig& cfg, const std::string& axis,
                                  double value);

std::string format_sweep_value(double value);

}  // namespace fedsnn
