#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedsnn {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Flat key = value experiment description; '#' starts a comment, unknown keys
// are rejected, omitted keys fall back to the defaults below.
struct ExperimentConfig {
    // model + encoder
    std::string model = "snn";               // snn | cnn
    std::string encoder;                     // nrfe | rate | none; empty resolves by model
    std::string nrfe_variant = "literal";    // literal | threshold
    std::string nrfe_temporal = "resample";  // resample | static
    // spiking dynamics
    int time_steps = 10;
    double lambda = 0.9;
    double alpha = 0.3;
    double theta = 1.0;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.9;
    std::string reset = "hard";  // hard | soft
    double grad_clip = 5.0;      // 0 disables
    // federated protocol
    int clients = 20;
    double participation = 0.5;
    int local_epochs = 2;
    int batch_size = 8;
    double eta = 0.1;
    int rounds = 100;
    // data
    std::string dataset;       // FDS1 path; empty selects the synthetic source
    std::string test_dataset;  // FDS1 path, required with `dataset`
    int synth_classes = 4;
    int synth_per_class = 100;
    int synth_side = 16;
    int synth_channels = 3;
    int synth_test_per_class = 25;
    std::string partition = "iid";  // iid | dirichlet
    double mu = 0.5;                // Dirichlet concentration
    int per_class_per_client = 3;   // IID allotment
    int samples_per_client = 0;     // cap applied after partitioning; 0 = unlimited
    double noise_ratio = 0.0;       // salt-and-pepper fraction on training data
    uint64_t seed = 42;

    bool operator==(const ExperimentConfig&) const = default;
};

// Parse + validate; fills the conditional encoder default and throws
// ConfigError with the offending key on any problem.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Sets one field by key with the same validation as the file parser.
void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Full key = value listing; parse_config_text(render_config(c)) == c.
std::string render_config(const ExperimentConfig& cfg);

// Range and cross-field checks; resolves the encoder default.
void validate_config(ExperimentConfig& cfg);

}  // namespace fedsnn
