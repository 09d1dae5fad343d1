#include "fedsnn/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "fedsnn/cnn.hpp"
#include "fedsnn/energy.hpp"
#include "fedsnn/io.hpp"
#include "fedsnn/snn.hpp"

namespace fedsnn {

namespace {

SnnConfig snn_config_from(const ExperimentConfig& cfg) {
    SnnConfig c;
    c.time_steps = cfg.time_steps;
    c.leak = static_cast<float>(cfg.lambda);
    c.threshold = static_cast<float>(cfg.theta);
    c.surrogate_alpha = static_cast<float>(cfg.alpha);
    c.bn_epsilon = static_cast<float>(cfg.bn_epsilon);
    c.bn_momentum = static_cast<float>(cfg.bn_momentum);
    c.reset = cfg.reset == "soft" ? ResetMode::Soft : ResetMode::Hard;
    c.grad_clip = static_cast<float>(cfg.grad_clip);
    return c;
}

FedConfig fed_config_from(const ExperimentConfig& cfg) {
    FedConfig f;
    f.clients = cfg.clients;
    f.participation = cfg.participation;
    f.local_epochs = cfg.local_epochs;
    f.batch_size = cfg.batch_size;
    f.eta = static_cast<float>(cfg.eta);
    f.rounds = cfg.rounds;
    f.model_kind = cfg.model == "snn" ? ModelKind::Snn : ModelKind::Cnn;
    f.encoder_kind = cfg.encoder == "nrfe"   ? EncoderKind::Nrfe
                     : cfg.encoder == "rate" ? EncoderKind::Rate
                                             : EncoderKind::None;
    return f;
}

std::unique_ptr<Model> make_model(const ExperimentConfig& cfg, int channels, int side,
                                  int classes) {
    const uint64_t init_seed = derive_seed(cfg.seed, SeedPurpose::ModelInit);
    if (cfg.model == "snn") {
        SnnArch arch{channels, side, classes};
        return std::make_unique<SnnModel>(arch, snn_config_from(cfg), init_seed);
    }
    CnnArch arch{channels, side, classes};
    CnnConfig cc;
    cc.bn_epsilon = static_cast<float>(cfg.bn_epsilon);
    cc.bn_momentum = static_cast<float>(cfg.bn_momentum);
    cc.grad_clip = static_cast<float>(cfg.grad_clip);
    return std::make_unique<CnnModel>(arch, cc, init_seed);
}

constexpr int kNrfeKernelSize = 3;  // first convolution's kernel

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    BuiltExperiment built;
    if (!cfg.dataset.empty()) {
        built.train = load_dataset(cfg.dataset);
        built.test = load_dataset(cfg.test_dataset);
        if (built.train.num_classes != built.test.num_classes ||
            built.train.side != built.test.side ||
            built.train.channels != built.test.channels)
            throw std::runtime_error("runner: train and test dataset shapes disagree");
    } else {
        Rng train_rng(derive_seed(cfg.seed, SeedPurpose::SynthTrain));
        built.train = synth_dataset(cfg.synth_classes, cfg.synth_per_class, cfg.synth_side,
                                    cfg.synth_channels, train_rng);
        Rng test_rng(derive_seed(cfg.seed, SeedPurpose::SynthTest));
        built.test = synth_dataset(cfg.synth_classes, cfg.synth_test_per_class, cfg.synth_side,
                                   cfg.synth_channels, test_rng);
    }
    if (built.train.side % 4 != 0)
        throw std::runtime_error("runner: image side must be a multiple of 4");

    if (cfg.noise_ratio > 0.0) {
        Rng noise_rng(derive_seed(cfg.seed, SeedPurpose::Noise));
        built.train = add_salt_pepper(built.train, cfg.noise_ratio, noise_rng);
    }

    Rng part_rng(derive_seed(cfg.seed, SeedPurpose::Partition));
    Partition partition = cfg.partition == "iid"
                              ? partition_iid(built.train, cfg.clients,
                                              cfg.per_class_per_client, part_rng)
                              : partition_dirichlet(built.train, cfg.clients, cfg.mu, part_rng);
    if (cfg.samples_per_client > 0)
        for (auto& shard : partition.assignments)
            if (static_cast<int>(shard.size()) > cfg.samples_per_client)
                shard.resize(static_cast<size_t>(cfg.samples_per_client));

    auto model = make_model(cfg, built.train.channels, built.train.side, built.train.num_classes);

    std::optional<NrfeParams> nrfe;
    if (cfg.encoder == "nrfe") {
        nrfe = receptive_field_params(built.train.side, kNrfeKernelSize, cfg.batch_size,
                                      built.train.channels, cfg.local_epochs);
        nrfe->resample_per_step = cfg.nrfe_temporal == "resample";
    }
    const NrfeVariant variant =
        cfg.nrfe_variant == "threshold" ? NrfeVariant::Threshold : NrfeVariant::Literal;

    built.experiment = std::make_unique<Experiment>(
        fed_config_from(cfg), cfg.seed, std::move(built.train), std::move(built.test),
        std::move(partition), std::move(model), nrfe, variant);
    return built;
}

namespace {

void write_outputs(const ExperimentConfig& cfg, Experiment& exp,
                   const std::vector<RoundMetrics>& rows, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_file_atomic(out_dir + "/metrics.csv", metrics_csv(rows));
    save_checkpoint(exp.global(), out_dir + "/model.ckpt");
    write_file_atomic(out_dir + "/config.resolved", render_config(cfg));

    const EnergyCosts costs;
    if (cfg.model == "snn") {
        const auto rates = measure_spike_rates(exp.global(), exp.test_encoded());
        const auto ledger = build_energy_report(exp.global().layer_descriptors(), &rates, costs,
                                                exp.global().time_steps());
        write_file_atomic(out_dir + "/energy.csv", energy_report_csv(ledger));
    } else {
        const auto ledger =
            build_energy_report(exp.global().layer_descriptors(), nullptr, costs, 1);
        write_file_atomic(out_dir + "/energy.csv", energy_report_csv(ledger));
    }
}

}  // namespace

void run_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    ExperimentConfig resolved = cfg;
    validate_config(resolved);
    BuiltExperiment built = build_experiment(resolved);
    const std::vector<RoundMetrics> rows = built.experiment->run_all();
    write_outputs(resolved, *built.experiment, rows, out_dir);
}

ExperimentConfig apply_sweep_axis(const ExperimentConfig& cfg, const std::string& axis,
                                  double value) {
    ExperimentConfig out = cfg;
    if (axis == "clients") {
        out.participation = value;
    } else if (axis == "samples") {
        out.samples_per_client = static_cast<int>(std::llround(value));
    } else if (axis == "noise") {
        out.noise_ratio = value;
    } else if (axis == "alpha") {
        out.alpha = value;
    } else if (axis == "timestep") {
        out.time_steps = static_cast<int>(std::llround(value));
    } else if (axis == "leak") {
        out.lambda = value;
    } else if (axis == "dirichlet") {
        out.partition = "dirichlet";
        out.mu = value;
    } else {
        throw ConfigError("sweep: unknown axis '" + axis +
                          "' (clients|samples|noise|alpha|timestep|leak|dirichlet)");
    }
    validate_config(out);
    return out;
}

std::string format_sweep_value(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

void run_sweep(const ExperimentConfig& cfg, const std::string& axis,
               const std::vector<double>& values, const std::string& out_dir) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::string combined =
        "sweep_value,round,test_acc,mean_train_loss,selected_clients,wall_ms,"
        "spike_rate_l1,spike_rate_l2,spike_rate_l3,spike_rate_l4\n";
    for (size_t i = 0; i < values.size(); ++i) {
        ExperimentConfig run_cfg = apply_sweep_axis(cfg, axis, values[i]);
        run_cfg.seed = cfg.seed + i;
        const std::string label = format_sweep_value(values[i]);
        const std::string sub_dir = out_dir + "/" + axis + "_" + label;

        BuiltExperiment built = build_experiment(run_cfg);
        const std::vector<RoundMetrics> rows = built.experiment->run_all();
        write_outputs(run_cfg, *built.experiment, rows, sub_dir);

        std::string body = metrics_csv(rows);
        std::istringstream lines(body);
        std::string line;
        std::getline(lines, line);  // drop the per-run header
        while (std::getline(lines, line)) combined += label + "," + line + "\n";
    }
    write_file_atomic(out_dir + "/combined.csv", combined);
}

namespace {

// Architecture recovery from checkpoint tensor shapes.
struct RecoveredArch {
    int channels = 0;
    int side = 0;
    int classes = 0;
    int time_steps = 1;
};

RecoveredArch recover_arch(const RawCheckpoint& ckpt) {
    const Tensor* conv1 = ckpt.find("conv1.weight");
    const Tensor* fc1 = ckpt.find("fc1.weight");
    const Tensor* fc2 = ckpt.find("fc2.weight");
    const Tensor* bn1 = ckpt.find("bn1.gamma");
    if (!conv1 || !fc1 || !fc2 || !bn1)
        throw std::runtime_error("energy: checkpoint is missing expected tensors");
    RecoveredArch arch;
    arch.channels = conv1->dim(1);
    arch.classes = fc2->dim(0);
    const int flat = fc1->dim(1);
    const int quarter = static_cast<int>(std::lround(std::sqrt(flat / 64.0)));
    if (64 * quarter * quarter != flat)
        throw std::runtime_error("energy: cannot recover image side from fc1 shape " +
                                 fc1->shape_str());
    arch.side = 4 * quarter;
    arch.time_steps = bn1->rank() == 2 ? bn1->dim(0) : 1;
    return arch;
}

}  // namespace

void run_energy(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                const std::string& dataset_path, const std::string& out_dir) {
    ExperimentConfig resolved = cfg;
    const RawCheckpoint raw = read_checkpoint(checkpoint_path);
    const RecoveredArch arch = recover_arch(raw);

    std::unique_ptr<Model> model;
    if (raw.magic == "FSNN1") {
        resolved.model = "snn";
        resolved.encoder = resolved.encoder == "none" || resolved.encoder.empty()
                               ? "nrfe"
                               : resolved.encoder;
        resolved.time_steps = arch.time_steps;
        validate_config(resolved);
        model = std::make_unique<SnnModel>(SnnArch{arch.channels, arch.side, arch.classes},
                                           snn_config_from(resolved), /*init_seed=*/0);
    } else if (raw.magic == "FCNN1") {
        resolved.model = "cnn";
        resolved.encoder = "none";
        validate_config(resolved);
        CnnConfig cc;
        cc.bn_epsilon = static_cast<float>(resolved.bn_epsilon);
        cc.bn_momentum = static_cast<float>(resolved.bn_momentum);
        model = std::make_unique<CnnModel>(CnnArch{arch.channels, arch.side, arch.classes}, cc,
                                           /*init_seed=*/0);
    } else {
        throw std::runtime_error("energy: unrecognized checkpoint magic '" + raw.magic + "'");
    }
    load_checkpoint(*model, checkpoint_path);

    const LabeledDataset probe = load_dataset(dataset_path);
    if (probe.channels != arch.channels || probe.side != arch.side)
        throw std::runtime_error("energy: dataset shape does not match the checkpoint");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const EnergyCosts costs;
    if (resolved.model == "snn") {
        std::optional<NrfeParams> nrfe;
        NrfeVariant variant = resolved.nrfe_variant == "threshold" ? NrfeVariant::Threshold
                                                                   : NrfeVariant::Literal;
        if (resolved.encoder == "nrfe") {
            nrfe = receptive_field_params(probe.side, kNrfeKernelSize, resolved.batch_size,
                                          probe.channels, resolved.local_epochs);
            nrfe->resample_per_step = resolved.nrfe_temporal == "resample";
        }
        std::vector<int> all(static_cast<size_t>(probe.size()));
        std::iota(all.begin(), all.end(), 0);
        const EncodedDataset encoded = encode_dataset(
            probe, all, resolved.encoder == "nrfe" ? EncoderKind::Nrfe : EncoderKind::Rate,
            nrfe ? &*nrfe : nullptr, model->time_steps(),
            derive_seed(resolved.seed, SeedPurpose::EvalEncode), variant);
        const auto rates = measure_spike_rates(*model, encoded);
        const auto ledger =
            build_energy_report(model->layer_descriptors(), &rates, costs, model->time_steps());
        write_file_atomic(out_dir + "/energy.csv", energy_report_csv(ledger));
    } else {
        const auto ledger = build_energy_report(model->layer_descriptors(), nullptr, costs, 1);
        write_file_atomic(out_dir + "/energy.csv", energy_report_csv(ledger));
    }
}

void make_synth(int classes, int per_class, int side, int channels, uint64_t seed,
                const std::string& out_path) {
    Rng rng(derive_seed(seed, SeedPurpose::SynthTrain));
    const LabeledDataset ds = synth_dataset(classes, per_class, side, channels, rng);
    save_dataset(ds, out_path);
}

}  // namespace fedsnn
