#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedsnn/dataset.hpp"
#include "fedsnn/encoding.hpp"
#include "fedsnn/model.hpp"
#include "fedsnn/rng.hpp"

namespace fedsnn {

enum class ModelKind { Snn, Cnn };
enum class EncoderKind { Nrfe, Rate, None };

struct FedConfig {
    int clients = 20;            // K
    double participation = 0.5;  // F in (0,1]
    int local_epochs = 2;        // E
    int batch_size = 8;          // B
    float eta = 0.1f;
    int rounds = 100;
    ModelKind model_kind = ModelKind::Snn;
    EncoderKind encoder_kind = EncoderKind::Nrfe;
};

// m = max(round(F*K), 1), round half up.
int selected_count(int clients, double participation);

// Uniform sample without replacement, returned in ascending id order.
std::vector<int> select_clients(int clients, double participation, uint64_t seed);

// A dataset shard in the representation its model consumes.
struct EncodedDataset {
    EncoderKind kind = EncoderKind::None;
    std::vector<SpikeTrain> trains;
    std::vector<Tensor> dense;  // normalized [C,s,s] images
    std::vector<int> labels;

    int size() const {
        return kind == EncoderKind::None ? static_cast<int>(dense.size())
                                         : static_cast<int>(trains.size());
    }
    EncodedBatch batch(const std::vector<int>& rows) const;
};

// Encodes `indices` of `dataset`; per-image streams derive from (seed,
// dataset index) so results do not depend on shard traversal order.
EncodedDataset encode_dataset(const LabeledDataset& dataset, const std::vector<int>& indices,
                              EncoderKind kind, const NrfeParams* nrfe, int steps, uint64_t seed,
                              NrfeVariant variant = NrfeVariant::Literal);

// Dataset-size-weighted mean, computed per tensor over ascending update
// order; weights normalized over the participating subset only.
Tensor weighted_mean(const std::vector<const Tensor*>& tensors,
                     const std::vector<int64_t>& sizes);
void aggregate_into(Model& global, const std::vector<std::pair<Model*, int64_t>>& updates);

struct ClientUpdateResult {
    std::unique_ptr<Model> model;
    int64_t shard_size = 0;
    double mean_loss = 0.0;
    SpikeRateRecorder recorder;
};

// Clone the global snapshot and run E epochs of shuffled mini-batches of
// size B (final short batch kept) over the pre-encoded shard.
ClientUpdateResult client_update(const Model& global, const EncodedDataset& shard,
                                 const FedConfig& cfg, uint64_t train_seed);

// Argmax accuracy of `model` on an encoded test set, evaluated in batches.
double evaluate_accuracy(Model& model, const EncodedDataset& test, int batch_size = 64);

struct RoundMetrics {
    int round = 0;
    double test_acc = 0.0;
    double mean_train_loss = 0.0;
    bool has_loss = false;
    int selected_clients = 0;
    int64_t wall_ms = 0;
    std::array<double, 4> spike_rates{};
    bool has_spike_rates = false;
};

// Exact column contract:
// round,test_acc,mean_train_loss,selected_clients,wall_ms,spike_rate_l1..l4
std::string metrics_csv(const std::vector<RoundMetrics>& rows);

// Synchronous FedAvg driver. Client shards are encoded lazily, once per
// experiment; the test set is encoded once with a fixed evaluation seed.
class Experiment {
public:
    Experiment(FedConfig fed, uint64_t master_seed, LabeledDataset train, LabeledDataset test,
               Partition partition, std::unique_ptr<Model> global,
               std::optional<NrfeParams> nrfe = std::nullopt,
               NrfeVariant nrfe_variant = NrfeVariant::Literal);

    RoundMetrics run_round();
    std::vector<RoundMetrics> run_all();
    double evaluate();

    Model& global() { return *global_; }
    int completed_rounds() const { return round_; }
    const EncodedDataset& test_encoded();
    const FedConfig& fed() const { return fed_; }

private:
    const EncodedDataset& client_encoded(int k);

    FedConfig fed_;
    uint64_t master_seed_;
    LabeledDataset train_, test_;
    Partition partition_;
    std::unique_ptr<Model> global_;
    std::optional<NrfeParams> nrfe_;
    NrfeVariant nrfe_variant_;
    std::vector<std::optional<EncodedDataset>> client_cache_;
    std::optional<EncodedDataset> test_cache_;
    int round_ = 0;
};

// Per-row spike rates for the energy ledger, measured over a probe pass:
// conv/fc rows report their block's emitted spike rate, bn rows the nonzero
// fraction of their output, pooling and the analog head 1.0 while they carry
// any traffic.
std::map<std::string, double> measure_spike_rates(Model& model, const EncodedDataset& probe,
                                                  int batch_size = 64);

}  // namespace fedsnn
