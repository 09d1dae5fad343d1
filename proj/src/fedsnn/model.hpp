#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fedsnn/encoding.hpp"
#include "fedsnn/energy.hpp"
#include "fedsnn/tensor.hpp"

namespace fedsnn {

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

struct StateRef {
    std::string name;
    Tensor* value;
};

// A training batch in the representation the model consumes: spike trains for
// the SNN, a dense normalized image stack for the CNN.
struct EncodedBatch {
    std::vector<const SpikeTrain*> trains;
    Tensor dense;
    std::vector<int> labels;
    int size() const {
        return trains.empty() ? (dense.empty() ? 0 : dense.dim(0))
                              : static_cast<int>(trains.size());
    }
};

class Model {
public:
    virtual ~Model() = default;

    virtual std::string kind() const = 0;
    virtual std::string checkpoint_magic() const = 0;
    virtual int num_classes() const = 0;
    virtual int time_steps() const = 0;

    // Trainable tensors and the full persisted state (trainable + running
    // statistics), in a fixed order shared by aggregation and checkpoints.
    virtual std::vector<ParamRef> parameters() = 0;
    virtual std::vector<StateRef> state_tensors() = 0;

    // Forward + backward + SGD update on one mini-batch; returns mean loss.
    virtual double train_step(const EncodedBatch& batch, float eta,
                              SpikeRateRecorder* recorder) = 0;
    // Deterministic eval-mode logits [N, num_classes].
    virtual Tensor predict(const EncodedBatch& batch, SpikeRateRecorder* recorder) = 0;

    virtual std::unique_ptr<Model> clone() const = 0;

    // Rows in network order, used by the energy accounting.
    virtual std::vector<LayerDesc> layer_descriptors() const = 0;

    // Whether eval-mode normalization statistics are available.
    virtual bool stats_ready() const = 0;
    virtual void mark_stats_ready() = 0;
};

// Flat binary checkpoint: magic bytes, then per tensor
// (u32 name length, name, u32 rank, u32 extents..., f32 data), little-endian.
std::string serialize_checkpoint(Model& model);
void save_checkpoint(Model& model, const std::string& path);
void load_checkpoint(Model& model, const std::string& path);

struct RawCheckpoint {
    std::string magic;
    std::vector<std::pair<std::string, Tensor>> tensors;
    const Tensor* find(const std::string& name) const;
};
RawCheckpoint read_checkpoint(const std::string& path);

// Mean cross-entropy of softmax(logits) against integer labels, with the
// gradient wrt logits (softmax - onehot)/N.
struct LossResult {
    double loss;
    Tensor grad;
};
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Plain constant-rate SGD: param -= eta * grad.
void sgd_step(Tensor& param, const Tensor& grad, float eta);

// Elementwise clip to [-limit, limit]; limit <= 0 disables.
void clip_tensor(Tensor& t, float limit);

}  // namespace fedsnn
