#pragma once

#include <memory>
#include <vector>

#include "fedsnn/kernels.hpp"
#include "fedsnn/model.hpp"
#include "fedsnn/rng.hpp"

namespace fedsnn {

struct CnnConfig {
    float bn_epsilon = 1e-5f;
    float bn_momentum = 0.9f;
    float grad_clip = 5.0f;

    void validate() const;
};

// Ordinary batch normalization with a learned scale only; the shift stays at
// zero so the layer mirrors the time-sliced variant's parameter shape.
class BatchNormLayer {
public:
    BatchNormLayer() = default;
    BatchNormLayer(int channels, float epsilon, float momentum);

    Tensor forward(const Tensor& x, bool train_stats, bool update_running);
    Tensor backward(const Tensor& grad_y);

    void zero_grad() { gamma_grad.fill(0.0f); }
    void clear_cache() { cache_ = {}; }

    int channels = 0;
    float epsilon = 1e-5f;
    float momentum = 0.9f;
    Tensor gamma;         // [C]
    Tensor gamma_grad;    // [C]
    Tensor running_mean;  // [C]
    Tensor running_var;   // [C]
    bool has_stats = false;

private:
    struct Cache {
        Tensor xhat;
        std::vector<float> inv_std;
        bool valid = false;
    };
    Cache cache_;
    void stat_axes(const Tensor& x, int64_t* group, int64_t* plane) const;
};

struct CnnArch {
    int in_channels = 3;
    int side = 28;
    int num_classes = 62;
};

// Same stack as the spiking model with ReLU in place of the firing neurons
// and plain batch norm in place of the time-sliced one; consumes normalized
// pixels directly.
class CnnModel : public Model {
public:
    CnnModel(const CnnArch& arch, const CnnConfig& cfg, uint64_t init_seed);

    std::string kind() const override { return "cnn"; }
    std::string checkpoint_magic() const override { return "FCNN1"; }
    int num_classes() const override { return arch_.num_classes; }
    int time_steps() const override { return 1; }

    std::vector<ParamRef> parameters() override;
    std::vector<StateRef> state_tensors() override;

    double train_step(const EncodedBatch& batch, float eta, SpikeRateRecorder* rec) override;
    Tensor predict(const EncodedBatch& batch, SpikeRateRecorder* rec) override;

    std::unique_ptr<Model> clone() const override { return std::make_unique<CnnModel>(*this); }
    std::vector<LayerDesc> layer_descriptors() const override;

    bool stats_ready() const override;
    void mark_stats_ready() override;

    Tensor forward(const Tensor& images, bool train);
    void backward(const Tensor& grad_logits);
    void zero_grad();
    void clip_grads();
    void apply_sgd(float eta);

private:
    CnnArch arch_;
    CnnConfig cfg_;
    ConvSpec conv1_spec_, conv2_spec_, conv3_spec_;
    Tensor conv1_w_, conv2_w_, conv3_w_, fc1_w_, fc2_w_;
    Tensor conv1_g_, conv2_g_, conv3_g_, fc1_g_, fc2_g_;
    BatchNormLayer bn1_, bn2_, bn3_, bn4_;

    struct Cache {
        Tensor input;
        Tensor a1, a2, a3, a4;  // ReLU outputs (mask source and next-layer inputs)
        Tensor y1, y2, y3, y4;  // BN outputs (pre-activation, for the ReLU gate)
        Tensor p1, flat;
        bool valid = false;
    };
    Cache cache_;
};

}  // namespace fedsnn
