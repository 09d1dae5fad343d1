#pragma once

#include <memory>
#include <vector>

#include "fedsnn/kernels.hpp"
#include "fedsnn/model.hpp"
#include "fedsnn/rng.hpp"

namespace fedsnn {

enum class ResetMode { Hard, Soft };
// Smooth replaces the firing step with the integral ramp of the surrogate
// hat, making the whole network differentiable for gradient checks.
enum class SpikeMode { Binary, Smooth };

struct SnnConfig {
    int time_steps = 10;           // T
    float leak = 0.9f;             // lambda, (0,1)
    float threshold = 1.0f;        // theta, > 0
    float surrogate_alpha = 0.3f;  // alpha, > 0
    float bn_epsilon = 1e-5f;
    float bn_momentum = 0.9f;
    ResetMode reset = ResetMode::Hard;
    SpikeMode spike_mode = SpikeMode::Binary;
    float grad_clip = 5.0f;  // elementwise limit on gradients; <= 0 disables

    void validate() const;
};

// One membrane update: u_pre = leak * u_prev + weighted_input, fire where
// u_pre >= threshold (inclusive), then reset fired units.
struct LifResult {
    Tensor u_pre;
    Tensor spikes;
    Tensor u_new;
};
LifResult lif_step(const Tensor& u_prev, const Tensor& weighted_input, const SnnConfig& cfg);

// Piecewise-linear hat alpha * max{0, 1 - |(u - theta)/theta|}; peak alpha at
// theta, support [0, 2*theta].
float surrogate_grad(float u, const SnnConfig& cfg);
Tensor surrogate_grad(const Tensor& u, const SnnConfig& cfg);

// Integral of the surrogate hat; ranges over [0, alpha*theta].
float smooth_spike(float u, const SnnConfig& cfg);

// Batch normalization through time: independent learned scale and statistics
// per time step, no additive shift.
class BnttLayer {
public:
    BnttLayer() = default;
    BnttLayer(int time_steps, int channels, float epsilon, float momentum);

    // train_stats: normalize with this batch's statistics (cached for the
    // backward pass); update_running folds them into the running averages.
    // Eval mode (train_stats = false) requires previously recorded stats.
    Tensor forward(const Tensor& x, int t, bool train_stats, bool update_running);

    struct Backward {
        Tensor grad_x;
        Tensor grad_gamma_t;  // [C] slice for step t, also accumulated into gamma_grad
    };
    Backward backward(const Tensor& grad_y, int t);

    void zero_grad() { gamma_grad.fill(0.0f); }
    void clear_cache() { cache_.assign(static_cast<size_t>(time_steps), {}); }

    int time_steps = 0;
    int channels = 0;
    float epsilon = 1e-5f;
    float momentum = 0.9f;
    Tensor gamma;         // [T, C]
    Tensor gamma_grad;    // [T, C]
    Tensor running_mean;  // [T, C]
    Tensor running_var;   // [T, C]
    bool has_stats = false;

private:
    struct StepCache {
        Tensor xhat;
        std::vector<float> inv_std;  // per channel
        bool valid = false;
    };
    std::vector<StepCache> cache_;
    void stat_axes(const Tensor& x, int64_t* group, int64_t* plane) const;
};

struct SnnArch {
    int in_channels = 3;
    int side = 28;  // must divide by 4 (two 2x pools)
    int num_classes = 62;
};

// Fixed stack: Conv(3x3,pad1)->BNTT->LIF x2, AvgPool2, Conv->BNTT->LIF,
// AvgPool2, FC->BNTT->LIF, FC accumulator head. The head integrates with the
// same leak, never fires, and its step-T potentials are the logits.
class SnnModel : public Model {
public:
    SnnModel(const SnnArch& arch, const SnnConfig& cfg, uint64_t init_seed);

    std::string kind() const override { return "snn"; }
    std::string checkpoint_magic() const override { return "FSNN1"; }
    int num_classes() const override { return arch_.num_classes; }
    int time_steps() const override { return cfg_.time_steps; }

    std::vector<ParamRef> parameters() override;
    std::vector<StateRef> state_tensors() override;

    double train_step(const EncodedBatch& batch, float eta, SpikeRateRecorder* rec) override;
    Tensor predict(const EncodedBatch& batch, SpikeRateRecorder* rec) override;

    std::unique_ptr<Model> clone() const override { return std::make_unique<SnnModel>(*this); }
    std::vector<LayerDesc> layer_descriptors() const override;

    bool stats_ready() const override;
    void mark_stats_ready() override;

    // Unrolled forward over exactly cfg.time_steps steps; caches everything
    // needed by backward() when train is true.
    Tensor forward(const std::vector<const SpikeTrain*>& batch, bool train,
                   SpikeRateRecorder* rec);
    // BPTT from d(loss)/d(logits); fills parameter gradients.
    void backward(const Tensor& grad_logits);
    void zero_grad();
    void clip_grads();
    void apply_sgd(float eta);

    const SnnConfig& config() const { return cfg_; }
    const SnnArch& arch() const { return arch_; }

    static constexpr int kSpikeLayers = 4;

private:
    SnnArch arch_;
    SnnConfig cfg_;
    ConvSpec conv1_spec_, conv2_spec_, conv3_spec_;
    Tensor conv1_w_, conv2_w_, conv3_w_, fc1_w_, fc2_w_;
    Tensor conv1_g_, conv2_g_, conv3_g_, fc1_g_, fc2_g_;
    BnttLayer bn1_, bn2_, bn3_, bn4_;

    // Per-step caches from the last train-mode forward.
    struct StepCache {
        Tensor input;              // encoder frame [N,C,s,s]
        Tensor o1, o2, o3, o4;     // spike outputs
        Tensor p1, flat;           // conv3 / fc1 inputs
        Tensor u1, u2, u3, u4;     // pre-reset membrane potentials
    };
    std::vector<StepCache> steps_;
    int cached_batch_ = 0;

    Tensor run(const std::vector<const SpikeTrain*>& batch, bool train, bool eval_stats,
               SpikeRateRecorder* rec);
    float reset_path_grad(float u_pre, float spike) const;
};

}  // namespace fedsnn
