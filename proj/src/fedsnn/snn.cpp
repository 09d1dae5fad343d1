#include "fedsnn/snn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsnn {

void SnnConfig::validate() const {
    if (time_steps < 1) throw std::invalid_argument("snn: time_steps must be >= 1");
    if (!(leak > 0.0f && leak < 1.0f))
        throw std::invalid_argument("snn: leak must lie in (0,1)");
    if (!(threshold > 0.0f)) throw std::invalid_argument("snn: threshold must be positive");
    if (!(surrogate_alpha > 0.0f))
        throw std::invalid_argument("snn: surrogate_alpha must be positive");
    if (!(bn_epsilon > 0.0f)) throw std::invalid_argument("snn: bn_epsilon must be positive");
    if (!(bn_momentum > 0.0f && bn_momentum < 1.0f))
        throw std::invalid_argument("snn: bn_momentum must lie in (0,1)");
}

LifResult lif_step(const Tensor& u_prev, const Tensor& weighted_input, const SnnConfig& cfg) {
    require_same_shape(u_prev, weighted_input, "lif_step");
    LifResult r{Tensor(u_prev.shape()), Tensor(u_prev.shape()), Tensor(u_prev.shape())};
    const float leak = cfg.leak, theta = cfg.threshold;
    for (int64_t i = 0; i < u_prev.numel(); ++i) {
        const float pre = leak * u_prev[i] + weighted_input[i];
        r.u_pre[i] = pre;
        if (cfg.spike_mode == SpikeMode::Smooth) {
            const float o = smooth_spike(pre, cfg);
            r.spikes[i] = o;
            r.u_new[i] = pre - theta * o;
        } else {
            const float o = pre >= theta ? 1.0f : 0.0f;
            r.spikes[i] = o;
            r.u_new[i] = cfg.reset == ResetMode::Hard ? pre * (1.0f - o) : pre - theta * o;
        }
    }
    return r;
}

float surrogate_grad(float u, const SnnConfig& cfg) {
    const float theta = cfg.threshold;
    const float hat = 1.0f - std::fabs((u - theta) / theta);
    return hat > 0.0f ? cfg.surrogate_alpha * hat : 0.0f;
}

Tensor surrogate_grad(const Tensor& u, const SnnConfig& cfg) {
    Tensor out(u.shape());
    for (int64_t i = 0; i < u.numel(); ++i) out[i] = surrogate_grad(u[i], cfg);
    return out;
}

float smooth_spike(float u, const SnnConfig& cfg) {
    const float theta = cfg.threshold, alpha = cfg.surrogate_alpha;
    if (u <= 0.0f) return 0.0f;
    if (u >= 2.0f * theta) return alpha * theta;
    if (u <= theta) return alpha * u * u / (2.0f * theta);
    const float d = u - theta;
    return alpha * theta / 2.0f + alpha * (d - d * d / (2.0f * theta));
}

BnttLayer::BnttLayer(int t, int c, float eps, float mom)
    : time_steps(t),
      channels(c),
      epsilon(eps),
      momentum(mom),
      gamma({t, c}, 1.0f),
      gamma_grad({t, c}),
      running_mean({t, c}),
      running_var({t, c}, 1.0f) {
    cache_.resize(static_cast<size_t>(t));
}

// Stats are taken per channel: over (N,H,W) for rank-4 inputs, over N for
// rank-2 feature inputs.
void BnttLayer::stat_axes(const Tensor& x, int64_t* group, int64_t* plane) const {
    if (x.rank() == 4) {
        if (x.dim(1) != channels)
            throw std::invalid_argument("bntt: channel count " + std::to_string(x.dim(1)) +
                                        " != layer channels " + std::to_string(channels));
        *plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
        *group = x.dim(0) * *plane;
    } else if (x.rank() == 2) {
        if (x.dim(1) != channels)
            throw std::invalid_argument("bntt: feature count mismatch");
        *plane = 1;
        *group = x.dim(0);
    } else {
        throw std::invalid_argument("bntt: expected rank 2 or 4 input, got " + x.shape_str());
    }
}

Tensor BnttLayer::forward(const Tensor& x, int t, bool train_stats, bool update_running) {
    if (t < 0 || t >= time_steps)
        throw std::invalid_argument("bntt: step " + std::to_string(t) + " out of range, T = " +
                                    std::to_string(time_steps));
    if (!train_stats && !has_stats)
        throw std::runtime_error("bntt: eval requested before any training batch "
                                 "(running statistics undefined)");
    int64_t group = 0, plane = 0;
    stat_axes(x, &group, &plane);
    const int batch = x.dim(0);
    const int64_t sample = static_cast<int64_t>(channels) * plane;

    Tensor out(x.shape());
    StepCache* cache = nullptr;
    if (train_stats) {
        cache_[static_cast<size_t>(t)] = StepCache{};
        cache = &cache_[static_cast<size_t>(t)];
        cache->xhat = Tensor(x.shape());
        cache->inv_std.assign(static_cast<size_t>(channels), 0.0f);
        cache->valid = true;
    }

    for (int c = 0; c < channels; ++c) {
        double mean, var;
        if (train_stats) {
            double sum = 0.0;
            for (int n = 0; n < batch; ++n) {
                const float* p = x.data() + n * sample + c * plane;
                for (int64_t i = 0; i < plane; ++i) sum += p[i];
            }
            mean = sum / group;
            double sq = 0.0;
            for (int n = 0; n < batch; ++n) {
                const float* p = x.data() + n * sample + c * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    const double d = p[i] - mean;
                    sq += d * d;
                }
            }
            var = sq / group;
            if (update_running) {
                float& rm = running_mean.at2(t, c);
                float& rv = running_var.at2(t, c);
                rm = momentum * rm + (1.0f - momentum) * static_cast<float>(mean);
                rv = momentum * rv + (1.0f - momentum) * static_cast<float>(var);
            }
        } else {
            mean = running_mean.at2(t, c);
            var = running_var.at2(t, c);
        }
        const float inv_std = static_cast<float>(1.0 / std::sqrt(var + epsilon));
        const float g = gamma.at2(t, c);
        const float m = static_cast<float>(mean);
        if (cache) cache->inv_std[static_cast<size_t>(c)] = inv_std;
        for (int n = 0; n < batch; ++n) {
            const float* p = x.data() + n * sample + c * plane;
            float* q = out.data() + n * sample + c * plane;
            float* xh = cache ? cache->xhat.data() + n * sample + c * plane : nullptr;
            for (int64_t i = 0; i < plane; ++i) {
                const float hat = (p[i] - m) * inv_std;
                if (xh) xh[i] = hat;
                q[i] = g * hat;
            }
        }
    }
    if (train_stats && update_running) has_stats = true;
    return out;
}

BnttLayer::Backward BnttLayer::backward(const Tensor& grad_y, int t) {
    if (t < 0 || t >= time_steps || cache_.size() != static_cast<size_t>(time_steps) ||
        !cache_[static_cast<size_t>(t)].valid)
        throw std::runtime_error("bntt: backward at step " + std::to_string(t) +
                                 " without a cached forward");
    StepCache& cache = cache_[static_cast<size_t>(t)];
    require_same_shape(grad_y, cache.xhat, "bntt backward");
    int64_t group = 0, plane = 0;
    stat_axes(grad_y, &group, &plane);
    const int batch = grad_y.dim(0);
    const int64_t sample = static_cast<int64_t>(channels) * plane;

    Backward result{Tensor(grad_y.shape()), Tensor({channels})};
    for (int c = 0; c < channels; ++c) {
        const float g = gamma.at2(t, c);
        const float inv_std = cache.inv_std[static_cast<size_t>(c)];
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < batch; ++n) {
            const float* dy = grad_y.data() + n * sample + c * plane;
            const float* xh = cache.xhat.data() + n * sample + c * plane;
            for (int64_t i = 0; i < plane; ++i) {
                const double dxhat = static_cast<double>(dy[i]) * g;
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xh[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
            }
        }
        result.grad_gamma_t[c] = static_cast<float>(sum_dy_xhat);
        gamma_grad.at2(t, c) += static_cast<float>(sum_dy_xhat);
        const float mean_dxhat = static_cast<float>(sum_dxhat / group);
        const float mean_dxhat_xhat = static_cast<float>(sum_dxhat_xhat / group);
        for (int n = 0; n < batch; ++n) {
            const float* dy = grad_y.data() + n * sample + c * plane;
            const float* xh = cache.xhat.data() + n * sample + c * plane;
            float* dx = result.grad_x.data() + n * sample + c * plane;
            for (int64_t i = 0; i < plane; ++i)
                dx[i] = inv_std * (dy[i] * g - mean_dxhat - xh[i] * mean_dxhat_xhat);
        }
    }
    return result;
}

namespace {

Tensor xavier_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int64_t i = 0; i < t.numel(); ++i)
        t[i] = static_cast<float>((2.0 * rng.next_double() - 1.0) * limit);
    return t;
}

}  // namespace

SnnModel::SnnModel(const SnnArch& arch, const SnnConfig& cfg, uint64_t init_seed)
    : arch_(arch), cfg_(cfg) {
    cfg_.validate();
    if (arch.side % 4 != 0 || arch.side < 4)
        throw std::invalid_argument("snn: input side must be a positive multiple of 4, got " +
                                    std::to_string(arch.side));
    if (arch.num_classes < 2) throw std::invalid_argument("snn: need at least two classes");

    conv1_spec_ = {arch.in_channels, 32, 3, 1, 1};
    conv2_spec_ = {32, 32, 3, 1, 1};
    conv3_spec_ = {32, 64, 3, 1, 1};
    const int half = arch.side / 2, quarter = arch.side / 4;
    const int flat = 64 * quarter * quarter;
    (void)half;

    Rng rng(init_seed);
    conv1_w_ = xavier_uniform({32, arch.in_channels, 3, 3}, arch.in_channels * 9, 32 * 9, rng);
    conv2_w_ = xavier_uniform({32, 32, 3, 3}, 32 * 9, 32 * 9, rng);
    conv3_w_ = xavier_uniform({64, 32, 3, 3}, 32 * 9, 64 * 9, rng);
    fc1_w_ = xavier_uniform({128, flat}, flat, 128, rng);
    fc2_w_ = xavier_uniform({arch.num_classes, 128}, 128, arch.num_classes, rng);
    conv1_g_ = Tensor(conv1_w_.shape());
    conv2_g_ = Tensor(conv2_w_.shape());
    conv3_g_ = Tensor(conv3_w_.shape());
    fc1_g_ = Tensor(fc1_w_.shape());
    fc2_g_ = Tensor(fc2_w_.shape());

    bn1_ = BnttLayer(cfg_.time_steps, 32, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn2_ = BnttLayer(cfg_.time_steps, 32, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn3_ = BnttLayer(cfg_.time_steps, 64, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn4_ = BnttLayer(cfg_.time_steps, 128, cfg_.bn_epsilon, cfg_.bn_momentum);
}

std::vector<ParamRef> SnnModel::parameters() {
    return {
        {"conv1.weight", &conv1_w_, &conv1_g_}, {"conv2.weight", &conv2_w_, &conv2_g_},
        {"conv3.weight", &conv3_w_, &conv3_g_}, {"fc1.weight", &fc1_w_, &fc1_g_},
        {"fc2.weight", &fc2_w_, &fc2_g_},       {"bn1.gamma", &bn1_.gamma, &bn1_.gamma_grad},
        {"bn2.gamma", &bn2_.gamma, &bn2_.gamma_grad},
        {"bn3.gamma", &bn3_.gamma, &bn3_.gamma_grad},
        {"bn4.gamma", &bn4_.gamma, &bn4_.gamma_grad},
    };
}

std::vector<StateRef> SnnModel::state_tensors() {
    std::vector<StateRef> refs;
    for (const auto& p : parameters()) refs.push_back({p.name, p.value});
    BnttLayer* bns[] = {&bn1_, &bn2_, &bn3_, &bn4_};
    const char* names[] = {"bn1", "bn2", "bn3", "bn4"};
    for (int i = 0; i < 4; ++i) {
        refs.push_back({std::string(names[i]) + ".running_mean", &bns[i]->running_mean});
        refs.push_back({std::string(names[i]) + ".running_var", &bns[i]->running_var});
    }
    return refs;
}

bool SnnModel::stats_ready() const {
    return bn1_.has_stats && bn2_.has_stats && bn3_.has_stats && bn4_.has_stats;
}

void SnnModel::mark_stats_ready() {
    bn1_.has_stats = bn2_.has_stats = bn3_.has_stats = bn4_.has_stats = true;
}

void SnnModel::zero_grad() {
    conv1_g_.fill(0.0f);
    conv2_g_.fill(0.0f);
    conv3_g_.fill(0.0f);
    fc1_g_.fill(0.0f);
    fc2_g_.fill(0.0f);
    bn1_.zero_grad();
    bn2_.zero_grad();
    bn3_.zero_grad();
    bn4_.zero_grad();
}

void SnnModel::clip_grads() {
    for (auto& p : parameters()) clip_tensor(*p.grad, cfg_.grad_clip);
}

void SnnModel::apply_sgd(float eta) {
    for (auto& p : parameters()) sgd_step(*p.value, *p.grad, eta);
}

Tensor SnnModel::forward(const std::vector<const SpikeTrain*>& batch, bool train,
                         SpikeRateRecorder* rec) {
    return run(batch, train, /*eval_stats=*/!train, rec);
}

Tensor SnnModel::run(const std::vector<const SpikeTrain*>& batch, bool train, bool eval_stats,
                     SpikeRateRecorder* rec) {
    if (batch.empty()) throw std::invalid_argument("snn forward: empty batch");
    const int T = cfg_.time_steps;
    for (const SpikeTrain* tr : batch)
        if (tr->steps != T)
            throw std::invalid_argument("snn forward: spike train has " +
                                        std::to_string(tr->steps) + " steps, model expects " +
                                        std::to_string(T));
    const int n = static_cast<int>(batch.size());
    const int s = arch_.side;
    if (batch.front()->side != s || batch.front()->channels != arch_.in_channels)
        throw std::invalid_argument("snn forward: train frame shape mismatch");

    // Eval-mode normalization needs recorded statistics; a never-trained model
    // falls back to this batch's statistics without updating the running ones.
    const bool train_stats = !eval_stats || !stats_ready();
    const bool update_running = train;

    steps_.clear();
    if (train) steps_.resize(static_cast<size_t>(T));
    cached_batch_ = n;

    Tensor u1({n, 32, s, s}), u2({n, 32, s, s});
    Tensor u3({n, 64, s / 2, s / 2});
    Tensor u4({n, 128});
    Tensor head({n, arch_.num_classes});

    for (int t = 0; t < T; ++t) {
        Tensor x = spike_batch_frame(batch, t);
        if (rec) rec->count_tensor("input", x.data(), x.numel());

        Tensor y1 = bn1_.forward(conv2d_forward(x, conv1_w_, conv1_spec_), t, train_stats,
                                 update_running);
        if (rec) rec->count_tensor("bn1", y1.data(), y1.numel());
        LifResult l1 = lif_step(u1, y1, cfg_);
        u1 = std::move(l1.u_new);
        if (rec) rec->count_tensor("lif1", l1.spikes.data(), l1.spikes.numel());

        Tensor y2 = bn2_.forward(conv2d_forward(l1.spikes, conv2_w_, conv2_spec_), t, train_stats,
                                 update_running);
        if (rec) rec->count_tensor("bn2", y2.data(), y2.numel());
        LifResult l2 = lif_step(u2, y2, cfg_);
        u2 = std::move(l2.u_new);
        if (rec) rec->count_tensor("lif2", l2.spikes.data(), l2.spikes.numel());

        Tensor p1 = avgpool_forward(l2.spikes, 2);
        if (rec) rec->count_tensor("pool1", p1.data(), p1.numel());

        Tensor y3 = bn3_.forward(conv2d_forward(p1, conv3_w_, conv3_spec_), t, train_stats,
                                 update_running);
        if (rec) rec->count_tensor("bn3", y3.data(), y3.numel());
        LifResult l3 = lif_step(u3, y3, cfg_);
        u3 = std::move(l3.u_new);
        if (rec) rec->count_tensor("lif3", l3.spikes.data(), l3.spikes.numel());

        Tensor p2 = avgpool_forward(l3.spikes, 2);
        if (rec) rec->count_tensor("pool2", p2.data(), p2.numel());
        Tensor flat = p2;
        flat.reshape({n, 64 * (s / 4) * (s / 4)});

        Tensor y4 = bn4_.forward(linear_forward(flat, fc1_w_), t, train_stats, update_running);
        if (rec) rec->count_tensor("bn4", y4.data(), y4.numel());
        LifResult l4 = lif_step(u4, y4, cfg_);
        u4 = std::move(l4.u_new);
        if (rec) rec->count_tensor("lif4", l4.spikes.data(), l4.spikes.numel());

        Tensor z5 = linear_forward(l4.spikes, fc2_w_);
        for (int64_t i = 0; i < head.numel(); ++i) head[i] = cfg_.leak * head[i] + z5[i];
        if (rec) rec->count_tensor("head", head.data(), head.numel());

        if (train) {
            StepCache& sc = steps_[static_cast<size_t>(t)];
            sc.input = std::move(x);
            sc.u1 = std::move(l1.u_pre);
            sc.o1 = std::move(l1.spikes);
            sc.u2 = std::move(l2.u_pre);
            sc.o2 = std::move(l2.spikes);
            sc.p1 = std::move(p1);
            sc.u3 = std::move(l3.u_pre);
            sc.o3 = std::move(l3.spikes);
            sc.flat = std::move(flat);
            sc.u4 = std::move(l4.u_pre);
            sc.o4 = std::move(l4.spikes);
        }
    }
    return head;
}

// d(u_post)/d(u_pre) along the carried-state path. Hard reset zeroes the
// potential on firing, so the carried derivative is blocked there; soft reset
// keeps it, minus theta times the surrogate through the spike term.
float SnnModel::reset_path_grad(float u_pre, float spike) const {
    if (cfg_.spike_mode == SpikeMode::Binary && cfg_.reset == ResetMode::Hard)
        return 1.0f - spike;
    return 1.0f - cfg_.threshold * surrogate_grad(u_pre, cfg_);
}

void SnnModel::backward(const Tensor& grad_logits) {
    if (steps_.empty())
        throw std::runtime_error("snn backward: no cached forward pass");
    const int T = cfg_.time_steps;
    const int n = cached_batch_;
    if (grad_logits.rank() != 2 || grad_logits.dim(0) != n ||
        grad_logits.dim(1) != arch_.num_classes)
        throw std::invalid_argument("snn backward: grad_logits shape mismatch");

    const int s = arch_.side;
    Tensor head_grad = grad_logits;  // d(loss)/d(head potential at current step)
    Tensor du1({n, 32, s, s}), du2({n, 32, s, s});
    Tensor du3({n, 64, s / 2, s / 2});
    Tensor du4({n, 128});

    for (int t = T - 1; t >= 0; --t) {
        StepCache& sc = steps_[static_cast<size_t>(t)];

        // Head: u^t = leak * u^{t-1} + fc2(o4^t)
        LinearGrads g5 = linear_backward(head_grad, sc.o4, fc2_w_);
        for (int64_t i = 0; i < fc2_g_.numel(); ++i) fc2_g_[i] += g5.grad_weights[i];
        if (t > 0)
            for (int64_t i = 0; i < head_grad.numel(); ++i) head_grad[i] *= cfg_.leak;

        // Layer 4 (fc1 + bn4 + lif4)
        Tensor dupre4(du4.shape());
        for (int64_t i = 0; i < dupre4.numel(); ++i)
            dupre4[i] = g5.grad_input[i] * surrogate_grad(sc.u4[i], cfg_) +
                        du4[i] * reset_path_grad(sc.u4[i], sc.o4[i]);
        auto b4 = bn4_.backward(dupre4, t);
        LinearGrads g4 = linear_backward(b4.grad_x, sc.flat, fc1_w_);
        for (int64_t i = 0; i < fc1_g_.numel(); ++i) fc1_g_[i] += g4.grad_weights[i];
        for (int64_t i = 0; i < du4.numel(); ++i) du4[i] = cfg_.leak * dupre4[i];

        // Through pool2 into layer 3
        Tensor dp2 = g4.grad_input;
        dp2.reshape({n, 64, s / 4, s / 4});
        Tensor do3 = avgpool_backward(dp2, 2);
        Tensor dupre3(du3.shape());
        for (int64_t i = 0; i < dupre3.numel(); ++i)
            dupre3[i] = do3[i] * surrogate_grad(sc.u3[i], cfg_) +
                        du3[i] * reset_path_grad(sc.u3[i], sc.o3[i]);
        auto b3 = bn3_.backward(dupre3, t);
        ConvGrads g3 = conv2d_backward(b3.grad_x, sc.p1, conv3_w_, conv3_spec_);
        for (int64_t i = 0; i < conv3_g_.numel(); ++i) conv3_g_[i] += g3.grad_weights[i];
        for (int64_t i = 0; i < du3.numel(); ++i) du3[i] = cfg_.leak * dupre3[i];

        // Through pool1 into layer 2
        Tensor do2 = avgpool_backward(g3.grad_input, 2);
        Tensor dupre2(du2.shape());
        for (int64_t i = 0; i < dupre2.numel(); ++i)
            dupre2[i] = do2[i] * surrogate_grad(sc.u2[i], cfg_) +
                        du2[i] * reset_path_grad(sc.u2[i], sc.o2[i]);
        auto b2 = bn2_.backward(dupre2, t);
        ConvGrads g2 = conv2d_backward(b2.grad_x, sc.o1, conv2_w_, conv2_spec_);
        for (int64_t i = 0; i < conv2_g_.numel(); ++i) conv2_g_[i] += g2.grad_weights[i];
        for (int64_t i = 0; i < du2.numel(); ++i) du2[i] = cfg_.leak * dupre2[i];

        // Layer 1
        Tensor dupre1(du1.shape());
        for (int64_t i = 0; i < dupre1.numel(); ++i)
            dupre1[i] = g2.grad_input[i] * surrogate_grad(sc.u1[i], cfg_) +
                        du1[i] * reset_path_grad(sc.u1[i], sc.o1[i]);
        auto b1 = bn1_.backward(dupre1, t);
        ConvGrads g1 = conv2d_backward(b1.grad_x, sc.input, conv1_w_, conv1_spec_);
        for (int64_t i = 0; i < conv1_g_.numel(); ++i) conv1_g_[i] += g1.grad_weights[i];
        for (int64_t i = 0; i < du1.numel(); ++i) du1[i] = cfg_.leak * dupre1[i];
    }
}

double SnnModel::train_step(const EncodedBatch& batch, float eta, SpikeRateRecorder* rec) {
    if (batch.trains.empty())
        throw std::invalid_argument("snn train_step: batch carries no spike trains");
    zero_grad();
    Tensor logits = forward(batch.trains, /*train=*/true, rec);
    LossResult loss = softmax_cross_entropy(logits, batch.labels);
    backward(loss.grad);
    clip_grads();
    apply_sgd(eta);
    steps_.clear();
    bn1_.clear_cache();
    bn2_.clear_cache();
    bn3_.clear_cache();
    bn4_.clear_cache();
    return loss.loss;
}

Tensor SnnModel::predict(const EncodedBatch& batch, SpikeRateRecorder* rec) {
    if (batch.trains.empty())
        throw std::invalid_argument("snn predict: batch carries no spike trains");
    Tensor logits = run(batch.trains, /*train=*/false, /*eval_stats=*/true, rec);
    bn1_.clear_cache();
    bn2_.clear_cache();
    bn3_.clear_cache();
    bn4_.clear_cache();
    return logits;
}

std::vector<LayerDesc> SnnModel::layer_descriptors() const {
    const int s = arch_.side, half = s / 2, quarter = s / 4;
    const int flat = 64 * quarter * quarter;
    using K = LayerDesc::Kind;
    std::vector<LayerDesc> d;
    d.push_back({K::Conv, "conv1", 3, arch_.in_channels, 32, s, s, 0, 0});
    d.push_back({K::BatchNorm, "bn1", 0, 32, 32, s, s, 0, 0});
    d.push_back({K::Conv, "conv2", 3, 32, 32, s, s, 0, 0});
    d.push_back({K::BatchNorm, "bn2", 0, 32, 32, s, s, 0, 0});
    d.push_back({K::AvgPool, "ap1", 0, 32, 32, s, half, 0, 0});
    d.push_back({K::Conv, "conv3", 3, 32, 64, half, half, 0, 0});
    d.push_back({K::BatchNorm, "bn3", 0, 64, 64, half, half, 0, 0});
    d.push_back({K::AvgPool, "ap2", 0, 64, 64, half, quarter, 0, 0});
    d.push_back({K::FullyConnected, "fc1", 0, 0, 0, 0, 0, flat, 128});
    d.push_back({K::BatchNorm, "bn4", 0, 128, 128, 1, 1, 0, 0});
    d.push_back({K::FullyConnected, "fc2", 0, 0, 0, 0, 0, 128, arch_.num_classes});
    return d;
}

}  // namespace fedsnn
