#include "fedsnn/cnn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsnn {

void CnnConfig::validate() const {
    if (!(bn_epsilon > 0.0f)) throw std::invalid_argument("cnn: bn_epsilon must be positive");
    if (!(bn_momentum > 0.0f && bn_momentum < 1.0f))
        throw std::invalid_argument("cnn: bn_momentum must lie in (0,1)");
}

BatchNormLayer::BatchNormLayer(int c, float eps, float mom)
    : channels(c),
      epsilon(eps),
      momentum(mom),
      gamma({c}, 1.0f),
      gamma_grad({c}),
      running_mean({c}),
      running_var({c}, 1.0f) {}

void BatchNormLayer::stat_axes(const Tensor& x, int64_t* group, int64_t* plane) const {
    if (x.rank() == 4) {
        if (x.dim(1) != channels) throw std::invalid_argument("bn: channel count mismatch");
        *plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
        *group = x.dim(0) * *plane;
    } else if (x.rank() == 2) {
        if (x.dim(1) != channels) throw std::invalid_argument("bn: feature count mismatch");
        *plane = 1;
        *group = x.dim(0);
    } else {
        throw std::invalid_argument("bn: expected rank 2 or 4 input, got " + x.shape_str());
    }
}

Tensor BatchNormLayer::forward(const Tensor& x, bool train_stats, bool update_running) {
    if (!train_stats && !has_stats)
        throw std::runtime_error("bn: eval requested before any training batch");
    int64_t group = 0, plane = 0;
    stat_axes(x, &group, &plane);
    const int batch = x.dim(0);
    const int64_t sample = static_cast<int64_t>(channels) * plane;

    Tensor out(x.shape());
    if (train_stats) {
        cache_ = Cache{};
        cache_.xhat = Tensor(x.shape());
        cache_.inv_std.assign(static_cast<size_t>(channels), 0.0f);
        cache_.valid = true;
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
                running_mean[c] = momentum * running_mean[c] + (1.0f - momentum) * static_cast<float>(mean);
                running_var[c] = momentum * running_var[c] + (1.0f - momentum) * static_cast<float>(var);
            }
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        const float inv_std = static_cast<float>(1.0 / std::sqrt(var + epsilon));
        const float g = gamma[c];
        const float m = static_cast<float>(mean);
        if (cache_.valid) cache_.inv_std[static_cast<size_t>(c)] = inv_std;
        for (int n = 0; n < batch; ++n) {
            const float* p = x.data() + n * sample + c * plane;
            float* q = out.data() + n * sample + c * plane;
            float* xh = cache_.valid ? cache_.xhat.data() + n * sample + c * plane : nullptr;
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

Tensor BatchNormLayer::backward(const Tensor& grad_y) {
    if (!cache_.valid) throw std::runtime_error("bn: backward without a cached forward");
    require_same_shape(grad_y, cache_.xhat, "bn backward");
    int64_t group = 0, plane = 0;
    stat_axes(grad_y, &group, &plane);
    const int batch = grad_y.dim(0);
    const int64_t sample = static_cast<int64_t>(channels) * plane;

    Tensor grad_x(grad_y.shape());
    for (int c = 0; c < channels; ++c) {
        const float g = gamma[c];
        const float inv_std = cache_.inv_std[static_cast<size_t>(c)];
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < batch; ++n) {
            const float* dy = grad_y.data() + n * sample + c * plane;
            const float* xh = cache_.xhat.data() + n * sample + c * plane;
            for (int64_t i = 0; i < plane; ++i) {
                const double dxhat = static_cast<double>(dy[i]) * g;
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xh[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
            }
        }
        gamma_grad[c] += static_cast<float>(sum_dy_xhat);
        const float mean_dxhat = static_cast<float>(sum_dxhat / group);
        const float mean_dxhat_xhat = static_cast<float>(sum_dxhat_xhat / group);
        for (int n = 0; n < batch; ++n) {
            const float* dy = grad_y.data() + n * sample + c * plane;
            const float* xh = cache_.xhat.data() + n * sample + c * plane;
            float* dx = grad_x.data() + n * sample + c * plane;
            for (int64_t i = 0; i < plane; ++i)
                dx[i] = inv_std * (dy[i] * g - mean_dxhat - xh[i] * mean_dxhat_xhat);
        }
    }
    return grad_x;
}

namespace {

Tensor xavier_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int64_t i = 0; i < t.numel(); ++i)
        t[i] = static_cast<float>((2.0 * rng.next_double() - 1.0) * limit);
    return t;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
    return out;
}

Tensor relu_backward(const Tensor& grad, const Tensor& pre) {
    Tensor out(grad.shape());
    for (int64_t i = 0; i < grad.numel(); ++i) out[i] = pre[i] > 0.0f ? grad[i] : 0.0f;
    return out;
}

}  // namespace

CnnModel::CnnModel(const CnnArch& arch, const CnnConfig& cfg, uint64_t init_seed)
    : arch_(arch), cfg_(cfg) {
    cfg_.validate();
    if (arch.side % 4 != 0 || arch.side < 4)
        throw std::invalid_argument("cnn: input side must be a positive multiple of 4");
    if (arch.num_classes < 2) throw std::invalid_argument("cnn: need at least two classes");

    conv1_spec_ = {arch.in_channels, 32, 3, 1, 1};
    conv2_spec_ = {32, 32, 3, 1, 1};
    conv3_spec_ = {32, 64, 3, 1, 1};
    const int quarter = arch.side / 4;
    const int flat = 64 * quarter * quarter;

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

    bn1_ = BatchNormLayer(32, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn2_ = BatchNormLayer(32, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn3_ = BatchNormLayer(64, cfg_.bn_epsilon, cfg_.bn_momentum);
    bn4_ = BatchNormLayer(128, cfg_.bn_epsilon, cfg_.bn_momentum);
}

std::vector<ParamRef> CnnModel::parameters() {
    return {
        {"conv1.weight", &conv1_w_, &conv1_g_}, {"conv2.weight", &conv2_w_, &conv2_g_},
        {"conv3.weight", &conv3_w_, &conv3_g_}, {"fc1.weight", &fc1_w_, &fc1_g_},
        {"fc2.weight", &fc2_w_, &fc2_g_},       {"bn1.gamma", &bn1_.gamma, &bn1_.gamma_grad},
        {"bn2.gamma", &bn2_.gamma, &bn2_.gamma_grad},
        {"bn3.gamma", &bn3_.gamma, &bn3_.gamma_grad},
        {"bn4.gamma", &bn4_.gamma, &bn4_.gamma_grad},
    };
}

std::vector<StateRef> CnnModel::state_tensors() {
    std::vector<StateRef> refs;
    for (const auto& p : parameters()) refs.push_back({p.name, p.value});
    BatchNormLayer* bns[] = {&bn1_, &bn2_, &bn3_, &bn4_};
    const char* names[] = {"bn1", "bn2", "bn3", "bn4"};
    for (int i = 0; i < 4; ++i) {
        refs.push_back({std::string(names[i]) + ".running_mean", &bns[i]->running_mean});
        refs.push_back({std::string(names[i]) + ".running_var", &bns[i]->running_var});
    }
    return refs;
}

bool CnnModel::stats_ready() const {
    return bn1_.has_stats && bn2_.has_stats && bn3_.has_stats && bn4_.has_stats;
}

void CnnModel::mark_stats_ready() {
    bn1_.has_stats = bn2_.has_stats = bn3_.has_stats = bn4_.has_stats = true;
}

void CnnModel::zero_grad() {
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

void CnnModel::clip_grads() {
    for (auto& p : parameters()) clip_tensor(*p.grad, cfg_.grad_clip);
}

void CnnModel::apply_sgd(float eta) {
    for (auto& p : parameters()) sgd_step(*p.value, *p.grad, eta);
}

Tensor CnnModel::forward(const Tensor& images, bool train) {
    if (images.rank() != 4 || images.dim(1) != arch_.in_channels ||
        images.dim(2) != arch_.side || images.dim(3) != arch_.side)
        throw std::invalid_argument("cnn forward: expected [N," +
                                    std::to_string(arch_.in_channels) + "," +
                                    std::to_string(arch_.side) + "," +
                                    std::to_string(arch_.side) + "], got " + images.shape_str());
    const int n = images.dim(0), s = arch_.side;
    const bool train_stats = train || !stats_ready();
    const bool update_running = train;

    cache_ = Cache{};
    Tensor y1 = bn1_.forward(conv2d_forward(images, conv1_w_, conv1_spec_), train_stats,
                             update_running);
    Tensor a1 = relu(y1);
    Tensor y2 = bn2_.forward(conv2d_forward(a1, conv2_w_, conv2_spec_), train_stats,
                             update_running);
    Tensor a2 = relu(y2);
    Tensor p1 = avgpool_forward(a2, 2);
    Tensor y3 = bn3_.forward(conv2d_forward(p1, conv3_w_, conv3_spec_), train_stats,
                             update_running);
    Tensor a3 = relu(y3);
    Tensor p2 = avgpool_forward(a3, 2);
    Tensor flat = p2;
    flat.reshape({n, 64 * (s / 4) * (s / 4)});
    Tensor y4 = bn4_.forward(linear_forward(flat, fc1_w_), train_stats, update_running);
    Tensor a4 = relu(y4);
    Tensor logits = linear_forward(a4, fc2_w_);

    if (train) {
        cache_.input = images;
        cache_.y1 = std::move(y1);
        cache_.a1 = std::move(a1);
        cache_.y2 = std::move(y2);
        cache_.a2 = std::move(a2);
        cache_.p1 = std::move(p1);
        cache_.y3 = std::move(y3);
        cache_.a3 = std::move(a3);
        cache_.flat = std::move(flat);
        cache_.y4 = std::move(y4);
        cache_.a4 = std::move(a4);
        cache_.valid = true;
    }
    return logits;
}

void CnnModel::backward(const Tensor& grad_logits) {
    if (!cache_.valid) throw std::runtime_error("cnn backward: no cached forward pass");
    const int n = cache_.input.dim(0), s = arch_.side;

    LinearGrads g5 = linear_backward(grad_logits, cache_.a4, fc2_w_);
    for (int64_t i = 0; i < fc2_g_.numel(); ++i) fc2_g_[i] += g5.grad_weights[i];

    Tensor dy4 = relu_backward(g5.grad_input, cache_.y4);
    Tensor dz4 = bn4_.backward(dy4);
    LinearGrads g4 = linear_backward(dz4, cache_.flat, fc1_w_);
    for (int64_t i = 0; i < fc1_g_.numel(); ++i) fc1_g_[i] += g4.grad_weights[i];

    Tensor dp2 = g4.grad_input;
    dp2.reshape({n, 64, s / 4, s / 4});
    Tensor da3 = avgpool_backward(dp2, 2);
    Tensor dy3 = relu_backward(da3, cache_.y3);
    Tensor dz3 = bn3_.backward(dy3);
    ConvGrads g3 = conv2d_backward(dz3, cache_.p1, conv3_w_, conv3_spec_);
    for (int64_t i = 0; i < conv3_g_.numel(); ++i) conv3_g_[i] += g3.grad_weights[i];

    Tensor da2 = avgpool_backward(g3.grad_input, 2);
    Tensor dy2 = relu_backward(da2, cache_.y2);
    Tensor dz2 = bn2_.backward(dy2);
    ConvGrads g2 = conv2d_backward(dz2, cache_.a1, conv2_w_, conv2_spec_);
    for (int64_t i = 0; i < conv2_g_.numel(); ++i) conv2_g_[i] += g2.grad_weights[i];

    Tensor dy1 = relu_backward(g2.grad_input, cache_.y1);
    Tensor dz1 = bn1_.backward(dy1);
    ConvGrads g1 = conv2d_backward(dz1, cache_.input, conv1_w_, conv1_spec_);
    for (int64_t i = 0; i < conv1_g_.numel(); ++i) conv1_g_[i] += g1.grad_weights[i];
}

double CnnModel::train_step(const EncodedBatch& batch, float eta, SpikeRateRecorder* rec) {
    (void)rec;  // the dense baseline has no spiking traffic to record
    if (batch.dense.empty())
        throw std::invalid_argument("cnn train_step: batch carries no dense images");
    zero_grad();
    Tensor logits = forward(batch.dense, /*train=*/true);
    LossResult loss = softmax_cross_entropy(logits, batch.labels);
    backward(loss.grad);
    clip_grads();
    apply_sgd(eta);
    cache_ = Cache{};
    bn1_.clear_cache();
    bn2_.clear_cache();
    bn3_.clear_cache();
    bn4_.clear_cache();
    return loss.loss;
}

Tensor CnnModel::predict(const EncodedBatch& batch, SpikeRateRecorder* rec) {
    (void)rec;
    if (batch.dense.empty())
        throw std::invalid_argument("cnn predict: batch carries no dense images");
    Tensor logits = forward(batch.dense, /*train=*/false);
    bn1_.clear_cache();
    bn2_.clear_cache();
    bn3_.clear_cache();
    bn4_.clear_cache();
    return logits;
}

std::vector<LayerDesc> CnnModel::layer_descriptors() const {
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
