#pragma once

// Double-precision reference implementations of the forward maps, used as
// independent oracles for gradient checks and composition tests. Written as
// plain loops, decoupled from the production kernels.

#include <cmath>
#include <vector>

#include "fedsnn/cnn.hpp"
#include "fedsnn/snn.hpp"

namespace testsup {

using dvec = std::vector<double>;

inline dvec to_dvec(const fedsnn::Tensor& t) {
    dvec v(static_cast<size_t>(t.numel()));
    for (int64_t i = 0; i < t.numel(); ++i) v[static_cast<size_t>(i)] = t[i];
    return v;
}

// input [N,C,H,H], weights tensor [Cout,C,ks,ks]; stride 1.
inline dvec conv2d_ref(const dvec& in, int n_batch, int c_in, int side,
                       const fedsnn::Tensor& w, int pad) {
    const int c_out = w.dim(0), ks = w.dim(2);
    const int m = side + 2 * pad - ks + 1;
    dvec out(static_cast<size_t>(n_batch) * c_out * m * m, 0.0);
    for (int n = 0; n < n_batch; ++n)
        for (int co = 0; co < c_out; ++co)
            for (int oh = 0; oh < m; ++oh)
                for (int ow = 0; ow < m; ++ow) {
                    double acc = 0.0;
                    for (int ci = 0; ci < c_in; ++ci)
                        for (int kh = 0; kh < ks; ++kh)
                            for (int kw = 0; kw < ks; ++kw) {
                                const int ih = oh - pad + kh, iw = ow - pad + kw;
                                if (ih < 0 || ih >= side || iw < 0 || iw >= side) continue;
                                acc += in[((static_cast<size_t>(n) * c_in + ci) * side + ih) *
                                              side + iw] *
                                       w.at4(co, ci, kh, kw);
                            }
                    out[((static_cast<size_t>(n) * c_out + co) * m + oh) * m + ow] = acc;
                }
    return out;
}

inline dvec avgpool_ref(const dvec& in, int n_batch, int channels, int side, int window) {
    const int m = side / window;
    dvec out(static_cast<size_t>(n_batch) * channels * m * m, 0.0);
    for (int n = 0; n < n_batch; ++n)
        for (int c = 0; c < channels; ++c)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double acc = 0.0;
                    for (int di = 0; di < window; ++di)
                        for (int dj = 0; dj < window; ++dj)
                            acc += in[((static_cast<size_t>(n) * channels + c) * side +
                                       i * window + di) *
                                          side +
                                      j * window + dj];
                    out[((static_cast<size_t>(n) * channels + c) * m + i) * m + j] =
                        acc / (window * window);
                }
    return out;
}

inline dvec linear_ref(const dvec& in, int n_batch, int f_in, const fedsnn::Tensor& w) {
    const int f_out = w.dim(0);
    dvec out(static_cast<size_t>(n_batch) * f_out, 0.0);
    for (int n = 0; n < n_batch; ++n)
        for (int o = 0; o < f_out; ++o) {
            double acc = 0.0;
            for (int i = 0; i < f_in; ++i)
                acc += in[static_cast<size_t>(n) * f_in + i] * w.at2(o, i);
            out[static_cast<size_t>(n) * f_out + o] = acc;
        }
    return out;
}

// Batch statistics per channel over (N, plane); scale by the step's gamma
// row, no shift.
inline void bn_ref(dvec& x, int n_batch, int channels, int64_t plane, const float* gamma,
                   double eps) {
    const int64_t sample = channels * plane;
    const double m = static_cast<double>(n_batch) * plane;
    for (int c = 0; c < channels; ++c) {
        double sum = 0.0;
        for (int n = 0; n < n_batch; ++n)
            for (int64_t i = 0; i < plane; ++i) sum += x[n * sample + c * plane + i];
        const double mean = sum / m;
        double sq = 0.0;
        for (int n = 0; n < n_batch; ++n)
            for (int64_t i = 0; i < plane; ++i) {
                const double d = x[n * sample + c * plane + i] - mean;
                sq += d * d;
            }
        const double inv_std = 1.0 / std::sqrt(sq / m + eps);
        for (int n = 0; n < n_batch; ++n)
            for (int64_t i = 0; i < plane; ++i) {
                auto& v = x[n * sample + c * plane + i];
                v = gamma[c] * (v - mean) * inv_std;
            }
    }
}

inline double smooth_spike_ref(double u, double alpha, double theta) {
    if (u <= 0.0) return 0.0;
    if (u >= 2.0 * theta) return alpha * theta;
    if (u <= theta) return alpha * u * u / (2.0 * theta);
    const double d = u - theta;
    return alpha * theta / 2.0 + alpha * (d - d * d / (2.0 * theta));
}

inline double softmax_xent_ref(const dvec& logits, int n_batch, int classes,
                               const std::vector<int>& labels) {
    double total = 0.0;
    for (int n = 0; n < n_batch; ++n) {
        const double* row = logits.data() + static_cast<size_t>(n) * classes;
        double peak = row[0];
        for (int j = 1; j < classes; ++j) peak = std::max(peak, row[j]);
        double denom = 0.0;
        for (int j = 0; j < classes; ++j) denom += std::exp(row[j] - peak);
        total += std::log(denom) - (row[labels[static_cast<size_t>(n)]] - peak);
    }
    return total / n_batch;
}

inline const fedsnn::Tensor& named_param(fedsnn::Model& model, const std::string& name) {
    for (auto& p : model.parameters())
        if (p.name == name) return *p.value;
    throw std::runtime_error("oracle: no parameter named " + name);
}

// Mean cross-entropy of the smooth-spiking network (integral-ramp firing,
// soft reset), recomputed from the model's current weights in double.
inline double snn_smooth_loss_ref(fedsnn::SnnModel& model,
                                  const std::vector<const fedsnn::SpikeTrain*>& batch,
                                  const std::vector<int>& labels) {
    const fedsnn::SnnArch& arch = model.arch();
    const fedsnn::SnnConfig& cfg = model.config();
    const int n = static_cast<int>(batch.size());
    const int s = arch.side, half = s / 2, quarter = s / 4;
    const int flat = 64 * quarter * quarter;
    const double lam = cfg.leak, theta = cfg.threshold, alpha = cfg.surrogate_alpha;
    const double eps = cfg.bn_epsilon;

    const fedsnn::Tensor& w1 = named_param(model, "conv1.weight");
    const fedsnn::Tensor& w2 = named_param(model, "conv2.weight");
    const fedsnn::Tensor& w3 = named_param(model, "conv3.weight");
    const fedsnn::Tensor& w4 = named_param(model, "fc1.weight");
    const fedsnn::Tensor& w5 = named_param(model, "fc2.weight");
    const fedsnn::Tensor& g1 = named_param(model, "bn1.gamma");
    const fedsnn::Tensor& g2 = named_param(model, "bn2.gamma");
    const fedsnn::Tensor& g3 = named_param(model, "bn3.gamma");
    const fedsnn::Tensor& g4 = named_param(model, "bn4.gamma");

    dvec u1(static_cast<size_t>(n) * 32 * s * s, 0.0);
    dvec u2(u1.size(), 0.0);
    dvec u3(static_cast<size_t>(n) * 64 * half * half, 0.0);
    dvec u4(static_cast<size_t>(n) * 128, 0.0);
    dvec head(static_cast<size_t>(n) * arch.num_classes, 0.0);

    auto lif = [&](dvec& u, const dvec& drive, dvec& spikes) {
        for (size_t i = 0; i < u.size(); ++i) {
            const double pre = lam * u[i] + drive[i];
            const double o = smooth_spike_ref(pre, alpha, theta);
            spikes[i] = o;
            u[i] = pre - theta * o;
        }
    };

    for (int t = 0; t < cfg.time_steps; ++t) {
        dvec x(static_cast<size_t>(n) * arch.in_channels * s * s);
        for (int b = 0; b < n; ++b) {
            const int8_t* frame = batch[static_cast<size_t>(b)]->frame(t);
            for (int64_t i = 0; i < batch[static_cast<size_t>(b)]->frame_elems(); ++i)
                x[static_cast<size_t>(b) * arch.in_channels * s * s + i] = frame[i];
        }
        dvec z1 = conv2d_ref(x, n, arch.in_channels, s, w1, 1);
        bn_ref(z1, n, 32, static_cast<int64_t>(s) * s, g1.data() + static_cast<int64_t>(t) * 32,
               eps);
        dvec o1(u1.size());
        lif(u1, z1, o1);

        dvec z2 = conv2d_ref(o1, n, 32, s, w2, 1);
        bn_ref(z2, n, 32, static_cast<int64_t>(s) * s, g2.data() + static_cast<int64_t>(t) * 32,
               eps);
        dvec o2(u2.size());
        lif(u2, z2, o2);

        dvec p1 = avgpool_ref(o2, n, 32, s, 2);
        dvec z3 = conv2d_ref(p1, n, 32, half, w3, 1);
        bn_ref(z3, n, 64, static_cast<int64_t>(half) * half,
               g3.data() + static_cast<int64_t>(t) * 64, eps);
        dvec o3(u3.size());
        lif(u3, z3, o3);

        dvec p2 = avgpool_ref(o3, n, 64, half, 2);
        dvec z4 = linear_ref(p2, n, flat, w4);
        bn_ref(z4, n, 128, 1, g4.data() + static_cast<int64_t>(t) * 128, eps);
        dvec o4(u4.size());
        lif(u4, z4, o4);

        dvec z5 = linear_ref(o4, n, 128, w5);
        for (size_t i = 0; i < head.size(); ++i) head[i] = lam * head[i] + z5[i];
    }
    return softmax_xent_ref(head, n, arch.num_classes, labels);
}

// Mean cross-entropy of the ReLU baseline recomputed in double. When
// `min_relu_margin` is given it receives the smallest |pre-activation| over
// all four ReLU gates: finite differences are only trustworthy when the
// perturbation cannot push an activation across the kink.
inline double cnn_loss_ref(fedsnn::CnnModel& model, const fedsnn::Tensor& images,
                           const std::vector<int>& labels, double eps,
                           double* min_relu_margin = nullptr) {
    const int n = images.dim(0), c_in = images.dim(1), s = images.dim(2);
    const int half = s / 2, quarter = s / 4;
    const int flat = 64 * quarter * quarter;
    const int classes = model.num_classes();

    const fedsnn::Tensor& w1 = named_param(model, "conv1.weight");
    const fedsnn::Tensor& w2 = named_param(model, "conv2.weight");
    const fedsnn::Tensor& w3 = named_param(model, "conv3.weight");
    const fedsnn::Tensor& w4 = named_param(model, "fc1.weight");
    const fedsnn::Tensor& w5 = named_param(model, "fc2.weight");
    const fedsnn::Tensor& g1 = named_param(model, "bn1.gamma");
    const fedsnn::Tensor& g2 = named_param(model, "bn2.gamma");
    const fedsnn::Tensor& g3 = named_param(model, "bn3.gamma");
    const fedsnn::Tensor& g4 = named_param(model, "bn4.gamma");

    double margin = 1e300;
    auto relu = [&margin](dvec& v) {
        for (auto& x : v) {
            margin = std::min(margin, std::fabs(x));
            x = x > 0.0 ? x : 0.0;
        }
    };

    dvec x = to_dvec(images);
    dvec z1 = conv2d_ref(x, n, c_in, s, w1, 1);
    bn_ref(z1, n, 32, static_cast<int64_t>(s) * s, g1.data(), eps);
    relu(z1);
    dvec z2 = conv2d_ref(z1, n, 32, s, w2, 1);
    bn_ref(z2, n, 32, static_cast<int64_t>(s) * s, g2.data(), eps);
    relu(z2);
    dvec p1 = avgpool_ref(z2, n, 32, s, 2);
    dvec z3 = conv2d_ref(p1, n, 32, half, w3, 1);
    bn_ref(z3, n, 64, static_cast<int64_t>(half) * half, g3.data(), eps);
    relu(z3);
    dvec p2 = avgpool_ref(z3, n, 64, half, 2);
    dvec z4 = linear_ref(p2, n, flat, w4);
    bn_ref(z4, n, 128, 1, g4.data(), eps);
    relu(z4);
    dvec z5 = linear_ref(z4, n, 128, w5);
    if (min_relu_margin) *min_relu_margin = margin;
    return softmax_xent_ref(z5, n, classes, labels);
}

}  // namespace testsup
