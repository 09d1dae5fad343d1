#include "fedsnn/encoding.hpp"

#include <stdexcept>
#include <string>

namespace fedsnn {

Tensor SpikeTrain::frame_tensor(int t) const {
    Tensor out({channels, side, side});
    const int8_t* src = frame(t);
    for (int64_t i = 0; i < frame_elems(); ++i) out[i] = static_cast<float>(src[i]);
    return out;
}

NrfeParams receptive_field_params(int side, int kernel_size, int batch_size, int channels,
                                  int local_epochs) {
    if (side <= kernel_size)
        throw std::invalid_argument("receptive_field_params: side " + std::to_string(side) +
                                    " must exceed kernel size " + std::to_string(kernel_size));
    if (batch_size < 1 || channels < 1 || local_epochs < 1)
        throw std::invalid_argument("receptive_field_params: B, C, E must be >= 1");

    NrfeParams p;
    p.side = side;
    p.kernel_size = kernel_size;
    p.batch_size = batch_size;
    p.channels = channels;
    p.local_epochs = local_epochs;

    // mu_g = (1/s) * sum_{i=1..s} (2i-1) / (2(s-ks))
    double sum = 0.0;
    for (int i = 1; i <= side; ++i)
        sum += static_cast<double>(2 * i - 1) / (2.0 * (side - kernel_size));
    p.mu_g = sum / side;
    // sigma_g = B*C*E / (s-ks)
    p.sigma_g = static_cast<double>(batch_size) * channels * local_epochs / (side - kernel_size);
    return p;
}

Tensor normalize(const Tensor& image) {
    if (image.rank() != 3)
        throw std::invalid_argument("normalize: expected [C,s,s], got " + image.shape_str());
    const int channels = image.dim(0);
    const int64_t plane = static_cast<int64_t>(image.dim(1)) * image.dim(2);
    Tensor out(image.shape());
    for (int c = 0; c < channels; ++c) {
        const float* src = image.data() + c * plane;
        float* dst = out.data() + c * plane;
        float lo = src[0], hi = src[0];
        for (int64_t i = 1; i < plane; ++i) {
            lo = std::min(lo, src[i]);
            hi = std::max(hi, src[i]);
        }
        if (hi == lo) {
            for (int64_t i = 0; i < plane; ++i) dst[i] = 0.0f;
        } else {
            const float inv = 1.0f / (hi - lo);
            for (int64_t i = 0; i < plane; ++i) dst[i] = (src[i] - lo) * inv;
        }
    }
    return out;
}

Tensor sample_gaussian_field(const NrfeParams& params, Rng& rng) {
    Tensor field({params.side, params.side});
    for (int64_t i = 0; i < field.numel(); ++i)
        field[i] = static_cast<float>(rng.next_gaussian(params.mu_g, params.sigma_g));
    return field;
}

namespace {

inline int8_t code_literal(float xs, float g) {
    const float q = xs + g;
    if (q >= xs && q >= g) return 1;
    if (q <= xs && q <= g) return -1;
    return 0;
}

inline int8_t code_threshold(float xs, float g) { return xs >= g ? 1 : 0; }

}  // namespace

SpikeTrain nrfe_encode(const Tensor& image, const NrfeParams& params, int steps, Rng& rng,
                       NrfeVariant variant) {
    if (steps <= 0) throw std::invalid_argument("nrfe_encode: time step count must be positive");
    if (image.rank() != 3 || image.dim(1) != params.side || image.dim(2) != params.side)
        throw std::invalid_argument("nrfe_encode: image " + image.shape_str() +
                                    " does not match configured side " +
                                    std::to_string(params.side));
    const Tensor norm = normalize(image);
    const int channels = image.dim(0);
    const int64_t plane = static_cast<int64_t>(params.side) * params.side;

    SpikeTrain train;
    train.steps = steps;
    train.channels = channels;
    train.side = params.side;
    train.values.resize(static_cast<size_t>(steps) * channels * plane);

    Tensor field = sample_gaussian_field(params, rng);
    for (int t = 0; t < steps; ++t) {
        if (params.resample_per_step && t > 0) field = sample_gaussian_field(params, rng);
        int8_t* dst = train.values.data() + static_cast<size_t>(t) * channels * plane;
        for (int c = 0; c < channels; ++c) {
            const float* xs = norm.data() + c * plane;
            for (int64_t i = 0; i < plane; ++i) {
                const float g = field[i];
                dst[c * plane + i] = variant == NrfeVariant::Literal ? code_literal(xs[i], g)
                                                                     : code_threshold(xs[i], g);
            }
        }
    }
    return train;
}

SpikeTrain rate_encode(const Tensor& image, int steps, Rng& rng) {
    if (steps <= 0) throw std::invalid_argument("rate_encode: time step count must be positive");
    if (image.rank() != 3 || image.dim(1) != image.dim(2))
        throw std::invalid_argument("rate_encode: expected [C,s,s], got " + image.shape_str());
    const Tensor norm = normalize(image);

    SpikeTrain train;
    train.steps = steps;
    train.channels = image.dim(0);
    train.side = image.dim(1);
    train.values.resize(static_cast<size_t>(steps) * norm.numel());
    for (int t = 0; t < steps; ++t) {
        int8_t* dst = train.values.data() + static_cast<size_t>(t) * norm.numel();
        for (int64_t i = 0; i < norm.numel(); ++i)
            dst[i] = rng.next_double() < norm[i] ? 1 : 0;
    }
    return train;
}

Tensor spike_batch_frame(const std::vector<const SpikeTrain*>& batch, int t) {
    if (batch.empty()) throw std::invalid_argument("spike_batch_frame: empty batch");
    const SpikeTrain& first = *batch.front();
    Tensor out({static_cast<int>(batch.size()), first.channels, first.side, first.side});
    const int64_t plane = first.frame_elems();
    for (size_t n = 0; n < batch.size(); ++n) {
        const SpikeTrain& tr = *batch[n];
        if (tr.channels != first.channels || tr.side != first.side || tr.steps != first.steps)
            throw std::invalid_argument("spike_batch_frame: inconsistent train shapes");
        const int8_t* src = tr.frame(t);
        float* dst = out.data() + static_cast<int64_t>(n) * plane;
        for (int64_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(src[i]);
    }
    return out;
}

}  // namespace fedsnn
