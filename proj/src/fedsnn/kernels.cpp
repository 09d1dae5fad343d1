#include "fedsnn/kernels.hpp"

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedsnn {

// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        const float* arow = a + static_cast<size_t>(i) * k;
        float* crow = c + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const float av = arow[p];
            if (av == 0.0f) continue;
            const float* brow = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m x n] (+)= A[m x k] * B[n x k]^T
void gemm_nt(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const float* arow = a + static_cast<size_t>(i) * k;
        float* crow = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const float* brow = b + static_cast<size_t>(j) * k;
            float acc = 0.0f;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + acc : acc;
        }
    }
}

// C[m x n] (+)= A[k x m]^T * B[k x n]
void gemm_tn(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m) * n);
    for (int p = 0; p < k; ++p) {
        const float* arow = a + static_cast<size_t>(p) * m;
        const float* brow = b + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const float av = arow[i];
            if (av == 0.0f) continue;
            float* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

namespace {

void check_conv_args(const Tensor& input, const Tensor& weights, const ConvSpec& spec,
                     const char* op) {
    if (input.rank() != 4)
        throw std::invalid_argument(std::string(op) + ": input must be NCHW, got " +
                                    input.shape_str());
    if (weights.rank() != 4)
        throw std::invalid_argument(std::string(op) + ": weights must be [C_out,C_in,ks,ks], got " +
                                    weights.shape_str());
    if (input.dim(1) != spec.in_channels)
        throw std::invalid_argument(std::string(op) + ": input channels " +
                                    std::to_string(input.dim(1)) + " != spec.in_channels " +
                                    std::to_string(spec.in_channels));
    if (weights.dim(0) != spec.out_channels || weights.dim(1) != spec.in_channels ||
        weights.dim(2) != spec.kernel_size || weights.dim(3) != spec.kernel_size)
        throw std::invalid_argument(std::string(op) + ": weights " + weights.shape_str() +
                                    " inconsistent with spec");
    if (input.dim(2) != input.dim(3))
        throw std::invalid_argument(std::string(op) + ": only square inputs supported, got " +
                                    input.shape_str());
    if (spec.out_side(input.dim(2)) <= 0)
        throw std::invalid_argument(std::string(op) + ": non-positive output side for input " +
                                    input.shape_str());
}

// One sample [C,H,W] -> column matrix [C*ks*ks, M*M]; zero padding.
void im2col(const float* in, int channels, int side, const ConvSpec& spec, float* cols) {
    const int ks = spec.kernel_size;
    const int m = spec.out_side(side);
    const int cols_per_row = m * m;
    for (int c = 0; c < channels; ++c) {
        for (int kh = 0; kh < ks; ++kh) {
            for (int kw = 0; kw < ks; ++kw) {
                float* row = cols + static_cast<size_t>((c * ks + kh) * ks + kw) * cols_per_row;
                for (int oh = 0; oh < m; ++oh) {
                    const int ih = oh * spec.stride - spec.padding + kh;
                    if (ih < 0 || ih >= side) {
                        std::memset(row + static_cast<size_t>(oh) * m, 0, sizeof(float) * m);
                        continue;
                    }
                    const float* src = in + (static_cast<size_t>(c) * side + ih) * side;
                    for (int ow = 0; ow < m; ++ow) {
                        const int iw = ow * spec.stride - spec.padding + kw;
                        row[static_cast<size_t>(oh) * m + ow] =
                            (iw < 0 || iw >= side) ? 0.0f : src[iw];
                    }
                }
            }
        }
    }
}

// Scatter-add of a column matrix back onto one sample.
void col2im(const float* cols, int channels, int side, const ConvSpec& spec, float* out) {
    const int ks = spec.kernel_size;
    const int m = spec.out_side(side);
    const int cols_per_row = m * m;
    for (int c = 0; c < channels; ++c) {
        for (int kh = 0; kh < ks; ++kh) {
            for (int kw = 0; kw < ks; ++kw) {
                const float* row = cols + static_cast<size_t>((c * ks + kh) * ks + kw) * cols_per_row;
                for (int oh = 0; oh < m; ++oh) {
                    const int ih = oh * spec.stride - spec.padding + kh;
                    if (ih < 0 || ih >= side) continue;
                    float* dst = out + (static_cast<size_t>(c) * side + ih) * side;
                    for (int ow = 0; ow < m; ++ow) {
                        const int iw = ow * spec.stride - spec.padding + kw;
                        if (iw < 0 || iw >= side) continue;
                        dst[iw] += row[static_cast<size_t>(oh) * m + ow];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const ConvSpec& spec) {
    check_conv_args(input, weights, spec, "conv2d_forward");
    const int batch = input.dim(0);
    const int side = input.dim(2);
    const int m = spec.out_side(side);
    const int k = spec.in_channels * spec.kernel_size * spec.kernel_size;

    Tensor out({batch, spec.out_channels, m, m});
    std::vector<float> cols(static_cast<size_t>(k) * m * m);
    const int64_t in_stride = static_cast<int64_t>(spec.in_channels) * side * side;
    const int64_t out_stride = static_cast<int64_t>(spec.out_channels) * m * m;
    for (int n = 0; n < batch; ++n) {
        im2col(input.data() + n * in_stride, spec.in_channels, side, spec, cols.data());
        gemm_nn(weights.data(), cols.data(), out.data() + n * out_stride,
                spec.out_channels, k, m * m, false);
    }
    return out;
}

ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& cached_input,
                          const Tensor& weights, const ConvSpec& spec) {
    check_conv_args(cached_input, weights, spec, "conv2d_backward");
    const int batch = cached_input.dim(0);
    const int side = cached_input.dim(2);
    const int m = spec.out_side(side);
    if (grad_out.rank() != 4 || grad_out.dim(0) != batch || grad_out.dim(1) != spec.out_channels ||
        grad_out.dim(2) != m || grad_out.dim(3) != m)
        throw std::invalid_argument("conv2d_backward: grad_out " + grad_out.shape_str() +
                                    " does not match forward output shape");

    const int k = spec.in_channels * spec.kernel_size * spec.kernel_size;
    ConvGrads grads{Tensor(cached_input.shape()), Tensor(weights.shape())};
    std::vector<float> cols(static_cast<size_t>(k) * m * m);
    std::vector<float> grad_cols(static_cast<size_t>(k) * m * m);
    const int64_t in_stride = static_cast<int64_t>(spec.in_channels) * side * side;
    const int64_t out_stride = static_cast<int64_t>(spec.out_channels) * m * m;
    for (int n = 0; n < batch; ++n) {
        const float* go = grad_out.data() + n * out_stride;
        im2col(cached_input.data() + n * in_stride, spec.in_channels, side, spec, cols.data());
        // dW[C_out,k] += dY[C_out,m*m] * cols[k,m*m]^T
        gemm_nt(go, cols.data(), grads.grad_weights.data(), spec.out_channels, m * m, k, n > 0);
        // dCols[k,m*m] = W[C_out,k]^T * dY[C_out,m*m]
        gemm_tn(weights.data(), go, grad_cols.data(), k, spec.out_channels, m * m, false);
        col2im(grad_cols.data(), spec.in_channels, side, spec,
               grads.grad_input.data() + n * in_stride);
    }
    return grads;
}

Tensor linear_forward(const Tensor& input, const Tensor& weights) {
    if (input.rank() != 2 || weights.rank() != 2)
        throw std::invalid_argument("linear_forward: expected [N,F_in] x [F_out,F_in], got " +
                                    input.shape_str() + " x " + weights.shape_str());
    if (input.dim(1) != weights.dim(1))
        throw std::invalid_argument("linear_forward: inner dimensions disagree, " +
                                    input.shape_str() + " x " + weights.shape_str());
    Tensor out({input.dim(0), weights.dim(0)});
    gemm_nt(input.data(), weights.data(), out.data(), input.dim(0), input.dim(1), weights.dim(0),
            false);
    return out;
}

LinearGrads linear_backward(const Tensor& grad_out, const Tensor& cached_input,
                            const Tensor& weights) {
    if (grad_out.rank() != 2 || grad_out.dim(0) != cached_input.dim(0) ||
        grad_out.dim(1) != weights.dim(0))
        throw std::invalid_argument("linear_backward: grad_out " + grad_out.shape_str() +
                                    " does not match forward output shape");
    if (cached_input.dim(1) != weights.dim(1))
        throw std::invalid_argument("linear_backward: input/weights mismatch");
    LinearGrads grads{Tensor(cached_input.shape()), Tensor(weights.shape())};
    // dX[N,F_in] = dY[N,F_out] * W[F_out,F_in]
    gemm_nn(grad_out.data(), weights.data(), grads.grad_input.data(), grad_out.dim(0),
            grad_out.dim(1), weights.dim(1), false);
    // dW[F_out,F_in] = dY[N,F_out]^T * X[N,F_in]
    gemm_tn(grad_out.data(), cached_input.data(), grads.grad_weights.data(), weights.dim(0),
            grad_out.dim(0), weights.dim(1), false);
    return grads;
}

Tensor avgpool_forward(const Tensor& input, int window) {
    if (input.rank() != 4)
        throw std::invalid_argument("avgpool_forward: input must be NCHW, got " +
                                    input.shape_str());
    if (window <= 0 || input.dim(2) % window != 0 || input.dim(3) % window != 0)
        throw std::invalid_argument("avgpool_forward: extents " + input.shape_str() +
                                    " not divisible by window " + std::to_string(window));
    const int batch = input.dim(0), channels = input.dim(1);
    const int oh = input.dim(2) / window, ow = input.dim(3) / window;
    const float inv = 1.0f / static_cast<float>(window * window);
    Tensor out({batch, channels, oh, ow});
    for (int n = 0; n < batch; ++n)
        for (int c = 0; c < channels; ++c)
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    float acc = 0.0f;
                    for (int di = 0; di < window; ++di)
                        for (int dj = 0; dj < window; ++dj)
                            acc += input.at4(n, c, i * window + di, j * window + dj);
                    out.at4(n, c, i, j) = acc * inv;
                }
    return out;
}

Tensor avgpool_backward(const Tensor& grad_out, int window) {
    if (grad_out.rank() != 4)
        throw std::invalid_argument("avgpool_backward: grad must be NCHW, got " +
                                    grad_out.shape_str());
    if (window <= 0) throw std::invalid_argument("avgpool_backward: window must be positive");
    const int batch = grad_out.dim(0), channels = grad_out.dim(1);
    const int oh = grad_out.dim(2), ow = grad_out.dim(3);
    const float inv = 1.0f / static_cast<float>(window * window);
    Tensor grad_in({batch, channels, oh * window, ow * window});
    for (int n = 0; n < batch; ++n)
        for (int c = 0; c < channels; ++c)
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    const float g = grad_out.at4(n, c, i, j) * inv;
                    for (int di = 0; di < window; ++di)
                        for (int dj = 0; dj < window; ++dj)
                            grad_in.at4(n, c, i * window + di, j * window + dj) = g;
                }
    return grad_in;
}

}  // namespace fedsnn
