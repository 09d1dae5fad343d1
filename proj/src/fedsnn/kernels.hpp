#pragma once

#include "fedsnn/tensor.hpp"

namespace fedsnn {

struct ConvSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 0;  // square
    int stride = 1;
    int padding = 0;

    int out_side(int in_side) const {
        return (in_side + 2 * padding - kernel_size) / stride + 1;
    }
};

// Cross-correlation, no bias. input [N,C_in,H,W], weights [C_out,C_in,ks,ks].
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const ConvSpec& spec);

struct ConvGrads {
    Tensor grad_input;
    Tensor grad_weights;
};
ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& cached_input,
                          const Tensor& weights, const ConvSpec& spec);

// input [N,F_in] x weights [F_out,F_in]^T -> [N,F_out]; no bias.
Tensor linear_forward(const Tensor& input, const Tensor& weights);

struct LinearGrads {
    Tensor grad_input;
    Tensor grad_weights;
};
LinearGrads linear_backward(const Tensor& grad_out, const Tensor& cached_input,
                            const Tensor& weights);

// Non-overlapping mean pooling; spatial extents must divide by window.
Tensor avgpool_forward(const Tensor& input, int window);
Tensor avgpool_backward(const Tensor& grad_out, int window);

// Row-major gemm helpers with a fixed accumulation order; operands must not
// alias. When `accumulate` is false the output block is overwritten.
void gemm_nn(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate);
void gemm_nt(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate);
void gemm_tn(const float* __restrict a, const float* __restrict b, float* __restrict c,
             int m, int k, int n, bool accumulate);

}  // namespace fedsnn
