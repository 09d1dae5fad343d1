#include <doctest.h>

#include <stdexcept>

#include "fedsnn/kernels.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fedsnn;

namespace {

Tensor make(std::vector<int> shape, std::initializer_list<float> vals) {
    Tensor t(std::move(shape));
    int64_t i = 0;
    for (float v : vals) t[i++] = v;
    REQUIRE(i == t.numel());
    return t;
}

// Direct quadruple-loop cross-correlation used as the oracle for the im2col
// path.
Tensor conv_reference(const Tensor& input, const Tensor& weights, const ConvSpec& spec) {
    const int n_batch = input.dim(0), side = input.dim(2);
    const int m = spec.out_side(side);
    Tensor out({n_batch, spec.out_channels, m, m});
    for (int n = 0; n < n_batch; ++n)
        for (int co = 0; co < spec.out_channels; ++co)
            for (int oh = 0; oh < m; ++oh)
                for (int ow = 0; ow < m; ++ow) {
                    float acc = 0.0f;
                    for (int ci = 0; ci < spec.in_channels; ++ci)
                        for (int kh = 0; kh < spec.kernel_size; ++kh)
                            for (int kw = 0; kw < spec.kernel_size; ++kw) {
                                const int ih = oh * spec.stride - spec.padding + kh;
                                const int iw = ow * spec.stride - spec.padding + kw;
                                if (ih < 0 || ih >= side || iw < 0 || iw >= side) continue;
                                acc += input.at4(n, ci, ih, iw) * weights.at4(co, ci, kh, kw);
                            }
                    out.at4(n, co, oh, ow) = acc;
                }
    return out;
}

}  // namespace

TEST_CASE("conv2d_forward zero input stays zero") {
    ConvSpec spec{1, 2, 3, 1, 1};
    Tensor input({1, 1, 3, 3});
    Rng rng(7);
    Tensor w = testsup::random_tensor({2, 1, 3, 3}, rng);
    Tensor out = conv2d_forward(input, w, spec);
    CHECK(out.shape() == std::vector<int>{1, 2, 3, 3});
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0f);
}

TEST_CASE("conv2d_forward 1x1 kernel scales the input") {
    ConvSpec spec{1, 1, 1, 1, 0};
    Tensor input = make({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor w = make({1, 1, 1, 1}, {2});
    Tensor out = conv2d_forward(input, w, spec);
    CHECK(out[0] == doctest::Approx(2));
    CHECK(out[1] == doctest::Approx(4));
    CHECK(out[2] == doctest::Approx(6));
    CHECK(out[3] == doctest::Approx(8));
}

TEST_CASE("conv2d_forward 3x3 all-ones sums the window") {
    ConvSpec spec{1, 1, 3, 1, 0};
    Tensor input({1, 1, 3, 3}, 1.0f);
    Tensor w({1, 1, 3, 3}, 1.0f);
    Tensor out = conv2d_forward(input, w, spec);
    CHECK(out.numel() == 1);
    CHECK(out[0] == doctest::Approx(9.0));
}

TEST_CASE("conv2d_forward matches the reference loop on random shapes") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int cin = 1 + static_cast<int>(rng.next_below(3));
        const int cout = 1 + static_cast<int>(rng.next_below(4));
        const int ks = 1 + 2 * static_cast<int>(rng.next_below(2));  // 1 or 3
        const int pad = static_cast<int>(rng.next_below(2));
        const int side = ks + 2 + static_cast<int>(rng.next_below(4));
        const int batch = 1 + static_cast<int>(rng.next_below(3));
        ConvSpec spec{cin, cout, ks, 1, pad};
        Tensor input = testsup::random_tensor({batch, cin, side, side}, rng);
        Tensor w = testsup::random_tensor({cout, cin, ks, ks}, rng);
        Tensor fast = conv2d_forward(input, w, spec);
        Tensor slow = conv_reference(input, w, spec);
        REQUIRE(fast.same_shape(slow));
        for (int64_t i = 0; i < fast.numel(); ++i)
            CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-5));
    }
}

TEST_CASE("conv2d_forward rejects mismatched channels") {
    ConvSpec spec{3, 2, 3, 1, 1};
    Tensor input({1, 4, 8, 8});
    Tensor w({2, 3, 3, 3});
    CHECK_THROWS_AS(conv2d_forward(input, w, spec), std::invalid_argument);
}

TEST_CASE("conv2d_backward zero upstream gives zero grads") {
    ConvSpec spec{2, 3, 3, 1, 1};
    Rng rng(3);
    Tensor input = testsup::random_tensor({2, 2, 4, 4}, rng);
    Tensor w = testsup::random_tensor({3, 2, 3, 3}, rng);
    Tensor grad_out({2, 3, 4, 4});
    ConvGrads g = conv2d_backward(grad_out, input, w, spec);
    for (int64_t i = 0; i < g.grad_input.numel(); ++i) CHECK(g.grad_input[i] == 0.0f);
    for (int64_t i = 0; i < g.grad_weights.numel(); ++i) CHECK(g.grad_weights[i] == 0.0f);
}

TEST_CASE("conv2d_backward 1x1 kernel weight grad equals sum of products") {
    ConvSpec spec{1, 1, 1, 1, 0};
    Rng rng(5);
    Tensor input = testsup::random_tensor({1, 1, 3, 3}, rng);
    Tensor w = make({1, 1, 1, 1}, {0.7f});
    Tensor grad_out = testsup::random_tensor({1, 1, 3, 3}, rng);
    ConvGrads g = conv2d_backward(grad_out, input, w, spec);
    double expected = 0.0;
    for (int64_t i = 0; i < input.numel(); ++i) expected += input[i] * grad_out[i];
    CHECK(g.grad_weights[0] == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("conv2d_backward rejects wrong grad shape") {
    ConvSpec spec{1, 1, 3, 1, 0};
    Tensor input({1, 1, 4, 4});
    Tensor w({1, 1, 3, 3});
    Tensor bad({1, 1, 4, 4});
    CHECK_THROWS_AS(conv2d_backward(bad, input, w, spec), std::invalid_argument);
}

TEST_CASE("conv and pool backward agree with finite differences") {
    // FD runs through the double-precision reference of the same map, so the
    // estimate is free of float32 summation noise; d(objective)/d(output) is
    // the fixed projection.
    Rng rng(17);
    ConvSpec spec{2, 2, 3, 1, 1};
    Tensor input = testsup::random_tensor({1, 2, 4, 4}, rng);
    Tensor w = testsup::random_tensor({2, 2, 3, 3}, rng);
    Tensor proj = testsup::random_tensor({1, 2, 4, 4}, rng);

    auto objective = [&]() {
        testsup::dvec out = testsup::conv2d_ref(testsup::to_dvec(input), 1, 2, 4, w, 1);
        double acc = 0.0;
        for (size_t i = 0; i < out.size(); ++i) acc += out[i] * proj[static_cast<int64_t>(i)];
        return acc;
    };
    ConvGrads analytic = conv2d_backward(proj, input, w, spec);
    CHECK(testsup::grads_match(analytic.grad_weights, testsup::finite_diff(w, objective)));
    CHECK(testsup::grads_match(analytic.grad_input, testsup::finite_diff(input, objective)));

    Tensor pproj = testsup::random_tensor({1, 2, 2, 2}, rng);
    auto pool_objective = [&]() {
        testsup::dvec out = testsup::avgpool_ref(testsup::to_dvec(input), 1, 2, 4, 2);
        double acc = 0.0;
        for (size_t i = 0; i < out.size(); ++i) acc += out[i] * pproj[static_cast<int64_t>(i)];
        return acc;
    };
    Tensor analytic_pool = avgpool_backward(pproj, 2);
    CHECK(testsup::grads_match(analytic_pool, testsup::finite_diff(input, pool_objective)));
}

TEST_CASE("linear_forward identity, zero and hand-computed case") {
    Tensor input = make({1, 2}, {1, 2});
    Tensor eye = make({2, 2}, {1, 0, 0, 1});
    Tensor out = linear_forward(input, eye);
    CHECK(out[0] == doctest::Approx(1));
    CHECK(out[1] == doctest::Approx(2));

    // [1,2] x [[1,0],[0,1],[1,1]]^T -> [1,2,3]
    Tensor w = make({3, 2}, {1, 0, 0, 1, 1, 1});
    Tensor out2 = linear_forward(input, w);
    CHECK(out2[0] == doctest::Approx(1));
    CHECK(out2[1] == doctest::Approx(2));
    CHECK(out2[2] == doctest::Approx(3));

    Tensor zeros({3, 2});
    Tensor out3 = linear_forward(zeros, w);
    for (int64_t i = 0; i < out3.numel(); ++i) CHECK(out3[i] == 0.0f);
}

TEST_CASE("linear_forward rejects dimension mismatch") {
    Tensor input({2, 3});
    Tensor w({4, 5});
    CHECK_THROWS_AS(linear_forward(input, w), std::invalid_argument);
}

TEST_CASE("linear_backward single sample is an outer product") {
    Rng rng(23);
    Tensor input = testsup::random_tensor({1, 4}, rng);
    Tensor w = testsup::random_tensor({3, 4}, rng);
    Tensor grad_out = testsup::random_tensor({1, 3}, rng);
    LinearGrads g = linear_backward(grad_out, input, w);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(g.grad_weights.at2(i, j) ==
                  doctest::Approx(grad_out[i] * input[j]).epsilon(1e-5));
}

TEST_CASE("linear_backward batch sums per-sample gradients") {
    Rng rng(29);
    Tensor input = testsup::random_tensor({2, 4}, rng);
    Tensor w = testsup::random_tensor({3, 4}, rng);
    Tensor grad_out = testsup::random_tensor({2, 3}, rng);
    LinearGrads batch = linear_backward(grad_out, input, w);

    Tensor sum({3, 4});
    for (int s = 0; s < 2; ++s) {
        Tensor in1({1, 4}), go1({1, 3});
        for (int j = 0; j < 4; ++j) in1[j] = input.at2(s, j);
        for (int j = 0; j < 3; ++j) go1[j] = grad_out.at2(s, j);
        LinearGrads single = linear_backward(go1, in1, w);
        for (int64_t i = 0; i < sum.numel(); ++i) sum[i] += single.grad_weights[i];
    }
    for (int64_t i = 0; i < sum.numel(); ++i)
        CHECK(batch.grad_weights[i] == doctest::Approx(sum[i]).epsilon(1e-5));
}

TEST_CASE("linear_backward zero upstream and finite differences") {
    Rng rng(31);
    Tensor input = testsup::random_tensor({2, 5}, rng);
    Tensor w = testsup::random_tensor({3, 5}, rng);

    LinearGrads zero = linear_backward(Tensor({2, 3}), input, w);
    for (int64_t i = 0; i < zero.grad_weights.numel(); ++i) CHECK(zero.grad_weights[i] == 0.0f);

    Tensor proj = testsup::random_tensor({2, 3}, rng);
    auto objective = [&]() {
        Tensor out = linear_forward(input, w);
        double acc = 0.0;
        for (int64_t i = 0; i < out.numel(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    LinearGrads g = linear_backward(proj, input, w);
    CHECK(testsup::grads_match(g.grad_weights, testsup::finite_diff(w, objective)));
    CHECK(testsup::grads_match(g.grad_input, testsup::finite_diff(input, objective)));
}

TEST_CASE("avgpool_forward means, zero, constants and errors") {
    Tensor input = make({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor out = avgpool_forward(input, 2);
    CHECK(out.numel() == 1);
    CHECK(out[0] == doctest::Approx(2.5));

    Tensor constant({2, 3, 4, 4}, 0.25f);
    Tensor cout = avgpool_forward(constant, 2);
    for (int64_t i = 0; i < cout.numel(); ++i) CHECK(cout[i] == doctest::Approx(0.25));

    Tensor zeros({1, 1, 4, 4});
    Tensor zout = avgpool_forward(zeros, 2);
    for (int64_t i = 0; i < zout.numel(); ++i) CHECK(zout[i] == 0.0f);

    Tensor bad({1, 1, 3, 3});
    CHECK_THROWS_AS(avgpool_forward(bad, 2), std::invalid_argument);
}

TEST_CASE("avgpool_backward splits uniformly") {
    Tensor grad_out = make({1, 1, 1, 1}, {4});
    Tensor g = avgpool_backward(grad_out, 2);
    CHECK(g.shape() == std::vector<int>{1, 1, 2, 2});
    for (int64_t i = 0; i < g.numel(); ++i) CHECK(g[i] == doctest::Approx(1.0));

    Tensor zero({1, 2, 2, 2});
    Tensor gz = avgpool_backward(zero, 2);
    for (int64_t i = 0; i < gz.numel(); ++i) CHECK(gz[i] == 0.0f);
}

TEST_CASE("kernels are pure: identical inputs give bit-identical outputs") {
    Rng rng(41);
    ConvSpec spec{2, 3, 3, 1, 1};
    Tensor input = testsup::random_tensor({2, 2, 6, 6}, rng);
    Tensor w = testsup::random_tensor({3, 2, 3, 3}, rng);
    CHECK(conv2d_forward(input, w, spec) == conv2d_forward(input, w, spec));
    CHECK(avgpool_forward(input, 2) == avgpool_forward(input, 2));
    Tensor fin = testsup::random_tensor({3, 8}, rng);
    Tensor fw = testsup::random_tensor({4, 8}, rng);
    CHECK(linear_forward(fin, fw) == linear_forward(fin, fw));
}
