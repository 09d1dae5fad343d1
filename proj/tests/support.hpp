#pragma once

// Shared test helpers: independent oracles (finite differences, brute-force
// recomputation) and small generators. Everything here stays decoupled from
// the implementation paths it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "fedsnn/rng.hpp"
#include "fedsnn/tensor.hpp"

namespace testsup {

inline fedsnn::Tensor random_tensor(std::vector<int> shape, fedsnn::Rng& rng, float scale = 1.0f) {
    fedsnn::Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i)
        t[i] = static_cast<float>((2.0 * rng.next_double() - 1.0) * scale);
    return t;
}

// Central finite differences of a scalar function with respect to one tensor.
// Divides by the materialized float32 perturbation so representation error
// does not pollute the estimate.
inline fedsnn::Tensor finite_diff(fedsnn::Tensor& param,
                                  const std::function<double()>& scalar_fn,
                                  double step = 1e-3) {
    fedsnn::Tensor grad(param.shape());
    for (int64_t i = 0; i < param.numel(); ++i) {
        const float saved = param[i];
        const float up_v = static_cast<float>(saved + step);
        const float down_v = static_cast<float>(saved - step);
        param[i] = up_v;
        const double up = scalar_fn();
        param[i] = down_v;
        const double down = scalar_fn();
        param[i] = saved;
        grad[i] = static_cast<float>((up - down) /
                                     (static_cast<double>(up_v) - static_cast<double>(down_v)));
    }
    return grad;
}

// Relative agreement with an absolute floor guarding the near-zero entries.
inline bool grads_match(const fedsnn::Tensor& a, const fedsnn::Tensor& b, double rel_tol = 1e-3,
                        double abs_floor = 1e-4) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double x = a[i], y = b[i];
        const double diff = std::fabs(x - y);
        if (diff <= abs_floor) continue;
        if (diff > rel_tol * std::max(std::fabs(x), std::fabs(y))) return false;
    }
    return true;
}

inline double max_rel_err(const fedsnn::Tensor& a, const fedsnn::Tensor& b,
                          double abs_floor = 1e-4) {
    double worst = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double x = a[i], y = b[i];
        const double diff = std::fabs(x - y);
        if (diff <= abs_floor) continue;
        worst = std::max(worst, diff / std::max(std::fabs(x), std::fabs(y)));
    }
    return worst;
}

}  // namespace testsup
