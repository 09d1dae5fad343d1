#pragma once

#include <cstdint>
#include <vector>

#include "fedsnn/rng.hpp"
#include "fedsnn/tensor.hpp"

namespace fedsnn {

// Receptive-field transcoder parameters. mu_g and sigma_g are the closed
// forms tied to the image side s, kernel size ks, mini-batch size B, channel
// count C and local epoch count E.
struct NrfeParams {
    int side = 0;           // s
    int kernel_size = 0;    // ks
    int batch_size = 0;     // B
    int channels = 0;       // C
    int local_epochs = 0;   // E
    double mu_g = 0.0;
    double sigma_g = 0.0;
    bool resample_per_step = true;  // fresh field matrix per time step
};

NrfeParams receptive_field_params(int side, int kernel_size, int batch_size, int channels,
                                  int local_epochs);

// The coding rule applied to (normalized pixel, field sample):
//   Literal   - ternary three-branch rule on q = x* + g
//   Threshold - +1 where x* >= g, 0 otherwise (experimental alternate)
enum class NrfeVariant { Literal, Threshold };

// T-step spike sequence for one image; values in {-1,0,+1} from the ternary
// encoder, {0,1} from the rate encoder and hidden layers.
struct SpikeTrain {
    int steps = 0;
    int channels = 0;
    int side = 0;
    std::vector<int8_t> values;  // steps * channels * side * side

    int64_t frame_elems() const { return static_cast<int64_t>(channels) * side * side; }
    const int8_t* frame(int t) const { return values.data() + t * frame_elems(); }
    Tensor frame_tensor(int t) const;
};

// Per-channel min-max normalization of a [C,s,s] image to [0,1]; constant
// channels map to all-zeros.
Tensor normalize(const Tensor& image);

// s x s matrix of independent draws from N(mu_g, sigma_g^2).
Tensor sample_gaussian_field(const NrfeParams& params, Rng& rng);

SpikeTrain nrfe_encode(const Tensor& image, const NrfeParams& params, int steps, Rng& rng,
                       NrfeVariant variant = NrfeVariant::Literal);

// Poisson rate coding: each pixel fires with probability equal to its
// normalized intensity, independently per step.
SpikeTrain rate_encode(const Tensor& image, int steps, Rng& rng);

// Assemble step t of a batch of trains into an [N,C,s,s] tensor.
Tensor spike_batch_frame(const std::vector<const SpikeTrain*>& batch, int t);

}  // namespace fedsnn
