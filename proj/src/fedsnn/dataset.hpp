#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedsnn/rng.hpp"
#include "fedsnn/tensor.hpp"

namespace fedsnn {

// Raw 8-bit image dataset; images stored as flat C*s*s intensity bytes.
struct LabeledDataset {
    int num_classes = 0;
    int channels = 0;
    int side = 0;
    std::vector<std::vector<uint8_t>> images;
    std::vector<int> labels;

    int size() const { return static_cast<int>(images.size()); }
    // Image i as a [C,s,s] tensor of 0-255 intensities.
    Tensor image_tensor(int i) const;
};

class DatasetError : public std::runtime_error {
public:
    enum class Kind { BadMagic, Truncated, LabelRange, Empty, Io };
    DatasetError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// FDS1 container: magic "FDS1", u32 N, u32 num_classes, u32 C, u32 s, then N
// records of (u16 label, C*s*s raw bytes); all integers little-endian.
LabeledDataset load_dataset(const std::string& path);
void save_dataset(const LabeledDataset& dataset, const std::string& path);

// Per-class geometric templates (bars, crosses, blocks) on a dark background
// plus uniform +/-20 pixel noise; linearly separable at desk scale.
LabeledDataset synth_dataset(int num_classes, int per_class, int side, int channels, Rng& rng);
// Clean template for one class, used by the nearest-template oracle.
std::vector<uint8_t> synth_template(int cls, int side, int channels);

struct Partition {
    std::vector<std::vector<int>> assignments;  // per client, sample indices

    int clients() const { return static_cast<int>(assignments.size()); }
    void validate_disjoint(int dataset_size) const;
};

// Every client receives exactly per_class_per_client samples of every class,
// drawn without replacement.
Partition partition_iid(const LabeledDataset& dataset, int clients, int per_class_per_client,
                        Rng& rng);

// Per class, proportions over clients are drawn from a symmetric
// Dirichlet(concentration); empty clients are repaired by moving one sample
// from the largest client.
Partition partition_dirichlet(const LabeledDataset& dataset, int clients, double concentration,
                              Rng& rng);

// Sets exactly round(ratio * C*s*s) distinct positions per image to 0 or 255
// with equal probability; labels untouched.
LabeledDataset add_salt_pepper(const LabeledDataset& dataset, double ratio, Rng& rng);

}  // namespace fedsnn
