#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedsnn {

// Dense row-major tensor of 32-bit reals, rank 1..4.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, float fill_value);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    float& at2(int i, int j) { return data_[static_cast<size_t>(i) * dim(1) + j]; }
    float at2(int i, int j) const { return data_[static_cast<size_t>(i) * dim(1) + j]; }
    float& at4(int n, int c, int h, int w) {
        return data_[((static_cast<size_t>(n) * dim(1) + c) * dim(2) + h) * dim(3) + w];
    }
    float at4(int n, int c, int h, int w) const {
        return data_[((static_cast<size_t>(n) * dim(1) + c) * dim(2) + h) * dim(3) + w];
    }

    void fill(float v);
    // Reinterpret the extents without touching the data; element count must match.
    void reshape(std::vector<int> new_shape);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

int64_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace fedsnn
