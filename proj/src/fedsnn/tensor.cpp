#include "fedsnn/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace fedsnn {

int64_t shape_numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

static void validate_shape(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 4)
        throw std::invalid_argument("tensor: rank must be 1..4, got " + shape_to_string(shape));
    for (int d : shape)
        if (d <= 0)
            throw std::invalid_argument("tensor: extents must be positive, got " + shape_to_string(shape));
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0f);
}

Tensor::Tensor(std::vector<int> shape, float fill_value) : Tensor(std::move(shape)) {
    fill(fill_value);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(std::vector<int> new_shape) {
    validate_shape(new_shape);
    if (shape_numel(new_shape) != numel())
        throw std::invalid_argument("tensor: reshape " + shape_to_string(shape_) + " -> " +
                                    shape_to_string(new_shape) + " changes element count");
    shape_ = std::move(new_shape);
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
}

}  // namespace fedsnn
