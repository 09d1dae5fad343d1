#include "fedsnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "fedsnn/io.hpp"

namespace fedsnn {

namespace {

void put_u32(std::string& out, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.append(b, 4);
}

void put_f32(std::string& out, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(out, v);
}

class Reader {
public:
    Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}
    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint8_t>(bytes_[pos_]) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + 1])) << 8) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + 2])) << 16) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + 3])) << 24);
        pos_ += 4;
        return v;
    }
    float f32() {
        uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    std::string str(size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(size_t n) {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error("checkpoint truncated: " + path_);
    }
    const std::string& bytes_;
    std::string path_;
    size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(Model& model) {
    std::string out = model.checkpoint_magic();
    for (const auto& ref : model.state_tensors()) {
        put_u32(out, static_cast<uint32_t>(ref.name.size()));
        out += ref.name;
        const Tensor& t = *ref.value;
        put_u32(out, static_cast<uint32_t>(t.rank()));
        for (int d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
        for (int64_t i = 0; i < t.numel(); ++i) put_f32(out, t[i]);
    }
    return out;
}

void save_checkpoint(Model& model, const std::string& path) {
    write_file_atomic(path, serialize_checkpoint(model));
}

RawCheckpoint read_checkpoint(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 5)
        throw std::runtime_error("checkpoint truncated: " + path);
    RawCheckpoint ckpt;
    ckpt.magic = bytes.substr(0, 5);
    Reader r(bytes, path);
    r.str(5);
    while (!r.at_end()) {
        uint32_t name_len = r.u32();
        std::string name = r.str(name_len);
        uint32_t rank = r.u32();
        if (rank == 0 || rank > 4)
            throw std::runtime_error("checkpoint: bad rank for tensor '" + name + "' in " + path);
        std::vector<int> shape(rank);
        for (auto& d : shape) {
            uint32_t e = r.u32();
            if (e == 0 || e > (1u << 28))
                throw std::runtime_error("checkpoint: bad extent for tensor '" + name + "'");
            d = static_cast<int>(e);
        }
        Tensor t(shape);
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = r.f32();
        ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

const Tensor* RawCheckpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void load_checkpoint(Model& model, const std::string& path) {
    RawCheckpoint ckpt = read_checkpoint(path);
    if (ckpt.magic != model.checkpoint_magic())
        throw std::runtime_error("checkpoint magic '" + ckpt.magic + "' does not match " +
                                 model.kind() + " model (want '" + model.checkpoint_magic() +
                                 "'): " + path);
    auto refs = model.state_tensors();
    if (refs.size() != ckpt.tensors.size())
        throw std::runtime_error("checkpoint: tensor count " +
                                 std::to_string(ckpt.tensors.size()) + " != model state size " +
                                 std::to_string(refs.size()));
    for (size_t i = 0; i < refs.size(); ++i) {
        const auto& [name, t] = ckpt.tensors[i];
        if (name != refs[i].name)
            throw std::runtime_error("checkpoint: tensor '" + name + "' where '" + refs[i].name +
                                     "' expected");
        if (t.shape() != refs[i].value->shape())
            throw std::runtime_error("checkpoint: tensor '" + name + "' shape " + t.shape_str() +
                                     " != model shape " + refs[i].value->shape_str());
        *refs[i].value = t;
    }
    model.mark_stats_ready();
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2)
        throw std::invalid_argument("softmax_cross_entropy: logits must be [N,classes]");
    const int n = logits.dim(0), classes = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");

    LossResult result{0.0, Tensor(logits.shape())};
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int label = labels[i];
        if (label < 0 || label >= classes)
            throw std::invalid_argument("softmax_cross_entropy: label out of range");
        const float* row = logits.data() + static_cast<int64_t>(i) * classes;
        float* grow = result.grad.data() + static_cast<int64_t>(i) * classes;
        float peak = row[0];
        for (int j = 1; j < classes; ++j) peak = std::max(peak, row[j]);
        double denom = 0.0;
        for (int j = 0; j < classes; ++j) denom += std::exp(static_cast<double>(row[j]) - peak);
        total += std::log(denom) - (static_cast<double>(row[label]) - peak);
        const double inv_n = 1.0 / n;
        for (int j = 0; j < classes; ++j) {
            const double p = std::exp(static_cast<double>(row[j]) - peak) / denom;
            grow[j] = static_cast<float>((p - (j == label ? 1.0 : 0.0)) * inv_n);
        }
    }
    result.loss = total / n;
    return result;
}

void sgd_step(Tensor& param, const Tensor& grad, float eta) {
    require_same_shape(param, grad, "sgd_step");
    for (int64_t i = 0; i < param.numel(); ++i) param[i] -= eta * grad[i];
}

void clip_tensor(Tensor& t, float limit) {
    if (limit <= 0.0f) return;
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = std::clamp(t[i], -limit, limit);
}

}  // namespace fedsnn
