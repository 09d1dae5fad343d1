#include "fedsnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "fedsnn/io.hpp"

namespace fedsnn {

Tensor LabeledDataset::image_tensor(int i) const {
    Tensor t({channels, side, side});
    const auto& raw = images[static_cast<size_t>(i)];
    for (int64_t j = 0; j < t.numel(); ++j) t[j] = static_cast<float>(raw[static_cast<size_t>(j)]);
    return t;
}

namespace {

constexpr char kMagic[4] = {'F', 'D', 'S', '1'};

void put_u32(std::string& out, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.append(b, 4);
}

void put_u16(std::string& out, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.append(b, 2);
}

uint32_t get_u32(const std::string& bytes, size_t pos) {
    return static_cast<uint8_t>(bytes[pos]) |
           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + 1])) << 8) |
           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + 2])) << 16) |
           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + 3])) << 24);
}

uint16_t get_u16(const std::string& bytes, size_t pos) {
    return static_cast<uint16_t>(static_cast<uint8_t>(bytes[pos]) |
                                 (static_cast<uint16_t>(static_cast<uint8_t>(bytes[pos + 1])) << 8));
}

}  // namespace

LabeledDataset load_dataset(const std::string& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const std::exception& e) {
        throw DatasetError(DatasetError::Kind::Io, e.what());
    }
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DatasetError(DatasetError::Kind::BadMagic,
                           "dataset: bad magic (expected FDS1): " + path);
    if (bytes.size() < 20)
        throw DatasetError(DatasetError::Kind::Truncated, "dataset: truncated header: " + path);

    LabeledDataset ds;
    const uint32_t n = get_u32(bytes, 4);
    ds.num_classes = static_cast<int>(get_u32(bytes, 8));
    ds.channels = static_cast<int>(get_u32(bytes, 12));
    ds.side = static_cast<int>(get_u32(bytes, 16));
    if (n == 0)
        throw DatasetError(DatasetError::Kind::Empty, "dataset: empty (N = 0): " + path);
    if (ds.num_classes < 1 || ds.channels < 1 || ds.side < 1)
        throw DatasetError(DatasetError::Kind::Truncated, "dataset: bad header fields: " + path);

    const size_t image_bytes = static_cast<size_t>(ds.channels) * ds.side * ds.side;
    const size_t record = 2 + image_bytes;
    if (bytes.size() != 20 + static_cast<size_t>(n) * record)
        throw DatasetError(DatasetError::Kind::Truncated,
                           "dataset: size " + std::to_string(bytes.size()) + " != expected " +
                               std::to_string(20 + static_cast<size_t>(n) * record) + ": " + path);

    ds.images.reserve(n);
    ds.labels.reserve(n);
    size_t pos = 20;
    for (uint32_t i = 0; i < n; ++i) {
        const uint16_t label = get_u16(bytes, pos);
        pos += 2;
        if (label >= ds.num_classes)
            throw DatasetError(DatasetError::Kind::LabelRange,
                               "dataset: label " + std::to_string(label) + " out of range [0," +
                                   std::to_string(ds.num_classes) + ") at record " +
                                   std::to_string(i));
        ds.labels.push_back(label);
        std::vector<uint8_t> img(image_bytes);
        std::memcpy(img.data(), bytes.data() + pos, image_bytes);
        pos += image_bytes;
        ds.images.push_back(std::move(img));
    }
    return ds;
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
    if (dataset.size() == 0)
        throw DatasetError(DatasetError::Kind::Empty, "dataset: refusing to save empty dataset");
    std::string out(kMagic, 4);
    put_u32(out, static_cast<uint32_t>(dataset.size()));
    put_u32(out, static_cast<uint32_t>(dataset.num_classes));
    put_u32(out, static_cast<uint32_t>(dataset.channels));
    put_u32(out, static_cast<uint32_t>(dataset.side));
    for (int i = 0; i < dataset.size(); ++i) {
        put_u16(out, static_cast<uint16_t>(dataset.labels[static_cast<size_t>(i)]));
        const auto& img = dataset.images[static_cast<size_t>(i)];
        out.append(reinterpret_cast<const char*>(img.data()), img.size());
    }
    write_file_atomic(path, out);
}

std::vector<uint8_t> synth_template(int cls, int side, int channels) {
    std::vector<uint8_t> img(static_cast<size_t>(channels) * side * side, 0);
    const int kind = cls % 4;
    const int slot = cls / 4;
    const int thickness = std::max(1, side / 8);
    const int offset = (slot * (side / 3) + side / 4) % std::max(1, side - thickness);
    auto paint = [&](int h, int w) {
        for (int c = 0; c < channels; ++c)
            img[(static_cast<size_t>(c) * side + h) * side + w] = 230;
    };
    switch (kind) {
        case 0:  // horizontal bar
            for (int h = offset; h < offset + thickness; ++h)
                for (int w = 0; w < side; ++w) paint(h, w);
            break;
        case 1:  // vertical bar
            for (int w = offset; w < offset + thickness; ++w)
                for (int h = 0; h < side; ++h) paint(h, w);
            break;
        case 2:  // cross
            for (int h = offset; h < offset + thickness; ++h)
                for (int w = 0; w < side; ++w) paint(h, w);
            for (int w = offset; w < offset + thickness; ++w)
                for (int h = 0; h < side; ++h) paint(h, w);
            break;
        default: {  // filled block
            const int block = std::max(2, side / 3);
            const int start = std::min(offset, side - block);
            for (int h = start; h < start + block; ++h)
                for (int w = start; w < start + block; ++w) paint(h, w);
            break;
        }
    }
    return img;
}

LabeledDataset synth_dataset(int num_classes, int per_class, int side, int channels, Rng& rng) {
    if (num_classes < 1 || per_class < 1 || side < 1 || channels < 1)
        throw std::invalid_argument("synth_dataset: all arguments must be positive");
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.channels = channels;
    ds.side = side;
    for (int cls = 0; cls < num_classes; ++cls) {
        const std::vector<uint8_t> base = synth_template(cls, side, channels);
        for (int i = 0; i < per_class; ++i) {
            std::vector<uint8_t> img(base.size());
            for (size_t j = 0; j < base.size(); ++j) {
                const int noise = static_cast<int>(rng.next_below(41)) - 20;
                img[j] = static_cast<uint8_t>(std::clamp(static_cast<int>(base[j]) + noise, 0, 255));
            }
            ds.images.push_back(std::move(img));
            ds.labels.push_back(cls);
        }
    }
    return ds;
}

void Partition::validate_disjoint(int dataset_size) const {
    std::vector<char> seen(static_cast<size_t>(dataset_size), 0);
    for (const auto& shard : assignments) {
        if (shard.empty()) throw std::runtime_error("partition: empty client shard");
        for (int idx : shard) {
            if (idx < 0 || idx >= dataset_size)
                throw std::runtime_error("partition: index out of range");
            if (seen[static_cast<size_t>(idx)])
                throw std::runtime_error("partition: index assigned twice");
            seen[static_cast<size_t>(idx)] = 1;
        }
    }
}

namespace {

std::vector<std::vector<int>> indices_by_class(const LabeledDataset& ds) {
    std::vector<std::vector<int>> by_class(static_cast<size_t>(ds.num_classes));
    for (int i = 0; i < ds.size(); ++i)
        by_class[static_cast<size_t>(ds.labels[static_cast<size_t>(i)])].push_back(i);
    return by_class;
}

}  // namespace

Partition partition_iid(const LabeledDataset& dataset, int clients, int per_class_per_client,
                        Rng& rng) {
    if (clients < 1 || per_class_per_client < 1)
        throw std::invalid_argument("partition_iid: clients and per-class count must be >= 1");
    auto by_class = indices_by_class(dataset);
    const int need = clients * per_class_per_client;
    for (int cls = 0; cls < dataset.num_classes; ++cls) {
        if (static_cast<int>(by_class[static_cast<size_t>(cls)].size()) < need)
            throw std::invalid_argument(
                "partition_iid: class " + std::to_string(cls) + " has " +
                std::to_string(by_class[static_cast<size_t>(cls)].size()) + " samples, need " +
                std::to_string(need));
    }
    Partition part;
    part.assignments.resize(static_cast<size_t>(clients));
    for (int cls = 0; cls < dataset.num_classes; ++cls) {
        auto& pool = by_class[static_cast<size_t>(cls)];
        rng.shuffle(pool);
        for (int k = 0; k < clients; ++k)
            for (int j = 0; j < per_class_per_client; ++j)
                part.assignments[static_cast<size_t>(k)].push_back(
                    pool[static_cast<size_t>(k * per_class_per_client + j)]);
    }
    return part;
}

Partition partition_dirichlet(const LabeledDataset& dataset, int clients, double concentration,
                              Rng& rng) {
    if (clients < 1) throw std::invalid_argument("partition_dirichlet: clients must be >= 1");
    if (!(concentration > 0.0))
        throw std::invalid_argument("partition_dirichlet: concentration must be positive");

    Partition part;
    part.assignments.resize(static_cast<size_t>(clients));
    auto by_class = indices_by_class(dataset);
    for (auto& pool : by_class) {
        if (pool.empty()) continue;
        rng.shuffle(pool);
        const std::vector<double> props = rng.next_dirichlet(concentration, clients);
        // Cumulative rounding splits the class pool exactly.
        const int n = static_cast<int>(pool.size());
        double cum = 0.0;
        int taken = 0;
        for (int k = 0; k < clients; ++k) {
            cum += props[static_cast<size_t>(k)];
            const int upto = k + 1 == clients ? n : static_cast<int>(std::lround(cum * n));
            for (int i = taken; i < std::min(upto, n); ++i)
                part.assignments[static_cast<size_t>(k)].push_back(pool[static_cast<size_t>(i)]);
            taken = std::max(taken, std::min(upto, n));
        }
    }
    // Rounding can starve a client; move one sample at a time from the
    // largest shard.
    for (auto& shard : part.assignments) {
        while (shard.empty()) {
            auto largest = std::max_element(
                part.assignments.begin(), part.assignments.end(),
                [](const auto& a, const auto& b) { return a.size() < b.size(); });
            if (largest->size() <= 1)
                throw std::runtime_error("partition_dirichlet: not enough samples for clients");
            shard.push_back(largest->back());
            largest->pop_back();
        }
    }
    return part;
}

LabeledDataset add_salt_pepper(const LabeledDataset& dataset, double ratio, Rng& rng) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw std::invalid_argument("add_salt_pepper: ratio must lie in [0,1]");
    LabeledDataset out = dataset;
    const int64_t volume = static_cast<int64_t>(dataset.channels) * dataset.side * dataset.side;
    const int64_t corrupt = std::llround(ratio * static_cast<double>(volume));
    if (corrupt == 0) return out;

    std::vector<int> positions(static_cast<size_t>(volume));
    for (auto& img : out.images) {
        std::iota(positions.begin(), positions.end(), 0);
        // Partial Fisher-Yates: the first `corrupt` entries form the sample.
        for (int64_t i = 0; i < corrupt; ++i) {
            const int64_t j = i + rng.next_below(static_cast<uint32_t>(volume - i));
            std::swap(positions[static_cast<size_t>(i)], positions[static_cast<size_t>(j)]);
            img[static_cast<size_t>(positions[static_cast<size_t>(i)])] =
                rng.next_bool() ? 255 : 0;
        }
    }
    return out;
}

}  // namespace fedsnn
