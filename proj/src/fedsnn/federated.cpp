#include "fedsnn/federated.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace fedsnn {

int selected_count(int clients, double participation) {
    if (clients < 1) throw std::invalid_argument("selected_count: need at least one client");
    const int m = static_cast<int>(std::floor(participation * clients + 0.5));
    return std::max(m, 1);
}

std::vector<int> select_clients(int clients, double participation, uint64_t seed) {
    const int m = selected_count(clients, participation);
    std::vector<int> ids(static_cast<size_t>(clients));
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.next_below(static_cast<uint32_t>(clients - i)));
        std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
    }
    ids.resize(static_cast<size_t>(m));
    std::sort(ids.begin(), ids.end());
    return ids;
}

EncodedBatch EncodedDataset::batch(const std::vector<int>& rows) const {
    EncodedBatch b;
    b.labels.reserve(rows.size());
    if (kind == EncoderKind::None) {
        if (rows.empty()) throw std::invalid_argument("batch: empty row set");
        const Tensor& first = dense[static_cast<size_t>(rows.front())];
        b.dense = Tensor({static_cast<int>(rows.size()), first.dim(0), first.dim(1), first.dim(2)});
        const int64_t sample = first.numel();
        for (size_t i = 0; i < rows.size(); ++i) {
            const Tensor& img = dense[static_cast<size_t>(rows[i])];
            std::copy(img.data(), img.data() + sample,
                      b.dense.data() + static_cast<int64_t>(i) * sample);
            b.labels.push_back(labels[static_cast<size_t>(rows[i])]);
        }
    } else {
        b.trains.reserve(rows.size());
        for (int r : rows) {
            b.trains.push_back(&trains[static_cast<size_t>(r)]);
            b.labels.push_back(labels[static_cast<size_t>(r)]);
        }
    }
    return b;
}

EncodedDataset encode_dataset(const LabeledDataset& dataset, const std::vector<int>& indices,
                              EncoderKind kind, const NrfeParams* nrfe, int steps, uint64_t seed,
                              NrfeVariant variant) {
    EncodedDataset out;
    out.kind = kind;
    for (int idx : indices) {
        const Tensor image = dataset.image_tensor(idx);
        out.labels.push_back(dataset.labels[static_cast<size_t>(idx)]);
        switch (kind) {
            case EncoderKind::Nrfe: {
                if (!nrfe) throw std::invalid_argument("encode_dataset: missing nrfe params");
                Rng rng(derive_seed(seed, static_cast<uint64_t>(idx)));
                out.trains.push_back(nrfe_encode(image, *nrfe, steps, rng, variant));
                break;
            }
            case EncoderKind::Rate: {
                Rng rng(derive_seed(seed, static_cast<uint64_t>(idx)));
                out.trains.push_back(rate_encode(image, steps, rng));
                break;
            }
            case EncoderKind::None:
                out.dense.push_back(normalize(image));
                break;
        }
    }
    return out;
}

Tensor weighted_mean(const std::vector<const Tensor*>& tensors,
                     const std::vector<int64_t>& sizes) {
    if (tensors.empty() || tensors.size() != sizes.size())
        throw std::invalid_argument("weighted_mean: empty or mismatched inputs");
    double total = 0.0;
    for (int64_t s : sizes) {
        if (s <= 0) throw std::invalid_argument("weighted_mean: sizes must be positive");
        total += static_cast<double>(s);
    }
    Tensor out(tensors.front()->shape());
    std::vector<double> acc(static_cast<size_t>(out.numel()), 0.0);
    for (size_t k = 0; k < tensors.size(); ++k) {
        require_same_shape(*tensors[k], out, "weighted_mean");
        const double p = static_cast<double>(sizes[k]) / total;
        const Tensor& t = *tensors[k];
        for (int64_t i = 0; i < t.numel(); ++i) acc[static_cast<size_t>(i)] += p * t[i];
    }
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = static_cast<float>(acc[static_cast<size_t>(i)]);
    return out;
}

void aggregate_into(Model& global, const std::vector<std::pair<Model*, int64_t>>& updates) {
    if (updates.empty()) throw std::invalid_argument("aggregate: empty update list");
    auto global_refs = global.state_tensors();
    std::vector<std::vector<StateRef>> update_refs;
    update_refs.reserve(updates.size());
    std::vector<int64_t> sizes;
    for (const auto& [model, size] : updates) {
        update_refs.push_back(model->state_tensors());
        if (update_refs.back().size() != global_refs.size())
            throw std::invalid_argument("aggregate: state tensor count mismatch");
        sizes.push_back(size);
    }
    // Single-client rounds keep the returned weights bit-exact.
    if (updates.size() == 1) {
        for (size_t t = 0; t < global_refs.size(); ++t)
            *global_refs[t].value = *update_refs[0][t].value;
        global.mark_stats_ready();
        return;
    }
    for (size_t t = 0; t < global_refs.size(); ++t) {
        std::vector<const Tensor*> parts;
        parts.reserve(updates.size());
        for (const auto& refs : update_refs) parts.push_back(refs[t].value);
        *global_refs[t].value = weighted_mean(parts, sizes);
    }
    global.mark_stats_ready();
}

ClientUpdateResult client_update(const Model& global, const EncodedDataset& shard,
                                 const FedConfig& cfg, uint64_t train_seed) {
    if (shard.size() == 0) throw std::invalid_argument("client_update: empty shard");
    ClientUpdateResult result;
    result.model = global.clone();
    result.shard_size = shard.size();

    Rng rng(train_seed);
    std::vector<int> order(static_cast<size_t>(shard.size()));
    double total_loss = 0.0;
    int batches = 0;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
            const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            std::vector<int> rows(order.begin() + static_cast<int64_t>(start),
                                  order.begin() + static_cast<int64_t>(stop));
            total_loss += result.model->train_step(shard.batch(rows), cfg.eta, &result.recorder);
            ++batches;
        }
    }
    result.mean_loss = batches > 0 ? total_loss / batches : 0.0;
    return result;
}

double evaluate_accuracy(Model& model, const EncodedDataset& test, int batch_size) {
    if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    int correct = 0;
    std::vector<int> rows;
    for (int start = 0; start < test.size(); start += batch_size) {
        const int stop = std::min(test.size(), start + batch_size);
        rows.resize(static_cast<size_t>(stop - start));
        std::iota(rows.begin(), rows.end(), start);
        EncodedBatch batch = test.batch(rows);
        Tensor logits = model.predict(batch, nullptr);
        const int classes = logits.dim(1);
        for (int i = 0; i < logits.dim(0); ++i) {
            int best = 0;
            const float* row = logits.data() + static_cast<int64_t>(i) * classes;
            for (int j = 1; j < classes; ++j)
                if (row[j] > row[best]) best = j;
            correct += best == batch.labels[static_cast<size_t>(i)];
        }
    }
    return static_cast<double>(correct) / test.size();
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string metrics_csv(const std::vector<RoundMetrics>& rows) {
    std::string out =
        "round,test_acc,mean_train_loss,selected_clients,wall_ms,"
        "spike_rate_l1,spike_rate_l2,spike_rate_l3,spike_rate_l4\n";
    for (const auto& r : rows) {
        out += std::to_string(r.round) + ',' + fmt(r.test_acc) + ',';
        if (r.has_loss) out += fmt(r.mean_train_loss);
        out += ',' + std::to_string(r.selected_clients) + ',' + std::to_string(r.wall_ms);
        for (int l = 0; l < 4; ++l) {
            out += ',';
            if (r.has_spike_rates) out += fmt(r.spike_rates[static_cast<size_t>(l)]);
        }
        out += '\n';
    }
    return out;
}

Experiment::Experiment(FedConfig fed, uint64_t master_seed, LabeledDataset train,
                       LabeledDataset test, Partition partition, std::unique_ptr<Model> global,
                       std::optional<NrfeParams> nrfe, NrfeVariant nrfe_variant)
    : fed_(fed),
      master_seed_(master_seed),
      train_(std::move(train)),
      test_(std::move(test)),
      partition_(std::move(partition)),
      global_(std::move(global)),
      nrfe_(nrfe),
      nrfe_variant_(nrfe_variant) {
    if (partition_.clients() != fed_.clients)
        throw std::invalid_argument("experiment: partition has " +
                                    std::to_string(partition_.clients()) + " shards, config K = " +
                                    std::to_string(fed_.clients));
    if (fed_.encoder_kind == EncoderKind::Nrfe && !nrfe_)
        throw std::invalid_argument("experiment: NRFE encoder selected without parameters");
    client_cache_.resize(static_cast<size_t>(fed_.clients));
}

const EncodedDataset& Experiment::client_encoded(int k) {
    auto& slot = client_cache_[static_cast<size_t>(k)];
    if (!slot) {
        const uint64_t seed = derive_seed(master_seed_, SeedPurpose::ClientEncode,
                                          static_cast<uint64_t>(k));
        slot = encode_dataset(train_, partition_.assignments[static_cast<size_t>(k)],
                              fed_.encoder_kind, nrfe_ ? &*nrfe_ : nullptr,
                              global_->time_steps(), seed, nrfe_variant_);
    }
    return *slot;
}

const EncodedDataset& Experiment::test_encoded() {
    if (!test_cache_) {
        std::vector<int> all(static_cast<size_t>(test_.size()));
        std::iota(all.begin(), all.end(), 0);
        const uint64_t seed = derive_seed(master_seed_, SeedPurpose::EvalEncode);
        test_cache_ = encode_dataset(test_, all, fed_.encoder_kind, nrfe_ ? &*nrfe_ : nullptr,
                                     global_->time_steps(), seed, nrfe_variant_);
    }
    return *test_cache_;
}

double Experiment::evaluate() { return evaluate_accuracy(*global_, test_encoded()); }

RoundMetrics Experiment::run_round() {
    const auto t0 = std::chrono::steady_clock::now();
    const uint64_t select_seed =
        derive_seed(master_seed_, SeedPurpose::Selection, static_cast<uint64_t>(round_));
    const std::vector<int> selected =
        select_clients(fed_.clients, fed_.participation, select_seed);

    std::vector<ClientUpdateResult> results;
    results.reserve(selected.size());
    for (int k : selected) {
        const uint64_t train_seed = derive_seed(master_seed_, SeedPurpose::ClientTrain,
                                                static_cast<uint64_t>(round_),
                                                static_cast<uint64_t>(k));
        results.push_back(client_update(*global_, client_encoded(k), fed_, train_seed));
    }

    std::vector<std::pair<Model*, int64_t>> updates;
    for (auto& r : results) updates.emplace_back(r.model.get(), r.shard_size);
    aggregate_into(*global_, updates);
    ++round_;

    RoundMetrics m;
    m.round = round_;
    m.selected_clients = static_cast<int>(selected.size());
    m.test_acc = evaluate();
    double loss = 0.0;
    for (const auto& r : results) loss += r.mean_loss;
    m.mean_train_loss = loss / static_cast<double>(results.size());
    m.has_loss = true;
    if (fed_.model_kind == ModelKind::Snn) {
        const char* probes[] = {"lif1", "lif2", "lif3", "lif4"};
        for (int l = 0; l < 4; ++l) {
            double rate = 0.0;
            for (const auto& r : results) rate += r.recorder.rate(probes[l]);
            m.spike_rates[static_cast<size_t>(l)] = rate / static_cast<double>(results.size());
        }
        m.has_spike_rates = true;
    }
    m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return m;
}

std::vector<RoundMetrics> Experiment::run_all() {
    std::vector<RoundMetrics> rows;
    if (fed_.rounds == 0) {
        const auto t0 = std::chrono::steady_clock::now();
        RoundMetrics m;
        m.round = 0;
        m.selected_clients = 0;
        m.test_acc = evaluate();
        m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        rows.push_back(m);
        return rows;
    }
    for (int r = 0; r < fed_.rounds; ++r) rows.push_back(run_round());
    return rows;
}

std::map<std::string, double> measure_spike_rates(Model& model, const EncodedDataset& probe,
                                                  int batch_size) {
    if (probe.size() == 0) throw std::invalid_argument("measure_spike_rates: empty probe set");
    SpikeRateRecorder rec;
    std::vector<int> rows;
    for (int start = 0; start < probe.size(); start += batch_size) {
        const int stop = std::min(probe.size(), start + batch_size);
        rows.resize(static_cast<size_t>(stop - start));
        std::iota(rows.begin(), rows.end(), start);
        EncodedBatch batch = probe.batch(rows);
        model.predict(batch, &rec);
    }

    std::map<std::string, double> rates;
    rates["conv1"] = rec.rate("lif1");
    rates["conv2"] = rec.rate("lif2");
    rates["conv3"] = rec.rate("lif3");
    rates["fc1"] = rec.rate("lif4");
    rates["bn1"] = rec.rate("bn1");
    rates["bn2"] = rec.rate("bn2");
    rates["bn3"] = rec.rate("bn3");
    rates["bn4"] = rec.rate("bn4");
    // Pooling and the accumulator head carry analog values; by convention
    // they count as full-rate while any traffic flows.
    rates["ap1"] = rec.rate("pool1") > 0.0 ? 1.0 : 0.0;
    rates["ap2"] = rec.rate("pool2") > 0.0 ? 1.0 : 0.0;
    rates["fc2"] = rec.rate("head") > 0.0 ? 1.0 : 0.0;
    return rates;
}

}  // namespace fedsnn
