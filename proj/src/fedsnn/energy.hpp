#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fedsnn {

// Per-operation energies, 45nm 32-bit figures in picojoules.
struct EnergyCosts {
    double e_mult_pj = 3.1;
    double e_add_pj = 0.1;
    double e_ac_pj = 0.1;
};

struct LayerDesc {
    enum class Kind { Conv, BatchNorm, AvgPool, FullyConnected };
    Kind kind;
    std::string name;
    // Conv / BatchNorm / AvgPool geometry
    int kernel_size = 0;
    int in_channels = 0;
    int out_channels = 0;
    int in_side = 0;
    int out_side = 0;
    // FullyConnected geometry
    int in_features = 0;
    int out_features = 0;
};

// Case-split FLOPs count:
//   Conv: ks^2 * M_out^2 * C_in * C_out
//   BN or AP: C_in * M_in^2
//   FC: N_in * N_out
int64_t flops_of_layer(const LayerDesc& layer);

double energy_cnn_pj(int64_t flops, const EnergyCosts& costs);
double energy_snn_pj(int64_t flops, double spike_rate, int time_steps, const EnergyCosts& costs);

// Nonzero-activity counters accumulated over a probe pass. A probe's rate is
// the fraction of (element, time step, sample) slots that carried a nonzero
// value.
struct ProbeCounts {
    uint64_t nonzero = 0;
    uint64_t slots = 0;
    double rate() const { return slots == 0 ? 0.0 : static_cast<double>(nonzero) / slots; }
};

class SpikeRateRecorder {
public:
    void add(const std::string& probe, uint64_t nonzero, uint64_t slots) {
        auto& c = probes_[probe];
        c.nonzero += nonzero;
        c.slots += slots;
    }
    void count_tensor(const std::string& probe, const float* data, int64_t n) {
        uint64_t nz = 0;
        for (int64_t i = 0; i < n; ++i) nz += data[i] != 0.0f;
        add(probe, nz, static_cast<uint64_t>(n));
    }
    void merge(const SpikeRateRecorder& other) {
        for (const auto& [name, c] : other.probes_) add(name, c.nonzero, c.slots);
    }
    double rate(const std::string& probe) const {
        auto it = probes_.find(probe);
        return it == probes_.end() ? 0.0 : it->second.rate();
    }
    const std::map<std::string, ProbeCounts>& probes() const { return probes_; }

private:
    std::map<std::string, ProbeCounts> probes_;
};

struct EnergyRow {
    std::string layer;
    int64_t flops = 0;
    double spike_rate = 0.0;
    bool has_rate = false;
    double e_cnn_pj = 0.0;
    double e_snn_pj = 0.0;
};

struct EnergyLedger {
    std::vector<EnergyRow> rows;
    int64_t total_flops = 0;
    double total_cnn_pj = 0.0;
    double total_snn_pj = 0.0;
    bool has_rates = false;
    double cnn_over_snn() const { return total_snn_pj > 0.0 ? total_cnn_pj / total_snn_pj : 0.0; }
};

// One row per descriptor; `rates` maps layer name -> spike rate and may be
// null for a pure CNN report (rate and SNN-energy columns stay empty).
EnergyLedger build_energy_report(const std::vector<LayerDesc>& layers,
                                 const std::map<std::string, double>* rates,
                                 const EnergyCosts& costs, int time_steps);

// CSV: layer,flops,spike_rate,e_cnn_pj,e_snn_pj (+ total row and ratio footer).
std::string energy_report_csv(const EnergyLedger& ledger);

}  // namespace fedsnn
