#include "fedsnn/energy.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <stdexcept>

namespace fedsnn {

int64_t flops_of_layer(const LayerDesc& layer) {
    switch (layer.kind) {
        case LayerDesc::Kind::Conv:
            return static_cast<int64_t>(layer.kernel_size) * layer.kernel_size *
                   layer.out_side * layer.out_side * layer.in_channels * layer.out_channels;
        case LayerDesc::Kind::BatchNorm:
        case LayerDesc::Kind::AvgPool:
            return static_cast<int64_t>(layer.in_channels) * layer.in_side * layer.in_side;
        case LayerDesc::Kind::FullyConnected:
            return static_cast<int64_t>(layer.in_features) * layer.out_features;
    }
    throw std::invalid_argument("flops_of_layer: unknown layer kind");
}

double energy_cnn_pj(int64_t flops, const EnergyCosts& costs) {
    return static_cast<double>(flops) * (costs.e_mult_pj + costs.e_add_pj);
}

double energy_snn_pj(int64_t flops, double spike_rate, int time_steps, const EnergyCosts& costs) {
    if (spike_rate < 0.0) throw std::invalid_argument("energy_snn_pj: negative spike rate");
    return static_cast<double>(flops) * spike_rate * time_steps * costs.e_ac_pj;
}

EnergyLedger build_energy_report(const std::vector<LayerDesc>& layers,
                                 const std::map<std::string, double>* rates,
                                 const EnergyCosts& costs, int time_steps) {
    EnergyLedger ledger;
    ledger.has_rates = rates != nullptr;
    for (const auto& layer : layers) {
        EnergyRow row;
        row.layer = layer.name;
        row.flops = flops_of_layer(layer);
        row.e_cnn_pj = energy_cnn_pj(row.flops, costs);
        if (rates) {
            auto it = rates->find(layer.name);
            if (it == rates->end())
                throw std::invalid_argument("build_energy_report: no spike rate for layer '" +
                                            layer.name + "'");
            row.spike_rate = it->second;
            row.has_rate = true;
            row.e_snn_pj = energy_snn_pj(row.flops, row.spike_rate, time_steps, costs);
        }
        ledger.total_flops += row.flops;
        ledger.total_cnn_pj += row.e_cnn_pj;
        ledger.total_snn_pj += row.e_snn_pj;
        ledger.rows.push_back(std::move(row));
    }
    return ledger;
}

namespace {

std::string fmt_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

std::string energy_report_csv(const EnergyLedger& ledger) {
    std::string out = "layer,flops,spike_rate,e_cnn_pj,e_snn_pj\n";
    for (const auto& row : ledger.rows) {
        out += row.layer;
        out += ',' + std::to_string(row.flops) + ',';
        if (row.has_rate) out += fmt_double(row.spike_rate, "%.6f");
        out += ',' + fmt_double(row.e_cnn_pj, "%.1f") + ',';
        if (row.has_rate) out += fmt_double(row.e_snn_pj, "%.1f");
        out += '\n';
    }
    out += "total," + std::to_string(ledger.total_flops) + ",," +
           fmt_double(ledger.total_cnn_pj, "%.1f") + ',';
    if (ledger.has_rates) out += fmt_double(ledger.total_snn_pj, "%.1f");
    out += '\n';
    out += "ratio,,,,";
    if (ledger.has_rates && ledger.total_snn_pj > 0.0)
        out += fmt_double(ledger.cnn_over_snn(), "%.3f");
    out += '\n';
    return out;
}

}  // namespace fedsnn
