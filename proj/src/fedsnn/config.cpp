#include "fedsnn/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "fedsnn/io.hpp"

namespace fedsnn {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int64_t parse_int(const std::string& key, const std::string& value) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + value +
                          "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"model", [](auto& c, auto&, auto& v) { c.model = v; }},
        {"encoder", [](auto& c, auto&, auto& v) { c.encoder = v; }},
        {"nrfe_variant", [](auto& c, auto&, auto& v) { c.nrfe_variant = v; }},
        {"nrfe_temporal", [](auto& c, auto&, auto& v) { c.nrfe_temporal = v; }},
        {"time_steps", [](auto& c, auto& k, auto& v) { c.time_steps = static_cast<int>(parse_int(k, v)); }},
        {"lambda", [](auto& c, auto& k, auto& v) { c.lambda = parse_double(k, v); }},
        {"alpha", [](auto& c, auto& k, auto& v) { c.alpha = parse_double(k, v); }},
        {"theta", [](auto& c, auto& k, auto& v) { c.theta = parse_double(k, v); }},
        {"bn_epsilon", [](auto& c, auto& k, auto& v) { c.bn_epsilon = parse_double(k, v); }},
        {"bn_momentum", [](auto& c, auto& k, auto& v) { c.bn_momentum = parse_double(k, v); }},
        {"reset", [](auto& c, auto&, auto& v) { c.reset = v; }},
        {"grad_clip", [](auto& c, auto& k, auto& v) { c.grad_clip = parse_double(k, v); }},
        {"clients", [](auto& c, auto& k, auto& v) { c.clients = static_cast<int>(parse_int(k, v)); }},
        {"participation", [](auto& c, auto& k, auto& v) { c.participation = parse_double(k, v); }},
        {"local_epochs", [](auto& c, auto& k, auto& v) { c.local_epochs = static_cast<int>(parse_int(k, v)); }},
        {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = static_cast<int>(parse_int(k, v)); }},
        {"eta", [](auto& c, auto& k, auto& v) { c.eta = parse_double(k, v); }},
        {"rounds", [](auto& c, auto& k, auto& v) { c.rounds = static_cast<int>(parse_int(k, v)); }},
        {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
        {"test_dataset", [](auto& c, auto&, auto& v) { c.test_dataset = v; }},
        {"synth_classes", [](auto& c, auto& k, auto& v) { c.synth_classes = static_cast<int>(parse_int(k, v)); }},
        {"synth_per_class", [](auto& c, auto& k, auto& v) { c.synth_per_class = static_cast<int>(parse_int(k, v)); }},
        {"synth_side", [](auto& c, auto& k, auto& v) { c.synth_side = static_cast<int>(parse_int(k, v)); }},
        {"synth_channels", [](auto& c, auto& k, auto& v) { c.synth_channels = static_cast<int>(parse_int(k, v)); }},
        {"synth_test_per_class", [](auto& c, auto& k, auto& v) { c.synth_test_per_class = static_cast<int>(parse_int(k, v)); }},
        {"partition", [](auto& c, auto&, auto& v) { c.partition = v; }},
        {"mu", [](auto& c, auto& k, auto& v) { c.mu = parse_double(k, v); }},
        {"per_class_per_client", [](auto& c, auto& k, auto& v) { c.per_class_per_client = static_cast<int>(parse_int(k, v)); }},
        {"samples_per_client", [](auto& c, auto& k, auto& v) { c.samples_per_client = static_cast<int>(parse_int(k, v)); }},
        {"noise_ratio", [](auto& c, auto& k, auto& v) { c.noise_ratio = parse_double(k, v); }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
    };
    return table;
}

void check_range(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
}

void check_enum(const std::string& key, const std::string& value,
                std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (value == a) return;
    std::string opts;
    for (const char* a : allowed) {
        if (!opts.empty()) opts += " | ";
        opts += a;
    }
    throw ConfigError("config: key '" + key + "' must be one of {" + opts + "}, got '" + value +
                      "'");
}

}  // namespace

void validate_config(ExperimentConfig& c) {
    check_enum("model", c.model, {"snn", "cnn"});
    if (c.encoder.empty()) c.encoder = c.model == "snn" ? "nrfe" : "none";
    check_enum("encoder", c.encoder, {"nrfe", "rate", "none"});
    if (c.model == "snn" && c.encoder == "none")
        throw ConfigError("config: the spiking model needs a spike encoder (nrfe or rate)");
    if (c.model == "cnn" && c.encoder != "none")
        throw ConfigError("config: the cnn baseline consumes raw normalized pixels "
                          "(set encoder = none)");
    check_enum("nrfe_variant", c.nrfe_variant, {"literal", "threshold"});
    check_enum("nrfe_temporal", c.nrfe_temporal, {"resample", "static"});
    check_enum("reset", c.reset, {"hard", "soft"});
    check_enum("partition", c.partition, {"iid", "dirichlet"});

    check_range(c.time_steps >= 1, "time_steps must be >= 1");
    check_range(c.lambda > 0.0 && c.lambda < 1.0, "lambda must lie in (0,1)");
    check_range(c.alpha > 0.0, "alpha must be positive");
    check_range(c.theta > 0.0, "theta must be positive");
    check_range(c.bn_epsilon > 0.0, "bn_epsilon must be positive");
    check_range(c.bn_momentum > 0.0 && c.bn_momentum < 1.0, "bn_momentum must lie in (0,1)");
    check_range(c.grad_clip >= 0.0, "grad_clip must be >= 0");
    check_range(c.clients >= 1, "clients must be >= 1");
    check_range(c.participation > 0.0 && c.participation <= 1.0,
                "participation must lie in (0,1]");
    check_range(c.local_epochs >= 1, "local_epochs must be >= 1");
    check_range(c.batch_size >= 1, "batch_size must be >= 1");
    check_range(c.eta >= 0.0, "eta must be >= 0");
    check_range(c.rounds >= 0, "rounds must be >= 0");
    check_range(c.mu > 0.0, "mu must be positive");
    check_range(c.per_class_per_client >= 1, "per_class_per_client must be >= 1");
    check_range(c.samples_per_client >= 0, "samples_per_client must be >= 0");
    check_range(c.noise_ratio >= 0.0 && c.noise_ratio <= 1.0, "noise_ratio must lie in [0,1]");
    check_range(c.synth_classes >= 2, "synth_classes must be >= 2");
    check_range(c.synth_per_class >= 1, "synth_per_class must be >= 1");
    check_range(c.synth_side >= 4 && c.synth_side % 4 == 0,
                "synth_side must be a positive multiple of 4");
    check_range(c.synth_channels >= 1, "synth_channels must be >= 1");
    check_range(c.synth_test_per_class >= 1, "synth_test_per_class must be >= 1");
    if (c.dataset.empty() != c.test_dataset.empty())
        throw ConfigError("config: dataset and test_dataset must be given together");
    for (const std::string& path : {c.dataset, c.test_dataset})
        if (!path.empty() && !std::filesystem::exists(path))
            throw ConfigError("config: referenced file does not exist: " + path);
}

void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(cfg, key, value);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'key = value': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
        if (!seen.insert(key).second)
            throw ConfigError("config: duplicate key '" + key + "'");
        config_set(cfg, key, value);
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config_text(text);
}

std::string render_config(const ExperimentConfig& c) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("model", c.model);
    kv("encoder", c.encoder);
    kv("nrfe_variant", c.nrfe_variant);
    kv("nrfe_temporal", c.nrfe_temporal);
    kv("time_steps", std::to_string(c.time_steps));
    kv("lambda", fmt_double(c.lambda));
    kv("alpha", fmt_double(c.alpha));
    kv("theta", fmt_double(c.theta));
    kv("bn_epsilon", fmt_double(c.bn_epsilon));
    kv("bn_momentum", fmt_double(c.bn_momentum));
    kv("reset", c.reset);
    kv("grad_clip", fmt_double(c.grad_clip));
    kv("clients", std::to_string(c.clients));
    kv("participation", fmt_double(c.participation));
    kv("local_epochs", std::to_string(c.local_epochs));
    kv("batch_size", std::to_string(c.batch_size));
    kv("eta", fmt_double(c.eta));
    kv("rounds", std::to_string(c.rounds));
    if (!c.dataset.empty()) kv("dataset", c.dataset);
    if (!c.test_dataset.empty()) kv("test_dataset", c.test_dataset);
    kv("synth_classes", std::to_string(c.synth_classes));
    kv("synth_per_class", std::to_string(c.synth_per_class));
    kv("synth_side", std::to_string(c.synth_side));
    kv("synth_channels", std::to_string(c.synth_channels));
    kv("synth_test_per_class", std::to_string(c.synth_test_per_class));
    kv("partition", c.partition);
    kv("mu", fmt_double(c.mu));
    kv("per_class_per_client", std::to_string(c.per_class_per_client));
    kv("samples_per_client", std::to_string(c.samples_per_client));
    kv("noise_ratio", fmt_double(c.noise_ratio));
    kv("seed", std::to_string(c.seed));
    return out;
}

}  // namespace fedsnn
