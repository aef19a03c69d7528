#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "ocfd/experiment.hpp"

namespace ocfd::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_real(const std::string& v) {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("not a real number");
    return x;
}

std::uint64_t to_uint(const std::string& v) {
    if (v.empty() || v[0] == '-') throw std::invalid_argument("not a non-negative integer");
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("not a non-negative integer");
    return x;
}

sim::FaultTimeline parse_timeline(const std::string& v) {
    sim::FaultTimeline out;
    for (const std::string& item : split_list(v)) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw std::invalid_argument("fault event must be label@time");
        out.push_back({to_real(trim(item.substr(at + 1))), FaultLabel::parse(trim(item.substr(0, at)))});
    }
    return out;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    sim.seed = s;
    forest.seed = s;
}

std::vector<FaultLabel> default_composition() {
    std::vector<FaultLabel> out{FaultLabel::normal()};
    for (Switch s : kAllSwitches) out.push_back(FaultLabel::of({s}));
    for (std::size_t i = 0; i < kAllSwitches.size(); ++i) {
        for (std::size_t j = i + 1; j < kAllSwitches.size(); ++j) {
            out.push_back(FaultLabel::of({kAllSwitches[i], kAllSwitches[j]}));
        }
    }
    return out;
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    bool window_explicit = false;

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"seed", [&](const std::string& v) { c.set_seed(to_uint(v)); }},
        {"amplitude", [&](const std::string& v) { c.sim.amplitude = to_real(v); }},
        {"frequency",
         [&](const std::string& v) {
             c.sim.frequency = to_real(v);
             c.diagnosis.frequency = c.sim.frequency;
         }},
        {"sample_rate",
         [&](const std::string& v) {
             c.sim.sample_rate = to_real(v);
             c.diagnosis.source_rate = c.sim.sample_rate;
         }},
        {"phase_deg", [&](const std::string& v) { c.sim.phase_deg = to_real(v); }},
        {"noise_sigma", [&](const std::string& v) { c.sim.noise_sigma = to_real(v); }},
        {"ripple_amplitude", [&](const std::string& v) { c.sim.ripple_amplitude = to_real(v); }},
        {"ripple_frequency", [&](const std::string& v) { c.sim.ripple_frequency = to_real(v); }},
        {"amplitude_drift", [&](const std::string& v) { c.sim.amplitude_drift = to_real(v); }},
        {"leakage", [&](const std::string& v) { c.sim.leakage = to_real(v); }},
        {"n_trees", [&](const std::string& v) { c.forest.n_trees = to_uint(v); }},
        {"m_try", [&](const std::string& v) { c.forest.m_try = to_uint(v); }},
        {"max_depth", [&](const std::string& v) { c.forest.stop.max_depth = static_cast<int>(to_uint(v)); }},
        {"min_samples_leaf", [&](const std::string& v) { c.forest.stop.min_samples_leaf = to_uint(v); }},
        {"threads", [&](const std::string& v) { c.forest.threads = static_cast<unsigned>(to_uint(v)); }},
        {"target_rate", [&](const std::string& v) { c.diagnosis.target_rate = to_real(v); }},
        {"window_samples",
         [&](const std::string& v) {
             c.diagnosis.window_samples = to_uint(v);
             window_explicit = true;
         }},
        {"debounce_min_run", [&](const std::string& v) { c.diagnosis.debounce_min_run = to_uint(v); }},
        {"confirm_windows", [&](const std::string& v) { c.diagnosis.confirm_windows = to_uint(v); }},
        {"diagnosis_phase_deg", [&](const std::string& v) { c.diagnosis.phase_deg = to_real(v); }},
        {"classes",
         [&](const std::string& v) {
             c.composition.classes.clear();
             if (v == "default") return;
             for (const std::string& item : split_list(v)) c.composition.classes.push_back(FaultLabel::parse(item));
             if (c.composition.classes.empty()) throw std::invalid_argument("empty class list");
         }},
        {"total_samples", [&](const std::string& v) { c.composition.total_samples = to_uint(v); }},
        {"series_per_class", [&](const std::string& v) { c.composition.series_per_class = to_uint(v); }},
        {"train_count", [&](const std::string& v) { c.train_count = to_uint(v); }},
        {"test_count", [&](const std::string& v) { c.test_count = to_uint(v); }},
        {"k_folds", [&](const std::string& v) { c.k_folds = to_uint(v); }},
        {"tree_counts",
         [&](const std::string& v) {
             c.tree_counts.clear();
             for (const std::string& item : split_list(v)) c.tree_counts.push_back(to_uint(item));
             if (c.tree_counts.empty()) throw std::invalid_argument("empty tree count list");
         }},
        {"scenario", [&](const std::string& v) { c.scenario = parse_timeline(v); }},
        {"scenario_duration", [&](const std::string& v) { c.scenario_duration = to_real(v); }},
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ParseError(line_no, "unknown configuration key '" + key + "'");
        try {
            it->second(value);
        } catch (const std::exception& e) {
            throw ParseError(line_no, "bad value for '" + key + "': " + e.what());
        }
    }

    if (!window_explicit) {
        c.diagnosis.window_samples = static_cast<std::size_t>(std::llround(c.diagnosis.target_rate / c.diagnosis.frequency));
    }
    try {
        c.sim.validate();
        c.diagnosis.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, std::string("invalid configuration: ") + e.what());
    }
    if (c.test_count > 0 && c.train_count + c.test_count > c.composition.total_samples) {
        throw ParseError(line_no, "train_count + test_count exceeds total_samples");
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace ocfd::io
