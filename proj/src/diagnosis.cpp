#include "ocfd/diagnosis.hpp"

#include <array>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <stdexcept>

#include "ocfd/features.hpp"

namespace ocfd::diagnosis {

void DiagnosisConfig::validate() const {
    if (!(target_rate > 0.0) || !(source_rate > 0.0)) throw std::invalid_argument("sample rates must be > 0");
    if (target_rate > source_rate) throw std::invalid_argument("target_rate must not exceed source_rate");
    if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be > 0");
    if (debounce_min_run < 1) throw std::invalid_argument("debounce_min_run must be >= 1");
    if (confirm_windows < 1) throw std::invalid_argument("confirm_windows must be >= 1");
    const double per_period = target_rate / frequency;
    if (window_samples == 0 || std::abs(per_period - static_cast<double>(window_samples)) > 1e-6) {
        throw std::invalid_argument("window_samples must equal target_rate / frequency (" +
                                    std::to_string(per_period) + ")");
    }
}

sim::TriPhaseSeries resample(const sim::TriPhaseSeries& series, double target_rate) {
    if (series.size() < 2) throw std::invalid_argument("resampling needs at least two samples");
    if (!(target_rate > 0.0)) throw std::invalid_argument("target_rate must be > 0");
    if (target_rate > series.sample_rate) throw std::invalid_argument("resample does not upsample");
    if (target_rate == series.sample_rate) return series;

    sim::TriPhaseSeries out;
    out.sample_rate = target_rate;
    out.fault_timeline = series.fault_timeline;
    out.frequency = series.frequency;
    out.phase_deg = series.phase_deg;

    const double ratio = series.sample_rate / target_rate;
    const std::size_t last = series.size() - 1;
    const auto count = static_cast<std::size_t>(std::floor(static_cast<double>(last) / ratio + 1e-9)) + 1;
    out.samples.reserve(count);
    const double t0 = series.start_time();
    for (std::size_t k = 0; k < count; ++k) {
        const double pos = static_cast<double>(k) * ratio;
        auto i = static_cast<std::size_t>(pos);
        if (i >= last) i = last - 1;
        const double frac = std::min(1.0, pos - static_cast<double>(i));
        const sim::PhaseSample& lo = series.samples[i];
        const sim::PhaseSample& hi = series.samples[i + 1];
        out.samples.push_back({t0 + static_cast<double>(k) / target_rate, lo.a + (hi.a - lo.a) * frac,
                               lo.b + (hi.b - lo.b) * frac, lo.c + (hi.c - lo.c) * frac});
    }
    return out;
}

std::vector<FaultLabel> classify_stream(const forest::RandomForestModel& model, const sim::TriPhaseSeries& series) {
    if (model.width() != 3) {
        throw std::invalid_argument("stream classification needs a 3-feature model, got width " +
                                    std::to_string(model.width()));
    }
    std::vector<FaultLabel> out;
    out.reserve(series.size());
    for (const sim::PhaseSample& s : series.samples) {
        const double x[3] = {s.a, s.b, s.c};
        out.push_back(forest::predict_label(model, x));
    }
    return out;
}

std::vector<FaultLabel> debounce(std::span<const FaultLabel> labels, std::size_t min_run) {
    if (min_run < 1) throw std::invalid_argument("min_run must be >= 1");
    std::vector<FaultLabel> out(labels.begin(), labels.end());
    FaultLabel accepted;
    bool first = true;
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t j = i;
        while (j < labels.size() && labels[j] == labels[i]) ++j;
        if (first || j - i >= min_run) {
            accepted = labels[i];
            first = false;
        } else {
            std::fill(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(j),
                      accepted);
        }
        i = j;
    }
    return out;
}

FaultLabel fuse_window(std::span<const FaultLabel> labels, std::span<const sim::Region> schedule,
                       std::size_t min_support) {
    if (labels.size() != schedule.size()) {
        throw std::invalid_argument("region schedule covers " + std::to_string(schedule.size()) +
                                    " samples but the window has " + std::to_string(labels.size()));
    }
    std::array<std::size_t, 6> support{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const FaultLabel seen = sim::observable_label(labels[i], schedule[i]);
        for (Switch s : seen.switches()) ++support[static_cast<std::size_t>(s) - 1];
    }
    FaultLabel fused;
    for (Switch s : kAllSwitches) {
        if (support[static_cast<std::size_t>(s) - 1] >= std::max<std::size_t>(min_support, 1)) fused = fused.with(s);
    }
    return fused;
}

std::vector<sim::Region> region_schedule(double start_phase_deg, double frequency, double sample_rate,
                                         std::size_t count) {
    std::vector<sim::Region> out;
    out.reserve(count);
    const double step = 360.0 * frequency / sample_rate;
    for (std::size_t k = 0; k < count; ++k) out.push_back(sim::region_of(start_phase_deg + step * static_cast<double>(k)));
    return out;
}

PhaseEstimate estimate_phase(const sim::TriPhaseSeries& series, std::span<const FaultLabel> labels,
                             const DiagnosisConfig& config) {
    if (labels.size() != series.size()) throw std::invalid_argument("label count does not match the series");
    const double step = 360.0 * config.frequency / series.sample_rate;
    const double to_rad = std::numbers::pi / 180.0;
    double sum_cos = 0.0;
    double sum_sin = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!labels[k].is_normal()) continue;
        const sim::PhaseSample& s = series.samples[k];
        const features::CurrentVector v = features::dq_transform(s.a, s.b, s.c);
        if (!(v.magnitude() > features::kDegenerateEpsilon)) continue;
        // Healthy currents give (i_d, i_q) = A (sin th, -cos th).
        const double theta = features::vector_angle(v) + 90.0;
        const double start = (theta - step * static_cast<double>(k)) * to_rad;
        sum_cos += std::cos(start);
        sum_sin += std::sin(start);
        ++used;
    }
    if (used * 10 < config.window_samples || std::hypot(sum_cos, sum_sin) < 1e-9) {
        return {config.phase_deg, false};
    }
    double deg = std::atan2(sum_sin, sum_cos) / to_rad;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return {deg, true};
}

FaultReport run_diagnosis(const forest::RandomForestModel& model, const sim::TriPhaseSeries& series,
                          const DiagnosisConfig& config) {
    config.validate();
    FaultReport report;
    if (series.empty()) return report;

    const sim::TriPhaseSeries stream =
        series.sample_rate == config.target_rate ? series : resample(series, config.target_rate);
    const std::vector<FaultLabel> raw = classify_stream(model, stream);
    const std::vector<FaultLabel> labels = debounce(raw, config.debounce_min_run);

    report.phase = estimate_phase(stream, labels, config);
    const double step = 360.0 * config.frequency / config.target_rate;
    const std::size_t window = config.window_samples;

    // First window starts at the sample nearest to the next zero of the phase.
    double to_zero = std::fmod(360.0 - report.phase.start_phase_deg, 360.0);
    if (to_zero < 0.0) to_zero += 360.0;
    const std::size_t offset = static_cast<std::size_t>(std::llround(to_zero / step)) % window;

    std::size_t agreeing = 0;
    FaultLabel candidate;
    double candidate_start = 0.0;
    for (std::size_t start = offset, w = 0; start + window <= labels.size(); start += window, ++w) {
        WindowRecord rec;
        rec.index = w;
        rec.start_time = stream.samples[start].t;
        rec.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(start),
                          labels.begin() + static_cast<std::ptrdiff_t>(start + window));
        const double start_phase = report.phase.start_phase_deg + step * static_cast<double>(start);
        rec.fused = fuse_window(rec.labels, region_schedule(start_phase, config.frequency, config.target_rate, window),
                                config.debounce_min_run);

        if (report.protection_signal) {
            report.fault_set = report.fault_set | rec.fused;
        } else if (rec.fused.is_normal()) {
            agreeing = 0;
        } else {
            if (agreeing > 0 && rec.fused == candidate) {
                ++agreeing;
            } else {
                candidate = rec.fused;
                candidate_start = rec.start_time;
                agreeing = 1;
            }
            if (agreeing >= config.confirm_windows) {
                report.protection_signal = true;
                report.fault_set = candidate;
                report.first_detect_time = candidate_start;
            }
        }
        report.history.push_back(std::move(rec));
    }
    return report;
}

std::string summarize_runs(std::span<const FaultLabel> labels) {
    std::string out;
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t j = i;
        while (j < labels.size() && labels[j] == labels[i]) ++j;
        if (!out.empty()) out += ' ';
        out += labels[i].to_string() + "x" + std::to_string(j - i);
        i = j;
    }
    return out;
}

std::string to_json(const FaultReport& report, bool with_history, std::optional<std::size_t> series_id) {
    nlohmann::ordered_json j;
    if (series_id) j["series"] = *series_id;
    auto switches = nlohmann::json::array();
    for (Switch s : report.fault_set.switches()) switches.push_back(to_string(s));
    j["fault_set"] = switches;
    j["first_detect_time"] = report.first_detect_time ? nlohmann::json(*report.first_detect_time) : nlohmann::json();
    j["protection_signal"] = report.protection_signal;
    if (with_history) {
        auto windows = nlohmann::json::array();
        for (const WindowRecord& w : report.history) {
            windows.push_back({{"index", w.index},
                               {"start_time", w.start_time},
                               {"fused", w.fused.to_string()},
                               {"labels", summarize_runs(w.labels)}});
        }
        j["windows"] = windows;
    }
    return j.dump();
}

}  // namespace ocfd::diagnosis
