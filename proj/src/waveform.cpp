#include "ocfd/waveform.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ocfd::sim {

namespace {

// Timestamps round-trip through 9-decimal text, so fault instants are
// compared with a small absolute slack.
constexpr double kTimeSlack = 1e-12;

bool fault_active(double t, double t_fault) { return t >= t_fault - kTimeSlack; }

void validate_timeline(const FaultTimeline& timeline, double duration) {
    double previous = 0.0;
    for (const FaultEvent& ev : timeline) {
        if (!(ev.time >= 0.0 && ev.time < duration)) {
            throw std::invalid_argument("fault time outside [0, duration): " + std::to_string(ev.time));
        }
        if (ev.time < previous) throw std::invalid_argument("fault timeline is not sorted by time");
        previous = ev.time;
    }
}

}  // namespace

SignatureProfile SignatureProfile::four_wire_rectifier() {
    SignatureProfile p;
    for (Switch s : kAllSwitches) {
        p.suppressed[switch_number(s) - 1] = is_upper(s) ? HalfCycle::negative : HalfCycle::positive;
    }
    return p;
}

void SimConfig::validate() const {
    if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be > 0");
    if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be > 0");
    if (!(sample_rate >= 20.0 * frequency)) {
        throw std::invalid_argument("sample_rate must be at least 20x the fundamental frequency");
    }
    if (!(noise_sigma >= 0.0) || !(ripple_amplitude >= 0.0) || !(amplitude_drift >= 0.0)) {
        throw std::invalid_argument("noise parameters must be >= 0");
    }
    if (!(ripple_frequency >= 0.0)) throw std::invalid_argument("ripple_frequency must be >= 0");
    if (!(amplitude_drift < 1.0)) throw std::invalid_argument("amplitude_drift must be < 1");
    if (!(leakage >= 0.0 && leakage <= 1.0)) throw std::invalid_argument("leakage must lie in [0, 1]");
    if (!std::isfinite(phase_deg)) throw std::invalid_argument("phase_deg must be finite");
}

double healthy_phase_deg(double frequency, double phase_deg, double t) {
    double theta = std::fmod(360.0 * frequency * t + phase_deg, 360.0);
    if (theta < 0.0) theta += 360.0;
    if (theta >= 360.0) theta = 0.0;
    return theta;
}

TriPhaseSeries simulate(const SimConfig& config, const FaultTimeline& timeline, double duration) {
    config.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
    validate_timeline(timeline, duration);

    const auto n = static_cast<std::size_t>(std::ceil(duration * config.sample_rate - 1e-9));
    const double two_pi = 2.0 * std::numbers::pi;
    const double shift = two_pi / 3.0;

    std::mt19937_64 rng(config.seed);

    // Piecewise-linear load variation: one random gain per period boundary.
    std::vector<double> gains;
    if (config.amplitude_drift > 0.0) {
        std::uniform_real_distribution<double> gain(1.0 - config.amplitude_drift, 1.0 + config.amplitude_drift);
        const auto periods = static_cast<std::size_t>(std::ceil(duration * config.frequency)) + 2;
        gains.resize(periods);
        for (double& g : gains) g = gain(rng);
    }
    std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);

    TriPhaseSeries out;
    out.sample_rate = config.sample_rate;
    out.fault_timeline = timeline;
    out.frequency = config.frequency;
    out.phase_deg = config.phase_deg;
    out.samples.reserve(n);

    std::size_t next_event = 0;
    FaultLabel active;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / config.sample_rate;
        while (next_event < timeline.size() && fault_active(t, timeline[next_event].time)) {
            active = timeline[next_event].label;
            ++next_event;
        }

        double scale = config.amplitude;
        if (!gains.empty()) {
            const double cycles = t * config.frequency;
            const auto period = static_cast<std::size_t>(cycles);
            const double frac = cycles - static_cast<double>(period);
            scale *= gains[period] + (gains[period + 1] - gains[period]) * frac;
        }

        const double theta_deg = healthy_phase_deg(config.frequency, config.phase_deg, t);
        const double theta = theta_deg * std::numbers::pi / 180.0;
        const Region region = region_of(theta_deg);

        std::array<double, 3> phase{};
        for (int p = 0; p < 3; ++p) {
            const double healthy = scale * std::sin(theta - shift * p) +
                                   config.ripple_amplitude * std::sin(two_pi * config.ripple_frequency * t - shift * p);
            double value = healthy;
            const HalfCycle half = region.sign_pattern[p] > 0 ? HalfCycle::positive : HalfCycle::negative;
            const bool upper_clamps = active.is_open(upper_switch(p)) &&
                                      config.profile.suppressed_half(upper_switch(p)) == half;
            const bool lower_clamps = active.is_open(lower_switch(p)) &&
                                      config.profile.suppressed_half(lower_switch(p)) == half;
            if (upper_clamps || lower_clamps) value = config.leakage * healthy;
            if (config.noise_sigma > 0.0) value += noise(rng);
            phase[p] = value;
        }
        out.samples.push_back({t, phase[0], phase[1], phase[2]});
    }
    return out;
}

FaultLabel true_label_at(const TriPhaseSeries& series, double t) {
    if (series.empty()) throw std::out_of_range("true_label_at on an empty series");
    const double slack = 1e-9;
    if (t < series.start_time() - slack || t > series.end_time() + slack) {
        throw std::out_of_range("time " + std::to_string(t) + " outside the series span");
    }
    FaultLabel label;
    for (const FaultEvent& ev : series.fault_timeline) {
        if (!fault_active(t, ev.time)) break;
        label = ev.label;
    }
    return label;
}

std::string to_string(Sextant s) {
    static constexpr const char* kNames[] = {"SI", "SII", "SIII", "SIV", "SV", "SVI"};
    return kNames[static_cast<int>(s)];
}

Region region_of(double theta_deg) {
    double theta = std::fmod(theta_deg, 360.0);
    if (theta < 0.0) theta += 360.0;
    auto sextant = static_cast<int>(theta / 60.0);
    if (sextant > 5) sextant = 5;

    // Sign of (sin th, sin(th - 120), sin(th + 120)) at the sextant midpoint.
    static constexpr std::array<std::array<int, 3>, 6> kPatterns = {{
        {+1, -1, +1},
        {+1, -1, -1},
        {+1, +1, -1},
        {-1, +1, -1},
        {-1, +1, +1},
        {-1, -1, +1},
    }};
    return Region{static_cast<Sextant>(sextant), kPatterns[sextant]};
}

FaultLabel detectable_faults(const Region& region, const SignatureProfile& profile) {
    FaultLabel out;
    for (Switch s : kAllSwitches) {
        const HalfCycle half = region.sign_pattern[phase_of(s)] > 0 ? HalfCycle::positive : HalfCycle::negative;
        if (profile.suppressed_half(s) == half) out = out.with(s);
    }
    return out;
}

FaultLabel observable_label_at(const TriPhaseSeries& series, double t) {
    const FaultLabel active = true_label_at(series, t);
    if (active.is_normal()) return active;
    return observable_label(active, region_of(healthy_phase_deg(series.frequency, series.phase_deg, t)));
}

}  // namespace ocfd::sim
