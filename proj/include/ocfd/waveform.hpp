#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ocfd/fault_label.hpp"

namespace ocfd::sim {

/// Half-cycle of a phase current.
enum class HalfCycle : std::uint8_t { positive, negative };

/// Which half-cycle of its phase current each switch's open fault removes.
///
/// The default describes a three-phase four-wire PWM rectifier, where each
/// leg behaves as an independent half-bridge: an open upper switch removes
/// the negative half-cycle and an open lower switch the positive one. Other
/// converters (e.g. an NPC inverter) can be approximated by supplying a
/// different table; this is a signature-level model only.
struct SignatureProfile {
    std::array<HalfCycle, 6> suppressed{};

    static SignatureProfile four_wire_rectifier();
    HalfCycle suppressed_half(Switch s) const { return suppressed[switch_number(s) - 1]; }
};

struct SimConfig {
    double amplitude = 14.28;         // peak phase current, A
    double frequency = 50.0;          // Hz
    double sample_rate = 25600.0;     // Hz
    double phase_deg = 0.0;           // fundamental phase at t = 0
    double noise_sigma = 0.1;         // additive Gaussian, A
    double ripple_amplitude = 0.1;    // A
    double ripple_frequency = 2000.0; // Hz
    double amplitude_drift = 0.05;    // relative load variation per period
    double leakage = 0.0;             // residual fraction of a suppressed half-cycle
    std::uint64_t seed = 1;
    SignatureProfile profile = SignatureProfile::four_wire_rectifier();

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

struct FaultEvent {
    double time = 0.0;
    FaultLabel label;
};

using FaultTimeline = std::vector<FaultEvent>;

struct PhaseSample {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Uniformly sampled three-phase currents plus the faults that shaped them.
struct TriPhaseSeries {
    std::vector<PhaseSample> samples;
    double sample_rate = 25600.0;
    FaultTimeline fault_timeline;
    // Annotations carried from the simulator; used for ground-truth lookups.
    double frequency = 50.0;
    double phase_deg = 0.0;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double start_time() const { return samples.empty() ? 0.0 : samples.front().t; }
    double end_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

/// Behavioral simulation of the phase currents over [0, duration).
///
/// Healthy phases are A sin(theta), A sin(theta - 120 deg), A sin(theta + 120 deg)
/// with theta = 360 f t + phase_deg. An open switch clamps the half-cycle it
/// conducts to leakage * healthy; the clamp starts at the first sample with
/// t >= t_fault. Noise is drawn for every sample whether or not a fault is
/// active, so the timeline never perturbs the random stream.
TriPhaseSeries simulate(const SimConfig& config, const FaultTimeline& timeline, double duration);

/// Last timeline label with t_fault <= t, or the healthy label.
/// Throws std::out_of_range when t lies outside the series span.
FaultLabel true_label_at(const TriPhaseSeries& series, double t);

/// Sextants of the fundamental period, SI starting at theta = 0.
enum class Sextant : std::uint8_t { SI = 0, SII, SIII, SIV, SV, SVI };

struct Region {
    Sextant index = Sextant::SI;
    std::array<int, 3> sign_pattern{};  // +1 / -1 for (i_a, i_b, i_c)

    friend bool operator==(const Region&, const Region&) = default;
};

std::string to_string(Sextant s);

/// Region containing theta (degrees). Any finite angle is normalized first.
Region region_of(double theta_deg);

/// Switches whose open fault is visible inside the region:
/// upper switches of negative phases and lower switches of positive phases.
FaultLabel detectable_faults(const Region& region,
                             const SignatureProfile& profile = SignatureProfile::four_wire_rectifier());

/// Fault bits of `label` that actually distort the currents in `region`.
inline FaultLabel observable_label(FaultLabel label, const Region& region,
                                   const SignatureProfile& profile = SignatureProfile::four_wire_rectifier()) {
    return label & detectable_faults(region, profile);
}

/// Fundamental phase (degrees, [0, 360)) of the healthy waveform at time t.
double healthy_phase_deg(double frequency, double phase_deg, double t);

/// Ground-truth instantaneous label: the active fault set restricted to the
/// switches observable at t.
FaultLabel observable_label_at(const TriPhaseSeries& series, double t);

}  // namespace ocfd::sim
