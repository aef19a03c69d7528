#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocfd/fault_label.hpp"
#include "ocfd/forest.hpp"
#include "ocfd/waveform.hpp"

namespace ocfd::diagnosis {

struct DiagnosisConfig {
    double source_rate = 25600.0;
    double target_rate = 10000.0;
    double frequency = 50.0;
    std::size_t window_samples = 200;  // target_rate / frequency
    std::size_t debounce_min_run = 5;
    std::size_t confirm_windows = 1;
    double phase_deg = 0.0;  // fundamental phase at the series start when it cannot be estimated

    void validate() const;
};

/// Linear interpolation onto a uniform grid at target_rate starting at the
/// first input timestamp. Throws std::invalid_argument for fewer than two
/// samples or an upsampling request.
sim::TriPhaseSeries resample(const sim::TriPhaseSeries& series, double target_rate);

/// One forest prediction per (i_a, i_b, i_c) sample.
std::vector<FaultLabel> classify_stream(const forest::RandomForestModel& model, const sim::TriPhaseSeries& series);

/// Replaces every run shorter than min_run by the previously accepted label.
/// The first run is always accepted.
std::vector<FaultLabel> debounce(std::span<const FaultLabel> labels, std::size_t min_run);

/// OR of the bits each label reports, keeping only bits observable in the
/// region the sample falls in. A bit also needs at least `min_support`
/// samples reporting it inside such regions. Throws std::invalid_argument
/// when the schedule length differs from the window length.
FaultLabel fuse_window(std::span<const FaultLabel> labels, std::span<const sim::Region> schedule,
                       std::size_t min_support = 1);

/// Region of each of `count` samples whose first sample sits at phase
/// `start_phase_deg`.
std::vector<sim::Region> region_schedule(double start_phase_deg, double frequency, double sample_rate,
                                         std::size_t count);

struct PhaseEstimate {
    double start_phase_deg = 0.0;  // phase of the fundamental at the first sample
    bool estimated = false;        // false: taken from the configuration
};

/// Estimates the fundamental phase from the samples labeled healthy. Such
/// samples carry an undistorted current vector whose d-q angle lags the
/// phase-A angle by 90 degrees. Falls back to config.phase_deg when fewer
/// than a tenth of a window qualifies.
PhaseEstimate estimate_phase(const sim::TriPhaseSeries& series, std::span<const FaultLabel> labels,
                             const DiagnosisConfig& config);

struct WindowRecord {
    std::size_t index = 0;
    double start_time = 0.0;
    std::vector<FaultLabel> labels;  // debounced
    FaultLabel fused;
};

struct FaultReport {
    FaultLabel fault_set;
    std::optional<double> first_detect_time;
    bool protection_signal = false;
    std::vector<WindowRecord> history;
    PhaseEstimate phase;
};

/// resample -> classify -> debounce -> per-window fusion -> latch.
///
/// Windows hold one fundamental period each and start where the estimated
/// phase wraps through zero. Protection latches once confirm_windows
/// consecutive windows fuse to the same non-empty set; first_detect_time is
/// the start of the first of them. After latching, later window verdicts are
/// OR-ed into fault_set.
FaultReport run_diagnosis(const forest::RandomForestModel& model, const sim::TriPhaseSeries& series,
                          const DiagnosisConfig& config);

/// Run-length summary such as "001000x66 000000x33".
std::string summarize_runs(std::span<const FaultLabel> labels);

/// Single-line JSON record with keys fault_set, first_detect_time and
/// protection_signal (plus per-window history when requested).
std::string to_json(const FaultReport& report, bool with_history = false, std::optional<std::size_t> series_id = {});

}  // namespace ocfd::diagnosis
