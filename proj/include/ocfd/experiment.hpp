#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocfd/dataset.hpp"
#include "ocfd/diagnosis.hpp"
#include "ocfd/forest.hpp"
#include "ocfd/waveform.hpp"

namespace ocfd::io {

struct DatasetComposition {
    std::vector<FaultLabel> classes;  // empty = default 22 classes
    std::size_t total_samples = 24000;
    std::size_t series_per_class = 2;
};

/// Simulator defaults for generated datasets: a small leakage through the
/// clamped half keeps complementary double faults such as S4+S5 and S3+S6
/// apart; with zero leakage they give identical currents over part of the
/// cycle.
inline sim::SimConfig experiment_sim_defaults() {
    sim::SimConfig s;
    s.leakage = 0.05;
    return s;
}

/// Everything a CLI run needs, loaded from a `key = value` text file.
struct ExperimentConfig {
    sim::SimConfig sim = experiment_sim_defaults();
    forest::ForestParams forest;
    diagnosis::DiagnosisConfig diagnosis;
    DatasetComposition composition;
    std::size_t train_count = 8000;
    std::size_t test_count = 0;  // 0 = every row not used for training
    std::size_t k_folds = 5;
    std::vector<std::size_t> tree_counts{1, 8, 64, 264};
    sim::FaultTimeline scenario;  // non-empty: `gen` writes one scenario series
    double scenario_duration = 0.2;
    std::uint64_t seed = 1;

    /// Propagates the master seed into the simulator and forest settings.
    void set_seed(std::uint64_t s);
};

/// Normal, the six single-switch faults and the fifteen double faults.
std::vector<FaultLabel> default_composition();

/// Parses `key = value` lines ('#' starts a comment). Unknown keys and bad
/// values raise ParseError with the line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);

/// Training pool: per class, series_per_class simulated series with a random
/// fault phase; each row is labeled with the fault bits observable at its
/// instant.
Dataset generate_dataset(const ExperimentConfig& config);

/// One series following config.scenario over config.scenario_duration.
Dataset generate_scenario(const ExperimentConfig& config);

struct Split {
    forest::TrainingSet train;
    forest::TrainingSet test;
};

/// Random train/test partition of the rows, seeded.
Split split_rows(const forest::TrainingSet& rows, std::size_t train_count, std::size_t test_count,
                 std::uint64_t seed);

struct TrainOutcome {
    forest::RandomForestModel model;
    forest::ConfusionMatrix held_out;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

TrainOutcome run_train(const Dataset& dataset, const ExperimentConfig& config);

struct SweepPoint {
    std::size_t n_trees = 0;
    double accuracy = 0.0;
};

/// Cross-validated accuracy of the training split for each tree count.
std::vector<SweepPoint> run_sweep(const Dataset& dataset, const ExperimentConfig& config);
void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out);

std::vector<diagnosis::FaultReport> run_diagnose(const forest::RandomForestModel& model, const Dataset& dataset,
                                                 const ExperimentConfig& config);

std::string format_confusion(const forest::ConfusionMatrix& cm);

}  // namespace ocfd::io
