#include "ocfd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace ocfd::io {

namespace {

// Stream tags keep the generator, splitter and forest seeds independent.
constexpr std::size_t kGenerateStream = 0x67656e;
constexpr std::size_t kSplitStream = 0x73706c;

std::vector<FaultLabel> observable_labels(const sim::TriPhaseSeries& series) {
    std::vector<FaultLabel> out;
    out.reserve(series.size());
    for (const sim::PhaseSample& s : series.samples) out.push_back(sim::observable_label_at(series, s.t));
    return out;
}

}  // namespace

Dataset generate_dataset(const ExperimentConfig& config) {
    config.sim.validate();
    const std::vector<FaultLabel> classes =
        config.composition.classes.empty() ? default_composition() : config.composition.classes;
    const std::size_t per_class_series = std::max<std::size_t>(config.composition.series_per_class, 1);
    if (config.composition.total_samples < classes.size() * per_class_series * 2) {
        throw std::invalid_argument("total_samples too small for the class composition");
    }

    std::mt19937_64 master(forest::derive_tree_seed(config.seed, kGenerateStream));
    std::uniform_real_distribution<double> phase(0.0, 360.0);

    Dataset ds;
    std::size_t next_id = 0;
    const std::size_t total = config.composition.total_samples;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const std::size_t class_rows = total / classes.size() + (ci < total % classes.size() ? 1 : 0);
        for (std::size_t s = 0; s < per_class_series; ++s) {
            const std::size_t rows = class_rows / per_class_series + (s < class_rows % per_class_series ? 1 : 0);

            sim::SimConfig sc = config.sim;
            // Rounded so the value printed in the series metadata is exact.
            sc.phase_deg = std::round(phase(master) * 1e9) / 1e9;
            sc.seed = master();
            sim::FaultTimeline timeline;
            if (!classes[ci].is_normal()) timeline.push_back({0.0, classes[ci]});

            LabeledSeries ls;
            ls.id = next_id++;
            ls.series = sim::simulate(sc, timeline, static_cast<double>(rows) / sc.sample_rate);
            ls.series.samples.resize(rows);
            ls.labels = observable_labels(ls.series);
            ds.series.push_back(std::move(ls));
        }
    }
    return ds;
}

Dataset generate_scenario(const ExperimentConfig& config) {
    LabeledSeries ls;
    ls.series = sim::simulate(config.sim, config.scenario, config.scenario_duration);
    ls.labels = observable_labels(ls.series);
    Dataset ds;
    ds.series.push_back(std::move(ls));
    return ds;
}

Split split_rows(const forest::TrainingSet& rows, std::size_t train_count, std::size_t test_count,
                 std::uint64_t seed) {
    if (train_count == 0 || train_count >= rows.size()) {
        throw std::invalid_argument("train_count must lie in [1, " + std::to_string(rows.size()) + ")");
    }
    const std::size_t remaining = rows.size() - train_count;
    if (test_count == 0) test_count = remaining;
    if (test_count > remaining) throw std::invalid_argument("train_count + test_count exceeds the dataset");

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(forest::derive_tree_seed(seed, kSplitStream));
    std::shuffle(order.begin(), order.end(), rng);

    const std::span<const std::size_t> all(order);
    return {rows.subset(all.first(train_count)), rows.subset(all.subspan(train_count, test_count))};
}

TrainOutcome run_train(const Dataset& dataset, const ExperimentConfig& config) {
    const forest::TrainingSet rows = dataset.to_training_set();
    if (rows.distinct_labels().size() < 2) throw std::invalid_argument("dataset needs at least two distinct labels");
    Split split = split_rows(rows, config.train_count, config.test_count, config.seed);
    if (split.train.distinct_labels().size() < 2) {
        throw std::invalid_argument("training split needs at least two distinct labels");
    }

    TrainOutcome out;
    out.model = forest::train_forest(split.train, config.forest);
    out.held_out = forest::evaluate(out.model, split.test);
    out.train_rows = split.train.size();
    out.test_rows = split.test.size();
    return out;
}

std::vector<SweepPoint> run_sweep(const Dataset& dataset, const ExperimentConfig& config) {
    if (config.tree_counts.empty()) throw std::invalid_argument("no tree counts to sweep");
    const forest::TrainingSet rows = dataset.to_training_set();
    const forest::TrainingSet train =
        config.train_count < rows.size() ? split_rows(rows, config.train_count, 0, config.seed).train : rows;

    std::vector<SweepPoint> out;
    for (std::size_t n : config.tree_counts) {
        forest::ForestParams params = config.forest;
        params.n_trees = n;
        out.push_back({n, forest::cross_validate(train, params, config.k_folds).mean_accuracy});
    }
    return out;
}

void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out) {
    out << "n_trees,accuracy\n";
    char buf[32];
    for (const SweepPoint& p : points) {
        std::snprintf(buf, sizeof buf, "%.4f", p.accuracy);
        out << p.n_trees << ',' << buf << '\n';
    }
}

std::vector<diagnosis::FaultReport> run_diagnose(const forest::RandomForestModel& model, const Dataset& dataset,
                                                 const ExperimentConfig& config) {
    std::vector<diagnosis::FaultReport> out;
    out.reserve(dataset.series.size());
    for (const LabeledSeries& ls : dataset.series) out.push_back(diagnosis::run_diagnosis(model, ls.series, config.diagnosis));
    return out;
}

std::string format_confusion(const forest::ConfusionMatrix& cm) {
    std::ostringstream os;
    os << "actual\\pred";
    for (FaultLabel l : cm.labels) os << ' ' << l.to_string();
    os << '\n';
    char buf[16];
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        os << cm.labels[i].to_string() << "     ";
        for (std::size_t j = 0; j < cm.labels.size(); ++j) {
            std::snprintf(buf, sizeof buf, " %6zu", cm.counts[i][j]);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace ocfd::io
