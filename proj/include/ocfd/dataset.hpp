#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocfd/fault_label.hpp"
#include "ocfd/forest.hpp"
#include "ocfd/waveform.hpp"

namespace ocfd::io {

/// Error with the 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// One series of the dataset file: currents, per-row labels and the
/// simulator annotations from its `# series` line.
struct LabeledSeries {
    std::size_t id = 0;
    sim::TriPhaseSeries series;
    std::vector<FaultLabel> labels;
};

struct Dataset {
    std::vector<LabeledSeries> series;

    std::size_t row_count() const;
    /// Instantaneous samples (i_a, i_b, i_c) with their row labels.
    forest::TrainingSet to_training_set() const;
};

inline const std::string kDatasetHeader = "t,i_a,i_b,i_c,label";

/// CSV with header `t,i_a,i_b,i_c,label`; each series is introduced by
/// `# series <id> rate=<Hz> frequency=<Hz> phase_deg=<deg> faults=<label@t;...|none>`.
/// t is printed with 9 decimals and currents with 6.
void save_dataset(const Dataset& dataset, std::ostream& out);
Dataset load_dataset(std::istream& in);

void save_dataset_file(const Dataset& dataset, const std::string& path);
Dataset load_dataset_file(const std::string& path);

}  // namespace ocfd::io
