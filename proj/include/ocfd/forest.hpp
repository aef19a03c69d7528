#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocfd/fault_label.hpp"

namespace ocfd::forest {

/// Fixed-width feature rows with one fault label each (row-major storage).
class TrainingSet {
public:
    TrainingSet() = default;
    explicit TrainingSet(std::vector<std::string> feature_names);

    void add(std::span<const double> features, FaultLabel label);
    void reserve(std::size_t rows);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::size_t width() const { return names_.size(); }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * width(), width()}; }
    std::span<double> mutable_row(std::size_t i) { return {values_.data() + i * width(), width()}; }
    FaultLabel label(std::size_t i) const { return labels_[i]; }
    const std::vector<FaultLabel>& labels() const { return labels_; }
    const std::vector<std::string>& feature_names() const { return names_; }

    /// Sorted distinct labels.
    std::vector<FaultLabel> distinct_labels() const;
    TrainingSet subset(std::span<const std::size_t> indices) const;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<FaultLabel> labels_;
};

/// Per-feature max-abs normalization.
struct MaxAbsScaler {
    std::vector<double> scale;

    std::vector<double> apply(std::span<const double> features) const;
    void apply_in_place(std::span<double> features) const;
};

/// Fits max |x| per column; an all-zero column gets scale 1.
MaxAbsScaler normalize_fit(const TrainingSet& rows);
std::vector<double> normalize_apply(const MaxAbsScaler& scaler, std::span<const double> features);
TrainingSet normalized(const TrainingSet& rows, const MaxAbsScaler& scaler);

/// n indices drawn uniformly with replacement from [0, n_rows).
std::vector<std::size_t> bootstrap_sample(std::size_t n_rows, std::size_t n, std::mt19937_64& rng);

struct StopCriteria {
    int max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_leaf = 1;
};

/// Flat preorder node. The left child of an internal node always follows it
/// directly; `right` indexes the right child.
struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t right = -1;
    FaultLabel label;  // leaves only

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<Node> nodes);

    /// Routes value <= threshold left, > threshold right.
    FaultLabel predict(std::span<const double> features) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<Node> nodes_;
};

/// Greedy CART growth with Gini impurity.
///
/// At every node m_try distinct features are drawn; when none of them admits
/// an impurity-reducing split, further features are drawn one at a time
/// until one does or all are exhausted. Candidate thresholds are midpoints
/// between consecutive distinct values. Equal gains prefer the lower feature
/// index and then the lower threshold; leaf pluralities prefer the label
/// that sorts first.
DecisionTree train_tree(const TrainingSet& rows, std::span<const std::size_t> indices, std::size_t m_try,
                        std::mt19937_64& rng, const StopCriteria& stop);
DecisionTree train_tree(const TrainingSet& rows, std::size_t m_try, std::mt19937_64& rng,
                        const StopCriteria& stop);

struct ForestParams {
    std::size_t n_trees = 264;
    std::size_t m_try = 0;  // 0 = floor(sqrt(width)), at least 1
    StopCriteria stop;
    std::uint64_t seed = 1;
    unsigned threads = 1;  // 0 = hardware concurrency

    std::size_t resolved_m_try(std::size_t width) const;
};

struct RandomForestModel {
    static constexpr int kFormatVersion = 1;

    std::vector<DecisionTree> trees;
    std::vector<std::string> feature_names;
    MaxAbsScaler scaler;
    std::vector<FaultLabel> label_universe;  // sorted
    std::uint64_t seed = 0;
    std::size_t m_try = 1;
    StopCriteria stop;
    int format_version = kFormatVersion;

    std::size_t n_trees() const { return trees.size(); }
    std::size_t width() const { return feature_names.size(); }
};

/// Seed of tree `index`'s private random stream.
std::uint64_t derive_tree_seed(std::uint64_t seed, std::size_t index);

/// Bootstrap + CART for a single ensemble member, on already normalized rows.
/// train_forest is exactly the ordered collection of these.
DecisionTree train_forest_member(const TrainingSet& normalized_rows, const ForestParams& params,
                                 std::size_t tree_index);

/// Fits the scaler, then trains params.n_trees members (possibly in
/// parallel). The result does not depend on params.threads.
RandomForestModel train_forest(const TrainingSet& rows, const ForestParams& params);

struct Prediction {
    FaultLabel label;
    std::vector<std::uint32_t> votes;  // aligned with model.label_universe
};

/// Plurality vote over raw (unnormalized) features; ties go to the label
/// that sorts first, so the healthy label wins any tie it is part of.
Prediction predict(const RandomForestModel& model, std::span<const double> features);
FaultLabel predict_label(const RandomForestModel& model, std::span<const double> features);

struct ConfusionMatrix {
    std::vector<FaultLabel> labels;
    std::vector<std::vector<std::size_t>> counts;  // [actual][predicted]

    explicit ConfusionMatrix(std::vector<FaultLabel> labels = {});
    void add(FaultLabel actual, FaultLabel predicted);
    std::size_t total() const;
    std::size_t correct() const;
    double accuracy() const;
};

ConfusionMatrix evaluate(const RandomForestModel& model, const TrainingSet& rows);

struct CrossValidationResult {
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    ConfusionMatrix confusion;
};

/// Stratified k-fold cross-validation; folds are assigned from params.seed.
CrossValidationResult cross_validate(const TrainingSet& rows, const ForestParams& params, std::size_t k_folds);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelVersionError : public ModelFormatError {
public:
    using ModelFormatError::ModelFormatError;
};

/// Line-oriented text: header, then each tree as a preorder node list of
/// `I <feature> <threshold>` and `L <label>` lines. Reals use 17 significant
/// digits so a save/load cycle is exact.
void save_model(const RandomForestModel& model, std::ostream& out);
RandomForestModel load_model(std::istream& in);

void save_model_file(const RandomForestModel& model, const std::string& path);
RandomForestModel load_model_file(const std::string& path);

}  // namespace ocfd::forest
