#include "ocfd/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace ocfd::forest {

// ---------------------------------------------------------------------------
// TrainingSet / scaler
// ---------------------------------------------------------------------------

TrainingSet::TrainingSet(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {
    if (names_.empty()) throw std::invalid_argument("training set needs at least one feature");
}

void TrainingSet::add(std::span<const double> features, FaultLabel label) {
    if (features.size() != width()) {
        throw std::invalid_argument("row width " + std::to_string(features.size()) + " does not match " +
                                    std::to_string(width()));
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

void TrainingSet::reserve(std::size_t rows) {
    values_.reserve(rows * width());
    labels_.reserve(rows);
}

std::vector<FaultLabel> TrainingSet::distinct_labels() const {
    std::vector<FaultLabel> out = labels_;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TrainingSet TrainingSet::subset(std::span<const std::size_t> indices) const {
    TrainingSet out(names_);
    out.reserve(indices.size());
    for (std::size_t i : indices) out.add(row(i), label(i));
    return out;
}

std::vector<double> MaxAbsScaler::apply(std::span<const double> features) const {
    std::vector<double> out(features.begin(), features.end());
    apply_in_place(out);
    return out;
}

void MaxAbsScaler::apply_in_place(std::span<double> features) const {
    if (features.size() != scale.size()) {
        throw std::invalid_argument("feature width " + std::to_string(features.size()) +
                                    " does not match scaler width " + std::to_string(scale.size()));
    }
    for (std::size_t j = 0; j < features.size(); ++j) features[j] /= scale[j];
}

MaxAbsScaler normalize_fit(const TrainingSet& rows) {
    if (rows.empty()) throw std::invalid_argument("cannot fit a scaler on zero rows");
    MaxAbsScaler s;
    s.scale.assign(rows.width(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) s.scale[j] = std::max(s.scale[j], std::abs(r[j]));
    }
    for (double& v : s.scale) {
        if (!(v > 0.0)) v = 1.0;
    }
    return s;
}

std::vector<double> normalize_apply(const MaxAbsScaler& scaler, std::span<const double> features) {
    return scaler.apply(features);
}

TrainingSet normalized(const TrainingSet& rows, const MaxAbsScaler& scaler) {
    TrainingSet out = rows;
    for (std::size_t i = 0; i < out.size(); ++i) scaler.apply_in_place(out.mutable_row(i));
    return out;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n_rows, std::size_t n, std::mt19937_64& rng) {
    if (n_rows == 0) throw std::invalid_argument("bootstrap from an empty row set");
    if (n == 0) throw std::invalid_argument("bootstrap size must be >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, n_rows - 1);
    std::vector<std::size_t> out(n);
    for (std::size_t& i : out) i = pick(rng);
    return out;
}

// ---------------------------------------------------------------------------
// CART
// ---------------------------------------------------------------------------

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("a decision tree needs at least one node");
}

FaultLabel DecisionTree::predict(std::span<const double> features) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const Node& n = nodes_[i];
        i = features[static_cast<std::size_t>(n.feature)] <= n.threshold ? i + 1 : static_cast<std::size_t>(n.right);
    }
    return nodes_[i].label;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
    // Preorder walk with an explicit stack of (node, depth).
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].is_leaf()) {
            stack.push_back({i + 1, d + 1});
            stack.push_back({static_cast<std::size_t>(nodes_[i].right), d + 1});
        }
    }
    return deepest;
}

namespace {

struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;  // sum_c n_lc^2 / n_l + sum_c n_rc^2 / n_r; larger means purer children
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& rows, std::size_t m_try, std::mt19937_64& rng, const StopCriteria& stop)
        : rows_(rows), m_try_(std::clamp<std::size_t>(m_try, 1, rows.width())), rng_(rng), stop_(stop),
          universe_(rows.distinct_labels()) {
        classes_.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto it = std::lower_bound(universe_.begin(), universe_.end(), rows.label(i));
            classes_[i] = static_cast<std::uint16_t>(it - universe_.begin());
        }
        features_.resize(rows.width());
    }

    DecisionTree build(std::span<const std::size_t> indices) {
        if (indices.empty()) throw std::invalid_argument("cannot train a tree on zero rows");
        work_.assign(indices.begin(), indices.end());
        nodes_.clear();
        grow(0, work_.size(), 0);
        return DecisionTree(std::move(nodes_));
    }

private:
    void grow(std::size_t begin, std::size_t end, int depth) {
        const std::size_t n = end - begin;
        std::vector<std::uint32_t> counts(universe_.size(), 0);
        for (std::size_t i = begin; i < end; ++i) ++counts[classes_[work_[i]]];

        std::size_t present = 0;
        std::size_t plurality = 0;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] > 0) ++present;
            if (counts[c] > counts[plurality]) plurality = c;
        }

        const bool depth_reached = stop_.max_depth > 0 && depth >= stop_.max_depth;
        const std::size_t min_leaf = std::max<std::size_t>(stop_.min_samples_leaf, 1);
        Split split;
        if (present > 1 && !depth_reached && n >= 2 * min_leaf) split = find_split(begin, end, counts, min_leaf);

        if (!split.valid) {
            Node leaf;
            leaf.label = universe_[plurality];
            nodes_.push_back(leaf);
            return;
        }

        const std::size_t self = nodes_.size();
        Node internal;
        internal.feature = static_cast<std::int32_t>(split.feature);
        internal.threshold = split.threshold;
        nodes_.push_back(internal);

        const auto first = work_.begin() + static_cast<std::ptrdiff_t>(begin);
        const auto last = work_.begin() + static_cast<std::ptrdiff_t>(end);
        const auto mid = std::stable_partition(first, last, [&](std::size_t r) {
            return rows_.row(r)[split.feature] <= split.threshold;
        });
        const std::size_t middle = static_cast<std::size_t>(mid - work_.begin());

        grow(begin, middle, depth + 1);
        nodes_[self].right = static_cast<std::int32_t>(nodes_.size());
        grow(middle, end, depth + 1);
    }

    Split find_split(std::size_t begin, std::size_t end, const std::vector<std::uint32_t>& counts,
                     std::size_t min_leaf) {
        const std::size_t n = end - begin;
        double parent_sq = 0.0;
        for (std::uint32_t c : counts) parent_sq += static_cast<double>(c) * c;
        const double parent_score = parent_sq / static_cast<double>(n);
        const double min_gain = 1e-12 * static_cast<double>(n);

        std::iota(features_.begin(), features_.end(), std::size_t{0});
        Split best;
        for (std::size_t j = 0; j < features_.size(); ++j) {
            if (j >= m_try_ && best.valid) break;
            // Lazy Fisher-Yates: the first m_try draws form the feature subset.
            std::uniform_int_distribution<std::size_t> pick(j, features_.size() - 1);
            std::swap(features_[j], features_[pick(rng_)]);

            const Split candidate = best_split_on(features_[j], begin, end, counts, min_leaf);
            if (!candidate.valid || candidate.score - parent_score <= min_gain) continue;
            if (!best.valid || candidate.score > best.score ||
                (candidate.score == best.score &&
                 (candidate.feature < best.feature ||
                  (candidate.feature == best.feature && candidate.threshold < best.threshold)))) {
                best = candidate;
            }
        }
        return best;
    }

    Split best_split_on(std::size_t feature, std::size_t begin, std::size_t end,
                        const std::vector<std::uint32_t>& counts, std::size_t min_leaf) {
        const std::size_t n = end - begin;
        sorted_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = work_[i];
            sorted_.emplace_back(rows_.row(r)[feature], classes_[r]);
        }
        std::sort(sorted_.begin(), sorted_.end());

        left_.assign(counts.size(), 0);
        right_.assign(counts.begin(), counts.end());
        double left_sq = 0.0;
        double right_sq = 0.0;
        for (std::uint32_t c : counts) right_sq += static_cast<double>(c) * c;

        Split best;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::uint16_t c = sorted_[i].second;
            left_sq += 2.0 * left_[c] + 1.0;
            right_sq -= 2.0 * right_[c] - 1.0;
            ++left_[c];
            --right_[c];

            const double v = sorted_[i].first;
            const double next = sorted_[i + 1].first;
            if (!(v < next)) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;

            const double score = left_sq / static_cast<double>(nl) + right_sq / static_cast<double>(nr);
            if (!best.valid || score > best.score) {
                double threshold = v + (next - v) / 2.0;
                if (!(threshold < next)) threshold = v;
                best = {true, feature, threshold, score};
            }
        }
        return best;
    }

    const TrainingSet& rows_;
    std::size_t m_try_;
    std::mt19937_64& rng_;
    StopCriteria stop_;
    std::vector<FaultLabel> universe_;
    std::vector<std::uint16_t> classes_;
    std::vector<std::size_t> work_;
    std::vector<std::size_t> features_;
    std::vector<std::pair<double, std::uint16_t>> sorted_;
    std::vector<std::uint32_t> left_;
    std::vector<std::uint32_t> right_;
    std::vector<Node> nodes_;
};

}  // namespace

DecisionTree train_tree(const TrainingSet& rows, std::span<const std::size_t> indices, std::size_t m_try,
                        std::mt19937_64& rng, const StopCriteria& stop) {
    if (rows.empty()) throw std::invalid_argument("cannot train a tree on zero rows");
    TreeBuilder builder(rows, m_try, rng, stop);
    return builder.build(indices);
}

DecisionTree train_tree(const TrainingSet& rows, std::size_t m_try, std::mt19937_64& rng, const StopCriteria& stop) {
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return train_tree(rows, all, m_try, rng, stop);
}

// ---------------------------------------------------------------------------
// Forest
// ---------------------------------------------------------------------------

std::size_t ForestParams::resolved_m_try(std::size_t width) const {
    if (m_try > 0) return std::min(m_try, width);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(width)))));
}

std::uint64_t derive_tree_seed(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

DecisionTree train_forest_member(const TrainingSet& normalized_rows, const ForestParams& params,
                                 std::size_t tree_index) {
    std::mt19937_64 rng(derive_tree_seed(params.seed, tree_index));
    const auto sample = bootstrap_sample(normalized_rows.size(), normalized_rows.size(), rng);
    return train_tree(normalized_rows, sample, params.resolved_m_try(normalized_rows.width()), rng, params.stop);
}

RandomForestModel train_forest(const TrainingSet& rows, const ForestParams& params) {
    if (params.n_trees == 0) throw std::invalid_argument("n_trees must be >= 1");
    if (rows.empty()) throw std::invalid_argument("cannot train a forest on zero rows");

    RandomForestModel model;
    model.feature_names = rows.feature_names();
    model.scaler = normalize_fit(rows);
    model.label_universe = rows.distinct_labels();
    model.seed = params.seed;
    model.m_try = params.resolved_m_try(rows.width());
    model.stop = params.stop;

    const TrainingSet scaled = normalized(rows, model.scaler);
    model.trees.resize(params.n_trees);

    unsigned threads = params.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : params.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, params.n_trees));
    if (threads <= 1) {
        for (std::size_t t = 0; t < params.n_trees; ++t) model.trees[t] = train_forest_member(scaled, params, t);
        return model;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t = next++; t < params.n_trees; t = next++) {
                        model.trees[t] = train_forest_member(scaled, params, t);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return model;
}

Prediction predict(const RandomForestModel& model, std::span<const double> features) {
    if (features.size() != model.width()) {
        throw std::invalid_argument("feature width " + std::to_string(features.size()) + " does not match model width " +
                                    std::to_string(model.width()));
    }
    const std::vector<double> x = model.scaler.apply(features);
    Prediction p;
    p.votes.assign(model.label_universe.size(), 0);
    for (const DecisionTree& tree : model.trees) {
        const FaultLabel vote = tree.predict(x);
        const auto it = std::lower_bound(model.label_universe.begin(), model.label_universe.end(), vote);
        ++p.votes[static_cast<std::size_t>(it - model.label_universe.begin())];
    }
    // max_element keeps the first maximum, i.e. the label that sorts first.
    const auto winner = std::max_element(p.votes.begin(), p.votes.end());
    p.label = model.label_universe[static_cast<std::size_t>(winner - p.votes.begin())];
    return p;
}

FaultLabel predict_label(const RandomForestModel& model, std::span<const double> features) {
    return predict(model, features).label;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::vector<FaultLabel> l) : labels(std::move(l)) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
}

void ConfusionMatrix::add(FaultLabel actual, FaultLabel predicted) {
    auto index_of = [this](FaultLabel l) {
        auto it = std::lower_bound(labels.begin(), labels.end(), l);
        if (it == labels.end() || *it != l) {
            const auto pos = it - labels.begin();
            labels.insert(it, l);
            counts.insert(counts.begin() + pos, std::vector<std::size_t>(labels.size() - 1, 0));
            for (auto& row : counts) row.insert(row.begin() + pos, 0);
            return static_cast<std::size_t>(pos);
        }
        return static_cast<std::size_t>(it - labels.begin());
    };
    const std::size_t a = index_of(actual);
    const std::size_t p = index_of(predicted);
    ++counts[a][p];
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) c += counts[i][i];
    return c;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

ConfusionMatrix evaluate(const RandomForestModel& model, const TrainingSet& rows) {
    std::vector<FaultLabel> labels = model.label_universe;
    const auto seen = rows.distinct_labels();
    labels.insert(labels.end(), seen.begin(), seen.end());
    ConfusionMatrix cm(std::move(labels));
    for (std::size_t i = 0; i < rows.size(); ++i) cm.add(rows.label(i), predict_label(model, rows.row(i)));
    return cm;
}

CrossValidationResult cross_validate(const TrainingSet& rows, const ForestParams& params, std::size_t k_folds) {
    if (k_folds < 2) throw std::invalid_argument("cross-validation needs at least two folds");
    if (rows.size() < k_folds) throw std::invalid_argument("fewer rows than folds");

    // Stratify: shuffle each label's rows, then deal them round-robin so
    // every fold receives a proportional share of every label.
    std::mt19937_64 rng(derive_tree_seed(params.seed, static_cast<std::size_t>(-1)));
    const std::vector<FaultLabel> universe = rows.distinct_labels();
    std::vector<std::size_t> fold_of(rows.size());
    std::size_t dealt = 0;
    for (FaultLabel l : universe) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows.label(i) == l) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members) fold_of[i] = dealt++ % k_folds;
    }

    CrossValidationResult result;
    result.confusion = ConfusionMatrix(universe);
    for (std::size_t fold = 0; fold < k_folds; ++fold) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < rows.size(); ++i) (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
        if (test_idx.empty() || train_idx.empty()) throw std::invalid_argument("a cross-validation fold is empty");

        const RandomForestModel model = train_forest(rows.subset(train_idx), params);
        std::size_t correct = 0;
        for (std::size_t i : test_idx) {
            const FaultLabel predicted = predict_label(model, rows.row(i));
            result.confusion.add(rows.label(i), predicted);
            if (predicted == rows.label(i)) ++correct;
        }
        result.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(test_idx.size()));
    }
    result.mean_accuracy = std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) /
                           static_cast<double>(k_folds);
    return result;
}

}  // namespace ocfd::forest
