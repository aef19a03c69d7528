#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ocfd/forest.hpp"

using namespace ocfd;
using namespace ocfd::forest;

namespace {

const FaultLabel L0 = FaultLabel::parse("000000");
const FaultLabel L1 = FaultLabel::parse("100000");
const FaultLabel L2 = FaultLabel::parse("001000");

TrainingSet separable() {
    TrainingSet t({"x"});
    for (int i = 0; i < 50; ++i) t.add(std::vector<double>{0.0}, L0);
    for (int i = 0; i < 50; ++i) t.add(std::vector<double>{1.0}, L1);
    return t;
}

// Three noisy features, three overlapping classes.
TrainingSet blobs(std::size_t n, std::uint64_t seed) {
    TrainingSet t({"a", "b", "c"});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const FaultLabel labels[] = {L0, L1, L2};
    for (std::size_t i = 0; i < n; ++i) {
        const int k = static_cast<int>(i % 3);
        t.add(std::vector<double>{3.0 * k + g(rng), 10.0 - 2.0 * k + g(rng), g(rng) * 5.0}, labels[k]);
    }
    return t;
}

DecisionTree leaf(FaultLabel l) { return DecisionTree({Node{-1, 0.0, -1, l}}); }

RandomForestModel voting(std::vector<DecisionTree> trees, std::vector<FaultLabel> universe) {
    RandomForestModel m;
    m.trees = std::move(trees);
    m.feature_names = {"x"};
    m.scaler.scale = {1.0};
    m.label_universe = std::move(universe);
    return m;
}

std::string serialize(const RandomForestModel& m) {
    std::ostringstream os;
    save_model(m, os);
    return os.str();
}

}  // namespace

TEST(Scaler, MaxAbsExample) {
    TrainingSet t({"i"});
    for (double v : {-14.28, 7.0, 13.6}) t.add(std::vector<double>{v}, L0);
    const MaxAbsScaler s = normalize_fit(t);
    EXPECT_EQ(s.scale[0], 14.28);
    EXPECT_EQ(normalize_apply(s, std::vector<double>{-14.28})[0], -1.0);
}

TEST(Scaler, ZeroColumnUnchanged) {
    TrainingSet t({"z", "y"});
    t.add(std::vector<double>{0.0, 2.0}, L0);
    t.add(std::vector<double>{0.0, -4.0}, L1);
    const MaxAbsScaler s = normalize_fit(t);
    EXPECT_EQ(s.scale[0], 1.0);
    EXPECT_EQ(normalize_apply(s, std::vector<double>{0.0, 1.0})[0], 0.0);
}

TEST(Scaler, FittedValuesInUnitBox) {
    const TrainingSet t = blobs(300, 3);
    const TrainingSet n = normalized(t, normalize_fit(t));
    for (std::size_t i = 0; i < n.size(); ++i) {
        for (double v : n.row(i)) {
            EXPECT_GE(v, -1.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Bootstrap, Examples) {
    std::mt19937_64 rng(1);
    EXPECT_EQ(bootstrap_sample(1, 3, rng), (std::vector<std::size_t>{0, 0, 0}));
    std::mt19937_64 a(77), b(77);
    EXPECT_EQ(bootstrap_sample(1000, 1000, a), bootstrap_sample(1000, 1000, b));
}

TEST(Bootstrap, UniqueFractionNearOneMinusInverseE) {
    std::mt19937_64 rng(9);
    const std::size_t n = 5000;
    double total = 0.0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto idx = bootstrap_sample(n, n, rng);
        total += static_cast<double>(std::set<std::size_t>(idx.begin(), idx.end()).size()) / n;
    }
    // Expected unique fraction for finite n: 1 - (1 - 1/n)^n.
    const double expect = 1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(n));
    EXPECT_NEAR(total / trials, expect, 0.003);
    EXPECT_NEAR(expect, 1.0 - std::exp(-1.0), 1e-4);
}

TEST(Tree, SeparableSplitAtMidpoint) {
    std::mt19937_64 rng(1);
    const DecisionTree t = train_tree(separable(), 1, rng, {});
    ASSERT_EQ(t.nodes().size(), 3u);
    EXPECT_EQ(t.nodes()[0].feature, 0);
    EXPECT_EQ(t.nodes()[0].threshold, 0.5);
    EXPECT_EQ(t.predict(std::vector<double>{0.0}), L0);
    EXPECT_EQ(t.predict(std::vector<double>{1.0}), L1);
}

TEST(Tree, PureInputIsSingleLeaf) {
    TrainingSet t({"x"});
    for (double v : {1.0, 2.0, 3.0}) t.add(std::vector<double>{v}, L2);
    std::mt19937_64 rng(1);
    const DecisionTree tree = train_tree(t, 1, rng, {});
    EXPECT_EQ(tree.nodes().size(), 1u);
    EXPECT_EQ(tree.predict(std::vector<double>{100.0}), L2);
}

TEST(Tree, TiedLeafTakesFirstLabel) {
    TrainingSet t({"x"});
    t.add(std::vector<double>{1.0}, L1);
    t.add(std::vector<double>{1.0}, L0);
    std::mt19937_64 rng(1);
    const DecisionTree tree = train_tree(t, 1, rng, {});
    EXPECT_EQ(tree.nodes().size(), 1u);
    EXPECT_EQ(tree.predict(std::vector<double>{1.0}), L0);
}

TEST(Tree, StopCriteriaRespected) {
    const TrainingSet t = blobs(600, 4);
    std::mt19937_64 rng(2);
    const DecisionTree shallow = train_tree(t, 3, rng, StopCriteria{2, 1});
    EXPECT_LE(shallow.depth(), 2u);
    std::mt19937_64 rng2(2);
    const DecisionTree wide = train_tree(t, 3, rng2, StopCriteria{0, 40});
    // Count training rows per leaf by routing every row.
    std::map<std::size_t, std::size_t> per_leaf;
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::size_t n = 0;
        const auto& nodes = wide.nodes();
        while (!nodes[n].is_leaf()) {
            n = t.row(i)[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold
                    ? n + 1
                    : static_cast<std::size_t>(nodes[n].right);
        }
        ++per_leaf[n];
    }
    for (const auto& [node, count] : per_leaf) EXPECT_GE(count, 40u);
}

TEST(Tree, AcceptedSplitsNeverRaiseImpurity) {
    const TrainingSet t = blobs(400, 8);
    std::mt19937_64 rng(3);
    const DecisionTree tree = train_tree(t, 1, rng, {});
    const auto& nodes = tree.nodes();
    // Recompute Gini of each internal node and its children from the rows.
    std::function<void(std::size_t, std::vector<std::size_t>)> walk = [&](std::size_t n, std::vector<std::size_t> rows) {
        if (nodes[n].is_leaf()) return;
        auto gini = [&](const std::vector<std::size_t>& r) {
            std::map<FaultLabel, double> c;
            for (std::size_t i : r) c[t.label(i)] += 1.0;
            double g = 1.0;
            for (const auto& [l, k] : c) g -= (k / r.size()) * (k / r.size());
            return g;
        };
        std::vector<std::size_t> left, right;
        for (std::size_t i : rows) {
            (t.row(i)[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? left : right).push_back(i);
        }
        ASSERT_FALSE(left.empty());
        ASSERT_FALSE(right.empty());
        const double weighted = (gini(left) * left.size() + gini(right) * right.size()) / rows.size();
        EXPECT_LT(weighted, gini(rows));
        walk(n + 1, left);
        walk(static_cast<std::size_t>(nodes[n].right), right);
    };
    std::vector<std::size_t> all(t.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    walk(0, all);
}

TEST(Forest, SingleTreeMatchesItsTree) {
    const TrainingSet t = blobs(300, 5);
    ForestParams p;
    p.n_trees = 1;
    p.seed = 11;
    const RandomForestModel m = train_forest(t, p);
    ASSERT_EQ(m.n_trees(), 1u);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(predict_label(m, t.row(i)), m.trees[0].predict(m.scaler.apply(t.row(i))));
    }
}

TEST(Forest, SameSeedSameModel) {
    const TrainingSet t = blobs(300, 5);
    ForestParams p;
    p.n_trees = 12;
    p.seed = 4;
    EXPECT_EQ(serialize(train_forest(t, p)), serialize(train_forest(t, p)));
    ForestParams q = p;
    q.seed = 5;
    EXPECT_NE(serialize(train_forest(t, p)), serialize(train_forest(t, q)));
}

TEST(Forest, SeparableTrainingAccuracy) {
    ForestParams p;
    p.n_trees = 10;
    const RandomForestModel m = train_forest(separable(), p);
    EXPECT_EQ(evaluate(m, separable()).accuracy(), 1.0);
}

TEST(Forest, ParallelEqualsSequentialEqualsMembers) {
    const TrainingSet t = blobs(450, 6);
    ForestParams p;
    p.n_trees = 9;
    p.seed = 21;
    p.threads = 1;
    const RandomForestModel seq = train_forest(t, p);
    p.threads = 4;
    const RandomForestModel par = train_forest(t, p);
    EXPECT_EQ(serialize(seq), serialize(par));
    const TrainingSet norm = normalized(t, seq.scaler);
    for (std::size_t i = 0; i < p.n_trees; ++i) EXPECT_EQ(train_forest_member(norm, p, i), seq.trees[i]);
}

TEST(Forest, PowerOfTwoColumnScalingKeepsPredictions) {
    const TrainingSet t = blobs(300, 7);
    TrainingSet scaled = t;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled.mutable_row(i)[1] *= 8.0;
    ForestParams p;
    p.n_trees = 15;
    const RandomForestModel a = train_forest(t, p);
    const RandomForestModel b = train_forest(scaled, p);
    EXPECT_EQ(b.scaler.scale[1], 8.0 * a.scaler.scale[1]);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(predict_label(a, t.row(i)), predict_label(b, scaled.row(i)));
}

TEST(Forest, MTryDefault) {
    ForestParams p;
    EXPECT_EQ(p.resolved_m_try(3), 1u);
    EXPECT_EQ(p.resolved_m_try(36), 6u);
    EXPECT_EQ(p.resolved_m_try(1), 1u);
    p.m_try = 2;
    EXPECT_EQ(p.resolved_m_try(3), 2u);
}

TEST(Predict, Votes) {
    // The universe is sorted: 001000 before 100000.
    const auto m = voting({leaf(L1), leaf(L1), leaf(L2)}, {L2, L1});
    const Prediction p = predict(m, std::vector<double>{0.0});
    EXPECT_EQ(p.label, L1);
    EXPECT_EQ(p.votes, (std::vector<std::uint32_t>{1, 2}));

    const auto tie = voting({leaf(L1), leaf(L0), leaf(L1), leaf(L0)}, {L0, L1});
    EXPECT_EQ(predict_label(tie, std::vector<double>{0.0}), L0);

    EXPECT_EQ(predict_label(voting({leaf(L2)}, {L2}), std::vector<double>{0.0}), L2);
    EXPECT_THROW(predict(m, std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST(Predict, DuplicatingWinnerKeepsWinner) {
    const TrainingSet t = blobs(300, 12);
    ForestParams p;
    p.n_trees = 7;
    const RandomForestModel m = train_forest(t, p);
    for (std::size_t i = 0; i < t.size(); i += 7) {
        const FaultLabel win = predict_label(m, t.row(i));
        RandomForestModel more = m;
        for (const auto& tree : m.trees) {
            if (tree.predict(m.scaler.apply(t.row(i))) == win) {
                more.trees.push_back(tree);
                more.trees.push_back(tree);
            }
        }
        EXPECT_EQ(predict_label(more, t.row(i)), win);
    }
}

TEST(CrossValidation, SeparableIsPerfect) {
    ForestParams p;
    p.n_trees = 5;
    const auto r = cross_validate(separable(), p, 5);
    EXPECT_EQ(r.fold_accuracy.size(), 5u);
    EXPECT_EQ(r.mean_accuracy, 1.0);
}

TEST(CrossValidation, RandomLabelsAtChance) {
    double sum = 0.0;
    const int repeats = 5;
    for (int s = 0; s < repeats; ++s) {
        TrainingSet t({"a", "b", "c"});
        std::mt19937_64 rng(100 + s);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 400; ++i) t.add(std::vector<double>{u(rng), u(rng), u(rng)}, i % 2 ? L1 : L0);
        ForestParams p;
        p.n_trees = 15;
        p.seed = static_cast<std::uint64_t>(s);
        sum += cross_validate(t, p, 5).mean_accuracy;
    }
    EXPECT_NEAR(sum / repeats, 0.5, 0.05);
}

TEST(ModelIO, RoundTripBytes) {
    ForestParams p;
    p.n_trees = 6;
    p.stop.max_depth = 7;
    const RandomForestModel m = train_forest(blobs(240, 2), p);
    const std::string first = serialize(m);
    std::istringstream in(first);
    const RandomForestModel back = load_model(in);
    EXPECT_EQ(serialize(back), first);
    EXPECT_EQ(back.trees, m.trees);
    EXPECT_EQ(back.scaler.scale, m.scaler.scale);
    EXPECT_EQ(back.stop.max_depth, 7);
}

TEST(ModelIO, VersionAndFormatErrors) {
    ForestParams p;
    p.n_trees = 2;
    std::string text = serialize(train_forest(separable(), p));
    std::string bumped = text;
    bumped.replace(0, bumped.find('\n'), "ocfd-forest 9");
    std::istringstream v(bumped);
    EXPECT_THROW(load_model(v), ModelVersionError);

    std::istringstream cut(text.substr(0, text.size() / 2));
    EXPECT_THROW(load_model(cut), ModelFormatError);
    std::istringstream junk("hello\n");
    EXPECT_THROW(load_model(junk), ModelFormatError);
}
