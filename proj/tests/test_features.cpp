#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ocfd/features.hpp"

using namespace ocfd::features;
using ocfd::sim::PhaseSample;

namespace {

const std::vector<double> kTable1 = {48, 34, 24, 60, 72, 28, 55, 121};

// Direct-summation oracle in long double, one loop per statistic.
std::vector<long double> oracle(const std::vector<double>& x) {
    const long double n = static_cast<long double>(x.size());
    long double mx = x[0], mn = x[0];
    for (double v : x) {
        if (v > mx) mx = v;
        if (v < mn) mn = v;
    }
    long double s = 0;
    for (double v : x) s += v;
    const long double mean = s / n;
    long double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    long double sq = 0;
    for (double v : x) sq += static_cast<long double>(v) * v;
    const long double rms = std::sqrt(sq / n);
    long double k4 = 0, k3 = 0;
    for (double v : x) {
        k4 += std::pow((v - mean) / rms, 4);
        k3 += std::pow((v - mean) / rms, 3);
    }
    long double ab = 0, sr = 0;
    for (double v : x) {
        ab += std::fabs(static_cast<long double>(v));
        sr += std::sqrt(std::fabs(static_cast<long double>(v)));
    }
    const long double mean_abs = ab / n;
    const long double msr = sr / n;
    return {mx, mn, mx - mn, mean, var, std::sqrt(var), k4 / n, k3 / n, rms / mean_abs, mx / rms, mx / mean_abs,
            mx / (msr * msr)};
}

void expect_close(double got, long double want, double rel, const std::string& what) {
    const double w = static_cast<double>(want);
    EXPECT_LE(std::abs(got - w), rel * std::max(1.0, std::abs(w))) << what << " got " << got << " want " << w;
}

std::vector<PhaseSample> balanced(double amplitude, double rate, std::size_t n, double phase_deg = 0.0) {
    std::vector<PhaseSample> out;
    const double r = std::numbers::pi / 180.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = phase_deg + 360.0 * 50.0 * static_cast<double>(k) / rate;
        out.push_back({k / rate, amplitude * std::sin(th * r), amplitude * std::sin((th - 120.0) * r),
                       amplitude * std::sin((th + 120.0) * r)});
    }
    return out;
}

std::vector<CurrentVector> trajectory(const std::vector<PhaseSample>& s) {
    std::vector<CurrentVector> out;
    for (const auto& p : s) out.push_back(dq_transform(p.a, p.b, p.c));
    return out;
}

CurrentVector polar(double r, double deg) {
    return {r * std::cos(deg * std::numbers::pi / 180.0), r * std::sin(deg * std::numbers::pi / 180.0)};
}

}  // namespace

TEST(Haar, Table1FirstScale) {
    const HaarLevel l = haar_step(kTable1);
    const std::vector<double> avg = {57.9828, 59.3970, 70.7107, 124.4508};
    const std::vector<double> det = {9.8995, -25.4558, 31.1127, -46.6690};
    ASSERT_EQ(l.averages.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(l.averages[i], avg[i], 1e-4);
        EXPECT_NEAR(l.details[i], det[i], 1e-4);
    }
    // The published table prints 70.0036 and 125.1579 for the last two
    // averages; (72+28)/sqrt2 and (55+121)/sqrt2 are the values above.
    EXPECT_NEAR(l.averages[2], 100.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(l.averages[3], 176.0 / std::sqrt(2.0), 1e-12);
    EXPECT_GT(std::abs(l.averages[2] - 70.0036), 0.1);
}

TEST(Haar, Table1SecondScale) {
    const auto levels = haar_decompose(kTable1, 2);
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_NEAR(levels[1].averages[0], 83.0, 1e-9);
    EXPECT_NEAR(levels[1].averages[1], 138.0, 1e-9);
    EXPECT_NEAR(levels[1].details[0], -1.0, 1e-9);
    EXPECT_NEAR(levels[1].details[1], -38.0, 1e-9);

    const HaarLevel from_printed = haar_step(std::vector<double>{57.9828, 59.3970, 70.7107, 124.4508});
    EXPECT_NEAR(from_printed.averages[0], 83.0, 1e-3);
    EXPECT_NEAR(from_printed.details[1], -38.0, 1e-3);
}

TEST(Haar, EqualPair) {
    const HaarLevel l = haar_step(std::vector<double>{3.5, 3.5});
    EXPECT_NEAR(l.averages[0], 3.5 * std::sqrt(2.0), 1e-12);
    EXPECT_EQ(l.details[0], 0.0);
}

TEST(Haar, SingleLevelEqualsStep) {
    const auto a = haar_decompose(kTable1, 1);
    const auto b = haar_step(kTable1);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].averages, b.averages);
    EXPECT_EQ(a[0].details, b.details);
}

TEST(Haar, RejectsBadLengths) {
    EXPECT_THROW(haar_step(std::vector<double>{1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(haar_decompose(kTable1, 4), std::invalid_argument);
    EXPECT_THROW(haar_decompose(kTable1, 0), std::invalid_argument);
}

TEST(Haar, EnergyAndReconstruction) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 10.0);
    for (std::size_t n : {2u, 8u, 64u, 512u}) {
        std::vector<double> x(n);
        for (double& v : x) v = g(rng);
        std::vector<double> cur = x;
        const int levels = static_cast<int>(std::log2(n));
        const auto dec = haar_decompose(x, levels);
        for (const auto& l : dec) {
            double in = 0, out = 0;
            for (double v : cur) in += v * v;
            for (double v : l.averages) out += v * v;
            for (double v : l.details) out += v * v;
            EXPECT_NEAR(in, out, 1e-9 * std::max(1.0, in));
            cur = l.averages;
        }
        const auto back = haar_reconstruct(dec);
        ASSERT_EQ(back.size(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
    }
}

TEST(DQ, Examples) {
    auto v = dq_transform(1.0, -0.5, -0.5);
    EXPECT_NEAR(v.d, 1.0, 1e-15);
    EXPECT_NEAR(v.q, 0.0, 1e-15);
    v = dq_transform(0.0, std::sqrt(3.0) / 2.0, -std::sqrt(3.0) / 2.0);
    EXPECT_NEAR(v.d, 0.0, 1e-15);
    EXPECT_NEAR(v.q, 1.0, 1e-15);
    v = dq_transform(0.0, 0.0, 0.0);
    EXPECT_EQ(v.d, 0.0);
    EXPECT_EQ(v.q, 0.0);
}

TEST(DQ, CircleProperty) {
    for (double rate : {10000.0, 25600.0, 3333.0}) {
        for (double a : {1.0, 14.28, 16.5}) {
            for (const auto& v : trajectory(balanced(a, rate, 500, 13.0))) {
                EXPECT_NEAR(v.d * v.d + v.q * v.q, a * a, 1e-9);
            }
        }
    }
}

TEST(UnitVector, Examples) {
    auto u = unit_vector({3.0, 4.0});
    EXPECT_NEAR(u.d, 0.6, 1e-15);
    EXPECT_NEAR(u.q, 0.8, 1e-15);
    u = unit_vector({1.0, 0.0});
    EXPECT_EQ(u.d, 1.0);
    EXPECT_EQ(u.q, 0.0);
    EXPECT_THROW(unit_vector({0.0, 0.0}), DegenerateVectorError);
}

TEST(UnitVector, MagnitudeIsOne) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) EXPECT_NEAR(unit_vector({u(rng), u(rng)}).magnitude(), 1.0, 1e-12);
}

TEST(VectorAngle, Examples) {
    EXPECT_NEAR(vector_angle({1.0, 1.0}), 45.0, 1e-12);
    EXPECT_NEAR(vector_angle({0.0, 1.0}), 90.0, 1e-12);
    EXPECT_NEAR(vector_angle({-1.0, 0.0}), 180.0, 1e-12);
    EXPECT_NEAR(vector_angle({0.0, -1.0}), 270.0, 1e-12);
    EXPECT_THROW(vector_angle({0.0, 0.0}), DegenerateVectorError);
}

TEST(SurfaceArea, Examples) {
    std::vector<CurrentVector> circle;
    for (int k = 0; k < 360; ++k) circle.push_back(polar(1.0, k));
    EXPECT_NEAR(vector_surface_area(circle), std::numbers::pi, 1e-6);

    std::vector<CurrentVector> half;
    for (int k = 0; k <= 180; ++k) half.push_back(polar(2.0, k));
    EXPECT_NEAR(vector_surface_area(half), 2.0 * std::numbers::pi, 1e-6);

    const std::vector<CurrentVector> origin(50, CurrentVector{});
    EXPECT_EQ(vector_surface_area(origin), 0.0);
    EXPECT_THROW(vector_surface_area(std::vector<CurrentVector>{{1.0, 0.0}}), std::invalid_argument);
}

TEST(SurfaceArea, UnitTrajectoryOverHealthyPeriod) {
    for (double rate : {10000.0, 25600.0}) {
        std::vector<CurrentVector> unit;
        const auto n = static_cast<std::size_t>(rate / 50.0);
        for (const auto& v : trajectory(balanced(16.5, rate, n))) unit.push_back(unit_vector(v));
        EXPECT_NEAR(vector_surface_area(unit), std::numbers::pi, 1e-3);
    }
}

TEST(DistributionAngle, Examples) {
    EXPECT_NEAR(distribution_angle(std::vector<CurrentVector>{polar(1, 30), polar(1, 90), polar(1, 150)}), 120.0, 1e-9);
    std::vector<CurrentVector> circle;
    for (int k = 0; k < 360; ++k) circle.push_back(polar(1.0, k));
    EXPECT_EQ(distribution_angle(circle), 360.0);
    EXPECT_EQ(distribution_angle(std::vector<CurrentVector>{polar(3, 77)}), 0.0);
    EXPECT_NEAR(distribution_angle(std::vector<CurrentVector>{polar(1, 350), polar(1, 10), polar(1, 20)}), 30.0, 1e-9);
    EXPECT_THROW(distribution_angle(std::vector<CurrentVector>{{0.0, 0.0}}), DegenerateVectorError);
}

TEST(VectorFeatures, AmplitudeInvariance) {
    // Half-wave clamped phase a, so the trajectory is not a circle.
    auto s = balanced(14.28, 10000.0, 200, 40.0);
    for (auto& p : s) p.a = std::max(p.a, 0.0);
    for (double k : {0.01, 3.0, 250.0}) {
        auto scaled = s;
        for (auto& p : scaled) {
            p.a *= k;
            p.b *= k;
            p.c *= k;
        }
        const auto t0 = trajectory(s);
        const auto t1 = trajectory(scaled);
        std::vector<CurrentVector> u0, u1;
        for (std::size_t i = 0; i < t0.size(); ++i) {
            u0.push_back(unit_vector(t0[i]));
            u1.push_back(unit_vector(t1[i]));
            EXPECT_NEAR(u0.back().d, u1.back().d, 1e-9);
            EXPECT_NEAR(u0.back().q, u1.back().q, 1e-9);
            EXPECT_NEAR(vector_angle(t0[i]), vector_angle(t1[i]), 1e-9);
        }
        EXPECT_NEAR(distribution_angle(t0), distribution_angle(t1), 1e-9);
        EXPECT_NEAR(vector_surface_area(u0), vector_surface_area(u1), 1e-9);
    }
}

TEST(TimeDomain, Examples) {
    const auto f = time_domain_features(std::vector<double>{1, -1, 1, -1});
    const std::vector<double> want = {1, -1, 2, 0, 1, 1, 1, 0, 1, 1, 1, 1};
    const auto got = f.values();
    ASSERT_EQ(got.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(got[i], want[i], 1e-15) << TimeDomainFeatures::names()[i];

    const auto c = time_domain_features(std::vector<double>{2.5, 2.5, 2.5, 2.5});
    EXPECT_EQ(c.moments.peak_to_peak, 0.0);
    EXPECT_EQ(c.moments.variance, 0.0);
    EXPECT_EQ(c.kurtosis, 0.0);
    EXPECT_EQ(c.skewness, 0.0);
    EXPECT_NEAR(c.waveform, 1.0, 1e-15);
    EXPECT_NEAR(c.crest, 1.0, 1e-15);
    EXPECT_NEAR(c.impulse, 1.0, 1e-15);
    EXPECT_NEAR(c.margin, 1.0, 1e-15);
}

TEST(TimeDomain, DegenerateWindowKeepsMoments) {
    try {
        time_domain_features(std::vector<double>{0, 0, 0, 0});
        FAIL() << "expected DegenerateWindowError";
    } catch (const DegenerateWindowError& e) {
        EXPECT_EQ(e.moments().max, 0.0);
        EXPECT_EQ(e.moments().variance, 0.0);
    }
    EXPECT_THROW(time_domain_features(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(TimeDomain, MatchesOracleOnRandomWindows) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(8, 512);
    std::uniform_real_distribution<double> val(-20.0, 20.0);
    for (int w = 0; w < 200; ++w) {
        std::vector<double> x(len(rng));
        for (double& v : x) v = val(rng);
        const auto got = time_domain_features(x).values();
        const auto want = oracle(x);
        for (std::size_t i = 0; i < 12; ++i) expect_close(got[i], want[i], 1e-12, TimeDomainFeatures::names()[i]);

        const auto f = time_domain_features(x);
        double mean_abs = 0, sq = 0;
        for (double v : x) {
            mean_abs += std::abs(v);
            sq += v * v;
        }
        mean_abs /= static_cast<double>(x.size());
        const double rms = std::sqrt(sq / static_cast<double>(x.size()));
        EXPECT_NEAR(f.waveform * mean_abs, rms, 1e-12 * rms);
        EXPECT_NEAR(f.crest / f.impulse, mean_abs / rms, 1e-12);
    }
}

TEST(WindowFeatures, Lengths) {
    const auto w = balanced(14.28, 10000.0, 200, 5.0);
    FeatureSetConfig td;
    EXPECT_EQ(assemble_window_features(w, td).size(), 36u);
    FeatureSetConfig vec{false, true, 0};
    const auto v = assemble_window_features(w, vec);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_NEAR(v.values[0], std::numbers::pi, 1e-3);
    EXPECT_EQ(v.values[2], 360.0);
    FeatureSetConfig haar{false, false, 3};
    EXPECT_EQ(assemble_window_features(w, haar).size(), 9u);
    FeatureSetConfig all{true, true, 2};
    const auto a = assemble_window_features(w, all);
    EXPECT_EQ(a.size(), 36u + 3u + 6u);
    EXPECT_EQ(a.names.size(), a.values.size());
    EXPECT_THROW(assemble_window_features(w, FeatureSetConfig{false, false, 0}), std::invalid_argument);
}
