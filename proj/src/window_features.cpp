#include <bit>
#include <cmath>

#include "ocfd/features.hpp"

namespace ocfd::features {

namespace {

constexpr const char* kPhaseNames[] = {"a", "b", "c"};

double phase_value(const sim::PhaseSample& s, int phase) {
    switch (phase) {
        case 0: return s.a;
        case 1: return s.b;
        default: return s.c;
    }
}

VectorFeatures unit_vector_features(std::span<const sim::PhaseSample> window) {
    std::vector<CurrentVector> trajectory;
    trajectory.reserve(window.size());
    double sum_d = 0.0;
    double sum_q = 0.0;
    for (const sim::PhaseSample& s : window) {
        const CurrentVector v = dq_transform(s.a, s.b, s.c);
        // Faulted trajectories pass through the origin; keep those samples at
        // zero radius instead of failing the window.
        CurrentVector u{};
        if (v.magnitude() > kDegenerateEpsilon) u = unit_vector(v);
        sum_d += u.d;
        sum_q += u.q;
        trajectory.push_back(u);
    }

    VectorFeatures out;
    out.surface_area = vector_surface_area(trajectory);
    out.distribution_angle = distribution_angle(trajectory);
    const CurrentVector resultant{sum_d, sum_q};
    out.mean_angle = resultant.magnitude() > kDegenerateEpsilon ? vector_angle(resultant) : 0.0;
    return out;
}

}  // namespace

FeatureVector assemble_window_features(std::span<const sim::PhaseSample> window, const FeatureSetConfig& config) {
    if (config.empty()) throw std::invalid_argument("feature set configuration selects no features");
    if (window.size() < 2) throw std::invalid_argument("feature window needs at least two samples");

    FeatureVector fv;
    std::array<std::vector<double>, 3> phases;
    for (int p = 0; p < 3; ++p) {
        phases[p].reserve(window.size());
        for (const sim::PhaseSample& s : window) phases[p].push_back(phase_value(s, p));
    }

    if (config.time_domain) {
        for (int p = 0; p < 3; ++p) {
            const TimeDomainFeatures td = time_domain_features(phases[p]);
            const std::vector<double> values = td.values();
            for (std::size_t k = 0; k < values.size(); ++k) {
                fv.values.push_back(values[k]);
                fv.names.push_back(std::string(kPhaseNames[p]) + "_" + TimeDomainFeatures::names()[k]);
            }
        }
    }

    if (config.vector) {
        const VectorFeatures vf = unit_vector_features(window);
        fv.values.insert(fv.values.end(), {vf.surface_area, vf.mean_angle, vf.distribution_angle});
        fv.names.insert(fv.names.end(), {"vector_area", "vector_angle", "distribution_angle"});
    }

    if (config.haar_levels > 0) {
        // Largest power-of-two prefix of the window.
        const std::size_t len = std::bit_floor(window.size());
        for (int p = 0; p < 3; ++p) {
            const auto levels = haar_decompose(std::span<const double>(phases[p]).first(len), config.haar_levels);
            for (std::size_t l = 0; l < levels.size(); ++l) {
                double energy = 0.0;
                for (double d : levels[l].details) energy += d * d;
                fv.values.push_back(energy);
                fv.names.push_back(std::string(kPhaseNames[p]) + "_haar_d" + std::to_string(l + 1));
            }
        }
    }
    return fv;
}

}  // namespace ocfd::features
