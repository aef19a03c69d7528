#include <algorithm>
#include <cmath>
#include <numbers>

#include "ocfd/features.hpp"

namespace ocfd::features {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Closing/full-circle decisions tolerate this much jitter on the median step.
constexpr double kTypicalStepSlack = 1.5;

bool degenerate(CurrentVector v, double epsilon) { return !(v.magnitude() > epsilon); }

// Median unsigned step between time-consecutive non-degenerate samples.
// Returns a negative value when no such pair exists.
double median_step(std::span<const CurrentVector> trajectory, double epsilon) {
    std::vector<double> steps;
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
        if (degenerate(trajectory[i], epsilon) || degenerate(trajectory[i + 1], epsilon)) continue;
        steps.push_back(angular_step(trajectory[i], trajectory[i + 1], epsilon));
    }
    if (steps.empty()) return -1.0;
    const auto mid = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2);
    std::nth_element(steps.begin(), mid, steps.end());
    return *mid;
}

}  // namespace

double CurrentVector::magnitude() const { return std::hypot(d, q); }

CurrentVector dq_transform(double i_a, double i_b, double i_c) {
    return {(2.0 * i_a - i_b - i_c) / 3.0, (i_b - i_c) / std::numbers::sqrt3};
}

CurrentVector unit_vector(CurrentVector v, double epsilon) {
    const double r = v.magnitude();
    if (!(r > epsilon)) throw DegenerateVectorError("current vector magnitude below epsilon");
    return {v.d / r, v.q / r};
}

double vector_angle(CurrentVector v, double epsilon) {
    if (degenerate(v, epsilon)) throw DegenerateVectorError("vector angle of a degenerate current vector");
    double deg = std::atan2(v.q, v.d) * kRadToDeg;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

double angular_step(CurrentVector from, CurrentVector to, double epsilon) {
    if (degenerate(from, epsilon) || degenerate(to, epsilon)) return 0.0;
    const double cross = from.d * to.q - from.q * to.d;
    const double dot = from.d * to.d + from.q * to.q;
    return std::atan2(std::abs(cross), dot) * kRadToDeg;
}

double vector_surface_area(std::span<const CurrentVector> trajectory, Closure closure) {
    if (trajectory.size() < 2) throw std::invalid_argument("surface area needs at least two samples");

    auto sector = [](CurrentVector from, CurrentVector to) {
        const double r = from.magnitude();
        return std::numbers::pi * r * r * angular_step(from, to) / 360.0;
    };

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) area += sector(trajectory[i], trajectory[i + 1]);

    const CurrentVector last = trajectory.back();
    const CurrentVector first = trajectory.front();
    bool close = closure == Closure::closed;
    if (closure == Closure::automatic) {
        const double typical = median_step(trajectory, kDegenerateEpsilon);
        close = typical >= 0.0 && angular_step(last, first) <= kTypicalStepSlack * typical;
    }
    if (close) area += sector(last, first);
    return area;
}

double distribution_angle(std::span<const CurrentVector> trajectory, double epsilon) {
    std::vector<double> angles;
    angles.reserve(trajectory.size());
    for (const CurrentVector& v : trajectory) {
        if (!degenerate(v, epsilon)) angles.push_back(vector_angle(v, epsilon));
    }
    if (angles.empty()) throw DegenerateVectorError("distribution angle with no non-degenerate samples");

    std::sort(angles.begin(), angles.end());
    double largest_gap = angles.front() + 360.0 - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i) {
        largest_gap = std::max(largest_gap, angles[i] - angles[i - 1]);
    }

    const double typical = median_step(trajectory, epsilon);
    if (typical > 0.0 && largest_gap <= kTypicalStepSlack * typical) return 360.0;
    return 360.0 - largest_gap;
}

}  // namespace ocfd::features
