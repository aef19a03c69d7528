#include <bit>
#include <cmath>
#include <numbers>

#include "ocfd/features.hpp"

namespace ocfd::features {

namespace {

void require_power_of_two(std::size_t n) {
    if (n < 2 || !std::has_single_bit(n)) {
        throw std::invalid_argument("Haar input length must be a power of two >= 2, got " + std::to_string(n));
    }
}

}  // namespace

HaarLevel haar_step(std::span<const double> input) {
    require_power_of_two(input.size());
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const std::size_t half = input.size() / 2;
    HaarLevel level;
    level.averages.resize(half);
    level.details.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        level.averages[k] = (input[2 * k] + input[2 * k + 1]) * inv_sqrt2;
        level.details[k] = (input[2 * k] - input[2 * k + 1]) * inv_sqrt2;
    }
    return level;
}

std::vector<HaarLevel> haar_decompose(std::span<const double> input, int levels) {
    require_power_of_two(input.size());
    const int max_levels = std::countr_zero(input.size());
    if (levels < 1 || levels > max_levels) {
        throw std::invalid_argument("Haar levels must lie in [1, " + std::to_string(max_levels) + "]");
    }
    std::vector<HaarLevel> out;
    out.reserve(static_cast<std::size_t>(levels));
    out.push_back(haar_step(input));
    for (int l = 1; l < levels; ++l) {
        out.push_back(haar_step(out.back().averages));
    }
    return out;
}

std::vector<double> haar_reconstruct(const std::vector<HaarLevel>& levels) {
    if (levels.empty()) throw std::invalid_argument("no Haar levels to reconstruct");
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    std::vector<double> signal = levels.back().averages;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        if (it->details.size() != signal.size()) {
            throw std::invalid_argument("inconsistent Haar level sizes");
        }
        std::vector<double> finer(2 * signal.size());
        for (std::size_t k = 0; k < signal.size(); ++k) {
            finer[2 * k] = (signal[k] + it->details[k]) * inv_sqrt2;
            finer[2 * k + 1] = (signal[k] - it->details[k]) * inv_sqrt2;
        }
        signal = std::move(finer);
    }
    return signal;
}

}  // namespace ocfd::features
