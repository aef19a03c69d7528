#include <algorithm>
#include <cmath>

#include "ocfd/features.hpp"

namespace ocfd::features {

std::vector<double> TimeDomainFeatures::values() const {
    return {moments.max,  moments.min, moments.peak_to_peak, moments.mean, moments.variance, moments.std_dev,
            kurtosis,     skewness,    waveform,             crest,        impulse,          margin};
}

const std::vector<std::string>& TimeDomainFeatures::names() {
    static const std::vector<std::string> kNames = {"max",      "min",      "peak_to_peak", "mean",
                                                    "variance", "std_dev",  "kurtosis",     "skewness",
                                                    "waveform", "crest",    "impulse",      "margin"};
    return kNames;
}

Moments window_moments(std::span<const double> window) {
    if (window.size() < 2) throw std::invalid_argument("time-domain window needs at least two samples");
    const auto n = static_cast<double>(window.size());
    Moments m;
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    m.max = *hi;
    m.min = *lo;
    m.peak_to_peak = m.max - m.min;

    double sum = 0.0;
    for (double x : window) sum += x;
    m.mean = sum / n;

    double ss = 0.0;
    for (double x : window) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / n;
    m.std_dev = std::sqrt(m.variance);
    return m;
}

TimeDomainFeatures time_domain_features(std::span<const double> window, double epsilon) {
    TimeDomainFeatures f;
    f.moments = window_moments(window);
    const auto n = static_cast<double>(window.size());

    double sum_sq = 0.0;
    double sum_abs = 0.0;
    double sum_sqrt_abs = 0.0;
    for (double x : window) {
        sum_sq += x * x;
        sum_abs += std::abs(x);
        sum_sqrt_abs += std::sqrt(std::abs(x));
    }
    const double rms = std::sqrt(sum_sq / n);
    const double mean_abs = sum_abs / n;
    if (!(rms > epsilon) || !(mean_abs > epsilon)) {
        throw DegenerateWindowError("window RMS or mean |x| is zero; ratio indices undefined", f.moments);
    }

    // Kurtosis and skewness normalize the centered samples by the RMS of the
    // raw window rather than by the standard deviation.
    double sum3 = 0.0;
    double sum4 = 0.0;
    for (double x : window) {
        const double z = (x - f.moments.mean) / rms;
        const double z2 = z * z;
        sum3 += z2 * z;
        sum4 += z2 * z2;
    }
    f.kurtosis = sum4 / n;
    f.skewness = sum3 / n;

    const double mean_sqrt_abs = sum_sqrt_abs / n;
    f.waveform = rms / mean_abs;
    f.crest = f.moments.max / rms;
    f.impulse = f.moments.max / mean_abs;
    f.margin = f.moments.max / (mean_sqrt_abs * mean_sqrt_abs);
    return f;
}

}  // namespace ocfd::features
