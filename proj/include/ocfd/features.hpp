#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocfd/waveform.hpp"

namespace ocfd::features {

// ---------------------------------------------------------------------------
// Haar filter bank
// ---------------------------------------------------------------------------

/// One level of the orthonormal Haar filter bank.
struct HaarLevel {
    std::vector<double> averages;
    std::vector<double> details;
};

/// averages[k] = (a[2k] + a[2k+1]) / sqrt(2), details[k] = (a[2k] - a[2k+1]) / sqrt(2).
/// Throws std::invalid_argument unless the input length is a power of two >= 2.
HaarLevel haar_step(std::span<const double> input);

/// Repeated haar_step on the successive averages. Element 0 is the finest
/// level; the last element is the coarsest.
std::vector<HaarLevel> haar_decompose(std::span<const double> input, int levels);

/// Inverse of haar_decompose.
std::vector<double> haar_reconstruct(const std::vector<HaarLevel>& levels);

// ---------------------------------------------------------------------------
// d-q current vector
// ---------------------------------------------------------------------------

struct CurrentVector {
    double d = 0.0;
    double q = 0.0;

    double magnitude() const;
};

class DegenerateVectorError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kDegenerateEpsilon = 1e-9;

CurrentVector dq_transform(double i_a, double i_b, double i_c);

/// Throws DegenerateVectorError when |v| <= epsilon.
CurrentVector unit_vector(CurrentVector v, double epsilon = kDegenerateEpsilon);

/// Four-quadrant angle of the vector in [0, 360).
double vector_angle(CurrentVector v, double epsilon = kDegenerateEpsilon);

/// Unsigned angle between two vectors in [0, 180]; 0 if either is degenerate.
double angular_step(CurrentVector from, CurrentVector to, double epsilon = kDegenerateEpsilon);

enum class Closure {
    open,       // sum the n-1 steps between consecutive samples
    closed,     // also sum the step from the last sample back to the first
    automatic,  // close the loop when that step is no larger than a typical step
};

/// Sum of sector areas pi r_i^2 rho_i / 360, where rho_i is the unsigned
/// angular step from sample i to sample i+1 and r_i the radius of sample i.
/// Degenerate samples contribute nothing. Throws std::invalid_argument for
/// fewer than two samples.
double vector_surface_area(std::span<const CurrentVector> trajectory, Closure closure = Closure::automatic);

/// Angular extent of the arc occupied by the non-degenerate samples:
/// 360 minus the largest gap between sorted sample angles. An extent within
/// one typical angular step of 360 is reported as exactly 360.
/// Throws DegenerateVectorError when no sample is usable.
double distribution_angle(std::span<const CurrentVector> trajectory, double epsilon = kDegenerateEpsilon);

struct VectorFeatures {
    double surface_area = 0.0;
    double mean_angle = 0.0;  // circular mean of the sample angles
    double distribution_angle = 0.0;
};

// ---------------------------------------------------------------------------
// Time-domain statistics
// ---------------------------------------------------------------------------

/// Statistics that are defined for any window with N >= 2.
struct Moments {
    double max = 0.0;
    double min = 0.0;
    double peak_to_peak = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double std_dev = 0.0;
};

struct TimeDomainFeatures {
    Moments moments;
    double kurtosis = 0.0;     // normalized by the window RMS
    double skewness = 0.0;     // normalized by the window RMS
    double waveform = 0.0;     // RMS / mean|x|
    double crest = 0.0;        // max / RMS
    double impulse = 0.0;      // max / mean|x|
    double margin = 0.0;       // max / (mean sqrt|x|)^2

    static constexpr std::size_t kCount = 12;
    std::vector<double> values() const;
    static const std::vector<std::string>& names();
};

/// Raised when RMS or mean|x| vanish; the moments are still available.
class DegenerateWindowError : public std::domain_error {
public:
    DegenerateWindowError(const std::string& what, Moments moments)
        : std::domain_error(what), moments_(moments) {}
    const Moments& moments() const { return moments_; }

private:
    Moments moments_;
};

inline constexpr double kDegenerateWindowEpsilon = 1e-12;

Moments window_moments(std::span<const double> window);

TimeDomainFeatures time_domain_features(std::span<const double> window,
                                        double epsilon = kDegenerateWindowEpsilon);

// ---------------------------------------------------------------------------
// Window feature vector
// ---------------------------------------------------------------------------

struct FeatureSetConfig {
    bool time_domain = true;
    bool vector = false;
    int haar_levels = 0;  // detail energies per phase for this many levels

    bool empty() const { return !time_domain && !vector && haar_levels <= 0; }
};

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> names;

    std::size_t size() const { return values.size(); }
};

/// Per-period feature vector of three-phase currents: twelve statistics per
/// phase, then unit-vector (S, mean angle, distribution angle), then Haar
/// detail energies for phases a, b, c.
FeatureVector assemble_window_features(std::span<const sim::PhaseSample> window, const FeatureSetConfig& config);

}  // namespace ocfd::features
