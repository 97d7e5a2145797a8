#pragma once

#include "qclring/comb.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qclring {

// File layout (comma separated, '#' comments):
//   # area_cm2 = 1.5e-4        (or: # width_um = 5 and # length_um = 3000)
//   current_mA,voltage_V,power_mW[,power2_mW]
//   ...
struct LIVCurve {
    std::vector<double> current;   // mA, strictly increasing
    std::vector<double> density;   // kA/cm^2
    std::vector<double> voltage;   // V
    std::vector<double> power;     // mW
    std::vector<double> power2;    // mW, empty if single channel
    double area_cm2 = 0;

    void validate() const;
    bool dual() const { return !power2.empty(); }
};

// Builds a curve from columns; density is derived from the area.
LIVCurve make_liv(std::vector<double> current, std::vector<double> voltage, std::vector<double> power,
                  double area_cm2, std::vector<double> power2 = {});

LIVCurve parse_liv(const std::string& text);
LIVCurve load_liv(const std::string& path);
std::string format_liv(const LIVCurve& c);

struct ThresholdFit {
    double threshold_ma = 0;
    double threshold_kacm2 = 0;
    double slope = 0;           // mW/mA
    double residual = 0;        // RMS of the fit, mW
    double noise_gate = 0;      // mW
    size_t first = 0, last = 0; // fitted point range (inclusive)
};

// Least-squares line over the longest contiguous run whose windowed local
// slope exceeds half the maximum, restricted to points above the noise gate.
// Noise gate = max(1% of max power, 3x RMS below threshold).
ThresholdFit threshold_and_slope(const LIVCurve& c);

struct OscillationMetric {
    double sign_changes_per_100ma = 0;
    std::optional<double> channel_correlation;  // Pearson r of the channels' increments
};
OscillationMetric power_oscillation_metric(const LIVCurve& c);

// Maps on disk:
//   # axis_name = current
//   # axis_unit = mA
//   # spectral_unit = cm-1
//   axis,<s0>,<s1>,...
//   <a0>,<i00>,<i01>,...
SpectralMap parse_map(const std::string& text);
SpectralMap load_map(const std::string& path);
std::string format_map(const SpectralMap& m, const std::string& spectral_unit = "cm-1");

struct MapAnalysis {
    std::vector<SpectrumClass> labels;
    std::vector<double> bandwidth;  // cm^-1 per slice (0 for flagged or empty slices)
    double max_bandwidth = 0;
    size_t max_index = 0;
    double max_axis = 0;
    std::vector<std::pair<double, double>> monochromatic_ranges;  // axis intervals
    struct Run {
        SpectrumClass label;
        size_t first, last;
    };
    std::vector<Run> runs;
};

// Every spectral sample is treated as one line; the line spacing is the
// spectral axis step.
MapAnalysis analyze_map(const SpectralMap& m, double smsr_db = 20.0, double floor_db = -20.0);

}  // namespace qclring
