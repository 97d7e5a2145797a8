#pragma once

#include "qclring/dispersion.hpp"

#include <string>
#include <vector>

namespace qclring {

struct Band {
    double lo = 2140.0, hi = 2260.0;  // cm^-1
    double center() const { return 0.5 * (lo + hi); }
};

struct DesignRow {
    double width = 0;                  // top guide width, um
    std::string branch;                // "symmetric" / "antisymmetric"
    Parity parity = Parity::None;
    double gamma = 0;                  // band-averaged
    double loss = 0;                   // band-averaged, cm^-1
    double gvd_center = 0;             // fs^2/mm
    double tod_center = 0;             // fs^3/mm
    std::vector<double> zero_crossings;  // GVD zeros over the whole grid, cm^-1
    bool lasing = false;
};

struct WidthSummary {
    double width = 0;
    std::string regime;  // lasing parity, or "transition" if the Gamma curves cross in band
    double min_splitting = 0;     // min |n_sym - n_anti| over the grid
    double min_splitting_nu = 0;
};

struct DesignTable {
    Band band;
    std::vector<DesignRow> rows;          // two per width, in input order
    std::vector<WidthSummary> widths;
    std::vector<DispersionCurve> curves;  // one per width
    double resonant_width = 0;            // width with the smallest in-band splitting
    std::vector<double> recommended;      // widths outside the transition regime
};

// Linear interpolation of y(x) at xq; x ascending.
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double xq);

// Average of y over lo <= x <= hi.
double band_average(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi);

// Lasing branch index (0 or 1): larger band-averaged Gamma, lower loss if the
// Gamma difference is below 0.005.
int lasing_branch(const DispersionCurve& c, const Band& band);

// `spacings` empty -> base spacing for every width; otherwise one per width.
DesignTable width_design_sweep(const CrossSection& base, const std::vector<double>& widths,
                               const std::vector<double>& nu, const MaterialDb& db, const Band& band = {},
                               const SweepOptions& opt = {}, const std::vector<double>& spacings = {});

// Re n_eff of the isolated passive guide at nu: the extraction facet index.
double facet_index(const CrossSection& cs, double nu, const MaterialDb& db, const GridSpec& grid = {});

}  // namespace qclring
