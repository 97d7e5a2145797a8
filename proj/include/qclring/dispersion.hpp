#pragma once

#include "qclring/mode_solver.hpp"

#include <string>
#include <vector>

namespace qclring {

constexpr double kSpeedOfLight = 2.99792458e10;  // cm/s

// Finite-difference weights for the m-th derivative at x0 from nodes xs.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs, int m);

// m-th derivative (1..3) of uniformly spaced samples: central stencils of
// 5 (m = 1, 2) or 7 (m = 3) points inside, one-sided m+4-point windows at
// the ends. All order 4.
std::vector<double> derivative(const std::vector<double>& f, double h, int m);

struct Branch {
    std::string label;              // "symmetric" / "antisymmetric" / "fundamental"
    Parity parity = Parity::None;   // lobe parity along y at the first point
    std::vector<double> n_eff, n_g, gvd, tod, gamma, loss;
    std::vector<double> overlap;    // overlap with the previous point (1 at the first)
    std::vector<size_t> flagged;    // indices where overlap < threshold
    bool truncated = false;         // mode lost before the end of the range
};

struct DispersionCurve {
    std::vector<double> nu;         // cm^-1, uniform ascending
    std::vector<Branch> branches;
    const Branch& branch(const std::string& label) const;
};

// n_g = n + nu dn/dnu.
std::vector<double> group_index(const std::vector<double>& nu, const std::vector<double>& n_eff);

struct GvdTod {
    std::vector<double> gvd;  // fs^2/mm
    std::vector<double> tod;  // fs^3/mm
};
// beta(omega) = n omega / c; derivatives taken in nu and rescaled.
GvdTod gvd_tod(const std::vector<double>& nu, const std::vector<double>& n_eff);

// Fill n_g, gvd, tod of every branch from its n_eff.
void finish_derivatives(DispersionCurve& c);

std::vector<double> uniform_grid(double start, double stop, double step);

struct SweepOptions {
    GridSpec grid{};
    int count = 3;                 // modes per solve for coupled sections
    int workers = 1;
    double track_threshold = 0.8;
};

// Symmetric/antisymmetric supermode branches. The pair is picked at the first
// point by projection onto the isolated active-region and waveguide
// fundamentals, then followed by maximum field overlap.
DispersionCurve sweep_neff(const CrossSection& cs, const std::vector<double>& nu,
                           const MaterialDb& db, const SweepOptions& opt = {});

// Fundamental mode of a single guide (e.g. isolated_waveguide(cs)).
DispersionCurve sweep_single(const CrossSection& cs, const std::vector<double>& nu,
                             const MaterialDb& db, const SweepOptions& opt = {});

// Run f(i) for i in [0, n) on `workers` threads.
template <class F>
void parallel_for(size_t n, int workers, F&& f);

// Positions where y crosses zero (linear interpolation).
std::vector<double> zero_crossings(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qclring

#include "qclring/detail/parallel.hpp"
