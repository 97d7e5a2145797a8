#pragma once

#include "qclring/geometry.hpp"

#include <string>
#include <vector>

namespace qclring {

enum class Parity { Symmetric, Antisymmetric, None };
std::string_view parity_name(Parity p);

// Restrict the solve to fields even or odd about x = 0 (half the unknowns).
enum class Symmetry { None, Even, Odd };

struct SolverOptions {
    int count = 2;
    double guess = 0.0;        // effective index; 0 picks the cladding/core midpoint
    Symmetry symmetry = Symmetry::None;
    double tolerance = 1e-8;   // on ||A v - lambda v|| / ||v||, lambda = beta^2 in um^-2
    int y_order = 4;           // 4: high-order stencils in y away from thin layers; 2: classic
    int max_krylov = 160;
    int max_restarts = 6;
    unsigned long long seed = 0x51ab0de5ULL;
};

struct ModeSolution {
    cplx n_eff;                 // imaginary part from the first-order loss
    std::vector<double> field;  // E_y per cell, sum |E|^2 dA = 1
    int nx = 0, ny = 0;
    double dx = 0, dy = 0, x0 = 0, y0 = 0, nu = 0;
    Parity parity = Parity::None;    // mirror parity in x
    double gamma = 0.0;              // overlap with the active-region rectangle
    double loss_cm = 0.0;            // power loss, cm^-1
    double residual = 0.0;
    double edge_decades = 0.0;       // log10(max |E| / max |E| on the window edge)
    bool window_warning = false;     // edge_decades < 4

    double at(int i, int j) const { return field[size_t(j) * nx + i]; }
    bool same_grid(const ModeSolution& o) const;
};

// Semi-vectorial TM (E_y) finite-difference modes nearest the guess, sorted by
// decreasing Re n_eff. Loss, Gamma and x-parity are filled in.
std::vector<ModeSolution> solve_modes_2d(const PermittivityGrid& g, const SolverOptions& opt = {});

// Default guess: midpoint between the highest window-edge index and the grid maximum.
double default_guess(const PermittivityGrid& g);

Parity classify_parity(const ModeSolution& m, const PermittivityGrid& g);
// Relative sign of the active-region and waveguide lobes along y.
Parity classify_parity_y(const ModeSolution& m, const PermittivityGrid& g);

double overlap_factor(const ModeSolution& m, const Rect& region);
double modal_loss(const ModeSolution& m, const PermittivityGrid& g);

// <a, b> over the shared grid for normalized fields.
double field_overlap(const ModeSolution& a, const ModeSolution& b);

// c_k = <supermode, isolated_k>; grids must coincide.
std::vector<double> decompose_on_isolated_modes(const ModeSolution& super,
                                                const std::vector<ModeSolution>& isolated);

// Number of intensity maxima of |E| along x,y inside r (8-neighbour local maxima
// above `rel_floor` of the region peak).
int count_intensity_maxima(const ModeSolution& m, const Rect& r, double rel_floor = 0.05);

}  // namespace qclring
