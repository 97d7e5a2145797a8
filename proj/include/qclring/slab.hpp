#pragma once

#include "qclring/geometry.hpp"

#include <vector>

namespace qclring {

struct SlabLayer {
    double eps;
    double thickness;  // um
};

// Planar stack listed bottom to top between two semi-infinite claddings.
struct SlabStack {
    double eps_bottom = 1.0;
    std::vector<SlabLayer> layers;
    double eps_top = 1.0;
};

struct SlabSolution {
    double n_eff = 0.0;
    int mode_order = 0;
    double residual = 0.0;   // normalized TM dispersion-relation residual at n_eff
    std::vector<double> y;   // sample positions, y = 0 at the bottom of the first layer
    std::vector<double> field;  // H_x, max |field| = 1
};

// Normalized boundary mismatch of the TM transfer matrix at effective index n.
double slab_tm_residual(const SlabStack& s, double nu, double n);

// All guided TM modes, ordered by decreasing n_eff. Empty when nothing guides.
std::vector<SlabSolution> solve_slab(const SlabStack& s, double nu, double sample_step = 0.01);

// x-uniform structure of `s` for the 2D solver, with layer y = 0 at the
// bottom of the first layer.
Structure slab_structure(const SlabStack& s);

}  // namespace qclring
