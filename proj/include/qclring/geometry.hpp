#pragma once

#include "qclring/materials.hpp"

#include <limits>
#include <string>
#include <vector>

namespace qclring {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rect {
    double x0 = -kInf, x1 = kInf, y0 = -kInf, y1 = kInf;
    bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// Painter's-order list of constant-permittivity rectangles; later regions
// cover earlier ones. Unbounded rectangles describe full-width layers.
struct Region {
    Rect rect;
    cplx eps;
};

struct Structure {
    std::vector<Region> regions;
    cplx background{1.0, 0.0};
    bool mirror_symmetric() const;
};

struct GridSpec {
    double dx = 0.1;       // um, lateral
    double dy = 0.05;      // um, growth axis
    double padding = 6.0;  // um beyond the guiding features on every side
    bool averaging = true; // straddling cells: arithmetic in x, harmonic in y
};

// Cell-centred map; cell (i, j) spans x0 + [i, i+1] dx, y0 + [j, j+1] dy.
struct PermittivityGrid {
    int nx = 0, ny = 0;
    double dx = 0, dy = 0, x0 = 0, y0 = 0;
    double nu = 0;
    std::vector<cplx> eps;  // index j*nx + i
    Rect ar_rect, wg_rect;   // guiding features, when built from a CrossSection

    size_t size() const { return eps.size(); }
    size_t index(int i, int j) const { return size_t(j) * nx + i; }
    const cplx& at(int i, int j) const { return eps[index(i, j)]; }
    double xc(int i) const { return x0 + (i + 0.5) * dx; }
    double yc(int j) const { return y0 + (j + 0.5) * dy; }
    double cell_area() const { return dx * dy; }
    Rect window() const { return {x0, x0 + nx * dx, y0, y0 + ny * dy}; }
    bool symmetric_x() const;
    double max_index() const;
    // Fraction of cell (i, j) covered by r.
    double coverage(const Rect& r, int i, int j) const;
};

// Window [-nx/2*dx, nx/2*dx] x [y0, y0 + ny*dy]; nx must be even.
PermittivityGrid rasterize(const Structure& s, double nu, int nx, int ny, double dx, double dy,
                           double y0, bool averaging);

struct CrossSection {
    std::vector<Layer> stack;  // growth order listed top to bottom
    double ar_width = 5.0;
    double top_wg_width = 3.0;
    double wg_spacing = 3.0;   // edge-to-edge gap between AR top and waveguide bottom
    std::string spacer_layer;  // resized to meet wg_spacing; empty: thickest layer in the gap
    Material lateral_cladding = Material::InP;
    double lateral_doping = 0.0;
    PeriodStack period;        // active-region superlattice
    bool with_ar = true;       // false: AR rectangle replaced by lateral cladding
    bool with_wg = true;       // false: waveguide rectangle replaced by lateral cladding
};

void validate(const CrossSection& cs);

CrossSection isolated_waveguide(CrossSection cs);
CrossSection isolated_active_region(CrossSection cs);

struct PlacedLayer {
    Layer layer;
    double y0, y1;  // y = 0 at the AR bottom face, growth axis upward
};

// Gold is dropped; the outermost remaining layers extend to infinity.
std::vector<PlacedLayer> vertical_layout(const CrossSection& cs);
int active_region_index(const CrossSection& cs);
int waveguide_index(const CrossSection& cs);

Structure make_structure(const CrossSection& cs, double nu, const MaterialDb& db);

PermittivityGrid build_permittivity_grid(const CrossSection& cs, double nu, const MaterialDb& db,
                                         const GridSpec& spec = {});

}  // namespace qclring
