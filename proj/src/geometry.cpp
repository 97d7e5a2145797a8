#include "qclring/geometry.hpp"

#include "qclring/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qclring {

bool Structure::mirror_symmetric() const {
    for (const auto& r : regions)
        if (r.rect.x0 != -r.rect.x1) return false;
    return true;
}

bool PermittivityGrid::symmetric_x() const {
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx / 2; ++i)
            if (at(i, j) != at(nx - 1 - i, j)) return false;
    return nx % 2 == 0;
}

double PermittivityGrid::max_index() const {
    double m = 0.0;
    for (auto& e : eps) m = std::max(m, std::sqrt(e).real());
    return m;
}

double PermittivityGrid::coverage(const Rect& r, int i, int j) const {
    double xa = x0 + i * dx, ya = y0 + j * dy;
    double fx = std::min(xa + dx, r.x1) - std::max(xa, r.x0);
    double fy = std::min(ya + dy, r.y1) - std::max(ya, r.y0);
    if (fx <= 0 || fy <= 0) return 0.0;
    return (fx / dx) * (fy / dy);
}

namespace {

cplx lookup(const Structure& s, double x, double y) {
    for (auto it = s.regions.rbegin(); it != s.regions.rend(); ++it)
        if (it->rect.contains(x, y)) return it->eps;
    return s.background;
}

// Breaks within rounding distance of a cell face are dropped so that
// face-aligned interfaces give homogeneous cells.
void add_breaks(std::vector<double>& v, double a, double b, double lo, double hi) {
    const double tol = 1e-9 * (hi - lo);
    if (a > lo + tol && a < hi - tol) v.push_back(a);
    if (b > lo + tol && b < hi - tol) v.push_back(b);
}

cplx cell_average(const Structure& s, double xa, double xb, double ya, double yb) {
    std::vector<double> xs{xa, xb}, ys{ya, yb};
    for (const auto& r : s.regions) {
        add_breaks(xs, r.rect.x0, r.rect.x1, xa, xb);
        add_breaks(ys, r.rect.y0, r.rect.y1, ya, yb);
    }
    if (xs.size() == 2 && ys.size() == 2) return lookup(s, 0.5 * (xa + xb), 0.5 * (ya + yb));
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    cplx sum = 0.0, first = lookup(s, 0.5 * (xs[0] + xs[1]), 0.5 * (ys[0] + ys[1]));
    bool uniform = true;
    for (size_t a = 0; a + 1 < xs.size(); ++a) {
        double w = xs[a + 1] - xs[a];
        if (w <= 0) continue;
        double xm = 0.5 * (xs[a] + xs[a + 1]);
        cplx inv = 0.0;
        for (size_t b = 0; b + 1 < ys.size(); ++b) {
            double h = ys[b + 1] - ys[b];
            if (h <= 0) continue;
            cplx e = lookup(s, xm, 0.5 * (ys[b] + ys[b + 1]));
            uniform = uniform && e == first;
            inv += (h / (yb - ya)) / e;
        }
        sum += (w / (xb - xa)) / inv;
    }
    return uniform ? first : sum;
}

}  // namespace

PermittivityGrid rasterize(const Structure& s, double nu, int nx, int ny, double dx, double dy,
                           double y0, bool averaging) {
    if (nx < 2 || nx % 2 != 0) throw GridError("nx must be even and >= 2");
    if (ny < 1) throw GridError("ny must be >= 1");
    PermittivityGrid g;
    g.nx = nx;
    g.ny = ny;
    g.dx = dx;
    g.dy = dy;
    g.x0 = -(nx / 2) * dx;
    g.y0 = y0;
    g.nu = nu;
    g.eps.resize(size_t(nx) * ny);
    const bool sym = s.mirror_symmetric();
    for (int j = 0; j < ny; ++j) {
        double ya = y0 + j * dy, yb = y0 + (j + 1) * dy;
        for (int i = sym ? nx / 2 : 0; i < nx; ++i) {
            double xa = (i - nx / 2) * dx, xb = (i + 1 - nx / 2) * dx;
            g.eps[g.index(i, j)] = averaging
                                       ? cell_average(s, xa, xb, ya, yb)
                                       : lookup(s, 0.5 * (xa + xb), 0.5 * (ya + yb));
        }
        if (sym)
            for (int i = 0; i < nx / 2; ++i) g.eps[g.index(i, j)] = g.eps[g.index(nx - 1 - i, j)];
    }
    return g;
}

// ---- cross sections ----

namespace {

int find_unique(const CrossSection& cs, Material m, const char* what) {
    int idx = -1;
    for (size_t k = 0; k < cs.stack.size(); ++k) {
        if (cs.stack[k].material != m) continue;
        if (idx >= 0) throw ValidationError(std::string("cross section: more than one ") + what + " layer");
        idx = int(k);
    }
    if (idx < 0) throw ValidationError(std::string("cross section: no ") + what + " layer");
    return idx;
}

}  // namespace

int active_region_index(const CrossSection& cs) {
    return find_unique(cs, Material::ActiveRegion, "ActiveRegion");
}

int waveguide_index(const CrossSection& cs) {
    return find_unique(cs, Material::InGaAs, "InGaAs waveguide");
}

void validate(const CrossSection& cs) {
    if (!(cs.ar_width > 0)) throw ValidationError("geometry.ar_width must be > 0");
    if (!(cs.top_wg_width > 0)) throw ValidationError("geometry.top_wg_width must be > 0");
    if (!(cs.wg_spacing > 0)) throw ValidationError("geometry.spacing must be > 0");
    if (cs.lateral_doping < 0) throw ValidationError("geometry.lateral_doping must be >= 0");
    for (const auto& l : cs.stack) validate_layer(l);
    int ar = active_region_index(cs), wg = waveguide_index(cs);
    if (wg > ar) throw ValidationError("cross section: InGaAs waveguide must lie above the active region");
    validate_period(cs.period);
    vertical_layout(cs);
}

CrossSection isolated_waveguide(CrossSection cs) {
    cs.with_ar = false;
    return cs;
}

CrossSection isolated_active_region(CrossSection cs) {
    cs.with_wg = false;
    return cs;
}

std::vector<PlacedLayer> vertical_layout(const CrossSection& cs) {
    const int ar = active_region_index(cs), wg = waveguide_index(cs);
    std::vector<Layer> stack = cs.stack;

    // Resize the spacer so the AR-to-waveguide gap equals wg_spacing.
    if (ar - wg > 1) {
        int spacer = -1;
        double others = 0.0;
        for (int k = wg + 1; k < ar; ++k) {
            if (!cs.spacer_layer.empty() ? stack[k].name == cs.spacer_layer
                                         : (spacer < 0 || stack[k].thickness_um > stack[spacer].thickness_um))
                spacer = k;
        }
        if (spacer < 0)
            throw ValidationError("geometry.spacer_layer '" + cs.spacer_layer +
                                  "' is not between the waveguide and the active region");
        for (int k = wg + 1; k < ar; ++k)
            if (k != spacer) others += stack[k].thickness_um;
        double t = cs.wg_spacing - others;
        if (!(t > 0))
            throw ValidationError("geometry.spacing is smaller than the fixed layers between waveguide and active region");
        stack[spacer].thickness_um = t;
    } else {
        throw ValidationError("geometry.spacing needs at least one layer between waveguide and active region");
    }

    std::vector<PlacedLayer> out(stack.size());
    double y = 0.0;
    for (int k = ar; k >= 0; --k) {
        out[k] = {stack[k], y, y + stack[k].thickness_um};
        y += stack[k].thickness_um;
    }
    y = 0.0;
    for (size_t k = ar + 1; k < stack.size(); ++k) {
        out[k] = {stack[k], y - stack[k].thickness_um, y};
        y -= stack[k].thickness_um;
    }
    std::erase_if(out, [](const PlacedLayer& p) { return p.layer.material == Material::Gold; });
    if (!out.empty()) {
        out.front().y1 = kInf;
        out.back().y0 = -kInf;
    }
    return out;
}

Structure make_structure(const CrossSection& cs, double nu, const MaterialDb& db) {
    Structure s;
    const cplx clad = db.permittivity(cs.lateral_cladding, nu, cs.lateral_doping);
    s.background = clad;
    for (const auto& p : vertical_layout(cs)) {
        const Layer& l = p.layer;
        Rect full{-kInf, kInf, p.y0, p.y1};
        if (l.material == Material::ActiveRegion || l.material == Material::InGaAs) {
            bool present = l.material == Material::ActiveRegion ? cs.with_ar : cs.with_wg;
            double w = l.material == Material::ActiveRegion ? cs.ar_width : cs.top_wg_width;
            s.regions.push_back({full, clad});
            if (present)
                s.regions.push_back({{-w / 2, w / 2, p.y0, p.y1},
                                     db.permittivity(l.material, nu, l.doping_cm3, &cs.period)});
        } else {
            s.regions.push_back({full, db.permittivity(l.material, nu, l.doping_cm3)});
        }
    }
    return s;
}

PermittivityGrid build_permittivity_grid(const CrossSection& cs, double nu, const MaterialDb& db,
                                         const GridSpec& spec) {
    validate(cs);
    if (!(spec.dx > 0 && spec.dy > 0)) throw GridError("grid spacing must be > 0");
    if (!(spec.padding > 0)) throw GridError("padding must be > 0");

    const auto layout = vertical_layout(cs);
    double ar_y0 = 0, ar_y1 = 0, wg_y0 = 0, wg_y1 = 0;
    for (const auto& p : layout) {
        if (p.layer.material == Material::ActiveRegion) ar_y0 = p.y0, ar_y1 = p.y1;
        if (p.layer.material == Material::InGaAs) wg_y0 = p.y0, wg_y1 = p.y1;
    }

    Structure s = make_structure(cs, nu, db);

    double lambda = 1e4 / nu;
    double nmax = std::sqrt(s.background).real();
    for (const auto& r : s.regions) nmax = std::max(nmax, std::sqrt(r.eps).real());
    double limit = lambda / (10.0 * nmax);
    if (spec.dx > limit || spec.dy > limit)
        throw GridError("resolution too coarse: spacing must be <= lambda/(10 n_max) = " +
                        std::to_string(limit) + " um");
    if (spec.padding < 0.5 * lambda)
        throw GridError("domain too small: padding must be >= lambda/2 = " +
                        std::to_string(0.5 * lambda) + " um");

    double half = 0.5 * std::max(cs.ar_width, cs.top_wg_width) + spec.padding;
    int nx = 2 * int(std::ceil(half / spec.dx - 1e-9));
    int kb = int(std::ceil(spec.padding / spec.dy - 1e-9));
    double y0 = -kb * spec.dy;
    int ny = int(std::ceil((wg_y1 + spec.padding - y0) / spec.dy - 1e-9));

    PermittivityGrid g = rasterize(s, nu, nx, ny, spec.dx, spec.dy, y0, spec.averaging);
    g.ar_rect = {-cs.ar_width / 2, cs.ar_width / 2, ar_y0, ar_y1};
    g.wg_rect = {-cs.top_wg_width / 2, cs.top_wg_width / 2, wg_y0, wg_y1};
    return g;
}

}  // namespace qclring
