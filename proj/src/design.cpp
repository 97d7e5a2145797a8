#include "qclring/design.hpp"

#include "qclring/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qclring {

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double xq) {
    if (x.empty() || x.size() > y.size()) throw ValidationError("interpolate: bad input sizes");
    if (xq <= x.front()) return y.front();
    if (xq >= x[x.size() - 1]) return y[x.size() - 1];
    size_t k = size_t(std::upper_bound(x.begin(), x.end(), xq) - x.begin());
    double t = (xq - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
}

double band_average(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    double s = 0;
    int n = 0;
    for (size_t k = 0; k < std::min(x.size(), y.size()); ++k)
        if (x[k] >= lo && x[k] <= hi) s += y[k], ++n;
    if (n == 0) throw ValidationError("no grid points inside the band");
    return s / n;
}

int lasing_branch(const DispersionCurve& c, const Band& band) {
    if (c.branches.size() < 2) throw ValidationError("lasing selection needs two branches");
    const auto& a = c.branches[0];
    const auto& b = c.branches[1];
    double ga = band_average(c.nu, a.gamma, band.lo, band.hi);
    double gb = band_average(c.nu, b.gamma, band.lo, band.hi);
    if (std::abs(ga - gb) < 0.005)
        return band_average(c.nu, a.loss, band.lo, band.hi) <= band_average(c.nu, b.loss, band.lo, band.hi) ? 0 : 1;
    return ga > gb ? 0 : 1;
}

DesignTable width_design_sweep(const CrossSection& base, const std::vector<double>& widths,
                               const std::vector<double>& nu, const MaterialDb& db, const Band& band,
                               const SweepOptions& opt, const std::vector<double>& spacings) {
    if (!spacings.empty() && spacings.size() != widths.size())
        throw ValidationError("need one spacing per width");
    if (!(band.hi > band.lo)) throw ValidationError("band must have hi > lo");
    DesignTable t;
    t.band = band;
    double best_split = INFINITY;
    for (size_t w = 0; w < widths.size(); ++w) {
        if (!(widths[w] > 0)) throw ValidationError("widths must be positive");
        CrossSection cs = base;
        cs.top_wg_width = widths[w];
        if (!spacings.empty()) cs.wg_spacing = spacings[w];
        DispersionCurve c = sweep_neff(cs, nu, db, opt);
        if (c.branches.size() < 2 || c.branches[0].truncated || c.branches[1].truncated)
            throw SolverError("supermode branch lost for width " + std::to_string(widths[w]));

        int las = lasing_branch(c, band);
        for (int b = 0; b < 2; ++b) {
            const Branch& br = c.branches[b];
            DesignRow r;
            r.width = widths[w];
            r.branch = br.label;
            r.parity = br.parity;
            r.gamma = band_average(c.nu, br.gamma, band.lo, band.hi);
            r.loss = band_average(c.nu, br.loss, band.lo, band.hi);
            r.gvd_center = interpolate(c.nu, br.gvd, band.center());
            r.tod_center = interpolate(c.nu, br.tod, band.center());
            r.zero_crossings = zero_crossings(c.nu, br.gvd);
            r.lasing = b == las;
            t.rows.push_back(r);
        }

        WidthSummary s;
        s.width = widths[w];
        const auto& g0 = c.branches[0].gamma;
        const auto& g1 = c.branches[1].gamma;
        bool crossed = false;
        double prev = NAN;
        for (size_t k = 0; k < c.nu.size(); ++k) {
            if (c.nu[k] < band.lo || c.nu[k] > band.hi) continue;
            double d = g0[k] - g1[k];
            if (std::isfinite(prev) && (prev < 0) != (d < 0)) crossed = true;
            prev = d;
        }
        s.regime = crossed ? "transition" : c.branches[las].label;
        s.min_splitting = INFINITY;
        for (size_t k = 0; k < c.nu.size(); ++k) {
            double d = std::abs(c.branches[0].n_eff[k] - c.branches[1].n_eff[k]);
            if (d < s.min_splitting) s.min_splitting = d, s.min_splitting_nu = c.nu[k];
        }
        bool in_band = s.min_splitting_nu >= band.lo && s.min_splitting_nu <= band.hi;
        if (in_band && s.min_splitting < best_split) best_split = s.min_splitting, t.resonant_width = widths[w];
        if (!crossed) t.recommended.push_back(widths[w]);
        t.widths.push_back(s);
        t.curves.push_back(std::move(c));
    }
    return t;
}

double facet_index(const CrossSection& cs, double nu, const MaterialDb& db, const GridSpec& grid) {
    auto g = build_permittivity_grid(isolated_waveguide(cs), nu, db, grid);
    SolverOptions so;
    so.count = 1;
    so.symmetry = Symmetry::Even;
    so.guess = g.max_index() - 1e-3;
    auto m = solve_modes_2d(g, so);
    return m.at(0).n_eff.real();
}

}  // namespace qclring
