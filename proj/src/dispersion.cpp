#include "qclring/dispersion.hpp"

#include "qclring/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qclring {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs, int m) {
    const int n = int(xs.size());
    if (m < 0 || n <= m) throw ValidationError("fornberg: need more nodes than the derivative order");
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

std::vector<double> derivative(const std::vector<double>& f, double h, int m) {
    if (m < 1 || m > 3) throw ValidationError("derivative order must be 1, 2 or 3");
    const int n = int(f.size()), win = m + 4, r = m == 3 ? 3 : 2;
    if (n < win)
        throw ValidationError("derivative of order " + std::to_string(m) + " needs at least " +
                              std::to_string(win) + " points");
    const double scale = std::pow(h, -m);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        int lo, len;
        if (i - r >= 0 && i + r < n) {
            lo = i - r;
            len = 2 * r + 1;
        } else {
            lo = i - r < 0 ? 0 : n - win;
            len = win;
        }
        std::vector<double> xs(len);
        for (int k = 0; k < len; ++k) xs[k] = lo + k;
        auto w = fornberg_weights(double(i), xs, m);
        double s = 0;
        for (int k = 0; k < len; ++k) s += w[k] * f[lo + k];
        out[i] = s * scale;
    }
    return out;
}

namespace {

double uniform_step(const std::vector<double>& nu) {
    if (nu.size() < 2) throw ValidationError("wavenumber grid needs at least two points");
    double h = nu[1] - nu[0];
    if (!(h > 0)) throw ValidationError("wavenumber grid must be strictly increasing");
    for (size_t k = 1; k < nu.size(); ++k)
        if (std::abs((nu[k] - nu[k - 1]) - h) > 1e-9 * h)
            throw ValidationError("wavenumber grid must be uniformly spaced");
    return h;
}

}  // namespace

std::vector<double> group_index(const std::vector<double>& nu, const std::vector<double>& n_eff) {
    if (nu.size() != n_eff.size()) throw ValidationError("group_index: size mismatch");
    if (nu.size() < 5) throw ValidationError("group_index needs at least 5 points");
    auto d = derivative(n_eff, uniform_step(nu), 1);
    std::vector<double> ng(nu.size());
    for (size_t k = 0; k < nu.size(); ++k) ng[k] = n_eff[k] + nu[k] * d[k];
    return ng;
}

GvdTod gvd_tod(const std::vector<double>& nu, const std::vector<double>& n_eff) {
    if (nu.size() != n_eff.size()) throw ValidationError("gvd_tod: size mismatch");
    if (nu.size() < 7) throw ValidationError("gvd_tod needs at least 7 points");
    const double h = uniform_step(nu);
    std::vector<double> beta(nu.size());
    for (size_t k = 0; k < nu.size(); ++k) beta[k] = 2 * kPi * nu[k] * n_eff[k];  // cm^-1
    auto b2 = derivative(beta, h, 2);
    auto b3 = derivative(beta, h, 3);
    const double w = 2 * kPi * kSpeedOfLight;  // d omega / d nu
    GvdTod out;
    for (size_t k = 0; k < nu.size(); ++k) {
        out.gvd.push_back(b2[k] / (w * w) * 1e29);      // s^2/cm -> fs^2/mm
        out.tod.push_back(b3[k] / (w * w * w) * 1e44);  // s^3/cm -> fs^3/mm
    }
    return out;
}

void finish_derivatives(DispersionCurve& c) {
    for (auto& b : c.branches) {
        size_t n = b.n_eff.size();
        std::vector<double> nu(c.nu.begin(), c.nu.begin() + n);
        b.n_g = n >= 5 ? group_index(nu, b.n_eff) : std::vector<double>(n, NAN);
        if (n >= 7) {
            auto gt = gvd_tod(nu, b.n_eff);
            b.gvd = gt.gvd;
            b.tod = gt.tod;
        } else {
            b.gvd.assign(n, NAN);
            b.tod.assign(n, NAN);
        }
    }
}

const Branch& DispersionCurve::branch(const std::string& label) const {
    for (const auto& b : branches)
        if (b.label == label) return b;
    throw ValidationError("no branch labelled '" + label + "'");
}

std::vector<double> uniform_grid(double start, double stop, double step) {
    if (!(step > 0) || !(stop >= start)) throw ValidationError("invalid wavenumber range");
    int n = int(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) g[k] = start + k * step;
    return g;
}

std::vector<double> zero_crossings(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> z;
    for (size_t k = 1; k < std::min(x.size(), y.size()); ++k) {
        if (!std::isfinite(y[k - 1]) || !std::isfinite(y[k])) continue;
        if (y[k - 1] == 0.0) {
            z.push_back(x[k - 1]);
        } else if ((y[k - 1] < 0) != (y[k] < 0) && y[k] != 0.0) {
            z.push_back(x[k - 1] + (x[k] - x[k - 1]) * y[k - 1] / (y[k - 1] - y[k]));
        }
    }
    return z;
}

// ---- sweeps ----

namespace {

double ar_guess(const PermittivityGrid& g) {
    // Just above every supermode: the active-region material index.
    double n = 0;
    const Rect& r = g.ar_rect;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (r.contains(g.xc(i), g.yc(j))) n = std::max(n, std::sqrt(g.at(i, j).real()));
    double top = g.max_index();
    if (n <= 0 || n >= top) n = top - 1e-3;
    return n;
}

std::vector<ModeSolution> solve_at(const CrossSection& cs, double nu, const MaterialDb& db,
                                   const GridSpec& spec, int count, double guess_hint) {
    auto g = build_permittivity_grid(cs, nu, db, spec);
    SolverOptions o;
    o.count = count;
    o.symmetry = Symmetry::Even;
    if (guess_hint > 0)
        o.guess = std::min(guess_hint, g.max_index() - 1e-6);
    else
        o.guess = cs.with_ar ? ar_guess(g) : g.max_index() - 1e-3;
    auto modes = solve_modes_2d(g, o);
    for (auto& m : modes) m.parity = classify_parity_y(m, g);
    return modes;
}

double guide_floor(const CrossSection& cs, double nu, const MaterialDb& db) {
    return std::sqrt(db.permittivity(cs.lateral_cladding, nu, cs.lateral_doping).real());
}

struct Tracker {
    std::vector<Branch> branches;
    std::vector<ModeSolution> last;

    void push(size_t k, std::vector<ModeSolution>& modes, double floor_n, double threshold) {
        std::vector<bool> used(modes.size(), false);
        for (size_t b = 0; b < branches.size(); ++b) {
            Branch& br = branches[b];
            if (br.truncated) continue;
            int best = -1;
            double bo = -1;
            for (size_t m = 0; m < modes.size(); ++m) {
                if (used[m]) continue;
                double o = std::abs(field_overlap(last[b], modes[m]));
                if (o > bo) bo = o, best = int(m);
            }
            if (best < 0 || modes[best].n_eff.real() <= floor_n) {
                br.truncated = true;
                br.flagged.push_back(k);
                continue;
            }
            used[best] = true;
            ModeSolution& ms = modes[best];
            if (field_overlap(last[b], ms) < 0)
                for (double& v : ms.field) v = -v;
            br.n_eff.push_back(ms.n_eff.real());
            br.gamma.push_back(ms.gamma);
            br.loss.push_back(ms.loss_cm);
            br.overlap.push_back(bo);
            if (bo < threshold) br.flagged.push_back(k);
            last[b] = std::move(ms);
        }
    }
};

DispersionCurve run_sweep(const CrossSection& cs, const std::vector<double>& nu, const MaterialDb& db,
                          const SweepOptions& opt, bool coupled) {
    uniform_step(nu);
    DispersionCurve curve;
    curve.nu = nu;
    const int count = coupled ? std::max(2, opt.count) : 1;

    // First point: pick and label branches.
    Tracker tr;
    auto first = solve_at(cs, nu[0], db, opt.grid, count, 0.0);
    if (coupled) {
        auto iso_ar = solve_at(isolated_active_region(cs), nu[0], db, opt.grid, 1, 0.0);
        auto iso_wg = solve_at(isolated_waveguide(cs), nu[0], db, opt.grid, 1, 0.0);
        std::vector<std::pair<double, int>> weight;
        for (size_t m = 0; m < first.size(); ++m) {
            double a = field_overlap(first[m], iso_ar[0]), w = field_overlap(first[m], iso_wg[0]);
            weight.emplace_back(a * a + w * w, int(m));
        }
        std::sort(weight.begin(), weight.end(), [](auto& x, auto& y) { return x.first > y.first; });
        int up = weight[0].second, lo = weight[1].second;
        if (first[up].n_eff.real() < first[lo].n_eff.real()) std::swap(up, lo);
        for (int m : {up, lo}) {
            Branch b;
            b.label = m == up ? "symmetric" : "antisymmetric";
            b.parity = first[m].parity;
            tr.branches.push_back(b);
            tr.last.push_back(first[m]);
        }
    } else {
        Branch b;
        b.label = "fundamental";
        b.parity = Parity::Symmetric;
        tr.branches.push_back(b);
        tr.last.push_back(first[0]);
    }
    for (size_t b = 0; b < tr.branches.size(); ++b) {
        Branch& br = tr.branches[b];
        br.n_eff.push_back(tr.last[b].n_eff.real());
        br.gamma.push_back(tr.last[b].gamma);
        br.loss.push_back(tr.last[b].loss_cm);
        br.overlap.push_back(1.0);
    }

    // Remaining points: solve a block in parallel, then track in order.
    const size_t block = size_t(std::max(1, opt.workers)) * 2;
    for (size_t s = 1; s < nu.size(); s += block) {
        size_t e = std::min(nu.size(), s + block);
        std::vector<std::vector<ModeSolution>> sol(e - s);
        parallel_for(e - s, opt.workers,
                     [&](size_t i) { sol[i] = solve_at(cs, nu[s + i], db, opt.grid, count, 0.0); });
        for (size_t i = 0; i < sol.size(); ++i)
            tr.push(s + i, sol[i], guide_floor(cs, nu[s + i], db), opt.track_threshold);
    }
    curve.branches = std::move(tr.branches);
    finish_derivatives(curve);
    return curve;
}

}  // namespace

DispersionCurve sweep_neff(const CrossSection& cs, const std::vector<double>& nu, const MaterialDb& db,
                           const SweepOptions& opt) {
    return run_sweep(cs, nu, db, opt, true);
}

DispersionCurve sweep_single(const CrossSection& cs, const std::vector<double>& nu, const MaterialDb& db,
                             const SweepOptions& opt) {
    return run_sweep(cs, nu, db, opt, false);
}

}  // namespace qclring
