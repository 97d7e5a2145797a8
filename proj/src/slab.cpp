#include "qclring/slab.hpp"

#include "qclring/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace qclring {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct HU {
    double h, u;  // H_x and (1/eps) dH/dy
};

// Advance (H, U) by t through a layer of permittivity eps.
HU step(HU s, double eps, double k0, double n, double t) {
    double d = n * n - eps;
    if (d > 0) {
        double q = k0 * std::sqrt(d), qt = q * t;
        double c, sh;
        if (qt > 40.0) {
            c = sh = 0.5;  // common factor exp(qt) dropped
        } else {
            c = std::cosh(qt);
            sh = std::sinh(qt);
        }
        return {s.h * c + eps * s.u / q * sh, q / eps * s.h * sh + s.u * c};
    }
    if (d < 0) {
        double k = k0 * std::sqrt(-d), kt = k * t;
        return {s.h * std::cos(kt) + eps * s.u / k * std::sin(kt),
                -k / eps * s.h * std::sin(kt) + s.u * std::cos(kt)};
    }
    return {s.h + eps * s.u * t, s.u};
}

HU normalized(HU s) {
    double m = std::max(std::abs(s.h), std::abs(s.u));
    return m > 0 ? HU{s.h / m, s.u / m} : s;
}

HU start(const SlabStack& s, double k0, double n) {
    double qb = k0 * std::sqrt(std::max(0.0, n * n - s.eps_bottom));
    return normalized({1.0, qb / s.eps_bottom});
}

}  // namespace

double slab_tm_residual(const SlabStack& s, double nu, double n) {
    const double k0 = 2 * kPi * nu * 1e-4;
    HU st = start(s, k0, n);
    for (const auto& l : s.layers) st = normalized(step(st, l.eps, k0, n, l.thickness));
    double qt = k0 * std::sqrt(std::max(0.0, n * n - s.eps_top));
    double a = st.u, b = qt / s.eps_top * st.h;
    double den = std::abs(a) + std::abs(b);
    return den > 0 ? (a + b) / den : 0.0;
}

std::vector<SlabSolution> solve_slab(const SlabStack& s, double nu, double sample_step) {
    if (s.layers.empty()) throw ValidationError("slab: no layers");
    for (const auto& l : s.layers)
        if (!(l.thickness > 0)) throw ValidationError("slab: layer thickness must be > 0");

    double emax = 0;
    for (const auto& l : s.layers) emax = std::max(emax, l.eps);
    double eclad = std::max(s.eps_bottom, s.eps_top);
    std::vector<SlabSolution> out;
    if (emax <= eclad) return out;

    const double lo = std::sqrt(eclad), hi = std::sqrt(emax);
    const double span = hi - lo;
    const int samples = 4000;
    auto f = [&](double n) { return slab_tm_residual(s, nu, n); };

    std::vector<double> roots;
    double prev_n = hi - 1e-12 * span, prev_f = f(prev_n);
    for (int k = 1; k <= samples; ++k) {
        double n = hi - span * double(k) / samples;
        if (k == samples) n = lo + 1e-12 * span;
        double fn = f(n);
        if (fn == 0.0) {
            roots.push_back(n);
        } else if ((fn < 0) != (prev_f < 0) && prev_f != 0.0) {
            boost::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(f, n, prev_n, fn, prev_f,
                                                       boost::math::tools::eps_tolerance<double>(52),
                                                       iters);
            double root = 0.5 * (r.first + r.second);
            // Sign changes across a pole are rejected by the residual check.
            if (std::abs(f(root)) < 1e-8) roots.push_back(root);
        }
        prev_n = n;
        prev_f = fn;
    }

    const double k0 = 2 * kPi * nu * 1e-4;
    double total = 0;
    for (const auto& l : s.layers) total += l.thickness;
    for (size_t m = 0; m < roots.size(); ++m) {
        SlabSolution sol;
        sol.n_eff = roots[m];
        sol.mode_order = int(m);
        sol.residual = f(roots[m]);
        const double n = roots[m];
        double qb = k0 * std::sqrt(n * n - s.eps_bottom);
        double qt = k0 * std::sqrt(n * n - s.eps_top);
        double ext = std::min(10.0, 6.0 / std::min(qb, qt));
        // Propagate unnormalized state layer by layer and sample.
        HU base{1.0, qb / s.eps_bottom};
        std::vector<HU> at_start;
        HU st = base;
        for (const auto& l : s.layers) {
            at_start.push_back(st);
            st = step(st, l.eps, k0, n, l.thickness);
        }
        HU top = st;
        for (double y = -ext; y <= total + ext + 1e-12; y += sample_step) {
            double h;
            if (y < 0) {
                h = std::exp(qb * y);
            } else if (y >= total) {
                h = top.h * std::exp(-qt * (y - total));
            } else {
                double y0 = 0;
                size_t k = 0;
                while (k + 1 < s.layers.size() && y >= y0 + s.layers[k].thickness) y0 += s.layers[k++].thickness;
                h = step(at_start[k], s.layers[k].eps, k0, n, y - y0).h;
            }
            sol.y.push_back(y);
            sol.field.push_back(h);
        }
        double mx = 0, sgn = 1;
        for (double v : sol.field)
            if (std::abs(v) > mx) mx = std::abs(v), sgn = v < 0 ? -1 : 1;
        for (double& v : sol.field) v *= sgn / mx;
        out.push_back(std::move(sol));
    }
    return out;
}

Structure slab_structure(const SlabStack& s) {
    Structure st;
    st.background = s.eps_bottom;
    double y = 0;
    st.regions.push_back({{-kInf, kInf, -kInf, 0.0}, s.eps_bottom});
    for (const auto& l : s.layers) {
        st.regions.push_back({{-kInf, kInf, y, y + l.thickness}, l.eps});
        y += l.thickness;
    }
    st.regions.push_back({{-kInf, kInf, y, kInf}, s.eps_top});
    return st;
}

}  // namespace qclring
