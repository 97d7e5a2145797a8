// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria. `--only N` runs a single criterion.

#include "qclring/comb.hpp"
#include "qclring/config.hpp"
#include "qclring/design.hpp"
#include "qclring/dispersion.hpp"
#include "qclring/facet.hpp"
#include "qclring/measurement.hpp"
#include "qclring/mode_solver.hpp"
#include "qclring/slab.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qclring;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string g(double v) { return fmt::format("{:.4g}", v); }

const DeviceConfig& reference_config() {
    static DeviceConfig c = load_device_config(std::string(QCLRING_SOURCE_DIR) + "/configs/narrow_waveguide.ini");
    return c;
}

double band_mean_abs(const std::vector<double>& nu, const std::vector<double>& y, const Band& b) {
    std::vector<double> a(y.size());
    std::transform(y.begin(), y.end(), a.begin(), [](double v) { return std::abs(v); });
    return band_average(nu, a, b.lo, b.hi);
}

// 1. Mode solver against the analytic multilayer slab.
Outcome slab_oracle() {
    Outcome o;
    const double nu = 2200;
    auto e = [](double n) { return n * n; };
    const std::vector<SlabStack> stacks = {
        {e(3.08), {{e(3.35), 1.0}}, e(3.08)},
        {e(3.08), {{e(3.35), 2.0}}, 1.0},
        {e(3.08), {{e(3.22), 1.98}, {e(3.08), 3.0}, {e(3.35), 1.0}}, e(3.08)},
        {e(3.05), {{e(3.12), 0.7}, {e(3.30), 0.9}, {e(3.18), 1.3}, {e(3.36), 0.6}, {e(3.10), 1.1}}, e(3.0)},
        {e(3.08),
         {{e(3.22), 1.98}, {e(3.08), 0.5}, {e(3.08), 2.5}, {e(3.35), 1.0}, {e(3.08), 0.5}, {e(3.07), 1.1}, {e(3.0), 0.8}},
         e(2.9)},
    };
    Timer t;
    auto worst = [&](double dy) {
        double w = 0;
        for (const auto& s : stacks) {
            const double ref = solve_slab(s, nu).at(0).n_eff;
            double total = 0;
            for (const auto& l : s.layers) total += l.thickness;
            const double pad = 8.0;
            const int ny = int(std::lround((total + 2 * pad) / dy));
            auto grid = rasterize(slab_structure(s), nu, 4, ny, 0.1, dy, -pad, true);
            SolverOptions so;
            so.count = 1;
            so.guess = ref + 1e-3;
            so.symmetry = Symmetry::None;
            w = std::max(w, std::abs(solve_modes_2d(grid, so).at(0).n_eff.real() - ref));
        }
        return w;
    };
    const double dy0 = GridSpec{}.dy;
    const double d0 = worst(dy0), d1 = worst(0.01);
    const double sec = t.seconds();
    o.check(d0 < 1e-4, fmt::format("max|dn| {} at dy={} um", g(d0), dy0));
    o.check(d1 < 1e-5, fmt::format("max|dn| {} at dy=0.01 um", g(d1)));
    o.check(sec < 60, fmt::format("{:.1f} s", sec));
    return o;
}

// 2 and 3 share the three-width sweep.
struct Fig3 {
    DesignTable table;
    DispersionCurve iso_ar, iso_wg;
    double sweep_seconds = 0;
};

const Fig3& fig3() {
    static Fig3 f = [] {
        Fig3 r;
        const auto& c = reference_config();
        auto nu = uniform_grid(2000, 2400, 4);
        SweepOptions o;
        o.grid = c.grid;
        Timer t;
        r.table = width_design_sweep(c.cs, {3.0, 5.0, 8.5}, nu, c.db(), Band{}, o, {3.0, 3.0, 2.6});
        r.sweep_seconds = t.seconds();
        CrossSection narrow = c.cs;
        narrow.top_wg_width = 3.0;
        narrow.wg_spacing = 3.0;
        r.iso_ar = sweep_single(isolated_active_region(narrow), nu, c.db(), o);
        r.iso_wg = sweep_single(isolated_waveguide(narrow), nu, c.db(), o);
        return r;
    }();
    return f;
}

const DesignRow& lasing_row(const DesignTable& t, double width) {
    for (const auto& r : t.rows)
        if (r.lasing && std::abs(r.width - width) < 1e-9) return r;
    throw std::runtime_error("no lasing row");
}

Outcome supermode_selection() {
    Outcome o;
    const auto& t = fig3().table;
    const auto& n = lasing_row(t, 3.0);
    const auto& w = lasing_row(t, 8.5);
    o.check(n.parity == Parity::Symmetric, fmt::format("3 um lasing {} (Gamma {})", n.branch, g(n.gamma)));
    o.check(w.parity == Parity::Antisymmetric, fmt::format("8.5 um lasing {} (Gamma {})", w.branch, g(w.gamma)));
    return o;
}

Outcome dispersion_shape() {
    Outcome o;
    const auto& f = fig3();
    const auto& t = f.table;
    const Band band;
    const auto& nu = t.curves[0].nu;

    // Equal widths: the largest |GVD| of either branch sits inside the band.
    const auto& eq = t.curves[1];
    double peak = 0, peak_nu = 0;
    for (const auto& b : eq.branches)
        for (size_t k = 0; k < b.gvd.size(); ++k)
            if (std::abs(b.gvd[k]) > peak) peak = std::abs(b.gvd[k]), peak_nu = nu[k];
    o.check(peak_nu >= band.lo && peak_nu <= band.hi,
            fmt::format("5 um |GVD| peak {} fs2/mm at {} cm-1", g(peak), g(peak_nu)));

    // Wide guide: in-band zero crossing of the lasing branch and steep TOD.
    const auto& wide = lasing_row(t, 8.5);
    const auto& narrow = lasing_row(t, 3.0);
    bool in_band = false;
    for (double z : wide.zero_crossings) in_band = in_band || (z >= band.lo && z <= band.hi);
    std::string zs;
    for (double z : wide.zero_crossings) zs += (zs.empty() ? "" : ",") + g(z);
    o.check(in_band, "8.5 um GVD zeros at [" + zs + "] cm-1");
    const double ratio = std::abs(wide.tod_center) / std::abs(narrow.tod_center);
    o.check(ratio >= 3, fmt::format("|TOD| 8.5/3 um = {} ({} / {} fs3/mm)", g(ratio), g(wide.tod_center),
                                    g(narrow.tod_center)));

    // Narrow guide: each supermode tracks its uncoupled guide.
    const auto& c3 = t.curves[0];
    const double ar = band_mean_abs(nu, f.iso_ar.branches[0].gvd, band);
    const double wg = band_mean_abs(nu, f.iso_wg.branches[0].gvd, band);
    for (const auto& b : c3.branches) {
        const bool sym = b.parity == Parity::Symmetric;
        const double ref = sym ? ar : wg;
        const double v = band_mean_abs(nu, b.gvd, band);
        const double r = v / ref;
        o.check(r <= 2 && r >= 0.5, fmt::format("3 um {} <|GVD|> {} vs uncoupled {} {}", b.label, g(v),
                                                sym ? "AR" : "guide", g(ref)));
    }
    o.check(f.sweep_seconds < 600, fmt::format("three-width sweep {:.0f} s", f.sweep_seconds));
    return o;
}

// 4. Facet reflectivity.
Outcome facet() {
    Outcome o;
    const double nu = 2222;
    const double r0 = facet_reflectivity(3.19, CoatingStack{}, nu);
    o.check(std::abs(r0 - 0.27) <= 0.01, "R(3.19) = " + g(r0));
    const double n_al2o3 = reference_config().al2o3_index;
    const double rc = facet_reflectivity(3.19, CoatingStack{{{n_al2o3, 0.7}}}, nu);
    o.check(std::abs(rc - 0.08) <= 0.03, fmt::format("R with 700 nm Al2O3 (n={}) = {}", n_al2o3, g(rc)));
    const double n = std::sqrt(3.19);
    const double rq = facet_reflectivity(3.19, CoatingStack{{{n, quarter_wave_thickness(n, nu)}}}, nu);
    o.check(rq < 1e-10, "quarter-wave R = " + g(rq));
    return o;
}

// 5. Comb threshold, saturation and integrator order.
Outcome comb_basics() {
    Outcome o;
    auto single = [](const CombParams& p, double amp) {
        CombState s;
        s.a.assign(p.mode_count, 0.0);
        s.b.assign(p.mode_count, 0.0);
        s.a[p.half()] = amp;
        return s;
    };
    {
        CombParams p = comb_preset("reference");
        p.M = 0;
        p.gain_width = 0;
        auto s = single(p, 0.1);
        auto r = simulate_comb(p, 5, &s);
        const double expect = p.p_sat * (p.g0 / p.alpha - 1);
        const double site = r.spectrum[p.half()];
        o.check(std::abs(site - expect) <= 1e-3 * expect, fmt::format("M=0 site power {:.7g} vs {:.7g}", site, expect));
    }
    {
        CombParams p = comb_preset("reference");
        p.M = 0;
        p.g0 = 0.5;
        auto s = single(p, 1.0);
        auto r = simulate_comb(p, 6, &s);
        // Stationary level noise^2 / (2 (alpha - g)) of each damped site, two directions.
        double floor = 0;
        for (int i = 0; i < p.mode_count; ++i) {
            const double k = (i - p.half()) / p.gain_width;
            floor += p.noise * p.noise / (p.alpha - p.g0 / (1.0 + k * k));
        }
        const double ratio = r.power / floor;
        o.check(ratio > 0.9 && ratio < 1.1, fmt::format("below threshold P / noise floor = {}", g(ratio)));
    }
    {
        CombParams p = comb_preset("reference");
        p.noise = 0;
        p.M = 0.5;
        p.f_mod = p.f_rep + 0.02;
        p.t_end = 10;
        auto s = single(p, 0.3);
        s.a[p.half() + 1] = 0.1;
        std::vector<double> P;
        for (double dt : {0.1, 0.05, 0.025}) {
            p.dt = dt;
            auto st = simulate_comb(p, 1, &s).state;
            double sum = 0;
            for (size_t i = 0; i < st.a.size(); ++i) sum += std::norm(st.a[i]) + std::norm(st.b[i]);
            P.push_back(sum);
        }
        const double factor = std::abs(P[0] - P[1]) / std::abs(P[1] - P[2]);
        o.check(factor >= 16, "step-halving factor " + g(factor));
    }
    return o;
}


// 6. Bandwidth against detuning.
struct MapStats {
    std::vector<double> mean, se;
};

MapStats stats(const std::vector<std::vector<double>>& runs) {
    MapStats s;
    const size_t n = runs.front().size();
    const double k = double(runs.size());
    for (size_t i = 0; i < n; ++i) {
        double m = 0, v = 0;
        for (const auto& r : runs) m += r[i];
        m /= k;
        for (const auto& r : runs) v += (r[i] - m) * (r[i] - m);
        s.mean.push_back(m);
        s.se.push_back(std::sqrt(v / (k - 1) / k));
    }
    return s;
}

Outcome detuning_phenomenology() {
    Outcome o;
    double slowest = 0;
    {
        const CombParams p = comb_preset("reference");
        SweepSettings s;
        s.f_lo = p.f_rep - 0.3;
        s.f_hi = p.f_rep + 0.3;
        s.steps = 21;
        s.cold_start = true;
        std::vector<std::vector<double>> runs;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Timer t;
            auto m = rf_detuning_sweep(p, s, seed);
            slowest = std::max(slowest, t.seconds());
            runs.push_back(analyze_map(m).bandwidth);
        }
        const auto st = stats(runs);
        const size_t c = st.mean.size() / 2;
        const double line = line_spacing_cm(p.f_rep);
        bool is_max = true, symmetric = true;
        double worst_gap = -INFINITY, max_asym = 0;
        for (size_t i = 0; i < st.mean.size(); ++i) {
            const double tol = 2 * std::hypot(st.se[c], st.se[i]);
            worst_gap = std::max(worst_gap, st.mean[i] - st.mean[c]);
            is_max = is_max && st.mean[i] <= st.mean[c] + tol;
        }
        for (size_t j = 1; j <= c; ++j) {
            const double d = std::abs(st.mean[c + j] - st.mean[c - j]);
            const double tol = line + 2 * std::hypot(st.se[c + j], st.se[c - j]);
            max_asym = std::max(max_asym, d);
            symmetric = symmetric && d <= tol;
        }
        o.check(is_max, fmt::format("D3=0 mean bandwidth at 0 detuning {} cm-1 (largest excess elsewhere {})",
                                    g(st.mean[c]), g(worst_gap)));
        o.check(symmetric, fmt::format("D3=0 largest +/- detuning difference {} cm-1 (line {})",
                                       g(max_asym), g(line)));
    }
    {
        const CombParams p = comb_preset("high-tod");
        SweepSettings s;
        s.f_lo = p.f_rep - 0.3;
        s.f_hi = p.f_rep + 0.3;
        s.steps = 41;
        Timer t;
        auto m = rf_detuning_sweep(p, s, 1);
        slowest = std::max(slowest, t.seconds());
        const auto bw = analyze_map(m).bandwidth;
        const size_t c = bw.size() / 2;
        double flank = 0;
        for (size_t i = 0; i < bw.size(); ++i)
            if (i != c) flank = std::max(flank, bw[i]);
        o.check(bw[c] < 0.5 * flank,
                fmt::format("D3={} rad/ns: bandwidth at 0 detuning {} vs flank max {} cm-1", p.D3, g(bw[c]), g(flank)));
    }
    o.check(slowest <= 300, fmt::format("slowest map {:.0f} s at N={}", slowest, CombParams{}.mode_count));
    return o;
}

// 7. Bandwidth of a synthetic comb.
Outcome bandwidth_arithmetic() {
    Outcome o;
    std::vector<double> spec(257, 0.0);
    for (int i = 0; i < 58; ++i) spec[100 + i] = 1.0;
    const double bw = comb_bandwidth(spec, -20, 15.691);
    o.check(std::abs(bw - 30) <= 0.6, fmt::format("58 lines at 15.691 GHz -> {} cm-1", g(bw)));
    return o;
}

// 8. LIV analysis.
Outcome measurement_oracles() {
    Outcome o;
    auto curve = [](double noise, std::mt19937_64* rng) {
        std::normal_distribution<double> nd;
        std::vector<double> I, V, P;
        for (int k = 0; k <= 200; ++k) {
            const double i = 2.5 + 5.0 * k;
            const double p = std::max(0.0, 0.2 * (i - 500));
            I.push_back(i);
            V.push_back(1 + 0.01 * i);
            P.push_back(rng ? std::max(0.0, p * (1 + noise * nd(*rng))) : p);
        }
        return make_liv(I, V, P, 1.5e-4);
    };
    const auto exact = threshold_and_slope(curve(0, nullptr));
    o.check(std::abs(exact.threshold_ma - 500) <= 1e-9 * 500 && std::abs(exact.slope - 0.2) <= 1e-9 * 0.2,
            fmt::format("noiseless threshold {:.12g} mA, slope {:.12g} mW/mA", exact.threshold_ma, exact.slope));
    double worst_t = 0, worst_s = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto f = threshold_and_slope(curve(0.05, &rng));
        worst_t = std::max(worst_t, std::abs(f.threshold_ma - 500) / 500);
        worst_s = std::max(worst_s, std::abs(f.slope - 0.2) / 0.2);
    }
    o.check(worst_t <= 0.02 && worst_s <= 0.02,
            fmt::format("5% noise, 100 seeds: worst threshold error {:.2f}%, slope error {:.2f}%", 100 * worst_t,
                        100 * worst_s));

    // Emission hops between the two directions every few points.
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<double> I, V, P1, P2;
    bool cw = true;
    for (int k = 0; k <= 200; ++k) {
        const double i = 2.5 + 5.0 * k;
        const double p = std::max(0.0, 0.2 * (i - 500));
        if (k % 4 == 0) cw = !cw;
        const double f = cw ? 0.8 : 0.2;
        I.push_back(i);
        V.push_back(1 + 0.01 * i);
        P1.push_back(std::max(0.0, f * p * (1 + 0.01 * nd(rng))));
        P2.push_back(std::max(0.0, (1 - f) * p * (1 + 0.01 * nd(rng))));
    }
    const auto m = power_oscillation_metric(make_liv(I, V, P1, 1.5e-4, P2));
    const double r = m.channel_correlation.value_or(NAN);
    o.check(r <= -0.9, "switching channel correlation " + g(r));
    return o;
}

// 9. Reproduction outputs do not depend on the run or the worker count.
std::map<std::string, std::string> read_dir(const fs::path& d) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(d)) {
        std::ifstream f(e.path(), std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        files[e.path().filename().string()] = s.str();
    }
    return files;
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "qclring_acceptance_determinism";
    for (const std::string fig : {"fig3", "fig4-sim"}) {
        std::vector<std::map<std::string, std::string>> outs;
        for (int workers : {1, 4}) {
            const fs::path dir = root / fmt::format("{}_j{}", fig, workers);
            fs::remove_all(dir);
            const std::string cmd = fmt::format("{} -o {} -j {} --seed 1 reproduce {} > /dev/null", QCLRING_CLI,
                                                dir.string(), workers, fig);
            const int rc = std::system(cmd.c_str());
            if (rc != 0) {
                o.check(false, fmt::format("{} exited with {}", fig, rc));
                return o;
            }
            outs.push_back(read_dir(dir));
        }
        o.check(!outs[0].empty() && outs[0] == outs[1],
                fmt::format("{}: {} files identical for 1 and 4 workers", fig, outs[0].size()));
    }
    fs::remove_all(root);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "Run one criterion (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"slab oracle", slab_oracle},
        {"supermode selection", supermode_selection},
        {"dispersion shape", dispersion_shape},
        {"facet reflectivity", facet},
        {"comb threshold and integrator", comb_basics},
        {"detuning phenomenology", detuning_phenomenology},
        {"bandwidth arithmetic", bandwidth_arithmetic},
        {"measurement oracles", measurement_oracles},
        {"determinism", determinism},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (only && int(i) + 1 != only) continue;
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.check(false, std::string("exception: ") + e.what());
        }
        failed += !r.pass;
        fmt::print("{} C{} {}: {}\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail);
        std::fflush(stdout);
    }
    return failed;
}
