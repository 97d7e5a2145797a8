#include "qclring/comb.hpp"

#include "qclring/detail/parallel.hpp"
#include "qclring/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qclring {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kC = 2.99792458e10;  // cm/s
// Noise kicks are applied every few steps with matching variance; drawing
// Gaussians dominated the step cost otherwise.
constexpr long kNoiseEvery = 10;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void need(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ValidationError(std::string(field) + ": " + msg);
}

std::string echo(const CombParams& p) {
    std::ostringstream o;
    o << "N=" << p.mode_count << " f_rep=" << p.f_rep << " f_mod=" << p.f_mod << " M=" << p.M << " g0=" << p.g0
      << " alpha=" << p.alpha << " p_sat=" << p.p_sat << " D2=" << p.D2 << " D3=" << p.D3 << " r=" << p.r
      << " rho=" << p.rho << " dt=" << p.dt;
    return o.str();
}

struct Model {
    int n;
    double g0, psat, alpha, hop, r, rho;
    std::vector<double> filter;

    // Right-hand side without the diagonal phase (handled by the integrating factor).
    // Buffers hold n + 2 entries with zero guards at both ends.
    void rhs(const cplxd* a, const cplxd* b, cplxd* da, cplxd* db) const {
        double P = 0;
        for (int i = 1; i <= n; ++i) P += std::norm(a[i]) + std::norm(b[i]);
        const double sat = g0 / (1.0 + P / psat);
        const cplxd ih(0, hop), ir(0, r), irr(0, r + rho);
        for (int i = 1; i <= n; ++i) {
            const double g = sat * filter[i - 1] - alpha;
            da[i] = g * a[i] + ih * (a[i - 1] + a[i + 1]) + ir * b[i];
            db[i] = g * b[i] + ih * (b[i - 1] + b[i + 1]) + irr * a[i];
        }
    }
};

}  // namespace

void CombParams::validate() const {
    need(mode_count >= 3 && mode_count % 2 == 1, "mode_count", "must be an odd integer >= 3");
    need(f_rep > 0, "f_rep", "must be > 0");
    need(f_mod > 0, "f_mod", "must be > 0");
    need(g0 > 0, "g0", "must be > 0");
    need(alpha > 0, "alpha", "must be > 0");
    need(p_sat > 0, "p_sat", "must be > 0");
    need(M >= 0, "M", "must be >= 0");
    need(r >= 0, "r", "must be >= 0");
    need(rho >= 0, "rho", "must be >= 0");
    need(noise >= 0, "noise", "must be >= 0");
    need(gain_width >= 0, "gain_width", "must be >= 0");
    need(dt > 0, "dt", "must be > 0");
    need(t_end >= dt, "t_end", "must be >= dt");
    need(avg_fraction > 0 && avg_fraction <= 1, "avg_fraction", "must be in (0, 1]");
    need(std::isfinite(D2) && std::isfinite(D3), "D2/D3", "must be finite");
}

CombResult simulate_comb(const CombParams& p, std::uint64_t seed, const CombState* initial) {
    p.validate();
    const int N = p.mode_count, H = p.half();
    Model m{N, p.g0, p.p_sat, p.alpha, p.M / 2, p.r, p.rho, std::vector<double>(N, 1.0)};
    const double delta = p.detuning();
    std::vector<cplxd> E(N), E2(N);
    for (int i = 0; i < N; ++i) {
        const double k = i - H;
        if (p.gain_width > 0) m.filter[i] = 1.0 / (1.0 + (k / p.gain_width) * (k / p.gain_width));
        const double pot = 2 * kPi * k * delta + p.D2 * k * k / 2 + p.D3 * k * k * k / 6;
        E[i] = std::polar(1.0, pot * p.dt / 2);
        E2[i] = E[i] * E[i];
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    CombResult res;
    CombState& s = res.state;
    if (initial && !initial->a.empty()) {
        if (int(initial->a.size()) != N || int(initial->b.size()) != N)
            throw ValidationError("initial state: size does not match mode_count");
        s = *initial;
        s.converged = false;
    } else {
        const double amp = std::max(p.noise, 1e-12);
        s.a.resize(N);
        s.b.resize(N);
        for (int i = 0; i < N; ++i) s.a[i] = amp * cplxd(nd(rng), nd(rng));
        for (int i = 0; i < N; ++i) s.b[i] = amp * cplxd(nd(rng), nd(rng));
    }

    const long steps = std::max(1L, long(std::llround(p.t_end / p.dt)));
    const long avg_from = steps - std::max(1L, long(std::llround(steps * p.avg_fraction)));
    const double h = p.dt, sq = p.noise * std::sqrt(h * kNoiseEvery / 2);
    // Padded work buffers: index 1..N are the sites.
    std::vector<cplxd> buf(12 * size_t(N + 2), cplxd(0.0));
    auto slot = [&](int k) { return buf.data() + size_t(k) * (N + 2); };
    cplxd *a = slot(0), *b = slot(1), *k1a = slot(2), *k1b = slot(3), *k2a = slot(4), *k2b = slot(5),
          *k3a = slot(6), *k3b = slot(7), *k4a = slot(8), *k4b = slot(9), *ta = slot(10), *tb = slot(11);
    std::copy(s.a.begin(), s.a.end(), a + 1);
    std::copy(s.b.begin(), s.b.end(), b + 1);
    const cplxd* e = E.data() - 1;
    const cplxd* e2 = E2.data() - 1;
    res.spectrum.assign(N, 0.0);
    double pmin = INFINITY, pmax = 0, psum = 0;
    long count = 0;

    for (long step = 0; step < steps; ++step) {
        m.rhs(a, b, k1a, k1b);
        for (int i = 1; i <= N; ++i) {
            ta[i] = e[i] * (a[i] + h / 2 * k1a[i]);
            tb[i] = e[i] * (b[i] + h / 2 * k1b[i]);
        }
        m.rhs(ta, tb, k2a, k2b);
        for (int i = 1; i <= N; ++i) {
            ta[i] = e[i] * a[i] + h / 2 * k2a[i];
            tb[i] = e[i] * b[i] + h / 2 * k2b[i];
        }
        m.rhs(ta, tb, k3a, k3b);
        for (int i = 1; i <= N; ++i) {
            ta[i] = e2[i] * a[i] + h * e[i] * k3a[i];
            tb[i] = e2[i] * b[i] + h * e[i] * k3b[i];
        }
        m.rhs(ta, tb, k4a, k4b);
        double P = 0;
        for (int i = 1; i <= N; ++i) {
            a[i] = e2[i] * a[i] + h / 6 * (e2[i] * k1a[i] + 2.0 * e[i] * (k2a[i] + k3a[i]) + k4a[i]);
            b[i] = e2[i] * b[i] + h / 6 * (e2[i] * k1b[i] + 2.0 * e[i] * (k2b[i] + k3b[i]) + k4b[i]);
        }
        if (sq > 0 && step % kNoiseEvery == kNoiseEvery - 1)
            for (int i = 1; i <= N; ++i) {
                a[i] += sq * cplxd(nd(rng), nd(rng));
                b[i] += sq * cplxd(nd(rng), nd(rng));
            }
        for (int i = 1; i <= N; ++i) P += std::norm(a[i]) + std::norm(b[i]);
        if (!std::isfinite(P) || P > 1e12 * p.p_sat)
            throw InstabilityError("comb integration diverged at t=" + std::to_string((step + 1) * h) +
                                   " ns (" + echo(p) + ")");
        if (step >= avg_from) {
            for (int i = 1; i <= N; ++i) res.spectrum[i - 1] += std::norm(a[i]) + std::norm(b[i]);
            pmin = std::min(pmin, P);
            pmax = std::max(pmax, P);
            psum += P;
            ++count;
        }
    }
    std::copy(a + 1, a + 1 + N, s.a.begin());
    std::copy(b + 1, b + 1 + N, s.b.begin());
    for (double& v : res.spectrum) v /= double(count);
    res.power = psum / double(count);
    res.power_variation = res.power > 0 ? (pmax - pmin) / res.power : 0.0;
    s.time += steps * h;
    s.converged = res.power_variation < 1e-6;

    double edge = 0;
    for (int i = 0; i < std::min(kEdgeSites, N / 2); ++i) edge += res.spectrum[i] + res.spectrum[N - 1 - i];
    if (p.g0 > p.alpha && res.power > 0 && edge > 0.01 * res.power)
        throw TruncationError("lattice too small: outermost " + std::to_string(kEdgeSites) +
                              " sites per side hold " + std::to_string(100 * edge / res.power) +
                              "% of the power (mode_count=" + std::to_string(N) + ")");
    return res;
}

double line_spacing_cm(double f_rep_ghz) { return f_rep_ghz * 1e9 / kC; }

double comb_bandwidth_cm(const std::vector<double>& spectrum, double floor_db, double spacing_cm) {
    if (spectrum.empty()) throw AnalysisError("empty spectrum");
    if (!(floor_db < 0)) throw ValidationError("floor_db must be negative");
    double mx = *std::max_element(spectrum.begin(), spectrum.end());
    if (!(mx > 0)) throw AnalysisError("all-zero spectrum");
    const double thr = mx * std::pow(10.0, floor_db / 10);
    long lo = -1, hi = -1;
    for (size_t i = 0; i < spectrum.size(); ++i)
        if (spectrum[i] >= thr) {
            if (lo < 0) lo = long(i);
            hi = long(i);
        }
    return double(hi - lo) * spacing_cm;
}

double comb_bandwidth(const std::vector<double>& spectrum, double floor_db, double f_rep_ghz) {
    return comb_bandwidth_cm(spectrum, floor_db, line_spacing_cm(f_rep_ghz));
}

std::string spectrum_class_name(SpectrumClass c) {
    switch (c) {
        case SpectrumClass::Monochromatic: return "monochromatic";
        case SpectrumClass::Comb: return "comb";
        default: return "irregular";
    }
}

SpectrumClass classify_spectrum(const std::vector<double>& s, double smsr_db, double ripple_db) {
    if (s.empty()) throw AnalysisError("empty spectrum");
    const size_t pk = size_t(std::max_element(s.begin(), s.end()) - s.begin());
    const double mx = s[pk];
    if (!(mx > 0)) return SpectrumClass::Irregular;
    double second = 0;
    for (size_t i = 0; i < s.size(); ++i)
        if (i != pk) second = std::max(second, s[i]);
    if (second <= mx * std::pow(10.0, -smsr_db / 10)) return SpectrumClass::Monochromatic;

    const double thr = mx * 1e-3, ripple = std::pow(10.0, ripple_db / 10);
    size_t lo = pk, hi = pk;
    while (lo > 0 && s[lo - 1] >= thr) --lo;
    while (hi + 1 < s.size() && s[hi + 1] >= thr) ++hi;
    for (size_t i = 0; i < s.size(); ++i)
        if ((i < lo || i > hi) && s[i] >= thr) return SpectrumClass::Irregular;  // detached lines
    if (hi - lo + 1 < 3) return SpectrumClass::Irregular;
    // Walking outwards from the peak, no line may exceed the running minimum by more than the ripple.
    double run = mx;
    for (size_t i = pk + 1; i <= hi; ++i) {
        if (s[i] > run * ripple) return SpectrumClass::Irregular;
        run = std::min(run, s[i]);
    }
    run = mx;
    for (size_t i = pk; i-- > lo;) {
        if (s[i] > run * ripple) return SpectrumClass::Irregular;
        run = std::min(run, s[i]);
    }
    return SpectrumClass::Comb;
}

SpectralMap rf_detuning_sweep(const CombParams& p, const SweepSettings& st, std::uint64_t seed) {
    p.validate();
    if (st.steps < 2) throw ValidationError("steps: must be >= 2");
    if (!(st.f_lo < p.f_rep && p.f_rep < st.f_hi)) throw ValidationError("f_mod range must bracket f_rep");
    SpectralMap map;
    const int N = p.mode_count, H = p.half();
    const double sp = line_spacing_cm(p.f_rep);
    for (int i = 0; i < N; ++i) map.spectral.push_back((i - H) * sp);
    for (int k = 0; k < st.steps; ++k) map.axis.push_back(st.f_lo + (st.f_hi - st.f_lo) * k / (st.steps - 1));
    map.intensity.assign(st.steps, std::vector<double>(N, 0.0));
    map.flagged.assign(st.steps, false);
    map.notes.assign(st.steps, "");

    auto run_point = [&](int k, const CombState* init) -> CombState {
        CombParams q = p;
        q.f_mod = map.axis[k];
        try {
            CombResult r = simulate_comb(q, splitmix(seed ^ std::uint64_t(k)), init);
            map.intensity[k] = r.spectrum;
            return r.state;
        } catch (const Error& e) {
            map.flagged[k] = true;
            map.notes[k] = e.what();
            return {};
        }
    };

    if (st.cold_start) {
        parallel_for(size_t(st.steps), st.workers, [&](size_t k) { run_point(int(k), nullptr); });
    } else {
        CombState prev;
        for (int k = 0; k < st.steps; ++k) {
            CombState next = run_point(k, prev.a.empty() ? nullptr : &prev);
            prev = std::move(next);  // an error restarts the next point from noise
        }
    }

    double mx = 0;
    for (const auto& row : map.intensity)
        for (double v : row) mx = std::max(mx, v);
    if (mx > 0)
        for (auto& row : map.intensity)
            for (double& v : row) v /= mx;
    return map;
}

const char* const kLatticeDispersionFormula =
    "D2 = -beta2*v_g*w_rep^2; D3 = -v_g*w_rep^3*(beta3 - 3*v_g*beta2^2); v_g = c/n_g, w_rep = 2*pi*f_rep";

LatticeDispersion lattice_dispersion(double gvd, double tod, double n_group, double f_rep_ghz) {
    if (!(n_group > 0) || !(f_rep_ghz > 0)) throw ValidationError("n_group and f_rep must be positive");
    const double b2 = gvd * 1e-30 / 1e-3;  // s^2/m
    const double b3 = tod * 1e-45 / 1e-3;  // s^3/m
    const double vg = kC * 1e-2 / n_group;  // m/s
    const double w = 2 * kPi * f_rep_ghz * 1e9;
    LatticeDispersion d;
    d.D2 = -b2 * vg * w * w * 1e-9;
    d.D3 = -vg * w * w * w * (b3 - 3 * vg * b2 * b2) * 1e-9;
    return d;
}

CombParams from_operating_point(const OperatingPoint& op, CombParams base) {
    if (!(op.threshold_ma > 0) || !(op.current_ma > 0)) throw ValidationError("currents must be positive");
    base.f_rep = base.f_mod = op.f_rep_ghz;
    base.g0 = base.alpha * op.current_ma / op.threshold_ma;
    base.M = kRefM * std::pow(10.0, (op.rf_dbm - kRefRfDbm) / 20);
    return base;
}

std::vector<std::string> comb_preset_names() {
    return {"reference", "high-tod", "low-tod", "wide-wg", "narrow-wg", "reference-rc"};
}

CombParams comb_preset(const std::string& name) {
    CombParams p;
    if (name == "reference") return p;
    if (name == "low-tod") {
        p.D3 = 1e-4;
        return p;
    }
    if (name == "high-tod") {
        // Zero-GVD point six lines from the gain centre, as for a guide whose
        // GVD crosses zero near the band centre with a steep slope.
        p.D3 = 0.01;
        p.D2 = -6 * p.D3;
        return p;
    }
    // Thresholds are model parameters chosen to put each device at a similar pump ratio.
    if (name == "wide-wg") return from_operating_point({540, 11.091, 22, 300}, p);
    if (name == "narrow-wg") return from_operating_point({666, 10.15, 23, 350}, p);
    if (name == "reference-rc") return from_operating_point({1014, 15.691, 27, 500}, p);
    throw ValidationError("unknown comb preset '" + name + "'");
}

}  // namespace qclring
