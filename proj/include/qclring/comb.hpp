#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qclring {

using cplxd = std::complex<double>;

// Frequency-lattice model of an RF-modulated ring laser. Sites n = -N..N are
// cavity modes in the frame rotating with the modulation; a_n runs clockwise,
// b_n counter-clockwise. Units: time ns, rates ns^-1, frequencies GHz.
struct CombParams {
    int mode_count = 257;     // odd, >= 3
    double f_rep = 15.691;    // GHz
    double f_mod = 15.691;    // GHz
    double M = 2.0;           // modulation coupling, rad/ns
    double g0 = 2.0;          // unsaturated gain, ns^-1
    double alpha = 1.0;       // loss, ns^-1
    double p_sat = 1.0;
    double D2 = 0.0;          // rad/ns per n^2
    double D3 = 0.0;          // rad/ns per n^3
    double r = 0.0;           // backscattering, ns^-1
    double rho = 0.0;         // facet feedback into b, ns^-1
    double noise = 1e-6;      // complex white-noise amplitude per sqrt(ns)
    double gain_width = 60.0; // Lorentzian gain half-width in sites; 0 = flat gain
    double dt = 0.05;         // ns
    double t_end = 4000.0;    // ns
    double avg_fraction = 0.1;  // spectrum is averaged over this final part of the run

    double detuning() const { return f_mod - f_rep; }
    int half() const { return mode_count / 2; }
    void validate() const;  // throws ValidationError naming the field
};

struct CombState {
    std::vector<cplxd> a, b;
    double time = 0.0;
    bool converged = false;
};

struct CombResult {
    CombState state;
    std::vector<double> spectrum;  // time-averaged |a|^2 + |b|^2 per site (index 0 is n = -N)
    double power = 0.0;            // time-averaged total power
    double power_variation = 0.0;  // (max - min) / mean of total power over the averaging window
};

// Integrating-factor RK4 (the diagonal phase term is exact). `initial` may be
// empty (seeded noise start) or a previous state of the same size.
// Throws InstabilityError on divergence and, above threshold, TruncationError
// if the outermost sites hold more than 1% of the power.
CombResult simulate_comb(const CombParams& p, std::uint64_t seed, const CombState* initial = nullptr);

// Number of outermost sites on each side checked by the truncation guard.
constexpr int kEdgeSites = 4;

// Line spacing in cm^-1 for a repetition rate in GHz.
double line_spacing_cm(double f_rep_ghz);

// Span between the outermost lines above max + floor_db, times the line
// spacing. Throws AnalysisError for an all-zero spectrum.
double comb_bandwidth(const std::vector<double>& spectrum, double floor_db, double f_rep_ghz);
// Same, with an explicit spacing in cm^-1.
double comb_bandwidth_cm(const std::vector<double>& spectrum, double floor_db, double spacing_cm);

enum class SpectrumClass { Monochromatic, Comb, Irregular };
std::string spectrum_class_name(SpectrumClass c);

// Monochromatic if the second strongest line is at least smsr_db below the
// peak; comb if >= 3 contiguous lines lie within 30 dB of the peak and their
// envelope falls away from the single maximum (ripple up to ripple_db allowed);
// otherwise irregular.
SpectrumClass classify_spectrum(const std::vector<double>& spectrum, double smsr_db = 20.0,
                                double ripple_db = 3.0);

struct SpectralMap {
    std::vector<double> axis;                    // sweep axis (f_mod GHz or current mA), strictly monotone
    std::string axis_name = "f_mod";
    std::string axis_unit = "GHz";
    std::vector<double> spectral;                // cm^-1 offsets (or absolute), strictly monotone
    std::vector<std::vector<double>> intensity;  // [row][spectral], >= 0
    std::vector<bool> flagged;                   // per row: simulation error at this point
    std::vector<std::string> notes;              // per row: error text or empty
};

struct SweepSettings {
    double f_lo = 0, f_hi = 0;  // GHz, must bracket f_rep
    int steps = 41;
    bool cold_start = false;    // re-seed every point (parallel-safe)
    int workers = 1;            // only used with cold_start
};

// Steady-state spectrum per f_mod. Hysteresis sweeps reuse the previous state
// and run sequentially. The map is normalized to its global maximum.
SpectralMap rf_detuning_sweep(const CombParams& p, const SweepSettings& s, std::uint64_t seed);

// Lattice dispersion from waveguide GVD (fs^2/mm) and TOD (fs^3/mm):
// D2 = -beta2 v_g w_rep^2, D3 = -v_g w_rep^3 (beta3 - 3 v_g beta2^2), in rad/ns.
struct LatticeDispersion {
    double D2 = 0, D3 = 0;
};
LatticeDispersion lattice_dispersion(double gvd_fs2_mm, double tod_fs3_mm, double n_group, double f_rep_ghz);
extern const char* const kLatticeDispersionFormula;

// Named parameter sets. Simulation presets: "reference", "high-tod", "low-tod".
// Operating points: "wide-wg" (540 mA, 11.091 GHz, 22 dBm), "narrow-wg"
// (666 mA, 10.15 GHz, 23 dBm), "reference-rc" (1014 mA, 15.691 GHz, 27 dBm).
CombParams comb_preset(const std::string& name);
std::vector<std::string> comb_preset_names();

// Operating point -> model: g0 = alpha I / I_th, M = M_ref 10^((P - P_ref)/20).
struct OperatingPoint {
    double current_ma, f_rep_ghz, rf_dbm, threshold_ma;
};
constexpr double kRefRfDbm = 27.0;
constexpr double kRefM = 2.0;
CombParams from_operating_point(const OperatingPoint& op, CombParams base = {});

}  // namespace qclring
