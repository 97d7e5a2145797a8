#include "qclring/comb.hpp"
#include "qclring/config.hpp"
#include "qclring/design.hpp"
#include "qclring/dispersion.hpp"
#include "qclring/errors.hpp"
#include "qclring/facet.hpp"
#include "qclring/measurement.hpp"
#include "qclring/mode_solver.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace qclring;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutputEnv = "QCLRING_OUTPUT_DIR";

struct Globals {
    std::string out_dir;
    int workers = 1;
    std::uint64_t seed = 1;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.10g}", v);
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Output {
public:
    explicit Output(const Globals& g) {
        if (!g.out_dir.empty()) dir_ = g.out_dir;
        else if (const char* e = std::getenv(kOutputEnv); e && *e) dir_ = e;
        else dir_ = ".";
    }
    fs::path path(const std::string& name) const { return dir_ / name; }
    void write(const std::string& name, const std::string& text) {
        fs::create_directories(dir_);
        std::ofstream f(path(name), std::ios::binary);
        if (!f) throw Error("io", "cannot write " + path(name).string());
        f << text;
        files_.push_back(name);
        std::cerr << "wrote " << path(name).string() << "\n";
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

json metadata(const std::string& command, const Globals& g, json params) {
    json j;
    j["tool"] = "qclring";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = g.seed;
    j["parameters"] = std::move(params);
    return j;
}

json material_json(const DeviceConfig& c) {
    const auto& t = c.db().table();
    return {{"table_version", t.version()}, {"table_source", fs::path(t.source()).filename().string()}};
}

json cross_section_json(const CrossSection& cs) {
    json layers = json::array();
    for (const auto& l : cs.stack)
        layers.push_back({{"name", l.name},
                          {"material", std::string(material_name(l.material))},
                          {"thickness_um", l.thickness_um},
                          {"doping_cm3", l.doping_cm3}});
    return {{"layers", layers},
            {"ar_width_um", cs.ar_width},
            {"top_wg_width_um", cs.top_wg_width},
            {"spacing_um", cs.wg_spacing},
            {"period", cs.period.sublayers.empty() ? std::string() : to_notation(cs.period)}};
}

json comb_json(const CombParams& p) {
    return {{"mode_count", p.mode_count}, {"f_rep_GHz", p.f_rep}, {"f_mod_GHz", p.f_mod},
            {"M_rad_per_ns", p.M},       {"g0_per_ns", p.g0},     {"alpha_per_ns", p.alpha},
            {"p_sat", p.p_sat},          {"D2_rad_per_ns", p.D2}, {"D3_rad_per_ns", p.D3},
            {"r_per_ns", p.r},           {"rho_per_ns", p.rho},   {"noise", p.noise},
            {"gain_width_sites", p.gain_width}, {"dt_ns", p.dt},  {"t_end_ns", p.t_end},
            {"avg_fraction", p.avg_fraction}};
}

DeviceConfig device(const std::string& path) {
    if (path.empty()) {
        DeviceConfig c;
        c.cs = reference_cross_section();
        c.source = "builtin:narrow_waveguide";
        return c;
    }
    return load_device_config(path);
}

// Dispersion table, one row per frequency; branch columns padded with nan.
std::string dispersion_table(const DispersionCurve& c) {
    std::ostringstream s;
    std::vector<std::string> tags;
    for (const auto& b : c.branches)
        tags.push_back(b.label == "symmetric" ? "sym" : b.label == "antisymmetric" ? "anti" : b.label);
    s << "nu[cm-1]";
    const std::pair<const char*, const char*> cols[] = {
        {"n_eff", "1"}, {"n_g", "1"}, {"gvd", "fs2/mm"}, {"tod", "fs3/mm"}, {"gamma", "1"}, {"loss", "cm-1"}};
    for (const auto& [name, unit] : cols)
        for (const auto& t : tags) s << "," << name << "_" << t << "[" << unit << "]";
    s << "\n";
    auto at = [](const std::vector<double>& v, size_t k) { return k < v.size() ? v[k] : NAN; };
    for (size_t k = 0; k < c.nu.size(); ++k) {
        s << num(c.nu[k]);
        for (const auto& b : c.branches) s << "," << num(at(b.n_eff, k));
        for (const auto& b : c.branches) s << "," << num(at(b.n_g, k));
        for (const auto& b : c.branches) s << "," << num(at(b.gvd, k));
        for (const auto& b : c.branches) s << "," << num(at(b.tod, k));
        for (const auto& b : c.branches) s << "," << num(at(b.gamma, k));
        for (const auto& b : c.branches) s << "," << num(at(b.loss, k));
        s << "\n";
    }
    return s.str();
}

json branches_json(const DispersionCurve& c) {
    json a = json::array();
    for (const auto& b : c.branches) {
        json z = json::array();
        for (double x : zero_crossings(std::vector<double>(c.nu.begin(), c.nu.begin() + b.gvd.size()), b.gvd))
            z.push_back(x);
        a.push_back({{"label", b.label},
                     {"parity_y", std::string(parity_name(b.parity))},
                     {"truncated", b.truncated},
                     {"flagged_points", b.flagged.size()},
                     {"gvd_zero_crossings_cm-1", z}});
    }
    return a;
}

std::vector<double> parse_list(const std::string& text, const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(path, "expected a comma-separated list of numbers, got '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigError(path, "empty list");
    return out;
}

std::vector<double> band_grid(double lo, double hi, double step) {
    if (!(step > 0)) throw ConfigError("step", "must be > 0");
    if (!(hi > lo)) throw ConfigError("hi", "must exceed lo");
    return uniform_grid(lo, hi, step);
}

// --- subcommands ----------------------------------------------------------

int cmd_parse_stack(const Globals&, const std::string& text, int repeats, double sheet) {
    PeriodStack p = parse_period(text);
    p.repeats = repeats;
    p.sheet_doping_cm2 = sheet;
    validate_period(p);
    fmt::print("index,role,thickness[A]\n");
    for (size_t i = 0; i < p.sublayers.size(); ++i)
        fmt::print("{},{},{}\n", i, p.sublayers[i].role == Role::Barrier ? "barrier" : "well",
                   num(p.sublayers[i].thickness_A));
    fmt::print("# period = {} A, well fraction = {}, repeats = {}, total = {} um\n", num(p.period_A()),
               num(p.well_fraction()), p.repeats, num(p.thickness_um()));
    if (sheet > 0) fmt::print("# volume doping = {} cm-3\n", num(p.volume_doping_cm3()));
    return 0;
}

int cmd_modes(const Globals& g, const std::string& cfg_path, double nu, int count, double guess) {
    DeviceConfig c = device(cfg_path);
    auto grid = build_permittivity_grid(c.cs, nu, c.db(), c.grid);
    SolverOptions o;
    o.count = count;
    o.guess = guess;
    o.symmetry = Symmetry::Even;
    auto modes = solve_modes_2d(grid, o);
    std::ostringstream s;
    s << "mode,n_eff[1],loss[cm-1],gamma[1],parity_y,residual[um-2],edge_decades[1]\n";
    for (size_t k = 0; k < modes.size(); ++k) {
        const auto& m = modes[k];
        s << k << "," << num(m.n_eff.real()) << "," << num(m.loss_cm) << "," << num(m.gamma) << ","
          << parity_name(classify_parity_y(m, grid)) << "," << num(m.residual) << "," << num(m.edge_decades)
          << "\n";
    }
    std::cout << s.str();
    Output out(g);
    out.write("modes.csv", s.str());
    out.write_json("modes.json", metadata("modes", g,
                                          {{"config", c.source},
                                           {"nu_cm-1", nu},
                                           {"count", count},
                                           {"grid", {{"nx", grid.nx}, {"ny", grid.ny}, {"dx_um", grid.dx}, {"dy_um", grid.dy}}},
                                           {"materials", material_json(c)},
                                           {"device", cross_section_json(c.cs)}}));
    return 0;
}

int cmd_dispersion(const Globals& g, const std::string& cfg_path, double lo, double hi, double step) {
    DeviceConfig c = device(cfg_path);
    auto nu = band_grid(lo, hi, step);
    SweepOptions o;
    o.grid = c.grid;
    o.workers = g.workers;
    auto curve = sweep_neff(c.cs, nu, c.db(), o);
    Output out(g);
    out.write("dispersion.csv", dispersion_table(curve));
    out.write_json("dispersion.json", metadata("dispersion", g,
                                               {{"config", c.source},
                                                {"band_cm-1", {lo, hi}},
                                                {"step_cm-1", step},
                                                {"materials", material_json(c)},
                                                {"device", cross_section_json(c.cs)},
                                                {"branches", branches_json(curve)}}));
    for (const auto& b : curve.branches)
        fmt::print("{}: gvd({}) = {} fs2/mm\n", b.label, num(nu[nu.size() / 2]),
                   num(nu.size() / 2 < b.gvd.size() ? b.gvd[nu.size() / 2] : NAN));
    return 0;
}

json design_json(const DesignTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json z = json::array();
        for (double x : r.zero_crossings) z.push_back(x);
        rows.push_back({{"width_um", r.width},
                        {"branch", r.branch},
                        {"parity_y", std::string(parity_name(r.parity))},
                        {"gamma", num_json(r.gamma)},
                        {"loss_cm-1", num_json(r.loss)},
                        {"gvd_center_fs2/mm", num_json(r.gvd_center)},
                        {"tod_center_fs3/mm", num_json(r.tod_center)},
                        {"gvd_zero_crossings_cm-1", z},
                        {"lasing", r.lasing}});
    }
    json widths = json::array();
    for (const auto& w : t.widths)
        widths.push_back({{"width_um", w.width},
                          {"regime", w.regime},
                          {"min_splitting", num_json(w.min_splitting)},
                          {"min_splitting_nu_cm-1", num_json(w.min_splitting_nu)}});
    return {{"band_cm-1", {t.band.lo, t.band.hi}},
            {"resonant_width_um", t.resonant_width},
            {"recommended_widths_um", t.recommended},
            {"widths", widths},
            {"rows", rows}};
}

std::string design_csv(const DesignTable& t) {
    std::ostringstream s;
    s << "width[um],branch,parity_y,gamma[1],loss[cm-1],gvd_center[fs2/mm],tod_center[fs3/mm],lasing\n";
    for (const auto& r : t.rows)
        s << num(r.width) << "," << r.branch << "," << parity_name(r.parity) << "," << num(r.gamma) << ","
          << num(r.loss) << "," << num(r.gvd_center) << "," << num(r.tod_center) << "," << (r.lasing ? 1 : 0)
          << "\n";
    return s.str();
}

int cmd_design_sweep(const Globals& g, const std::string& cfg_path, const std::string& widths_s,
                     const std::string& spacings_s, double lo, double hi, double step, double band_lo,
                     double band_hi) {
    DeviceConfig c = device(cfg_path);
    auto widths = parse_list(widths_s, "widths");
    std::vector<double> spacings;
    if (!spacings_s.empty()) {
        spacings = parse_list(spacings_s, "spacings");
        if (spacings.size() != widths.size()) throw ConfigError("spacings", "needs one entry per width");
    }
    auto nu = band_grid(lo, hi, step);
    SweepOptions o;
    o.grid = c.grid;
    o.workers = g.workers;
    Band band{band_lo, band_hi};
    auto t = width_design_sweep(c.cs, widths, nu, c.db(), band, o, spacings);
    Output out(g);
    out.write("design.csv", design_csv(t));
    for (size_t i = 0; i < t.curves.size(); ++i)
        out.write(fmt::format("design_w{}.csv", num(widths[i])), dispersion_table(t.curves[i]));
    json meta = metadata("design-sweep", g,
                         {{"config", c.source},
                          {"grid_cm-1", {lo, hi}},
                          {"step_cm-1", step},
                          {"widths_um", widths},
                          {"spacings_um", spacings},
                          {"materials", material_json(c)}});
    meta["summary"] = design_json(t);
    out.write_json("design_summary.json", meta);
    fmt::print("resonant width = {} um\n", num(t.resonant_width));
    for (const auto& w : t.widths) fmt::print("width {} um: {}\n", num(w.width), w.regime);
    return 0;
}

CoatingStack parse_coating(const std::string& text) {
    CoatingStack c;
    if (text.empty()) return c;
    std::stringstream ss(text);
    std::string film;
    while (std::getline(ss, film, ',')) {
        auto colon = film.find(':');
        if (colon == std::string::npos) throw ConfigError("coating", "expected n:thickness_um, got '" + film + "'");
        auto v = parse_list(film.substr(0, colon) + "," + film.substr(colon + 1), "coating");
        c.films.push_back({v[0], v[1]});
    }
    try {
        c.validate();
    } catch (const Error& e) {
        throw ConfigError("coating", e.what());
    }
    return c;
}

int cmd_facet(const Globals& g, std::optional<double> n, const std::string& cfg_path, double nu,
              const std::string& coating_s, std::optional<double> al2o3_nm) {
    std::string source = "cli";
    double nf;
    double al_index = kAl2O3Index;
    if (n) {
        nf = *n;
        if (!(nf >= 1)) throw ConfigError("n", "must be >= 1");
    } else {
        DeviceConfig c = device(cfg_path);
        nf = facet_index(isolated_waveguide(c.cs), nu, c.db(), c.grid);
        al_index = c.al2o3_index;
        source = c.source;
    }
    CoatingStack coat = parse_coating(coating_s);
    if (al2o3_nm) coat.films.push_back({al_index, *al2o3_nm * 1e-3});
    double r0 = facet_reflectivity(nf, {}, nu);
    double r = facet_reflectivity(nf, coat, nu);
    fmt::print("n_facet = {}\nR_uncoated = {}\n", num(nf), num(r0));
    if (!coat.films.empty()) fmt::print("R_coated = {} at {} cm-1\n", num(r), num(nu));
    if (!g.out_dir.empty() || std::getenv(kOutputEnv)) {
        json films = json::array();
        for (const auto& f : coat.films) films.push_back({{"n", f.n}, {"thickness_um", f.thickness_um}});
        Output out(g);
        out.write_json("facet.json", metadata("facet", g,
                                              {{"source", source},
                                               {"nu_cm-1", nu},
                                               {"n_facet", nf},
                                               {"coating", films},
                                               {"R_uncoated", r0},
                                               {"R_coated", r}}));
    }
    return 0;
}

struct CombCli {
    std::string preset;
    std::vector<std::string> sets;
    double gvd = NAN, tod = NAN, n_g = NAN;
};

CombParams comb_params(const CombCli& a, const std::string& cfg_path) {
    CombParams p;
    if (!cfg_path.empty()) p = load_device_config(cfg_path).comb;
    if (!a.preset.empty()) set_comb_field(p, "preset", a.preset, "cli");
    if (!std::isnan(a.gvd) || !std::isnan(a.tod)) {
        if (std::isnan(a.gvd) || std::isnan(a.tod) || std::isnan(a.n_g))
            throw ConfigError("cli.gvd", "--gvd, --tod and --ng must be given together");
        auto d = lattice_dispersion(a.gvd, a.tod, a.n_g, p.f_rep);
        p.D2 = d.D2;
        p.D3 = d.D3;
    }
    for (const auto& kv : a.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("cli.set", "expected key=value, got '" + kv + "'");
        set_comb_field(p, kv.substr(0, eq), kv.substr(eq + 1), "cli.set");
    }
    try {
        p.validate();
    } catch (const Error& e) {
        std::string m = e.what();
        auto colon = m.find(':');
        throw ConfigError("comb." + m.substr(0, colon), colon == std::string::npos ? m : m.substr(colon + 2));
    }
    return p;
}

json conversion_json(const CombParams& p) {
    return {{"line_spacing_cm-1", line_spacing_cm(p.f_rep)},
            {"site_spacing_GHz", p.f_rep},
            {"detuning", "f_mod - f_rep [GHz]"},
            {"lattice_dispersion", kLatticeDispersionFormula},
            {"operating_point", "g0 = alpha I/I_th, M = 2 * 10^((P_dBm - 27)/20) rad/ns"}};
}

double to_db(double v, double vmax) { return v > 0 ? 10 * std::log10(v / vmax) : -300.0; }

int cmd_comb(const Globals& g, const CombCli& a, const std::string& cfg_path) {
    CombParams p = comb_params(a, cfg_path);
    auto r = simulate_comb(p, g.seed);
    double mx = *std::max_element(r.spectrum.begin(), r.spectrum.end());
    double sp = line_spacing_cm(p.f_rep);
    std::ostringstream s;
    s << "site,offset[cm-1],intensity[dB]\n";
    for (size_t k = 0; k < r.spectrum.size(); ++k) {
        int n = int(k) - p.half();
        s << n << "," << num(n * sp) << "," << num(to_db(r.spectrum[k], mx)) << "\n";
    }
    auto cls = classify_spectrum(r.spectrum);
    double bw = mx > 0 ? comb_bandwidth(r.spectrum, -20.0, p.f_rep) : 0.0;
    Output out(g);
    out.write("comb_spectrum.csv", s.str());
    json meta = metadata("comb", g, comb_json(p));
    meta["conversion"] = conversion_json(p);
    meta["result"] = {{"power", r.power},
                      {"power_variation", r.power_variation},
                      {"converged", r.state.converged},
                      {"class", spectrum_class_name(cls)},
                      {"bandwidth_cm-1_at_-20dB", bw}};
    out.write_json("comb.json", meta);
    fmt::print("power = {}\nclass = {}\nbandwidth(-20 dB) = {} cm-1\n", num(r.power), spectrum_class_name(cls),
               num(bw));
    return 0;
}

json map_analysis_json(const MapAnalysis& a, const SpectralMap& m) {
    json labels = json::array(), bw = json::array(), mono = json::array();
    for (auto l : a.labels) labels.push_back(spectrum_class_name(l));
    for (double b : a.bandwidth) bw.push_back(b);
    for (auto [x0, x1] : a.monochromatic_ranges) mono.push_back({x0, x1});
    return {{"axis_name", m.axis_name},
            {"axis_unit", m.axis_unit},
            {"labels", labels},
            {"bandwidth_cm-1", bw},
            {"max_bandwidth_cm-1", a.max_bandwidth},
            {"max_axis", a.max_axis},
            {"monochromatic_ranges", mono}};
}

int cmd_rf_map(const Globals& g, const CombCli& a, const std::string& cfg_path, double span, int steps, bool cold) {
    CombParams p = comb_params(a, cfg_path);
    if (!(span > 0)) throw ConfigError("span", "must be > 0");
    if (steps < 2) throw ConfigError("steps", "must be >= 2");
    SweepSettings s;
    s.f_lo = p.f_rep - span;
    s.f_hi = p.f_rep + span;
    s.steps = steps;
    s.cold_start = cold;
    s.workers = g.workers;
    auto m = rf_detuning_sweep(p, s, g.seed);
    auto an = analyze_map(m);
    Output out(g);
    out.write("rf_map.csv", format_map(m));
    json meta = metadata("rf-map", g, comb_json(p));
    meta["sweep"] = {{"f_lo_GHz", s.f_lo}, {"f_hi_GHz", s.f_hi}, {"steps", steps}, {"cold_start", cold}};
    meta["conversion"] = conversion_json(p);
    meta["analysis"] = map_analysis_json(an, m);
    out.write_json("rf_map.json", meta);
    fmt::print("max bandwidth = {} cm-1 at f_mod = {} GHz\n", num(an.max_bandwidth), num(an.max_axis));
    return 0;
}

int cmd_analyze_liv(const Globals& g, const std::string& path) {
    LIVCurve c = load_liv(path);
    auto fit = threshold_and_slope(c);
    auto osc = power_oscillation_metric(c);
    fmt::print("threshold = {} mA ({} kA/cm2)\nslope = {} mW/mA\n", num(fit.threshold_ma), num(fit.threshold_kacm2),
               num(fit.slope));
    if (osc.channel_correlation) fmt::print("channel correlation = {}\n", num(*osc.channel_correlation));
    json res = {{"threshold_mA", fit.threshold_ma},
                {"threshold_kA/cm2", fit.threshold_kacm2},
                {"slope_mW/mA", fit.slope},
                {"fit_residual_mW", fit.residual},
                {"noise_gate_mW", fit.noise_gate},
                {"fit_range_mA", {c.current[fit.first], c.current[fit.last]}},
                {"sign_changes_per_100mA", osc.sign_changes_per_100ma},
                {"channel_correlation", osc.channel_correlation ? json(*osc.channel_correlation) : json(nullptr)}};
    if (!g.out_dir.empty() || std::getenv(kOutputEnv)) {
        Output out(g);
        json meta = metadata("analyze-liv", g, {{"input", fs::path(path).filename().string()}});
        meta["result"] = res;
        out.write_json("liv_analysis.json", meta);
    }
    return 0;
}

int cmd_analyze_map(const Globals& g, const std::string& path, double smsr, double floor) {
    SpectralMap m = load_map(path);
    auto a = analyze_map(m, smsr, floor);
    fmt::print("max bandwidth = {} cm-1 at {} = {} {}\n", num(a.max_bandwidth), m.axis_name, num(a.max_axis),
               m.axis_unit);
    for (auto [x0, x1] : a.monochromatic_ranges)
        fmt::print("monochromatic: {} .. {} {}\n", num(x0), num(x1), m.axis_unit);
    if (!g.out_dir.empty() || std::getenv(kOutputEnv)) {
        Output out(g);
        json meta = metadata("analyze-map", g,
                             {{"input", fs::path(path).filename().string()}, {"smsr_dB", smsr}, {"floor_dB", floor}});
        meta["result"] = map_analysis_json(a, m);
        out.write_json("map_analysis.json", meta);
    }
    return 0;
}

int cmd_reproduce_fig3(const Globals& g, const std::string& cfg_path, double step) {
    DeviceConfig c = device(cfg_path);
    const std::vector<double> widths = {3.0, 5.0, 8.5};
    const std::vector<double> spacings = {3.0, 3.0, 2.6};
    auto nu = band_grid(2000, 2400, step);
    SweepOptions o;
    o.grid = c.grid;
    o.workers = g.workers;
    Band band;
    Output out(g);
    auto t = width_design_sweep(c.cs, widths, nu, c.db(), band, o, spacings);
    for (size_t i = 0; i < widths.size(); ++i)
        out.write(fmt::format("fig3_w{}.csv", num(widths[i])), dispersion_table(t.curves[i]));
    CrossSection narrow = c.cs;
    narrow.top_wg_width = widths[0];
    narrow.wg_spacing = spacings[0];
    auto wg = sweep_single(isolated_waveguide(narrow), nu, c.db(), o);
    auto ar = sweep_single(isolated_active_region(narrow), nu, c.db(), o);
    out.write("fig3_isolated_wg.csv", dispersion_table(wg));
    out.write("fig3_isolated_ar.csv", dispersion_table(ar));
    out.write("fig3_design.csv", design_csv(t));
    json meta = metadata("reproduce fig3", g,
                         {{"config", c.source},
                          {"grid_cm-1", {nu.front(), nu.back()}},
                          {"step_cm-1", step},
                          {"widths_um", widths},
                          {"spacings_um", spacings},
                          {"materials", material_json(c)},
                          {"device", cross_section_json(c.cs)}});
    meta["summary"] = design_json(t);
    json br = json::array();
    for (const auto& cv : t.curves) br.push_back(branches_json(cv));
    meta["branches"] = br;
    out.write_json("fig3.json", meta);
    for (const auto& r : t.rows)
        fmt::print("w={} {:13} gamma={} gvd({})={} fs2/mm{}\n", num(r.width), r.branch, num(r.gamma),
                   num(band.center()), num(r.gvd_center), r.lasing ? " lasing" : "");
    return 0;
}

int cmd_reproduce_fig4(const Globals& g, double span, int steps) {
    Output out(g);
    json maps = json::array();
    for (const std::string name : {"reference", "high-tod", "low-tod"}) {
        CombParams p = comb_preset(name);
        SweepSettings s;
        s.f_lo = p.f_rep - span;
        s.f_hi = p.f_rep + span;
        s.steps = steps;
        auto m = rf_detuning_sweep(p, s, g.seed);
        auto an = analyze_map(m);
        out.write("fig4_" + name + ".csv", format_map(m));
        maps.push_back({{"preset", name},
                        {"file", "fig4_" + name + ".csv"},
                        {"parameters", comb_json(p)},
                        {"conversion", conversion_json(p)},
                        {"analysis", map_analysis_json(an, m)}});
        double center = an.bandwidth[an.bandwidth.size() / 2];
        fmt::print("{}: max bandwidth {} cm-1 at {} GHz, at zero detuning {} cm-1\n", name, num(an.max_bandwidth),
                   num(an.max_axis), num(center));
    }
    json meta = metadata("reproduce fig4-sim", g,
                         {{"span_GHz", span}, {"steps", steps}, {"start", "hysteresis (state carried upward)"}});
    meta["maps"] = maps;
    out.write_json("fig4.json", meta);
    return 0;
}

void print_error(const std::string& kind, const std::string& path, const std::string& msg) {
    json j = {{"error", kind}};
    if (!path.empty()) j["path"] = path;
    j["message"] = msg;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-waveguide ring laser design and analysis toolkit"};
    app.set_version_flag("--version", kVersion);
    Globals g;
    app.add_option("-o,--out", g.out_dir, "Output directory (default: $" + std::string(kOutputEnv) + " or .)");
    app.add_option("-j,--workers", g.workers, "Worker threads for parallel-safe sweeps")->check(CLI::Range(1, 256));
    app.add_option("--seed", g.seed, "Random seed");
    app.require_subcommand(1);
    app.fallthrough();

    std::string cfg;
    auto add_cfg = [&](CLI::App* s) { s->add_option("-c,--config", cfg, "Device INI file (default: built-in narrow device)"); };

    auto* ps = app.add_subcommand("parse-stack", "Expand a barrier/well period string");
    std::string period;
    int repeats = 1;
    double sheet = 0;
    ps->add_option("period", period, "Slash-separated thicknesses in A, barrier first")->required();
    ps->add_option("--repeats", repeats, "Period repeats");
    ps->add_option("--sheet-doping", sheet, "Sheet doping per period, cm-2");

    auto* md = app.add_subcommand("modes", "Solve guided modes at one wavenumber");
    double nu = 2200, guess = 0;
    int count = 3;
    add_cfg(md);
    md->add_option("--nu", nu, "Wavenumber, cm-1");
    md->add_option("--count", count, "Number of modes")->check(CLI::Range(1, 20));
    md->add_option("--guess", guess, "Shift (effective index); 0 picks a default");

    double lo = 2000, hi = 2400, step = 2;
    auto* ds = app.add_subcommand("dispersion", "Supermode dispersion over a wavenumber grid");
    add_cfg(ds);
    ds->add_option("--lo", lo, "Start, cm-1");
    ds->add_option("--hi", hi, "Stop, cm-1");
    ds->add_option("--step", step, "Step, cm-1");

    auto* dw = app.add_subcommand("design-sweep", "Sweep the top waveguide width");
    std::string widths = "3,5,8.5", spacings;
    double band_lo = 2140, band_hi = 2260;
    add_cfg(dw);
    dw->add_option("--widths", widths, "Comma-separated widths, um");
    dw->add_option("--spacings", spacings, "Comma-separated spacings per width, um");
    dw->add_option("--lo", lo, "Grid start, cm-1");
    dw->add_option("--hi", hi, "Grid stop, cm-1");
    dw->add_option("--step", step, "Grid step, cm-1");
    dw->add_option("--band-lo", band_lo, "Lasing band start, cm-1");
    dw->add_option("--band-hi", band_hi, "Lasing band stop, cm-1");

    auto* fc = app.add_subcommand("facet", "Facet reflectivity");
    std::optional<double> n_facet, al2o3_nm;
    std::string coating;
    double facet_nu = 2222;
    fc->add_option("--n", n_facet, "Facet effective index (otherwise from --config)");
    add_cfg(fc);
    fc->add_option("--nu", facet_nu, "Wavenumber, cm-1");
    fc->add_option("--coating", coating, "Films from the facet outward, n:thickness_um[,n:thickness_um...]");
    fc->add_option("--al2o3-nm", al2o3_nm, "Add an Al2O3 film of this thickness, nm");

    CombCli comb;
    auto add_comb = [&](CLI::App* s) {
        add_cfg(s);
        s->add_option("--preset", comb.preset, "Parameter preset");
        s->add_option("--set", comb.sets, "Override a parameter, key=value (repeatable)");
        s->add_option("--gvd", comb.gvd, "Waveguide GVD, fs2/mm (sets D2, D3)");
        s->add_option("--tod", comb.tod, "Waveguide TOD, fs3/mm");
        s->add_option("--ng", comb.n_g, "Group index");
    };
    auto* cb = app.add_subcommand("comb", "Simulate one modulated ring operating point");
    add_comb(cb);
    auto* rf = app.add_subcommand("rf-map", "Sweep the modulation frequency across f_rep");
    double span = 0.3;
    int steps = 41;
    bool cold = false;
    add_comb(rf);
    rf->add_option("--span", span, "Half-range of f_mod around f_rep, GHz");
    rf->add_option("--steps", steps, "Number of f_mod points");
    rf->add_flag("--cold-start", cold, "Restart from noise at every point (parallel)");

    auto* al = app.add_subcommand("analyze-liv", "Threshold, slope and channel correlation of an LIV file");
    std::string input;
    al->add_option("file", input, "LIV file")->required();
    auto* am = app.add_subcommand("analyze-map", "Bandwidth and regimes of a spectral map");
    double smsr = 20, floor_db = -20;
    am->add_option("file", input, "Map file")->required();
    am->add_option("--smsr", smsr, "Single-mode suppression ratio, dB");
    am->add_option("--floor", floor_db, "Bandwidth floor, dB");

    auto* rp = app.add_subcommand("reproduce", "Regenerate a figure dataset");
    rp->require_subcommand(1);
    rp->fallthrough();
    auto* f3 = rp->add_subcommand("fig3", "Width sweep 3/5/8.5 um plus isolated guides");
    double f3_step = 4;
    add_cfg(f3);
    f3->add_option("--step", f3_step, "Grid step, cm-1");
    auto* f4 = rp->add_subcommand("fig4-sim", "Modulation sweeps for three dispersion presets");
    f4->add_option("--span", span, "Half-range of f_mod, GHz");
    f4->add_option("--steps", steps, "Number of f_mod points");

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", "", e.what());
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*ps) return cmd_parse_stack(g, period, repeats, sheet);
        if (*md) return cmd_modes(g, cfg, nu, count, guess);
        if (*ds) return cmd_dispersion(g, cfg, lo, hi, step);
        if (*dw) return cmd_design_sweep(g, cfg, widths, spacings, lo, hi, step, band_lo, band_hi);
        if (*fc) return cmd_facet(g, n_facet, cfg, facet_nu, coating, al2o3_nm);
        if (*cb) return cmd_comb(g, comb, cfg);
        if (*rf) return cmd_rf_map(g, comb, cfg, span, steps, cold);
        if (*al) return cmd_analyze_liv(g, input);
        if (*am) return cmd_analyze_map(g, input, smsr, floor_db);
        if (*f3) return cmd_reproduce_fig3(g, cfg, f3_step);
        if (*f4) return cmd_reproduce_fig4(g, span, steps);
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        if (msg.rfind(e.path() + ": ", 0) == 0) msg = msg.substr(e.path().size() + 2);
        print_error("config", e.path(), msg);
        return 1;
    } catch (const Error& e) {
        print_error(e.kind(), "", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", "", e.what());
        return 1;
    }
    std::cerr << app.help();
    return 2;
}
