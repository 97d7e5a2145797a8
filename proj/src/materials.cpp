#include "qclring/materials.hpp"

#include "qclring/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include <cmath>
#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef QCLRING_DATA_DIR
#define QCLRING_DATA_DIR "data"
#endif

namespace qclring {

namespace {

constexpr double kE = 1.602176634e-19;
constexpr double kEps0 = 8.8541878128e-12;
constexpr double kMe = 9.1093837015e-31;

const std::pair<Material, std::string_view> kNames[] = {
    {Material::InP, "InP"},       {Material::InGaAs, "InGaAs"},
    {Material::AlInAs, "AlInAs"}, {Material::ActiveRegion, "ActiveRegion"},
    {Material::Gold, "Gold"},     {Material::Air, "Air"},
    {Material::Al2O3, "Al2O3"},
};

}  // namespace

std::string_view material_name(Material m) {
    for (auto& [k, v] : kNames)
        if (k == m) return v;
    throw ValidationError("unknown material");
}

Material material_from_name(std::string_view name) {
    std::string s = boost::algorithm::trim_copy(std::string(name));
    for (auto& [k, v] : kNames)
        if (boost::algorithm::iequals(s, v)) return k;
    if (boost::algorithm::iequals(s, "AR")) return Material::ActiveRegion;
    if (boost::algorithm::iequals(s, "Au")) return Material::Gold;
    throw ParseError("unknown material '" + s + "'");
}

void validate_layer(const Layer& l) {
    if (!(l.thickness_um > 0.0))
        throw ValidationError("layer '" + l.name + "': thickness must be > 0");
    if (!(l.doping_cm3 >= 0.0))
        throw ValidationError("layer '" + l.name + "': doping must be >= 0");
}

// ---- period stacks ----

double PeriodStack::period_A() const {
    double s = 0.0;
    for (auto& l : sublayers) s += l.thickness_A;
    return s;
}

double PeriodStack::well_A() const {
    double s = 0.0;
    for (auto& l : sublayers)
        if (l.role == Role::Well) s += l.thickness_A;
    return s;
}

double PeriodStack::barrier_A() const { return period_A() - well_A(); }

void validate_period(const PeriodStack& p) {
    if (p.sublayers.empty()) throw ValidationError("period: no sublayers");
    if (p.repeats < 1) throw ValidationError("period: repeats must be >= 1");
    if (p.sheet_doping_cm2 < 0.0) throw ValidationError("period: sheet doping must be >= 0");
    for (size_t i = 0; i < p.sublayers.size(); ++i) {
        const auto& s = p.sublayers[i];
        if (!(s.thickness_A > 0.0))
            throw ValidationError("period: sublayer " + std::to_string(i + 1) +
                                  " thickness must be > 0");
        if (s.role != (i % 2 == 0 ? Role::Barrier : Role::Well))
            throw ValidationError("period: roles must alternate starting with a barrier");
    }
}

PeriodStack parse_period(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ParseError("period: empty input");

    std::vector<std::string> tokens;
    boost::algorithm::split(tokens, s, [](char c) { return c == '/'; });
    if (tokens.size() < 2) throw ParseError("period: need at least two '/'-separated values");

    PeriodStack p;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        double v = 0.0;
        size_t used = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (t.empty() || used != t.size() || !std::isfinite(v))
            throw ParseError("period: token " + std::to_string(i + 1) + " ('" + t +
                             "') is not a number");
        if (v <= 0.0)
            throw ValidationError("period: token " + std::to_string(i + 1) +
                                  " thickness must be > 0");
        p.sublayers.push_back({i % 2 == 0 ? Role::Barrier : Role::Well, v});
    }
    return p;
}

std::string to_notation(const PeriodStack& p) {
    std::ostringstream os;
    os.precision(15);
    for (size_t i = 0; i < p.sublayers.size(); ++i) {
        if (i) os << '/';
        os << p.sublayers[i].thickness_A;
    }
    return os.str();
}

// ---- tabulated data ----

struct MaterialTable::Curve {
    double nu0, step, nu1;
    boost::math::interpolators::cardinal_quintic_b_spline<double> spline;
    Curve(std::vector<double> n, double nu0_, double step_)
        : nu0(nu0_), step(step_), nu1(nu0_ + step_ * (n.size() - 1)),
          spline(n.data(), n.size(), nu0_, step_) {}
};

MaterialTable MaterialTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("material table: cannot open '" + path + "'");

    std::map<Material, std::vector<std::pair<double, double>>> rows;
    MaterialTable t;
    t.source_ = path;
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("version:");
            if (pos != std::string::npos)
                t.version_ = boost::algorithm::trim_copy(line.substr(pos + 8));
            continue;
        }
        if (!header) {
            if (line.rfind("material", 0) != 0)
                throw ParseError("material table: line " + std::to_string(lineno) +
                                 ": expected header 'material,wavenumber_cm-1,n'");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        boost::algorithm::split(f, line, [](char c) { return c == ','; });
        if (f.size() != 3)
            throw ParseError("material table: line " + std::to_string(lineno) +
                             ": expected 3 fields");
        try {
            rows[material_from_name(f[0])].emplace_back(std::stod(f[1]), std::stod(f[2]));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("material table: line " + std::to_string(lineno) +
                             ": bad number");
        }
    }

    for (auto& [m, r] : rows) {
        std::sort(r.begin(), r.end());
        if (r.size() < 8)
            throw ParseError("material table: " + std::string(material_name(m)) +
                             " needs at least 8 records");
        double step = r[1].first - r[0].first;
        std::vector<double> n;
        for (size_t i = 0; i < r.size(); ++i) {
            double expect = r[0].first + step * i;
            if (std::abs(r[i].first - expect) > 1e-6 * step)
                throw ParseError("material table: " + std::string(material_name(m)) +
                                 " wavenumbers are not uniformly spaced");
            if (r[i].second < 1.0)
                throw ParseError("material table: index below 1 for " +
                                 std::string(material_name(m)));
            n.push_back(r[i].second);
        }
        t.curves_[m] = std::make_shared<Curve>(std::move(n), r[0].first, step);
    }
    return t;
}

const MaterialTable& MaterialTable::default_table() {
    static const MaterialTable table = [] {
        const char* env = std::getenv("QCLRING_MATERIALS");
        return load(env && *env ? std::string(env)
                                : std::string(QCLRING_DATA_DIR) + "/materials.csv");
    }();
    return table;
}

bool MaterialTable::has(Material m) const { return curves_.count(m) != 0; }

std::pair<double, double> MaterialTable::range(Material m) const {
    auto it = curves_.find(m);
    if (it == curves_.end())
        throw ValidationError("no tabulated data for " + std::string(material_name(m)));
    return {it->second->nu0, it->second->nu1};
}

double MaterialTable::n(Material m, double nu) const {
    auto it = curves_.find(m);
    if (it == curves_.end())
        throw ValidationError("no tabulated data for " + std::string(material_name(m)));
    const Curve& c = *it->second;
    if (!(nu >= c.nu0 && nu <= c.nu1))
        throw RangeError(std::string(material_name(m)) + ": wavenumber " + std::to_string(nu) +
                         " outside tabulated range [" + std::to_string(c.nu0) + ", " +
                         std::to_string(c.nu1) + "] cm^-1");
    return c.spline(nu);
}

double MaterialTable::dn(Material m, double nu) const {
    n(m, nu);  // range check
    return curves_.at(m)->spline.prime(nu);
}

// ---- Drude and the database ----

double plasma_frequency(double doping_cm3, double mass_ratio) {
    double N = doping_cm3 * 1e6;
    return std::sqrt(N * kE * kE / (kEps0 * mass_ratio * kMe));
}

cplx drude_permittivity(double eps_bg, double nu, double doping_cm3, const DrudeParams& d) {
    double N = doping_cm3 + d.intrinsic_cm3;
    if (N <= 0.0) return {eps_bg, 0.0};
    double w = angular_frequency(nu);
    double wp = plasma_frequency(N, d.mass_ratio);
    return cplx(eps_bg, 0.0) - wp * wp / cplx(w * w, d.gamma_s * w);
}

std::map<Material, DrudeParams> MaterialOptions::default_drude() {
    return {
        {Material::InP, {0.077, 1e13, 0.0}},
        {Material::InGaAs, {0.041, 1e13, 0.0}},
        {Material::AlInAs, {0.075, 1e13, 0.0}},
        // Free-electron gold: wp ~ 1.37e16 rad/s, gamma ~ 4e13 s^-1.
        {Material::Gold, {1.0, 4.05e13, 5.9e22}},
    };
}

MaterialDb::MaterialDb(const MaterialTable& table, MaterialOptions opts)
    : table_(&table), opts_(std::move(opts)) {
    for (auto& [m, d] : opts_.drude)
        if (!(d.mass_ratio > 0.0))
            throw ValidationError(std::string(material_name(m)) + ": effective mass must be > 0");
}

double MaterialDb::background_index(Material m, double nu) const {
    if (m == Material::ActiveRegion)
        throw ValidationError("ActiveRegion has no tabulated index; use effective_medium_index");
    if (m == Material::Air && !table_->has(Material::Air)) return 1.0;
    return table_->n(m, nu);
}

cplx MaterialDb::permittivity(Material m, double nu, double doping_cm3,
                              const PeriodStack* period) const {
    if (doping_cm3 < 0.0) throw ValidationError("doping must be >= 0");
    if (m == Material::ActiveRegion) {
        if (!period) throw ValidationError("ActiveRegion requires a period stack");
        cplx n = effective_medium_index(*this, *period, nu, doping_cm3);
        return n * n;
    }
    double nb = background_index(m, nu);
    auto it = opts_.drude.find(m);
    if (it == opts_.drude.end()) return {nb * nb, 0.0};
    return drude_permittivity(nb * nb, nu, doping_cm3, it->second);
}

cplx MaterialDb::refractive_index(Material m, double nu, double doping_cm3,
                                  const PeriodStack* period) const {
    return std::sqrt(permittivity(m, nu, doping_cm3, period));
}

cplx effective_medium_index(const MaterialDb& db, const PeriodStack& p, double nu,
                            double doping_cm3) {
    validate_period(p);
    const auto& c = db.options().composition;
    double nw = db.background_index(Material::InGaAs, nu) + c.dn_dga * (p.ga_fraction - c.ga_ref);
    double nb = db.background_index(Material::AlInAs, nu) + c.dn_dal * (p.al_fraction - c.al_ref);
    auto drude = [&](Material m) {
        auto it = db.options().drude.find(m);
        return it == db.options().drude.end() ? DrudeParams{1.0, 0.0, 0.0} : it->second;
    };
    cplx ew = doping_cm3 > 0 ? drude_permittivity(nw * nw, nu, doping_cm3, drude(Material::InGaAs))
                             : cplx(nw * nw);
    cplx eb = doping_cm3 > 0 ? drude_permittivity(nb * nb, nu, doping_cm3, drude(Material::AlInAs))
                             : cplx(nb * nb);
    double fw = p.well_fraction();
    cplx inv = fw / ew + (1.0 - fw) / eb;
    return std::sqrt(1.0 / inv);
}

}  // namespace qclring
