#include "qclring/config.hpp"

#include "qclring/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qclring {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& path, std::string s) {
    boost::algorithm::trim(s);
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(path, "expected a number, got '" + s + "'");
    return v;
}

int to_int(const std::string& path, const std::string& s) {
    double v = to_double(path, s);
    if (v != std::floor(v)) throw ConfigError(path, "expected an integer, got '" + s + "'");
    return int(v);
}

bool to_bool(const std::string& path, std::string s) {
    boost::algorithm::to_lower(s);
    boost::algorithm::trim(s);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError(path, "expected a boolean, got '" + s + "'");
}

Material to_material(const std::string& path, std::string s) {
    boost::algorithm::trim(s);
    try {
        return material_from_name(s);
    } catch (const Error&) {
        throw ConfigError(path, "unknown material '" + s + "'");
    }
}

void check_keys(const pt::ptree& sec, const std::string& name, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : sec)
        if (!allowed.count(boost::algorithm::to_lower_copy(k))) throw ConfigError(name + "." + k, "unknown key");
}

std::string lower(const std::string& s) { return boost::algorithm::to_lower_copy(s); }

}  // namespace

void set_comb_field(CombParams& p, const std::string& key, const std::string& value, const std::string& prefix) {
    const std::string path = prefix + "." + key;
    const std::string k = lower(key);
    if (k == "preset") {
        try {
            p = comb_preset(boost::algorithm::trim_copy(value));
        } catch (const Error& e) {
            throw ConfigError(path, e.what());
        }
        return;
    }
    if (k == "mode_count") {
        p.mode_count = to_int(path, value);
        return;
    }
    double* field = nullptr;
    if (k == "f_rep") field = &p.f_rep;
    else if (k == "f_mod") field = &p.f_mod;
    else if (k == "m") field = &p.M;
    else if (k == "g0") field = &p.g0;
    else if (k == "alpha") field = &p.alpha;
    else if (k == "p_sat") field = &p.p_sat;
    else if (k == "d2") field = &p.D2;
    else if (k == "d3") field = &p.D3;
    else if (k == "r") field = &p.r;
    else if (k == "rho") field = &p.rho;
    else if (k == "noise") field = &p.noise;
    else if (k == "gain_width") field = &p.gain_width;
    else if (k == "dt") field = &p.dt;
    else if (k == "t_end") field = &p.t_end;
    else if (k == "avg_fraction") field = &p.avg_fraction;
    if (!field) throw ConfigError(path, "unknown key");
    *field = to_double(path, value);
}

const MaterialDb& DeviceConfig::db() const {
    if (!db_) {
        const MaterialTable* t = &MaterialTable::default_table();
        if (!table_path.empty()) {
            try {
                table_ = std::make_shared<MaterialTable>(MaterialTable::load(table_path));
            } catch (const Error& e) {
                throw ConfigError("materials.table", e.what());
            }
            t = table_.get();
        }
        db_ = std::make_shared<MaterialDb>(*t, materials);
    }
    return *db_;
}

DeviceConfig parse_device_config(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    for (const auto& [sec, v] : tree) {
        static const std::set<std::string> known = {"stack", "doping", "geometry", "active_region",
                                                    "materials", "solver", "comb"};
        if (!known.count(lower(sec))) throw ConfigError(sec, "unknown section");
        if (v.empty() && !v.data().empty()) throw ConfigError(sec, "key outside any section");
    }

    DeviceConfig cfg;
    auto stack = tree.get_child_optional("stack");
    if (!stack || stack->empty()) throw ConfigError("stack", "missing or empty");
    std::map<std::string, std::string> layer_of;  // lower-case name -> name
    for (const auto& [name, v] : *stack) {
        const std::string path = "stack." + name;
        std::vector<std::string> parts;
        std::string val = v.data();
        boost::algorithm::split(parts, val, boost::is_any_of(","));
        if (parts.size() != 2) throw ConfigError(path, "expected 'material, thickness_um'");
        Layer l;
        l.name = name;
        l.material = to_material(path + ".material", parts[0]);
        l.thickness_um = to_double(path + ".thickness_um", parts[1]);
        try {
            validate_layer(l);
        } catch (const Error& e) {
            throw ConfigError(path, e.what());
        }
        layer_of[lower(name)] = name;
        cfg.cs.stack.push_back(l);
    }

    if (auto dop = tree.get_child_optional("doping")) {
        for (const auto& [name, v] : *dop) {
            const std::string path = "doping." + name;
            auto it = std::find_if(cfg.cs.stack.begin(), cfg.cs.stack.end(),
                                   [&](const Layer& l) { return lower(l.name) == lower(name); });
            if (it == cfg.cs.stack.end()) throw ConfigError(path, "no such layer in [stack]");
            it->doping_cm3 = to_double(path, v.data());
            if (it->doping_cm3 < 0) throw ConfigError(path, "doping must be >= 0");
        }
    }

    if (auto g = tree.get_child_optional("geometry")) {
        check_keys(*g, "geometry",
                   {"ar_width", "top_wg_width", "spacing", "spacer", "lateral_cladding", "lateral_doping"});
        for (const auto& [k0, v] : *g) {
            const std::string k = lower(k0), path = "geometry." + k0;
            if (k == "ar_width") cfg.cs.ar_width = to_double(path, v.data());
            else if (k == "top_wg_width") cfg.cs.top_wg_width = to_double(path, v.data());
            else if (k == "spacing") cfg.cs.wg_spacing = to_double(path, v.data());
            else if (k == "lateral_doping") cfg.cs.lateral_doping = to_double(path, v.data());
            else if (k == "lateral_cladding") cfg.cs.lateral_cladding = to_material(path, v.data());
            else if (k == "spacer") {
                std::string s = boost::algorithm::trim_copy(v.data());
                if (!layer_of.count(lower(s))) throw ConfigError(path, "no such layer '" + s + "'");
                cfg.cs.spacer_layer = layer_of[lower(s)];
            }
        }
        if (!(cfg.cs.ar_width > 0)) throw ConfigError("geometry.ar_width", "must be > 0");
        if (!(cfg.cs.top_wg_width > 0)) throw ConfigError("geometry.top_wg_width", "must be > 0");
        if (!(cfg.cs.wg_spacing > 0)) throw ConfigError("geometry.spacing", "must be > 0");
        if (cfg.cs.lateral_doping < 0) throw ConfigError("geometry.lateral_doping", "must be >= 0");
    }

    if (auto a = tree.get_child_optional("active_region")) {
        check_keys(*a, "active_region", {"period", "repeats", "sheet_doping_cm2", "ga_fraction", "al_fraction"});
        if (auto p = a->get_optional<std::string>("period")) {
            try {
                cfg.cs.period = parse_period(*p);
            } catch (const Error& e) {
                throw ConfigError("active_region.period", e.what());
            }
        }
        for (const auto& [k0, v] : *a) {
            const std::string k = lower(k0), path = "active_region." + k0;
            if (k == "repeats") cfg.cs.period.repeats = to_int(path, v.data());
            else if (k == "sheet_doping_cm2") cfg.cs.period.sheet_doping_cm2 = to_double(path, v.data());
            else if (k == "ga_fraction") cfg.cs.period.ga_fraction = to_double(path, v.data());
            else if (k == "al_fraction") cfg.cs.period.al_fraction = to_double(path, v.data());
        }
        try {
            validate_period(cfg.cs.period);
        } catch (const Error& e) {
            throw ConfigError("active_region", e.what());
        }
    }
    if (auto m = tree.get_child_optional("materials")) {
        for (const auto& [k0, v] : *m) {
            const std::string k = lower(k0), path = "materials." + k0;
            if (k == "table") {
                std::filesystem::path p = boost::algorithm::trim_copy(v.data());
                if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                cfg.table_path = p.string();
            } else if (k == "al2o3_index") {
                cfg.al2o3_index = to_double(path, v.data());
                if (!(cfg.al2o3_index >= 1)) throw ConfigError(path, "must be >= 1");
            } else if (k == "dn_dga") {
                cfg.materials.composition.dn_dga = to_double(path, v.data());
            } else if (k == "dn_dal") {
                cfg.materials.composition.dn_dal = to_double(path, v.data());
            } else {
                auto us = k.rfind('_');
                std::string mat = us == std::string::npos ? k : k.substr(0, us);
                std::string what = us == std::string::npos ? "" : k.substr(us + 1);
                if (mat.size() > 5 && mat.substr(mat.size() - 5) == "_mass") mat = mat.substr(0, mat.size() - 5), what = "mass_ratio";
                Material mm;
                try {
                    mm = material_from_name(mat);
                } catch (const Error&) {
                    throw ConfigError(path, "unknown key");
                }
                DrudeParams& d = cfg.materials.drude[mm];
                double val = to_double(path, v.data());
                if (what == "mass_ratio") {
                    if (!(val > 0)) throw ConfigError(path, "must be > 0");
                    d.mass_ratio = val;
                } else if (what == "gamma") {
                    if (!(val >= 0)) throw ConfigError(path, "must be >= 0");
                    d.gamma_s = val;
                } else if (what == "intrinsic") {
                    d.intrinsic_cm3 = val;
                } else {
                    throw ConfigError(path, "unknown key (use <material>_mass_ratio, _gamma or _intrinsic)");
                }
            }
        }
    }

    if (auto s = tree.get_child_optional("solver")) {
        check_keys(*s, "solver", {"dx", "dy", "padding", "averaging"});
        for (const auto& [k0, v] : *s) {
            const std::string k = lower(k0), path = "solver." + k0;
            if (k == "averaging") {
                cfg.grid.averaging = to_bool(path, v.data());
                continue;
            }
            double val = to_double(path, v.data());
            if (!(val > 0)) throw ConfigError(path, "must be > 0");
            if (k == "dx") cfg.grid.dx = val;
            else if (k == "dy") cfg.grid.dy = val;
            else cfg.grid.padding = val;
        }
    }

    if (auto c = tree.get_child_optional("comb")) {
        if (auto p = c->get_optional<std::string>("preset")) set_comb_field(cfg.comb, "preset", *p);
        for (const auto& [k, v] : *c)
            if (lower(k) != "preset") set_comb_field(cfg.comb, k, v.data());
        try {
            cfg.comb.validate();
        } catch (const Error& e) {
            std::string msg = e.what();
            auto colon = msg.find(':');
            throw ConfigError("comb." + msg.substr(0, colon), colon == std::string::npos ? msg : msg.substr(colon + 2));
        }
    }

    try {
        validate(cfg.cs);
    } catch (const Error& e) {
        throw ConfigError("stack", e.what());
    }
    return cfg;
}

DeviceConfig load_device_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    auto dir = std::filesystem::path(path).parent_path();
    DeviceConfig c = parse_device_config(ss.str(), dir.empty() ? "." : dir.string());
    c.source = path;
    return c;
}

CrossSection reference_cross_section(double top_wg_width, double spacing) {
    CrossSection cs;
    auto L = [](const char* n, Material m, double t, double d) { return Layer{n, m, t, d}; };
    cs.stack = {L("Au", Material::Gold, 4, 0),
                L("InP-Contact", Material::InP, 0.4, 3e18),
                L("InP-Cladding1", Material::InP, 0.4, 2e17),
                L("InP-Cladding2", Material::InP, 1.1, 1e16),
                L("InP-Plan", Material::InP, 0.5, 1e16),
                L("InGaAs-Wvg", Material::InGaAs, 1.0, 1e16),
                L("InP-Buffer", Material::InP, spacing, 1e16),
                L("InP-Plan2", Material::InP, 0.5, 1e17),
                L("AR", Material::ActiveRegion, 1.98, 0),
                L("InP-Substrate", Material::InP, 220, 2e17)};
    cs.period = parse_period("35/11/13/38/10/35/18/27/19/26/15/23/14/21/22/19/20/19/19/17/24/17");
    cs.period.repeats = 35;
    cs.period.sheet_doping_cm2 = 1.25e11;
    cs.period.ga_fraction = 0.326;
    cs.period.al_fraction = 0.652;
    cs.ar_width = 5.0;
    cs.top_wg_width = top_wg_width;
    cs.wg_spacing = spacing;
    cs.spacer_layer = "InP-Buffer";
    return cs;
}

}  // namespace qclring
