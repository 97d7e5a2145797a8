#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace qclring {

using cplx = std::complex<double>;

enum class Material { InP, InGaAs, AlInAs, ActiveRegion, Gold, Air, Al2O3 };

std::string_view material_name(Material m);
// Accepts the canonical names above (case-insensitive); throws ParseError.
Material material_from_name(std::string_view name);

struct Layer {
    std::string name;
    Material material = Material::InP;
    double thickness_um = 0.0;
    double doping_cm3 = 0.0;
};

void validate_layer(const Layer& l);

enum class Role { Barrier, Well };

struct Sublayer {
    Role role;
    double thickness_A;
};

struct PeriodStack {
    std::vector<Sublayer> sublayers;
    int repeats = 1;
    double sheet_doping_cm2 = 0.0;
    double ga_fraction = 0.53;  // well alloy In(1-x)Ga(x)As
    double al_fraction = 0.48;  // barrier alloy Al(x)In(1-x)As

    double period_A() const;
    double well_A() const;
    double barrier_A() const;
    double well_fraction() const { return well_A() / period_A(); }
    double thickness_um() const { return repeats * period_A() * 1e-4; }
    // Sheet doping spread over one period.
    double volume_doping_cm3() const { return sheet_doping_cm2 / (period_A() * 1e-8); }
};

// Slash-separated barrier/well thicknesses in Angstrom, barrier first.
PeriodStack parse_period(std::string_view text);
std::string to_notation(const PeriodStack& p);
void validate_period(const PeriodStack& p);

// Tabulated background index n(nu), interpolated with a quintic B-spline.
// The file is plain text: '#' comments, a header line
// `material,wavenumber_cm-1,n`, then one record per line. Wavenumbers of a
// material must be uniformly spaced.
class MaterialTable {
public:
    static MaterialTable load(const std::string& path);
    // QCLRING_MATERIALS if set, otherwise the data file shipped with the build.
    static const MaterialTable& default_table();

    double n(Material m, double nu) const;
    double dn(Material m, double nu) const;  // dn/dnu
    bool has(Material m) const;
    std::pair<double, double> range(Material m) const;
    const std::string& version() const { return version_; }
    const std::string& source() const { return source_; }

private:
    struct Curve;
    std::map<Material, std::shared_ptr<const Curve>> curves_;
    std::string version_;
    std::string source_;
};

struct DrudeParams {
    double mass_ratio = 1.0;          // m*/m_e
    double gamma_s = 1e13;            // damping rate, s^-1
    double intrinsic_cm3 = 0.0;       // carriers present regardless of doping
};

// Linear index shift per unit alloy fraction away from the tabulated
// reference composition. Zero leaves the tables untouched.
struct CompositionModel {
    double ga_ref = 0.53;
    double al_ref = 0.48;
    double dn_dga = 0.0;
    double dn_dal = 0.0;
};

struct MaterialOptions {
    std::map<Material, DrudeParams> drude = default_drude();
    CompositionModel composition{};
    static std::map<Material, DrudeParams> default_drude();
};

// eps = eps_bg - wp^2 / (w^2 + i*gamma*w), wp^2 = N e^2 / (eps0 m*).
cplx drude_permittivity(double eps_bg, double nu, double doping_cm3, const DrudeParams& d);
double plasma_frequency(double doping_cm3, double mass_ratio);  // rad/s
inline double angular_frequency(double nu) { return 2.0 * 3.14159265358979323846 * 2.99792458e10 * nu; }

class MaterialDb {
public:
    explicit MaterialDb(const MaterialTable& table = MaterialTable::default_table(),
                        MaterialOptions opts = {});

    // Complex index n + i*kappa, kappa >= 0. ActiveRegion needs a period.
    cplx refractive_index(Material m, double nu, double doping_cm3,
                          const PeriodStack* period = nullptr) const;
    cplx permittivity(Material m, double nu, double doping_cm3,
                      const PeriodStack* period = nullptr) const;
    double background_index(Material m, double nu) const;

    const MaterialTable& table() const { return *table_; }
    const MaterialOptions& options() const { return opts_; }

private:
    const MaterialTable* table_;
    MaterialOptions opts_;
};

// TM rule 1/eps = sum f_i/eps_i over one period; doping enters via Drude on
// the constituents at the period-averaged density.
cplx effective_medium_index(const MaterialDb& db, const PeriodStack& p, double nu,
                            double doping_cm3 = 0.0);

}  // namespace qclring
