#include "qclring/errors.hpp"
#include "qclring/materials.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace qclring;

namespace {
constexpr double kE = 1.602176634e-19, kEps0 = 8.8541878128e-12, kMe = 9.1093837015e-31;
}

TEST_SUITE_BEGIN("materials");

TEST_CASE("material names round-trip and reject unknown names") {
    for (Material m : {Material::InP, Material::InGaAs, Material::AlInAs, Material::ActiveRegion, Material::Gold,
                       Material::Air, Material::Al2O3})
        CHECK(material_from_name(material_name(m)) == m);
    CHECK(material_from_name("inp") == Material::InP);
    CHECK(material_from_name("AR") == Material::ActiveRegion);
    CHECK_THROWS_AS(material_from_name("unobtainium"), ParseError);
}

TEST_CASE("layer validation") {
    CHECK_NOTHROW(validate_layer({"a", Material::InP, 1.0, 0.0}));
    CHECK_THROWS_AS(validate_layer({"a", Material::InP, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(validate_layer({"a", Material::InP, 1.0, -1.0}), Error);
}

TEST_CASE("period notation parses barrier first and round-trips") {
    PeriodStack p = parse_period("35/11/13/38");
    REQUIRE(p.sublayers.size() == 4);
    CHECK(p.sublayers[0].role == Role::Barrier);
    CHECK(p.sublayers[1].role == Role::Well);
    CHECK(p.sublayers[2].role == Role::Barrier);
    CHECK(p.sublayers[3].role == Role::Well);
    CHECK(p.period_A() == doctest::Approx(97.0));
    CHECK(p.well_A() == doctest::Approx(49.0));
    CHECK(p.barrier_A() == doctest::Approx(48.0));
    CHECK(parse_period(to_notation(p)).period_A() == doctest::Approx(97.0));

    PeriodStack full = parse_period("35/11/13/38/10/35/18/27/19/26/15/23/14/21/22/19/20/19/19/17/24/17");
    CHECK(full.sublayers.size() == 22);
    full.repeats = 35;
    full.sheet_doping_cm2 = 1.25e11;
    CHECK(full.thickness_um() == doctest::Approx(35 * full.period_A() * 1e-4));
    CHECK(full.volume_doping_cm3() == doctest::Approx(1.25e11 / (full.period_A() * 1e-8)));
}

TEST_CASE("malformed period strings are rejected") {
    CHECK_THROWS_AS(parse_period(""), Error);
    CHECK_THROWS_AS(parse_period("35//11"), Error);
    CHECK_THROWS_AS(parse_period("35/abc"), Error);
    CHECK_THROWS_AS(parse_period("35/-11"), Error);
}

TEST_CASE("plasma frequency follows N e^2 / (eps0 m* me)") {
    double N = 1e18;  // cm^-3
    double expect = std::sqrt(N * 1e6 * kE * kE / (kEps0 * 0.077 * kMe));
    CHECK(plasma_frequency(N, 0.077) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("Drude permittivity") {
    DrudeParams d{0.077, 1e13, 0.0};
    SUBCASE("undoped material keeps its background permittivity") {
        cplx e = drude_permittivity(9.5, 2200, 0.0, d);
        CHECK(e.real() == 9.5);
        CHECK(e.imag() == 0.0);
    }
    SUBCASE("matches the closed form and adds loss") {
        double N = 3e18, w = angular_frequency(2200), wp = plasma_frequency(N, d.mass_ratio);
        cplx expect = 9.5 - wp * wp / cplx(w * w, d.gamma_s * w);
        cplx e = drude_permittivity(9.5, 2200, N, d);
        CHECK(e.real() == doctest::Approx(expect.real()).epsilon(1e-12));
        CHECK(e.imag() == doctest::Approx(expect.imag()).epsilon(1e-12));
        CHECK(e.imag() > 0);
        CHECK(e.real() < 9.5);
    }
    SUBCASE("loss grows with doping") {
        CHECK(drude_permittivity(9.5, 2200, 1e18, d).imag() > drude_permittivity(9.5, 2200, 1e17, d).imag());
    }
}

TEST_CASE("default material table covers the band with physical indices") {
    const auto& t = MaterialTable::default_table();
    for (Material m : {Material::InP, Material::InGaAs, Material::AlInAs}) {
        REQUIRE(t.has(m));
        auto [lo, hi] = t.range(m);
        CHECK(lo <= 2000);
        CHECK(hi >= 2400);
        double n = t.n(m, 2200);
        CHECK(n > 2.9);
        CHECK(n < 3.6);
    }
    CHECK(t.n(Material::InGaAs, 2200) > t.n(Material::AlInAs, 2200));
    CHECK(t.n(Material::AlInAs, 2200) > t.n(Material::InP, 2200));
}

TEST_CASE("material table interpolation reproduces smooth data") {
    const char* path = "qclring_test_table.csv";
    {
        std::ofstream f(path);
        f.precision(17);
        f << "# test\nmaterial,wavenumber_cm-1,n\n";
        for (int k = 0; k <= 40; ++k) {
            double nu = 1800 + 20 * k;
            f << "InP," << nu << "," << 3.0 + 1e-5 * (nu - 1800) + 1e-9 * (nu - 1800) * (nu - 1800) << "\n";
        }
    }
    auto t = MaterialTable::load(path);
    double nu = 2213.7;
    CHECK(t.n(Material::InP, nu) == doctest::Approx(3.0 + 1e-5 * (nu - 1800) + 1e-9 * (nu - 1800) * (nu - 1800)).epsilon(1e-9));
    CHECK(t.dn(Material::InP, nu) == doctest::Approx(1e-5 + 2e-9 * (nu - 1800)).epsilon(1e-6));
    CHECK_THROWS_AS(t.n(Material::InP, 1000), Error);
    std::remove(path);
}

TEST_CASE("non-uniform table spacing is rejected") {
    const char* path = "qclring_test_bad_table.csv";
    {
        std::ofstream f(path);
        f << "material,wavenumber_cm-1,n\nInP,2000,3.0\nInP,2010,3.0\nInP,2030,3.0\nInP,2040,3.0\nInP,2050,3.0\nInP,2060,3.0\nInP,2070,3.0\n";
    }
    CHECK_THROWS_AS(MaterialTable::load(path), Error);
    std::remove(path);
}

TEST_CASE("active-region effective index follows the TM layer average") {
    MaterialDb db;
    PeriodStack p = parse_period("35/11/13/38/10/35/18/27/19/26/15/23/14/21/22/19/20/19/19/17/24/17");
    double nw = db.background_index(Material::InGaAs, 2200), nb = db.background_index(Material::AlInAs, 2200);
    double fw = p.well_fraction();
    double expect = std::sqrt(1.0 / (fw / (nw * nw) + (1 - fw) / (nb * nb)));
    cplx n = effective_medium_index(db, p, 2200);
    CHECK(n.real() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(n.imag() == 0.0);
    CHECK(n.real() > std::min(nw, nb));
    CHECK(n.real() < std::max(nw, nb));
    CHECK_THROWS_AS(db.permittivity(Material::ActiveRegion, 2200, 0.0), ValidationError);
}

TEST_SUITE_END();
