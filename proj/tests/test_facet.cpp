#include "qclring/errors.hpp"
#include "qclring/facet.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace qclring;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Airy single-film reflectivity.
double single_film(double ns, double n1, double d_um, double nu) {
    double r01 = (1 - n1) / (1 + n1), r12 = (n1 - ns) / (n1 + ns);
    double delta = 2 * kPi * nu * 1e-4 * n1 * d_um;
    std::complex<double> e = std::polar(1.0, 2 * delta);
    std::complex<double> r = (r01 + r12 * e) / (1.0 + r01 * r12 * e);
    return std::norm(r);
}
}  // namespace

TEST_SUITE_BEGIN("facet");

TEST_CASE("uncoated facet follows Fresnel") {
    CHECK(fresnel_reflectivity(3.19, 1.0) == doctest::Approx(std::pow(2.19 / 4.19, 2)).epsilon(1e-12));
    CHECK(facet_reflectivity(3.19, {}, 2222) == doctest::Approx(0.2732).epsilon(1e-3));
    CHECK(fresnel_reflectivity(1.0, 1.0) == 0.0);
}

TEST_CASE("single film matches the Airy formula") {
    for (double d : {0.1, 0.35, 0.7, 1.3}) {
        CoatingStack c{{{1.62, d}}};
        CHECK(facet_reflectivity(3.19, c, 2222) == doctest::Approx(single_film(3.19, 1.62, d, 2222)).epsilon(1e-10));
    }
}

TEST_CASE("ideal quarter-wave film suppresses reflection; half-wave film is absent") {
    const double ns = 3.19, n1 = std::sqrt(ns), nu = 2222;
    CoatingStack q{{{n1, quarter_wave_thickness(n1, nu)}}};
    CHECK(facet_reflectivity(ns, q, nu) < 1e-10);
    CoatingStack h{{{1.62, 2 * quarter_wave_thickness(1.62, nu)}}};
    CHECK(facet_reflectivity(ns, h, nu) == doctest::Approx(fresnel_reflectivity(ns, 1.0)).epsilon(1e-10));
}

TEST_CASE("reflectivity stays within [0, 1] for multilayers") {
    CoatingStack c{{{1.62, 0.4}, {2.2, 0.3}, {1.4, 0.9}}};
    for (double nu = 1800; nu <= 2600; nu += 50) {
        double r = facet_reflectivity(3.2, c, nu);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("invalid films are rejected") {
    CHECK_THROWS_AS((CoatingStack{{{0.5, 0.1}}}.validate()), Error);
    CHECK_THROWS_AS((CoatingStack{{{1.6, 0.0}}}.validate()), Error);
    CHECK_THROWS_AS(facet_reflectivity(0.5, {}, 2222), Error);
}

TEST_SUITE_END();
