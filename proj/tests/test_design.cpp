#include "qclring/design.hpp"
#include "qclring/errors.hpp"

#include <doctest.h>

using namespace qclring;

TEST_SUITE_BEGIN("design");

TEST_CASE("linear interpolation and band averages") {
    std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
    CHECK(interpolate(x, y, 2.5) == doctest::Approx(6.0));
    CHECK(interpolate(x, y, 0.0) == doctest::Approx(1.0));
    CHECK(band_average(x, y, 1, 3) == doctest::Approx(5.0));
    CHECK(band_average(x, y, 0.5, 2.5) == doctest::Approx(4.0));
}

TEST_CASE("band centre") {
    Band b;
    CHECK(b.center() == doctest::Approx(2200.0));
}

TEST_CASE("lasing branch is the one with the larger active-region overlap") {
    DispersionCurve c;
    c.nu = {2100, 2150, 2200, 2250, 2300};
    Branch s, a;
    s.label = "symmetric";
    a.label = "antisymmetric";
    s.gamma = {0.8, 0.8, 0.8, 0.8, 0.8};
    a.gamma = {0.1, 0.1, 0.1, 0.1, 0.1};
    s.loss = a.loss = {1, 1, 1, 1, 1};
    c.branches = {s, a};
    CHECK(lasing_branch(c, Band{}) == 0);
    std::swap(c.branches[0].gamma, c.branches[1].gamma);
    CHECK(lasing_branch(c, Band{}) == 1);
}

TEST_CASE("near-equal overlaps fall back to the lower-loss branch") {
    DispersionCurve c;
    c.nu = {2100, 2150, 2200, 2250, 2300};
    Branch s, a;
    s.gamma = {0.5, 0.5, 0.5, 0.5, 0.5};
    a.gamma = {0.502, 0.502, 0.502, 0.502, 0.502};
    s.loss = {1, 1, 1, 1, 1};
    a.loss = {3, 3, 3, 3, 3};
    c.branches = {s, a};
    CHECK(lasing_branch(c, Band{}) == 0);
}

TEST_SUITE_END();
