#include "qclring/config.hpp"
#include "qclring/dispersion.hpp"
#include "qclring/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace qclring;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE_BEGIN("dispersion");

TEST_CASE("finite-difference weights match the classic stencils") {
    auto w2 = fornberg_weights(0.0, {-1, 0, 1}, 2);
    CHECK(w2[0] == doctest::Approx(1.0));
    CHECK(w2[1] == doctest::Approx(-2.0));
    CHECK(w2[2] == doctest::Approx(1.0));
    auto w1 = fornberg_weights(0.0, {-2, -1, 0, 1, 2}, 1);
    const double e1[] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    for (int k = 0; k < 5; ++k) CHECK(w1[k] == doctest::Approx(e1[k]).epsilon(1e-12));
}

TEST_CASE("derivatives of low-order polynomials are exact, including the edges") {
    const double h = 0.5;
    std::vector<double> f;
    for (int k = 0; k < 21; ++k) {
        double x = k * h;
        f.push_back(2 + 3 * x - x * x + 0.25 * x * x * x);
    }
    auto d1 = derivative(f, h, 1), d2 = derivative(f, h, 2), d3 = derivative(f, h, 3);
    for (int k = 0; k < 21; ++k) {
        double x = k * h;
        CHECK(d1[k] == doctest::Approx(3 - 2 * x + 0.75 * x * x).epsilon(1e-9));
        CHECK(d2[k] == doctest::Approx(-2 + 1.5 * x).epsilon(1e-9));
        CHECK(d3[k] == doctest::Approx(1.5).epsilon(1e-8));
    }
}

TEST_CASE("uniform grid includes both ends; non-uniform input is rejected") {
    auto g = uniform_grid(2000, 2400, 2);
    CHECK(g.size() == 201);
    CHECK(g.front() == 2000);
    CHECK(g.back() == 2400);
    CHECK_THROWS_AS(group_index({1, 2, 4, 5, 6}, {3, 3, 3, 3, 3}), Error);
}

TEST_CASE("group index of a linear index profile") {
    std::vector<double> nu, n;
    for (int k = 0; k < 11; ++k) {
        nu.push_back(2000 + 10 * k);
        n.push_back(3.2 + 1e-5 * (nu.back() - 2000));
    }
    auto ng = group_index(nu, n);
    for (int k = 0; k < 11; ++k) CHECK(ng[k] == doctest::Approx(n[k] + nu[k] * 1e-5).epsilon(1e-10));
}

TEST_CASE("GVD and TOD are recovered from a polynomial propagation constant") {
    // beta(w) = beta0 + beta1 dw + beta2/2 dw^2 + beta3/6 dw^3 (cgs), n = beta c / w.
    const double c = kSpeedOfLight, w0 = 2 * kPi * c * 2200;
    const double b2 = 500e-29, b3 = 20000e-44;  // 500 fs^2/mm, 20000 fs^3/mm
    const double b1 = 3.3 / c, b0 = 3.2 * w0 / c;
    std::vector<double> nu, n;
    for (int k = 0; k <= 100; ++k) {
        nu.push_back(2000 + 4 * k);
        double w = 2 * kPi * c * nu.back(), dw = w - w0;
        double beta = b0 + b1 * dw + b2 / 2 * dw * dw + b3 / 6 * dw * dw * dw;
        n.push_back(beta * c / w);
    }
    auto gt = gvd_tod(nu, n);
    for (size_t k = 0; k < nu.size(); ++k) {
        double dw = 2 * kPi * c * nu[k] - w0;
        CHECK(gt.gvd[k] == doctest::Approx((b2 + b3 * dw) * 1e29).epsilon(1e-6).scale(500));
        CHECK(gt.tod[k] == doctest::Approx(20000.0).epsilon(1e-4));
    }
}

TEST_CASE("zero crossings are linearly interpolated") {
    auto z = zero_crossings({0, 1, 2, 3, 4}, {-1, -0.5, 0.5, 1, -1});
    REQUIRE(z.size() == 2);
    CHECK(z[0] == doctest::Approx(1.5));
    CHECK(z[1] == doctest::Approx(3.5));
}

TEST_CASE("coupled sweep tracks two supermodes with interlaced indices") {
    MaterialDb db;
    auto nu = uniform_grid(2180, 2220, 5);
    SweepOptions o;
    auto c = sweep_neff(reference_cross_section(3.0, 3.0), nu, db, o);
    REQUIRE(c.branches.size() == 2);
    const auto& s = c.branch("symmetric");
    const auto& a = c.branch("antisymmetric");
    REQUIRE(s.n_eff.size() == nu.size());
    REQUIRE(a.n_eff.size() == nu.size());
    for (size_t k = 0; k < nu.size(); ++k) {
        CHECK(s.n_eff[k] > a.n_eff[k]);
        CHECK(s.overlap[k] > o.track_threshold);
        CHECK(s.n_g[k] > s.n_eff[k]);
    }
    CHECK(s.flagged.empty());
    CHECK_THROWS_AS(c.branch("nonexistent"), Error);
}

TEST_CASE("sweeps are independent of the worker count") {
    MaterialDb db;
    auto nu = uniform_grid(2190, 2210, 5);
    SweepOptions o1, o3;
    o3.workers = 3;
    auto a = sweep_single(isolated_waveguide(reference_cross_section()), nu, db, o1);
    auto b = sweep_single(isolated_waveguide(reference_cross_section()), nu, db, o3);
    REQUIRE(a.branches.size() == 1);
    CHECK(a.branches[0].n_eff == b.branches[0].n_eff);
    CHECK(a.branches[0].label == "fundamental");
}

TEST_SUITE_END();
