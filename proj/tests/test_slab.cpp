#include "qclring/errors.hpp"
#include "qclring/slab.hpp"

#include <doctest.h>

#include <cmath>

using namespace qclring;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE_BEGIN("slab");

TEST_CASE("symmetric slab satisfies the analytic TM even-mode relation") {
    // tan(kappa d / 2) = (eps_core / eps_clad) (gamma / kappa)
    const double nc = 3.35, ncl = 3.08, d = 1.0, nu = 2200;
    SlabStack s{ncl * ncl, {{nc * nc, d}}, ncl * ncl};
    auto sol = solve_slab(s, nu);
    REQUIRE(!sol.empty());
    const double k0 = 2 * kPi * nu * 1e-4, n = sol[0].n_eff;
    const double kappa = k0 * std::sqrt(nc * nc - n * n), gamma = k0 * std::sqrt(n * n - ncl * ncl);
    CHECK(std::tan(kappa * d / 2) == doctest::Approx((nc * nc) / (ncl * ncl) * gamma / kappa).epsilon(1e-9));
    CHECK(n > ncl);
    CHECK(n < nc);
}

TEST_CASE("modes are ordered and thicker cores guide more modes") {
    SlabStack thin{9.5, {{11.2, 1.0}}, 9.5}, thick{9.5, {{11.2, 6.0}}, 9.5};
    auto a = solve_slab(thin, 2200), b = solve_slab(thick, 2200);
    CHECK(b.size() > a.size());
    for (size_t k = 1; k < b.size(); ++k) CHECK(b[k].n_eff < b[k - 1].n_eff);
    for (const auto& m : b) CHECK(std::abs(m.residual) < 1e-8);
}

TEST_CASE("fundamental field has no nodes and peaks inside the core") {
    SlabStack s{9.5, {{11.2, 1.5}}, 9.5};
    auto m = solve_slab(s, 2200)[0];
    double peak_y = 0, mx = 0;
    for (size_t k = 0; k < m.field.size(); ++k) {
        CHECK(m.field[k] > -1e-12);
        if (m.field[k] > mx) mx = m.field[k], peak_y = m.y[k];
    }
    CHECK(mx == doctest::Approx(1.0));
    CHECK(peak_y > 0);
    CHECK(peak_y < 1.5);
}

TEST_CASE("no guided mode without a high-index layer; invalid stacks throw") {
    CHECK(solve_slab({11.0, {{9.5, 1.0}}, 11.0}, 2200).empty());
    CHECK_THROWS_AS(solve_slab({9.5, {}, 9.5}, 2200), ValidationError);
    CHECK_THROWS_AS(solve_slab({9.5, {{11.0, 0.0}}, 9.5}, 2200), ValidationError);
}

TEST_SUITE_END();
