#include <doctest.h>

#include <cmath>
#include <numbers>

#include "densctl/poisson.hpp"
#include "densctl/rng.hpp"

using namespace densctl;

namespace {
constexpr double kPi = std::numbers::pi;

ScalarField2D random_field(const Grid2D& g, std::uint64_t seed) {
    CounterRng rng(seed);
    ScalarField2D f(g);
    for (int i = 0; i < g.n_cells(0); ++i)
        for (int j = 0; j < g.n_cells(1); ++j)
            f(i, j) = 2.0 * rng.uniform(i, j, 0) - 1.0;
    return f;
}

double rel_l2(const ScalarField2D& got, const ScalarField2D& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < got.values().size(); ++k) {
        const double d = got[k] - want[k];
        num += d * d;
        den += want[k] * want[k];
    }
    return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("cosine transform picks out basis modes") {
    Grid2D g(1.5, 32, 32, BoundaryKind::Reflective);
    const double L = g.length();

    auto f = ScalarField2D::from_function(g, [&](double x, double) {
        return std::cos(kPi * (x + 1.5) / L);
    });
    const SpectralCoeffs c = cosine_transform_2d(f);
    for (int h = 0; h < 32; ++h)
        for (int k = 0; k < 32; ++k) {
            const double expect = (h == 1 && k == 0) ? 1.0 : 0.0;
            CHECK(std::abs(c.real_at(h, k) - expect) <= 1e-10);
        }
}

TEST_CASE("constant field is the (0,0) mode") {
    Grid2D g(2.0, 16, 16, BoundaryKind::Reflective);
    ScalarField2D f(g);
    for (double& v : f.data()) v = 0.37;
    const SpectralCoeffs c = cosine_transform_2d(f);
    CHECK(c.real_at(0, 0) == doctest::Approx(0.37).epsilon(1e-13));
    for (int h = 0; h < 16; ++h)
        for (int k = 0; k < 16; ++k)
            if (h || k) CHECK(std::abs(c.real_at(h, k)) <= 1e-14);
}

TEST_CASE("transforms round trip at full order") {
    SUBCASE("cosine") {
        Grid2D g(1.0, 24, 20, BoundaryKind::Reflective);
        const ScalarField2D f = random_field(g, 5);
        SpectralPoisson2D solver(g);
        const ScalarField2D back = solver.inverse(solver.forward(f));
        double err = 0.0;
        for (std::size_t k = 0; k < f.values().size(); ++k)
            err = std::max(err, std::abs(back[k] - f[k]));
        CHECK(err <= 1e-10);
    }
    SUBCASE("periodic") {
        Grid2D g(1.0, 24, 20, BoundaryKind::Periodic);
        const ScalarField2D f = random_field(g, 6);
        SpectralPoisson2D solver(g);
        const ScalarField2D back = solver.inverse(solver.forward(f));
        double err = 0.0;
        for (std::size_t k = 0; k < f.values().size(); ++k)
            err = std::max(err, std::abs(back[k] - f[k]));
        CHECK(err <= 1e-10);
    }
}

TEST_CASE("poisson: single-mode eigenvalue division") {
    const double a = 1.3;
    Grid2D g(a, 48, 48, BoundaryKind::Reflective);
    const double L = g.length();
    const double u = kPi / L;
    auto xi_true = ScalarField2D::from_function(g, [&](double x, double y) {
        return std::cos(u * (x + a)) * std::cos(u * (y + a));
    });
    auto q = ScalarField2D::from_function(g, [&](double x, double y) {
        return 2.0 * u * u * std::cos(u * (x + a)) * std::cos(u * (y + a));
    });
    const ScalarField2D xi = solve_poisson(q, true);
    double err = 0.0;
    for (std::size_t k = 0; k < xi.values().size(); ++k)
        err = std::max(err, std::abs(xi[k] - xi_true[k]));
    CHECK(err <= 1e-8);
}

TEST_CASE("poisson: zero source, zero potential") {
    Grid2D g(1.0, 16, 16, BoundaryKind::Reflective);
    const ScalarField2D xi = solve_poisson(ScalarField2D(g), true);
    for (double v : xi.values()) CHECK(std::abs(v) <= 1e-15);
}

TEST_CASE("poisson: manufactured solutions recover spectrally") {
    SUBCASE("cosine basis") {
        const double a = kPi;
        Grid2D g(a, 128, 128, BoundaryKind::Reflective);
        const double w = kPi / g.length();
        auto xi_true = ScalarField2D::from_function(g, [&](double x, double y) {
            return std::cos(w * (x + a)) * std::cos(2.0 * w * (y + a)) +
                   0.5 * std::cos(3.0 * w * (x + a));
        });
        auto q = ScalarField2D::from_function(g, [&](double x, double y) {
            return (w * w + 4.0 * w * w) * std::cos(w * (x + a)) *
                       std::cos(2.0 * w * (y + a)) +
                   0.5 * 9.0 * w * w * std::cos(3.0 * w * (x + a));
        });
        const ScalarField2D xi = solve_poisson(q, true);
        CHECK(rel_l2(xi, xi_true) <= 1e-6);
    }
    SUBCASE("periodic basis") {
        Grid2D g(kPi, 128, 128, BoundaryKind::Periodic);
        auto xi_true = ScalarField2D::from_function(g, [](double x, double y) {
            return std::sin(x) * std::cos(2.0 * y) + 0.25 * std::cos(3.0 * x);
        });
        auto q = ScalarField2D::from_function(g, [](double x, double y) {
            return 5.0 * std::sin(x) * std::cos(2.0 * y) + 0.25 * 9.0 * std::cos(3.0 * x);
        });
        SpectralPoisson2D solver(g);
        const ScalarField2D xi = solver.solve(q, true);
        CHECK(rel_l2(xi, xi_true) <= 1e-6);
    }
}

TEST_CASE("flux from potential") {
    SUBCASE("constant potential carries no flux") {
        Grid2D g(1.0, 16, 16, BoundaryKind::Reflective);
        ScalarField2D xi(g);
        for (double& v : xi.data()) v = 2.2;
        const VectorField2D phi = flux_from_potential(xi);
        for (int axis = 0; axis < 2; ++axis)
            for (double v : phi.component(axis).values()) CHECK(std::abs(v) <= 1e-12);
    }

    SUBCASE("single mode differentiates analytically") {
        const double a = 1.0;
        Grid2D g(a, 64, 64, BoundaryKind::Reflective);
        const double u = kPi / g.length();
        auto xi = ScalarField2D::from_function(g, [&](double x, double y) {
            return std::cos(u * (x + a)) * std::cos(u * (y + a));
        });
        const VectorField2D phi = flux_from_potential(xi);
        double err = 0.0;
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) {
                const double x = g.center(0, i), y = g.center(1, j);
                const double want = u * std::sin(u * (x + a)) * std::cos(u * (y + a));
                err = std::max(err, std::abs(phi.component(0)(i, j) - want));
            }
        CHECK(err <= 1e-10);
    }

    SUBCASE("closing the loop: div(flux) matches the source") {
        Grid2D g(kPi, 128, 128, BoundaryKind::Periodic);
        auto q = ScalarField2D::from_function(g, [](double x, double y) {
            return std::sin(2.0 * x) * std::cos(y) + 0.3 * std::cos(x);
        });
        SpectralPoisson2D solver(g);
        const VectorField2D phi = solver.solve_flux(q, true);
        const ScalarField2D div = divergence(phi);  // central differences
        CHECK(rel_l2(div, q) <= 1e-2);
    }
}

TEST_CASE("curl-freeness and boundary flux of recovered fields") {
    for (BoundaryKind bc : {BoundaryKind::Reflective, BoundaryKind::Periodic}) {
        Grid2D g(kPi, 64, 64, bc);
        SpectralPoisson2D solver(g);
        // a smooth mean-free source appropriate for either basis
        auto q = ScalarField2D::from_function(g, [&](double x, double y) {
            const double u = kPi / g.length();
            return std::cos(u * (x + kPi)) * std::cos(2.0 * u * (y + kPi)) +
                   0.4 * std::cos(2.0 * u * (x + kPi));
        });
        const VectorField2D phi = solver.solve_flux(q, true);
        double phimax = std::max(sup_norm(phi.component(0)), sup_norm(phi.component(1)));
        const ScalarField2D curl = solver.residual_curl(phi);
        CHECK(sup_norm(curl) <= 1e-8 * phimax);
        CHECK(std::abs(solver.boundary_net_flux(phi)) <= 1e-8);
    }
}

TEST_CASE("poisson linearity") {
    Grid2D g(kPi, 32, 32, BoundaryKind::Periodic);
    SpectralPoisson2D solver(g);
    ScalarField2D q1 = random_field(g, 12), q2 = random_field(g, 13);
    // remove means so both are compatible
    const double m1 = integrate(q1) / g.area(), m2 = integrate(q2) / g.area();
    for (double& v : q1.data()) v -= m1;
    for (double& v : q2.data()) v -= m2;

    const double a = 0.7, b = -1.9;
    ScalarField2D mix(g);
    for (std::size_t k = 0; k < mix.values().size(); ++k) mix[k] = a * q1[k] + b * q2[k];

    const ScalarField2D sol_mix = solver.solve(mix, true);
    const ScalarField2D s1 = solver.solve(q1, true);
    const ScalarField2D s2 = solver.solve(q2, true);
    double err = 0.0;
    for (std::size_t k = 0; k < mix.values().size(); ++k)
        err = std::max(err, std::abs(sol_mix[k] - (a * s1[k] + b * s2[k])));
    CHECK(err <= 1e-10);
}

TEST_CASE("compatibility enforcement") {
    Grid2D g(kPi, 32, 32, BoundaryKind::Reflective);
    SpectralPoisson2D solver(g);
    ScalarField2D q(g);
    for (double& v : q.data()) v = 0.05;  // integral far from zero

    CHECK_THROWS_AS(solver.solve(q, true), CompatibilityError);

    // lenient mode subtracts the mean instead
    const ScalarField2D xi = solver.solve(q, false);
    for (double v : xi.values()) CHECK(std::abs(v) <= 1e-12);
}
