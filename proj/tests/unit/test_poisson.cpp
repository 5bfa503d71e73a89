#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vpinv/error.hpp"
#include "vpinv/poisson.hpp"

using namespace vpinv;
using doctest::Approx;

namespace {

double max_rel_error_constant(const FieldGrid& f, double rmax) {
    const GridLayout& L = f.layout();
    double worst = 0.0;
    for (int j = 0; j < L.side(); ++j)
        for (int i = 0; i < L.side(); ++i) {
            const Vec2 c = L.center(i, j);
            if (!f.inside()[L.index(i, j)] || norm(c) > rmax || norm(c) < L.h()) continue;
            worst = std::max(worst, norm(f.node(i, j) - c * -0.5) / norm(c * -0.5));
        }
    return worst;
}

}  // namespace

TEST_SUITE("poisson") {

TEST_CASE("Green's function vanishes on the boundary") {
    const DiskDomain d;
    CHECK(std::abs(greens_function(d, {1, 0}, {0.3, 0.2})) < 1e-15);
    CHECK(std::abs(greens_function(d, {0, -1}, {0.0, 0.0})) < 1e-15);
    CHECK(greens_function(d, {0.1, 0.1}, {0.3, 0.2}) > 0.0);
}

TEST_CASE("greens_gradient matches finite differences of G and rejects x = y") {
    const DiskDomain d;
    const Vec2 y{0.3, -0.4};
    const Vec2 x{-0.2, 0.5};
    const double h = 1e-6;
    const Vec2 g = greens_gradient(d, x, y);
    CHECK(g.x == Approx((greens_function(d, x + Vec2{h, 0}, y) - greens_function(d, x - Vec2{h, 0}, y)) / (2 * h)).epsilon(1e-7));
    CHECK(g.y == Approx((greens_function(d, x + Vec2{0, h}, y) - greens_function(d, x - Vec2{0, h}, y)) / (2 * h)).epsilon(1e-7));
    const Vec2 g0 = greens_gradient(d, x, {0, 0});
    CHECK(g0.x == Approx(-x.x / (2 * std::numbers::pi * norm2(x))));
    CHECK_THROWS_AS(greens_gradient(d, y, y), Error);
}

TEST_CASE("weak form of -Laplace G = delta reproduces a test function") {
    // ∫ ∇_x G(x, y)·∇φ(x) dx = φ(y) for φ vanishing on ∂Ω
    const DiskDomain d;
    auto phi = [](Vec2 x) { return (1.0 - norm2(x)) * std::exp(x.x - 0.5 * x.y); };
    auto grad_phi = [](Vec2 x) {
        const double e = std::exp(x.x - 0.5 * x.y);
        const double q = 1.0 - norm2(x);
        return Vec2{-2.0 * x.x * e + q * e, -2.0 * x.y * e - 0.5 * q * e};
    };
    const int n = 400;
    const double h = 2.0 / n;
    for (Vec2 y : {Vec2{0.1 + 0.5 * h * 0.37, -0.2 + 0.5 * h * 0.61}, Vec2{-0.45 + 0.3 * h, 0.33 + 0.2 * h}}) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 x{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h};
                if (norm2(x) >= 1.0) continue;
                sum += dot(greens_gradient(d, x, y), grad_phi(x)) * h * h;
            }
        CHECK(sum == Approx(phi(y)).epsilon(5.0 * h));
    }
}

TEST_CASE("far-field bound |grad G| <= C/|x-y| (1 + |ln|x-y||)") {
    const DiskDomain d;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int n = 0;
    while (n < 100) {
        const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
        if (norm2(x) >= 1.0 || norm2(y) >= 1.0) continue;
        ++n;
        const double r = norm(x - y);
        CHECK(norm(greens_gradient(d, x, y)) <= (1.0 / std::numbers::pi) / r * (1.0 + std::abs(std::log(r))));
    }
}

TEST_CASE("zero source gives zero field") {
    const GridLayout L = field_layout(32, 1.0);
    const FieldGrid f = assemble_field(make_source(L, [](Vec2) { return 0.0; }));
    for (const Vec2& v : f.values()) CHECK(norm(v) == 0.0);
    CHECK(f.sup_norm() == 0.0);
}

TEST_CASE("constant source matches -x/2") {
    const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), field_layout(128, 1.0));
    CHECK(max_rel_error_constant(f, 0.9) <= 5e-3);
}

TEST_CASE("resolution convergence for the constant source") {
    double prev = 1e9;
    for (int nx : {32, 64, 128}) {
        const GridLayout L = field_layout(nx, 1.0);
        const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), L);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < L.side(); ++j)
            for (int i = 0; i < L.side(); ++i) {
                if (!f.inside()[L.index(i, j)]) continue;
                const Vec2 r = L.center(i, j) * -0.5;
                num += norm2(f.node(i, j) - r);
                den += norm2(r);
            }
        const double err = std::sqrt(num / den);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("ring-symmetric gaussian gives a radial field") {
    const FieldGrid f = assemble_doping_field(DopingProfile::gaussian(1.0, {0, 0}, 0.25), field_layout(64, 1.0));
    for (int k = 0; k < 16; ++k) {
        const double a = 2 * std::numbers::pi * (k + 0.17) / 16;
        for (double r : {0.2, 0.5, 0.8}) {
            const Vec2 x{r * std::cos(a), r * std::sin(a)};
            const Vec2 e = f.at(x);
            const Vec2 n = x / r;
            CHECK(std::abs(dot(e, perp(n))) <= 1e-3 * std::abs(dot(e, n)));
        }
    }
}

TEST_CASE("assembly is linear, curl-free to O(h), and parallel equals serial") {
    const GridLayout L = field_layout(48, 1.0);
    const DopingProfile g = DopingProfile::default_phantom();
    const SourceGrid s = make_source(L, [&](Vec2 x) { return g(x); });
    const FieldGrid a = assemble_field(s);
    const FieldGrid b = assemble_field_serial(s);
    for (std::size_t k = 0; k < a.values().size(); ++k) CHECK(a.values()[k] == b.values()[k]);
    SourceGrid s2 = s;
    for (double& v : s2.values) v *= -2.5;
    const FieldGrid c = assemble_field(s2);
    for (std::size_t k = 0; k < a.values().size(); ++k)
        CHECK(norm(c.values()[k] + a.values()[k] * 2.5) <= 1e-13);
    double curl = 0.0, m1 = 0.0;
    for (int j = 0; j < L.side(); ++j)
        for (int i = 0; i < L.side(); ++i) {
            if (norm(L.center(i, j)) > 0.9) continue;
            const Mat2 d = a.gradients()[L.index(i, j)];
            curl = std::max(curl, std::abs(d(1, 0) - d(0, 1)));
            m1 = std::max(m1, d.frobenius());
        }
    CHECK(curl <= L.h() * m1);
}

TEST_CASE("field_bound_diagnostics examples") {
    const GridLayout L = field_layout(64, 1.0);
    const FieldBoundReport z = field_bound_diagnostics(FieldGrid::zero(L), DopingProfile::constant(0.0), 0.0, 0.02);
    CHECK(z.m0 == 0.0);
    CHECK_FALSE(z.flagged);
    const FieldGrid f1 = assemble_doping_field(DopingProfile::constant(1.0), L);
    const FieldBoundReport r1 = field_bound_diagnostics(f1, DopingProfile::constant(1.0), 0.0, 0.02);
    // inside nodes reach |x| = 1 − O(h)
    CHECK(r1.m0 == Approx(0.5).epsilon(L.h()));
    const FieldGrid f2 = assemble_doping_field(DopingProfile::constant(2.0), L);
    const FieldBoundReport r2 = field_bound_diagnostics(f2, DopingProfile::constant(2.0), 0.0, 0.02);
    CHECK(std::abs(r2.m0 - 2.0 * r1.m0) <= 1e-10);
    CHECK(r1.ratio == Approx(r1.m0));
}

TEST_CASE("field grid interpolation reproduces nodes and rejects far queries") {
    const GridLayout L = field_layout(32, 1.0);
    const FieldGrid f = FieldGrid::sample(L, [](Vec2 x) { return Vec2{x.x * x.y, 1.0 - x.x}; });
    for (int j = 10; j < 20; ++j)
        for (int i = 10; i < 20; ++i) {
            const Vec2 v = f.at(L.center(i, j));
            CHECK(v.x == Approx(f.node(i, j).x));
            CHECK(v.y == Approx(f.node(i, j).y));
        }
    CHECK_THROWS_AS(f.at({3.0, 0.0}), Error);
}

}
