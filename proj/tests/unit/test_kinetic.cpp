#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vpinv/error.hpp"
#include "vpinv/kinetic.hpp"
#include "vpinv/poisson.hpp"

using namespace vpinv;
using doctest::Approx;

namespace {

const GridLayout kLayout = field_layout(64, 1.0);

BeamData axis_beam(double speed) {
    return make_beam(DiskDomain(), {-1, 0}, {1, 0}, speed, 1.0, 4.0, 1.0);
}

// Along the row of cell centers y = h/2, so narrow fast beams still cover nodes.
BeamData row_beam(double speed) {
    return make_beam(chord_from(DiskDomain(), 0.0, kLayout.h() / 2), speed, 1.0, 4.0, 1.0);
}

}  // namespace

TEST_SUITE("kinetic") {

TEST_CASE("bump profile") {
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(0.5) == Approx(std::exp(1.0 - 1.0 / 0.75)));
    // sup |χ'| by a fine central-difference scan
    double s = 0.0;
    for (int i = 1; i < 20000; ++i) {
        const double r = i / 20000.0, d = 1e-7;
        s = std::max(s, std::abs(bump(r + d) - bump(r - d)) / (2 * d));
    }
    CHECK(bump_slope_max() == Approx(s).epsilon(1e-5));
}

TEST_CASE("make_beam examples") {
    BeamProbe probe;
    const BeamData b = make_beam(DiskDomain(), {-1, 0}, {1, 0}, 50.0, 1.0, 4.0, 1.0, &probe);
    CHECK(b.eps == Approx(0.02));
    CHECK(b.psi(b.x0, b.p0) == 1.0);
    CHECK(probe.peak == 1.0);
    CHECK(b.psi(b.x0 + Vec2{0, b.eps}, b.p0) == 0.0);
    CHECK(b.psi(b.x0, b.p0 + Vec2{b.eps, 0}) == 0.0);
    CHECK(probe.grad_sup <= probe.grad_limit);
    CHECK(probe.grad_limit == Approx(200.0));
}

TEST_CASE("make_beam errors") {
    try {
        make_beam(DiskDomain(), {-1, 0}, {-1, 0}, 50.0, 1.0, 4.0, 1.0);
        FAIL("expected outgoing-injection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::outgoing_injection);
    }
    try {
        make_beam(DiskDomain(), {-1, 0}, {0, 1}, 50.0, 1.0, 4.0, 1.0);
        FAIL("expected outgoing-injection for tangent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::outgoing_injection);
    }
    try {
        make_beam(DiskDomain(), {-1, 0}, {1, 0}, 2.0, 1.0, 4.0, 3.0);
        FAIL("expected below-threshold");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::below_threshold);
    }
    CHECK_THROWS_AS(make_beam(DiskDomain(), {-1, 0}, {1, 0}, 50.0, 1.0, 0.5, 1.0), Error);
}

TEST_CASE("zero-field deposit matches the straight-line refined oracle") {
    const BeamData b = axis_beam(50.0);
    const FieldGrid z = FieldGrid::zero(kLayout);
    for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.0, 0.01}, Vec2{0.5, -0.005}}) {
        const double oracle = oracle::free_density(x, b.x0, b.p0, b.eps, 1.0, 64);
        REQUIRE(oracle > 0.0);
        CHECK(std::abs(deposit_point(b, z, x, 8) - oracle) <= 0.02 * oracle);
    }
}

TEST_CASE("deposit support and bounds") {
    const BeamData b = axis_beam(50.0);
    const FieldGrid z = FieldGrid::zero(kLayout);
    DepositReport rep;
    const ScalarGrid rho = deposit_rho(b, z, {}, &rep);
    CHECK(rep.tube_cells > 0);
    CHECK(rep.trapped == 0);
    CHECK(rep.left_grid == 0);
    // far off the axis: the beam misses the cell
    CHECK(deposit_point(b, z, {0.0, 0.5}, 8) == 0.0);
    const double sup_psi_mass = 4.0 * b.eps * b.eps;  // |B(p0, 2ε)| bound on ∫ψ dv, ψ ≤ 1
    const double h = kLayout.h();
    double total = 0.0;
    for (int j = 0; j < kLayout.side(); ++j)
        for (int i = 0; i < kLayout.side(); ++i) {
            const double r = rho(i, j);
            CHECK(r >= 0.0);
            CHECK(r <= sup_psi_mass * 4.0);
            if (r > 0.0) CHECK(ray_distance(b, kLayout.center(i, j)) <= 2.0 * b.eps + 1e-12);
            total += r * h * h;
        }
    // tube area ≤ 2·(2ε)·diam
    CHECK(total > 0.0);
    CHECK(total <= 16.0 * b.eps * b.eps * (4.0 * 2.0 * b.eps * 2.0));
}

TEST_CASE("deposit parallel equals serial") {
    const BeamData b = make_beam(chord_from(DiskDomain(), 0.7, 0.3), 50.0, 1.0, 4.0, 1.0);
    const FieldGrid f = assemble_doping_field(DopingProfile::default_phantom(), kLayout);
    const ScalarGrid a = deposit_rho(b, f);
    const ScalarGrid s = deposit_rho_serial(b, f);
    CHECK(a.values == s.values);
}

TEST_CASE("N = 0: fast convergence and O(eps^2) self-field") {
    for (double speed : {50.0, 100.0}) {
        const BeamData b = row_beam(speed);
        const KineticState st = fixed_point_solve(b, FieldGrid::zero(kLayout));
        CHECK(st.converged);
        CHECK(st.iterations <= 3);
        CHECK(st.field.sup_norm() <= 1.0 * b.eps * b.eps);
        CHECK(st.rho.sup_norm() > 0.0);
    }
}

TEST_CASE("constant N: self-field is small and shrinks with speed") {
    const DopingProfile c1 = DopingProfile::constant(1.0);
    const FieldGrid en = assemble_doping_field(c1, kLayout);
    double prev = 1e300;
    for (double speed : {50.0, 100.0}) {
        const BeamData b = axis_beam(speed);
        const KineticState st = fixed_point_solve(b, en);
        CHECK(st.converged);
        const double d = st.field.combined(1.0, en, -1.0).sup_norm();
        CHECK(d <= b.eps * b.eps);
        CHECK(d <= 0.01 * en.sup_norm());
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("contraction ratio decreases with speed") {
    const DopingProfile c1 = DopingProfile::constant(1.0);
    const FieldGrid en = assemble_doping_field(c1, kLayout);
    FixedPointOptions o;
    o.tol = 0.0;
    o.max_iter = 4;
    double prev = 1.0;
    for (double speed : {25.0, 50.0, 100.0}) {
        const KineticState st = fixed_point_solve(row_beam(speed), en, o);
        CHECK(st.lambda_hat > 0.0);
        CHECK(st.lambda_hat < prev);
        prev = st.lambda_hat;
    }
}

TEST_CASE("fixed point parallel equals serial") {
    const BeamData b = make_beam(chord_from(DiskDomain(), 1.2, -0.4), 50.0, 1.0, 4.0, 1.0);
    const FieldGrid f = assemble_doping_field(DopingProfile::default_phantom(), kLayout);
    FixedPointOptions o;
    const KineticState a = fixed_point_solve(b, f, o);
    o.parallel = false;
    const KineticState s = fixed_point_solve(b, f, o);
    CHECK(a.rho.values == s.rho.values);
    CHECK(a.residuals == s.residuals);
}

TEST_CASE("self-field disabled returns the doping field") {
    FixedPointOptions o;
    o.self_field = false;
    const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), kLayout);
    const KineticState st = fixed_point_solve(axis_beam(50.0), f, o);
    CHECK(st.iterations == 0);
    CHECK(st.field.values() == f.values());
}

}
