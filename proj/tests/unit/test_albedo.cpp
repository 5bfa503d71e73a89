#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vpinv/albedo.hpp"
#include "vpinv/error.hpp"
#include "vpinv/poisson.hpp"

using namespace vpinv;
using doctest::Approx;

namespace {

const GridLayout kLayout = field_layout(64, 1.0);

const FieldGrid& constant_field() {
    static const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), kLayout);
    return f;
}

const FieldGrid& phantom_field() {
    static const FieldGrid f = assemble_doping_field(DopingProfile::default_phantom(), kLayout);
    return f;
}

}  // namespace

TEST_SUITE("albedo") {

TEST_CASE("zero doping without self-field gives m = 0") {
    MeasureOptions o;
    o.fixed_point.self_field = false;
    const Measurement m = measure_beam(chord_from(DiskDomain(), 0.4, 0.2), 50.0,
                                       FieldGrid::zero(kLayout), o);
    CHECK(norm(m.m) <= 1e-10);
    CHECK(m.exit.t_plus == Approx(m.t_star).epsilon(1e-12));
}

TEST_CASE("constant N, s = 0.6, alpha = pi/2, speed 100") {
    const Chord c = chord_from(DiskDomain(), std::numbers::pi / 2, 0.6);
    const Measurement m = measure_beam(c, 100.0, constant_field());
    const double analytic = -0.6 * std::sqrt(1.0 - 0.36);
    CHECK(analytic == Approx(-0.48));
    CHECK(m.m_perp == Approx(analytic).epsilon(0.01));
    CHECK(std::abs(m.m_parallel) <= 0.01);
    CHECK(m.eps == Approx(0.01));
    CHECK(m.iterations >= 1);
}

TEST_CASE("gaussian phantom: m approaches the chord integral of the assembled field like 1/speed") {
    const Chord c = chord_from(DiskDomain(), 0.9, 0.25);
    const FieldGrid& f = phantom_field();
    const Vec2 ref = oracle::midpoint_line([&](Vec2 x) { return f.at(x); }, c.entry, c.direction,
                                           c.length, 4000);
    double prev = 1e300;
    for (double speed : {50.0, 100.0}) {
        const Measurement m = measure_beam(c, speed, f);
        const double err = norm(m.m - ref);
        CHECK(err * speed <= 2.0);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("Richardson and log-log helpers") {
    const Vec2 limit{0.3, -0.2};
    auto model = [&](double s) { return limit + Vec2{1.0, 2.0} * (1.0 / (s * s)); };
    const Vec2 r = richardson(50, model(50), 100, model(100));
    CHECK(norm(r - limit) <= 1e-14);
    const Vec2 r3 = richardson(30, model(30), 90, model(90));
    CHECK(norm(r3 - limit) <= 1e-14);
    CHECK(loglog_order({10, 20, 40}, {1e-2, 2.5e-3, 6.25e-4}) == Approx(2.0));
    CHECK(std::isnan(loglog_order({10}, {1.0})));
}

TEST_CASE("sweep: constant N extrapolation") {
    const Chord c0 = chord_from(DiskDomain(), 0.3, 0.0);
    const SpeedSweep s0 = sweep_and_extrapolate(c0, constant_field(), {100.0, 50.0});
    CHECK(s0.speeds.front() == 50.0);
    CHECK(norm(s0.extrapolated) <= 0.005);

    const Chord c6 = chord_from(DiskDomain(), 0.3, 0.6);
    const SpeedSweep s6 = sweep_and_extrapolate(c6, constant_field(), {50.0, 100.0});
    CHECK(dot(s6.extrapolated, c6.perp) == Approx(-0.48).epsilon(0.005));
    CHECK(std::abs(dot(s6.extrapolated, c6.direction)) <= 5e-3);

    CHECK_THROWS_AS(sweep_and_extrapolate(c6, constant_field(), {50.0, 50.0}), Error);
}

TEST_CASE("sweep: gaussian order in [1, 3]") {
    const Chord c = chord_from(DiskDomain(), 0.9, 0.25);
    const SpeedSweep s = sweep_and_extrapolate(c, phantom_field(), {50.0, 100.0, 200.0});
    CHECK(s.order_hat >= 1.0);
    CHECK(s.order_hat <= 3.0);
}

TEST_CASE("exit-time consistency examples") {
    MeasureOptions o;
    o.fixed_point.self_field = false;
    const Chord c = chord_from(DiskDomain(), 0.0, 0.0);
    const ExitTimeReport z = exit_time_consistency(c, FieldGrid::zero(kLayout), {50.0, 100.0}, o);
    for (double d : z.deviation) CHECK(d <= 1e-14);

    const ExitTimeReport r = exit_time_consistency(c, constant_field(), {50.0, 100.0});
    REQUIRE(r.deviation.size() == 2);
    CHECK(r.deviation[0] <= 1e-5);
    CHECK(r.deviation[0] / r.deviation[1] >= 4.0);
    CHECK(r.cap_ok);
    CHECK(r.cubic_ok);
    CHECK(r.order_hat >= 2.0);
}

TEST_CASE("sampled outgoing maximum agrees with the traced exit") {
    MeasureOptions o;
    o.verify_peak = true;
    const Measurement m = measure_beam(chord_from(DiskDomain(), 2.0, -0.3), 50.0, phantom_field(), o);
    REQUIRE(m.peak.has_value());
    CHECK(m.peak->f_peak == Approx(1.0).epsilon(0.05));
    CHECK(m.peak->position_error <= 2.0 * m.peak->resolution);
    CHECK(m.peak->velocity_error <= 2.0 * m.peak->resolution);
}

TEST_CASE("below-threshold speed is rejected") {
    const FieldGrid strong = FieldGrid::sample(kLayout, [](Vec2 x) { return x * -100.0; });
    CHECK_THROWS_AS(measure_beam(chord_from(DiskDomain(), 0.0, 0.0), 5.0, strong), Error);
}

}
