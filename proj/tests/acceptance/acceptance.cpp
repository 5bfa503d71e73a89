// Acceptance gate: one PASS/FAIL line per primary criterion.
//
// Usage: acceptance [name-substring ...]   (no arguments runs everything)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vpinv/albedo.hpp"
#include "vpinv/characteristics.hpp"
#include "vpinv/kinetic.hpp"
#include "vpinv/poisson.hpp"
#include "vpinv/tomography.hpp"

using namespace vpinv;

namespace {

// Tolerances
constexpr double kFreeStreamingRel = 1e-10;
constexpr double kSinogramRel = 0.01;
constexpr double kSinogramAbsAtZero = 0.005;  // m_perp = 0 at s = 0; 1% of the s = 0.6 value
constexpr double kParallelAbs = 0.01;
constexpr double kOrderLo = 1.0, kOrderHi = 3.0;
constexpr double kExitOrderMin = 2.0;
constexpr double kLambdaMax = 0.5;
constexpr double kJacobianRel = 1e-4;
constexpr double kDeterminantAbs = 1e-6;
constexpr double kOracleL2 = 0.05;
constexpr double kSimulateL2 = 0.15;
constexpr double kFieldRel = 0.005;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); }

const GridLayout& field_grid() {
    static const GridLayout L = field_layout(64, 1.0);
    return L;
}

const FieldGrid& phantom_field() {
    static const FieldGrid f = assemble_doping_field(DopingProfile::default_phantom(), field_grid());
    return f;
}

const FieldGrid& constant_field() {
    static const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), field_grid());
    return f;
}

// Independent reference: fine midpoint rule along the chord on the assembled field.
Vec2 midpoint_chord(const FieldGrid& f, const Chord& c, int n = 20000) {
    Vec2 s;
    const double dl = c.length / n;
    for (int i = 0; i < n; ++i) s += f.at(c.point((i + 0.5) * dl));
    return s * dl;
}

Chord random_chord(std::mt19937_64& rng, double smax = 0.95) {
    std::uniform_real_distribution<double> ua(0.0, 2.0 * std::numbers::pi), us(-smax, smax);
    const double a = ua(rng);
    return chord_from(DiskDomain(), a, us(rng));
}

Outcome free_streaming() {
    std::mt19937_64 rng(2024);
    MeasureOptions o;
    o.fixed_point.self_field = false;
    const FieldGrid zero = FieldGrid::zero(field_grid());
    double worst_t = 0.0, worst_v = 0.0;
    for (int k = 0; k < 20; ++k) {
        const Chord c = random_chord(rng);
        const Measurement m = measure_beam(c, 50.0, zero, o);
        worst_t = std::max(worst_t, std::abs(m.exit.t_plus - m.t_star) / m.t_star);
        worst_v = std::max(worst_v, norm(m.exit.v_plus - c.direction * 50.0) / 50.0);
    }
    return {worst_t <= kFreeStreamingRel && worst_v <= kFreeStreamingRel,
            fmt("20 chords, max rel |t+ - L/|p0|| = %.2e, max rel |v+ - p0| = %.2e (limit %.0e)",
                worst_t, worst_v, kFreeStreamingRel)};
}

Outcome analytic_sinogram() {
    bool ok = true;
    std::string d;
    for (double s : {-0.6, -0.3, 0.0, 0.3, 0.6}) {
        const Chord c = chord_from(DiskDomain(), 0.9, s);
        const Measurement m = measure_beam(c, 100.0, constant_field());
        const double truth = -s * std::sqrt(1.0 - s * s);
        const double err = std::abs(m.m_perp - truth);
        const bool good = (s == 0.0 ? err <= kSinogramAbsAtZero : err <= kSinogramRel * std::abs(truth)) &&
                          std::abs(m.m_parallel) <= kParallelAbs;
        ok = ok && good;
        note(fmt("s=%+.1f m_perp=%.6f truth=%.6f m_par=%.2e lambda=%.1e", s, m.m_perp, truth,
                 m.m_parallel, m.lambda_hat));
        d += fmt("%s s=%+.1f err=%.2e;", good ? "" : " !", s, s == 0.0 ? err : err / std::abs(truth));
    }
    return {ok, "speed 100, rel |m_perp err| (abs at s=0), |m_par| <= 0.01:" + d};
}

struct GaussianSweep {
    Chord chord;
    SpeedSweep sweep;
    Vec2 reference;
};

const GaussianSweep& gaussian_sweep() {
    static const GaussianSweep g = [] {
        GaussianSweep r;
        r.chord = chord_from(DiskDomain(), 0.9, 0.25);
        r.reference = midpoint_chord(phantom_field(), r.chord);
        r.sweep = sweep_and_extrapolate(r.chord, phantom_field(), {25.0, 50.0, 100.0, 200.0});
        return r;
    }();
    return g;
}

Outcome convergence_order() {
    const GaussianSweep& g = gaussian_sweep();
    std::vector<double> err;
    for (const auto& m : g.sweep.measurements) {
        err.push_back(norm(m.m - g.reference));
        note(fmt("speed %5.0f |m - chord integral| = %.3e", m.speed, err.back()));
    }
    const double order = loglog_order(g.sweep.speeds, err);
    return {order >= kOrderLo && order <= kOrderHi,
            fmt("gaussian chord (0.9, 0.25), speeds 25..200: order = %.3f (range [%.0f, %.0f])", order,
                kOrderLo, kOrderHi)};
}

Outcome exit_time_bounds() {
    // cap: random beams in the phantom field from the threshold up
    const FieldGrid& f = phantom_field();
    const double thr = nontrapping_threshold(f);
    std::mt19937_64 rng(77);
    int beams = 0, over = 0;
    double worst = 0.0;
    for (double speed : {thr, 2.0 * thr, 25.0, 50.0, 100.0, 200.0}) {
        for (int k = 0; k < 40; ++k) {
            const Chord c = random_chord(rng);
            const ExitRecord e = trace({c.entry, c.direction * speed}, f, Direction::forward).exit;
            ++beams;
            const double ratio = e.t_plus / (4.0 * 1.0 / speed);
            worst = std::max(worst, ratio);
            if (e.status != ExitStatus::exited || ratio > 1.0) ++over;
        }
    }
    // decay of |t+ − t+*| along the self-consistent sweep
    const ExitTimeReport r = exit_time_consistency(gaussian_sweep().sweep, 2.0);
    for (std::size_t k = 0; k < r.speeds.size(); ++k)
        note(fmt("speed %5.0f |t+ - t+*| = %.3e", r.speeds[k], r.deviation[k]));
    const bool ok = over == 0 && r.cap_ok && r.order_hat >= kExitOrderMin;
    return {ok, fmt("%d beams from threshold %.3f: max t+/(4R/|p0|) = %.3f; deviation order = %.3f "
                    "(min %.0f)",
                    beams, thr, worst, r.order_hat, kExitOrderMin)};
}

Outcome contraction() {
    FixedPointOptions o;
    o.tol = 0.0;
    o.max_iter = 5;
    double lam[2];
    bool geometric = true;
    int idx = 0;
    for (double speed : {50.0, 100.0}) {
        const BeamData b = make_beam(chord_from(DiskDomain(), 0.9, 0.25), speed, 1.0, 4.0,
                                     nontrapping_threshold(phantom_field()));
        const KineticState st = fixed_point_solve(b, phantom_field(), o);
        lam[idx++] = st.lambda_hat;
        std::string rs;
        for (double r : st.residuals) rs += fmt(" %.2e", r);
        note(fmt("speed %.0f residuals:%s", speed, rs.c_str()));
        // successive residuals shrink until they reach roundoff
        const double floor = 1e-11 * st.rho.sup_norm();
        for (std::size_t k = 1; k < st.residuals.size(); ++k)
            if (st.residuals[k - 1] > floor && st.residuals[k] > st.residuals[k - 1]) geometric = false;
    }
    const bool ok = geometric && lam[0] > 0.0 && lam[0] < kLambdaMax && lam[1] < kLambdaMax && lam[1] < lam[0];
    return {ok, fmt("gaussian phantom: lambda(50) = %.2e, lambda(100) = %.2e (limit %.1f, decreasing)%s",
                    lam[0], lam[1], kLambdaMax, geometric ? "" : ", residuals not decaying")};
}

Outcome jacobians() {
    // constant-N field −x/2 sampled on the grid: ∇E is exact, so FD tests the exit-map formulas
    const FieldGrid f = FieldGrid::sample(field_grid(), [](Vec2 x) { return x * -0.5; });
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ur(0.0, 0.7), ua(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0, worst_det = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double r = ur(rng), a = ua(rng), b = ua(rng);
        const PhasePoint p{{r * std::cos(a), r * std::sin(a)}, Vec2{std::cos(b), std::sin(b)} * 10.0};
        const ExitJacobians J = exit_map_jacobians(p, f);
        const double h = 1e-5;
        // column c of the FD Jacobian; rows hold derivative variables
        Mat2 fx_x, fx_v, fv_x, fv_v;
        Vec2 ft_x, ft_v;
        for (int c = 0; c < 4; ++c) {
            PhasePoint pp = p, pm = p;
            Vec2 e = c % 2 == 0 ? Vec2{h, 0} : Vec2{0, h};
            if (c < 2) {
                pp.x += e;
                pm.x -= e;
            } else {
                pp.v += e;
                pm.v -= e;
            }
            const ExitRecord ep = trace(pp, f, Direction::backward).exit;
            const ExitRecord em = trace(pm, f, Direction::backward).exit;
            const double dt = (ep.t_plus - em.t_plus) / (2 * h);
            const Vec2 dx = (ep.x_plus - em.x_plus) / (2 * h);
            const Vec2 dv = (ep.v_plus - em.v_plus) / (2 * h);
            const int r2 = c % 2;
            Vec2& ft = c < 2 ? ft_x : ft_v;
            (r2 == 0 ? ft.x : ft.y) = dt;
            Mat2& mx = c < 2 ? fx_x : fx_v;
            Mat2& mv = c < 2 ? fv_x : fv_v;
            mx(r2, 0) = dx.x;
            mx(r2, 1) = dx.y;
            mv(r2, 0) = dv.x;
            mv(r2, 1) = dv.y;
        }
        auto relv = [](Vec2 a, Vec2 b) { return norm(a - b) / std::max(norm(b), 1e-12); };
        auto relm = [](const Mat2& a, const Mat2& b) { return (a - b).frobenius() / std::max(b.frobenius(), 1e-12); };
        worst = std::max({worst, relv(J.dt_dx, ft_x), relv(J.dt_dv, ft_v), relm(J.dx_dx, fx_x),
                          relm(J.dx_dv, fx_v), relm(J.dv_dx, fv_x), relm(J.dv_dv, fv_v)});
        const VariationalResult vr = trace_variational(p, f, Direction::backward);
        worst_det = std::max(worst_det, std::abs(vr.state.determinant() - 1.0));
    }
    return {worst <= kJacobianRel && worst_det <= kDeterminantAbs,
            fmt("10 beams: max rel FD mismatch = %.2e (limit %.0e), max |det - 1| = %.2e (limit %.0e)", worst,
                kJacobianRel, worst_det, kDeterminantAbs)};
}

Outcome oracle_end_to_end() {
    const DopingProfile g = DopingProfile::default_phantom();
    const AcquireResult a = acquire(phantom_field(), 180, 129);
    const ReconstructionResult r = reconstruct(a.sinogram, 128, g);
    return {r.metrics.l2_rel <= kOracleL2,
            fmt("180x129 oracle sinogram, n=128: rel L2 = %.4f, Linf = %.4f (limit %.2f)", r.metrics.l2_rel,
                r.metrics.linf, kOracleL2)};
}

Outcome simulate_end_to_end() {
    const DopingProfile g = DopingProfile::default_phantom();
    AcquireOptions o;
    o.mode = AcquireMode::simulate;
    o.speeds = {50.0, 100.0};
    const auto t0 = std::chrono::steady_clock::now();
    o.progress = [&](int done, int total) {
        if (done % 585 == 0 || done == total) {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            note(fmt("simulate: %d/%d chords, %.0f s", done, total, s));
        }
    };
    const AcquireResult a = acquire(phantom_field(), 90, 65, o);
    double worst_par = 0.0;
    for (double p : a.sinogram.parallel_residual) worst_par = std::max(worst_par, std::abs(p));
    const ReconstructionResult r = reconstruct(a.sinogram, 64, g);
    return {r.metrics.l2_rel <= kSimulateL2,
            fmt("90x65 simulate sinogram at speeds {50,100}, n=64: rel L2 = %.4f, Linf = %.4f (limit %.2f); "
                "%d failed chords, max |parallel residual| = %.2e",
                r.metrics.l2_rel, r.metrics.linf, kSimulateL2, a.failures, worst_par)};
}

Outcome field_solver() {
    const FieldGrid f = assemble_doping_field(DopingProfile::constant(1.0), field_layout(256, 1.0));
    const GridLayout& L = f.layout();
    double worst = 0.0;
    for (int j = 0; j < L.side(); ++j)
        for (int i = 0; i < L.side(); ++i) {
            const Vec2 x = L.center(i, j);
            if (norm(x) > 0.9 || norm(x) < 0.05) continue;
            worst = std::max(worst, norm(f.node(i, j) - x * -0.5) / norm(x * -0.5));
        }
    return {worst <= kFieldRel,
            fmt("nx=256 constant N: max rel |E - (-x/2)| on 0.05 <= |x| <= 0.9 = %.2e (limit %.3f)", worst,
                kFieldRel)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"free-streaming", free_streaming},
        {"analytic-sinogram", analytic_sinogram},
        {"convergence-order", convergence_order},
        {"exit-time-bounds", exit_time_bounds},
        {"contraction", contraction},
        {"jacobians", jacobians},
        {"oracle-end-to-end", oracle_end_to_end},
        {"field-solver", field_solver},
        {"simulate-end-to-end", simulate_end_to_end},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        bool selected = argc == 1;
        for (int k = 1; k < argc; ++k) selected = selected || name.find(argv[k]) != std::string::npos;
        if (!selected) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
