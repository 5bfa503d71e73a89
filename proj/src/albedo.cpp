#include "vpinv/albedo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

namespace {

// f(x, v) on Γ₊ by the solution formula f = ψ(x₋, v₋).
double outgoing_f(const BeamData& beam, const FieldGrid& field, Vec2 x, Vec2 v,
                  const TraceOptions& topts) {
    const TraceResult tr = trace({x, v}, field, Direction::backward, topts);
    if (tr.exit.status != ExitStatus::exited) return 0.0;
    return beam.psi(tr.exit.x_plus, tr.exit.v_plus);
}

PeakCheck locate_peak(const BeamData& beam, const FieldGrid& field, const ExitRecord& exit,
                      int n, const TraceOptions& topts) {
    const DiskDomain domain = field.domain();
    const double r = domain.radius();
    const double phi0 = std::atan2(exit.x_plus.y, exit.x_plus.x);
    const double span = beam.eps;
    const double step = 2.0 * span / (n - 1);
    PeakCheck pc;
    pc.resolution = step;
    pc.f_peak = -1.0;
    for (int a = 0; a < n; ++a) {
        const double phi = phi0 + (-span + a * step) / r;
        const Vec2 x{r * std::cos(phi), r * std::sin(phi)};
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                const Vec2 v = exit.v_plus + Vec2{-span + b * step, -span + c * step};
                if (dot(v, x) <= 0.0) continue;
                const double f = outgoing_f(beam, field, x, v, topts);
                if (f > pc.f_peak) {
                    pc.f_peak = f;
                    pc.x_peak = x;
                    pc.v_peak = v;
                }
            }
        }
    }
    pc.position_error = norm(pc.x_peak - exit.x_plus);
    pc.velocity_error = norm(pc.v_peak - exit.v_plus);
    return pc;
}

}  // namespace

Measurement measure_beam(const Chord& chord, double speed, const FieldGrid& doping_field,
                         const MeasureOptions& opts, KineticState* state) {
    const double threshold = nontrapping_threshold(doping_field);
    const BeamData beam = make_beam(DiskDomain(doping_field.layout().radius), chord.entry,
                                    chord.direction, speed, opts.c0, opts.c0p, threshold);
    KineticState st = fixed_point_solve(beam, doping_field, opts.fixed_point);

    TraceOptions central = opts.fixed_point.deposit.trace;
    central.step_scale *= opts.central_step_scale;
    central.record_path = opts.record_path;
    TraceResult tr = trace({beam.x0, beam.p0}, st.field, Direction::forward, central);
    if (tr.exit.status == ExitStatus::trapped)
        throw Error(ErrorCode::trapped, "central characteristic did not exit");
    if (tr.exit.status == ExitStatus::left_grid)
        throw Error(ErrorCode::left_grid, "central characteristic left the field grid");

    Measurement ms;
    ms.chord = chord;
    ms.speed = speed;
    ms.exit = tr.exit;
    ms.m = (tr.exit.v_plus - beam.p0) * speed;
    ms.m_parallel = dot(ms.m, chord.direction);
    ms.m_perp = dot(ms.m, chord.perp);
    ms.t_star = chord.length / speed;
    ms.threshold = threshold;
    ms.eps = beam.eps;
    ms.iterations = st.iterations;
    ms.lambda_hat = st.lambda_hat;
    ms.residuals = st.residuals;
    ms.quality = st.quality;
    ms.path = std::move(tr.path);
    if (opts.verify_peak)
        ms.peak = locate_peak(beam, st.field, tr.exit, std::max(opts.peak_samples, 3),
                              opts.fixed_point.deposit.trace);
    if (state) *state = std::move(st);
    return ms;
}

Vec2 richardson(double s1, Vec2 m1, double s2, Vec2 m2) {
    const double r2 = (s2 / s1) * (s2 / s1);
    return (m2 * r2 - m1) / (r2 - 1.0);
}

double loglog_order(const std::vector<double>& speeds, const std::vector<double>& errors) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < speeds.size() && i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(speeds[i] > 0.0)) continue;
        const double x = -std::log(speeds[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SpeedSweep sweep_and_extrapolate(const Chord& chord, const FieldGrid& doping_field,
                                 std::vector<double> speeds, const MeasureOptions& opts) {
    if (speeds.size() < 2)
        throw Error(ErrorCode::invalid_config, "a speed sweep needs at least two speeds");
    std::sort(speeds.begin(), speeds.end());
    if (std::adjacent_find(speeds.begin(), speeds.end()) != speeds.end())
        throw Error(ErrorCode::invalid_config, "sweep speeds must be distinct");
    SpeedSweep sw;
    sw.chord = chord;
    sw.speeds = speeds;
    for (double s : speeds) sw.measurements.push_back(measure_beam(chord, s, doping_field, opts));
    const std::size_t n = speeds.size();
    sw.raw_largest = sw.measurements[n - 1].m;
    sw.extrapolated = richardson(speeds[n - 2], sw.measurements[n - 2].m, speeds[n - 1],
                                 sw.measurements[n - 1].m);
    std::vector<double> err;
    for (const auto& ms : sw.measurements) err.push_back(norm(ms.m - sw.extrapolated));
    sw.order_hat = loglog_order(speeds, err);
    return sw;
}

ExitTimeReport exit_time_consistency(const SpeedSweep& sweep, double diameter) {
    ExitTimeReport rep;
    rep.speeds = sweep.speeds;
    for (const auto& ms : sweep.measurements) {
        rep.t_plus.push_back(ms.exit.t_plus);
        rep.t_star.push_back(ms.t_star);
        rep.deviation.push_back(std::abs(ms.exit.t_plus - ms.t_star));
        rep.t_cap.push_back(4.0 * diameter / ms.speed);
        if (ms.exit.t_plus > rep.t_cap.back()) rep.cap_ok = false;
    }
    const double s0 = rep.speeds.front();
    rep.k_fit = rep.deviation.front() * s0 * s0 * s0;
    for (std::size_t i = 0; i < rep.speeds.size(); ++i) {
        const double s = rep.speeds[i];
        if (rep.deviation[i] > 1.5 * rep.k_fit / (s * s * s)) rep.cubic_ok = false;
    }
    rep.order_hat = loglog_order(rep.speeds, rep.deviation);
    return rep;
}

ExitTimeReport exit_time_consistency(const Chord& chord, const FieldGrid& doping_field,
                                     std::vector<double> speeds, const MeasureOptions& opts) {
    std::sort(speeds.begin(), speeds.end());
    SpeedSweep sw;
    sw.chord = chord;
    sw.speeds = speeds;
    for (double s : speeds) sw.measurements.push_back(measure_beam(chord, s, doping_field, opts));
    return exit_time_consistency(sw, doping_field.domain().diameter());
}

}  // namespace vpinv
