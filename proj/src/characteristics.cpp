#include "vpinv/characteristics.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

const char* to_string(ExitStatus s) {
    switch (s) {
        case ExitStatus::exited: return "exited";
        case ExitStatus::trapped: return "trapped";
        case ExitStatus::left_grid: return "left_grid";
    }
    return "?";
}

double exit_time_cap(const FieldGrid& field, double speed) {
    return 4.0 * field.domain().diameter() / speed;
}

double trace_step(const FieldGrid& field, double speed, const TraceOptions& opts) {
    const double h = field.layout().h();
    return opts.step_scale * std::min(h / (2.0 * speed), exit_time_cap(field, speed) / 64.0);
}

namespace {

// State layout: [X(2), V(2), extra...]
template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double a, const State<N>& k) {
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
    return out;
}

// One RK4 step of signed size ds; false if the field could not be evaluated.
template <std::size_t N, class Rhs>
bool rk4_step(const State<N>& y, double ds, Rhs&& rhs, State<N>& out) {
    State<N> k1, k2, k3, k4;
    if (!rhs(y, k1)) return false;
    if (!rhs(axpy(y, 0.5 * ds, k1), k2)) return false;
    if (!rhs(axpy(y, 0.5 * ds, k2), k3)) return false;
    if (!rhs(axpy(y, ds, k3), k4)) return false;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + ds / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    return true;
}

template <std::size_t N>
Vec2 pos(const State<N>& y) { return {y[0], y[1]}; }
template <std::size_t N>
Vec2 vel(const State<N>& y) { return {y[2], y[3]}; }

struct PlainRhs {
    const FieldGrid* field;
    bool operator()(const State<4>& y, State<4>& dy) const {
        Vec2 e;
        if (!field->try_at({y[0], y[1]}, e)) return false;
        dy = {y[2], y[3], e.x, e.y};
        return true;
    }
};

// [X, V, xx, xv, vx, vv, a_x, a_v, b_x, b_v]; each Mat2 stored row-major in 4 slots.
constexpr std::size_t kVarN = 4 + 4 * 4 + 4 * 4;

Mat2 load(const State<kVarN>& y, std::size_t off) {
    return Mat2{{{y[off], y[off + 1]}, {y[off + 2], y[off + 3]}}};
}
void store(State<kVarN>& y, std::size_t off, const Mat2& m) {
    y[off] = m(0, 0); y[off + 1] = m(0, 1); y[off + 2] = m(1, 0); y[off + 3] = m(1, 1);
}
enum : std::size_t { kXX = 4, kXV = 8, kVX = 12, kVV = 16, kAX = 20, kAV = 24, kBX = 28, kBV = 32 };

struct VariationalRhs {
    const FieldGrid* field;
    bool operator()(const State<kVarN>& y, State<kVarN>& dy) const {
        const Vec2 x{y[0], y[1]};
        Vec2 e;
        Mat2 de;
        if (!field->try_at(x, e) || !field->try_gradient_at(x, de)) return false;
        dy[0] = y[2]; dy[1] = y[3]; dy[2] = e.x; dy[3] = e.y;
        const Mat2 xx = load(y, kXX), xv = load(y, kXV);
        // d/ds J_X = J_V,  d/ds J_V = ∇E·J_X
        store(dy, kXX, load(y, kVX));
        store(dy, kXV, load(y, kVV));
        const Mat2 gx = de * xx;
        const Mat2 gv = de * xv;
        store(dy, kVX, gx);
        store(dy, kVV, gv);
        // row-derivative integrands ∇_x X·∇E = (∇E·xx)ᵀ
        store(dy, kAX, gx.transposed());
        store(dy, kAV, gv.transposed());
        store(dy, kBX, load(y, kAX));
        store(dy, kBV, load(y, kAV));
        return true;
    }
};

template <std::size_t N, class Rhs>
struct Engine {
    const FieldGrid& field;
    Rhs rhs;
    TraceOptions opts;

    struct Outcome {
        State<N> y;
        double t{0.0};
        ExitStatus status{ExitStatus::exited};
        int steps{0};
    };

    Outcome run(State<N> y, Direction dir, std::vector<PathSample>* path) const {
        const DiskDomain domain = field.domain();
        const double speed = std::hypot(y[2], y[3]);
        Outcome out;
        out.y = y;
        if (speed == 0.0) {
            out.status = ExitStatus::trapped;
            return out;
        }
        const double sign = dir == Direction::forward ? 1.0 : -1.0;
        const double t_cap = exit_time_cap(field, speed);
        const double dt = trace_step(field, speed, opts);
        double t = 0.0;
        if (path) path->push_back({0.0, pos(y), vel(y)});
        State<N> next;
        while (true) {
            if (t > 10.0 * t_cap) {
                out.status = ExitStatus::trapped;
                break;
            }
            if (!rk4_step(y, sign * dt, rhs, next)) {
                out.status = ExitStatus::left_grid;
                break;
            }
            ++out.steps;
            if (domain.xi(pos(next)) < 0.0) {
                double tau = 0.0;
                if (!bisect(y, sign, dt, domain.xi(pos(next)), domain, tau, next)) {
                    out.status = ExitStatus::left_grid;
                    break;
                }
                t += tau;
                y = next;
                out.status = ExitStatus::exited;
                break;
            }
            y = next;
            t += dt;
            if (path) path->push_back({t, pos(y), vel(y)});
        }
        out.y = y;
        out.t = t;
        if (path && out.status == ExitStatus::exited) path->push_back({t, pos(y), vel(y)});
        return out;
    }

    // Root of ξ(X(τ)) for τ ∈ (0, dt]: bisection, then one regula-falsi refinement.
    bool bisect(const State<N>& y, double sign, double dt, double xi_end, const DiskDomain& domain, double& tau,
                State<N>& out) const {
        double lo = 0.0;
        double hi = dt;
        double xi_lo = domain.xi(pos(y));
        double xi_hi = xi_end;
        State<N> trial;
        for (int it = 0; it < opts.max_bisection && hi - lo > 1e-13 * dt; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!rk4_step(y, sign * mid, rhs, trial)) {
                hi = mid;
                continue;
            }
            const double xi = domain.xi(pos(trial));
            if (xi >= 0.0) {
                lo = mid;
                xi_lo = xi;
            } else {
                hi = mid;
                xi_hi = xi;
            }
        }
        double t = hi;
        if (xi_lo > 0.0 && xi_hi < 0.0) t = lo + (hi - lo) * xi_lo / (xi_lo - xi_hi);
        if (!rk4_step(y, sign * t, rhs, out)) {
            if (!rk4_step(y, sign * lo, rhs, out)) return false;
            t = lo;
        }
        tau = t;
        return true;
    }

    State<N> advance(State<N> y, double duration, Direction dir) const {
        const double speed = std::hypot(y[2], y[3]);
        const double sign = dir == Direction::forward ? 1.0 : -1.0;
        const double dt = speed > 0.0 ? trace_step(field, speed, opts) : duration;
        double t = 0.0;
        State<N> next;
        while (t < duration) {
            const double step = std::min(dt, duration - t);
            if (!rk4_step(y, sign * step, rhs, next))
                throw Error(ErrorCode::left_grid, "propagation left the valid field region");
            y = next;
            t += step;
        }
        return y;
    }
};

State<kVarN> variational_start(const PhasePoint& p) {
    State<kVarN> y{};
    y[0] = p.x.x; y[1] = p.x.y; y[2] = p.v.x; y[3] = p.v.y;
    store(y, kXX, Mat2::identity());
    store(y, kVV, Mat2::identity());
    return y;
}

VariationalState unpack_state(const State<kVarN>& y) {
    return {load(y, kXX), load(y, kXV), load(y, kVX), load(y, kVV)};
}

}  // namespace

TraceResult trace(const PhasePoint& start, const FieldGrid& field, Direction dir,
                  const TraceOptions& opts) {
    Engine<4, PlainRhs> engine{field, PlainRhs{&field}, opts};
    TraceResult result;
    const auto o = engine.run({start.x.x, start.x.y, start.v.x, start.v.y}, dir,
                              opts.record_path ? &result.path : nullptr);
    result.exit = {o.t, pos(o.y), vel(o.y), o.status, o.steps};
    return result;
}

PhasePoint propagate(const PhasePoint& start, const FieldGrid& field, double duration,
                     Direction dir, const TraceOptions& opts) {
    Engine<4, PlainRhs> engine{field, PlainRhs{&field}, opts};
    const auto y = engine.advance({start.x.x, start.x.y, start.v.x, start.v.y}, duration, dir);
    return {pos(y), vel(y)};
}

double VariationalState::determinant() const {
    // 4×4 determinant by Gaussian elimination with partial pivoting
    double a[4][4] = {{xx(0, 0), xx(0, 1), xv(0, 0), xv(0, 1)},
                      {xx(1, 0), xx(1, 1), xv(1, 0), xv(1, 1)},
                      {vx(0, 0), vx(0, 1), vv(0, 0), vv(0, 1)},
                      {vx(1, 0), vx(1, 1), vv(1, 0), vv(1, 1)}};
    double det = 1.0;
    for (int c = 0; c < 4; ++c) {
        int p = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (a[p][c] == 0.0) return 0.0;
        if (p != c) {
            for (int k = 0; k < 4; ++k) std::swap(a[p][k], a[c][k]);
            det = -det;
        }
        det *= a[c][c];
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

VariationalResult trace_variational(const PhasePoint& start, const FieldGrid& field,
                                    Direction dir, const TraceOptions& opts) {
    Engine<kVarN, VariationalRhs> engine{field, VariationalRhs{&field}, opts};
    const auto o = engine.run(variational_start(start), dir, nullptr);
    VariationalResult r;
    r.exit = {o.t, pos(o.y), vel(o.y), o.status, o.steps};
    r.state = unpack_state(o.y);
    r.quad = {load(o.y, kAX), load(o.y, kAV), load(o.y, kBX), load(o.y, kBV)};
    return r;
}

VariationalState propagate_variational(const PhasePoint& start, const FieldGrid& field,
                                       double duration, Direction dir, const TraceOptions& opts) {
    Engine<kVarN, VariationalRhs> engine{field, VariationalRhs{&field}, opts};
    return unpack_state(engine.advance(variational_start(start), duration, dir));
}

ExitJacobians exit_map_jacobians(const PhasePoint& start, const FieldGrid& field,
                                 const TraceOptions& opts) {
    const VariationalResult vr = trace_variational(start, field, Direction::backward, opts);
    if (vr.exit.status != ExitStatus::exited) {
        throw Error(vr.exit.status == ExitStatus::trapped ? ErrorCode::trapped : ErrorCode::left_grid,
                    std::string("backward trace did not exit: ") + to_string(vr.exit.status));
    }
    const DiskDomain domain = field.domain();
    ExitJacobians J;
    J.exit = vr.exit;
    const double t = vr.exit.t_plus;
    const Vec2 xm = vr.exit.x_plus;
    const Vec2 vm = vr.exit.v_plus;
    const Vec2 n = domain.normal(xm);
    const double nv = std::abs(dot(n, vm));
    J.obliquity = nv / norm(vm);
    if (nv < 1e-6 * norm(vm)) {
        std::ostringstream msg;
        msg << "backward exit is tangential: |n·v| / |v| = " << J.obliquity;
        throw Error(ErrorCode::degenerate_exit, msg.str());
    }
    const Vec2 e_exit = field.at(xm);
    const auto& q = vr.quad;
    // ∇_x t₋ = [−n − B_x·n]/|n·v₋|,  ∇_v t₋ = [n t₋ − B_v·n]/|n·v₋|
    J.dt_dx = (-n - q.b_x * n) / nv;
    J.dt_dv = (n * t - q.b_v * n) / nv;
    J.dx_dx = Mat2::identity() - outer(J.dt_dx, vm) + q.b_x;
    J.dx_dv = Mat2::diag(-t) - outer(J.dt_dv, vm) + q.b_v;
    J.dv_dx = outer(J.dt_dx, e_exit) * -1.0 + q.a_x;
    J.dv_dv = Mat2::identity() - outer(J.dt_dv, e_exit) + q.a_v;
    return J;
}

double nontrapping_threshold(double m0, double diameter) {
    return 1.0 + 2.0 * std::sqrt(2.0 * m0 * diameter);
}

double nontrapping_threshold(const FieldGrid& field) {
    return nontrapping_threshold(field.sup_norm(), field.domain().diameter());
}

double t_minus_gradient_bound(double c, double delta, double speed, double m1) {
    return c / (delta * speed) * (1.0 + m1 / (speed * speed) * std::exp(c * (1.0 + m1) / speed));
}

}  // namespace vpinv
