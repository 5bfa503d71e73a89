#include "vpinv/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vpinv/error.hpp"
#include "vpinv/poisson.hpp"

namespace vpinv {

double bump(double r) {
    if (!(r < 1.0)) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double bump_slope_max() {
    static const double value = [] {
        double best = 0.0;
        for (int k = 1; k < 100000; ++k) {
            const double r = k * 1e-5;
            const double q = 1.0 - r * r;
            best = std::max(best, bump(r) * 2.0 * r / (q * q));
        }
        return best;
    }();
    return value;
}

double BeamData::psi(Vec2 x, Vec2 v) const {
    const double a = bump(norm(x - x0) / eps);
    if (a == 0.0) return 0.0;
    return a * bump(norm(v - p0) / eps);
}

namespace {

BeamProbe probe_beam(const BeamData& b) {
    BeamProbe p;
    p.peak = b.psi(b.x0, b.p0);
    p.grad_limit = b.c0p * b.speed;
    // ψ is a product of radial bumps, so radial sweeps in x and v cover its gradient
    const double step = 1e-6 * b.eps;
    const Vec2 ex = perp(b.x0 / norm(b.x0));
    const Vec2 ev = b.direction;
    constexpr int n = 24;
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            const Vec2 x = b.x0 + ex * (b.eps * (a + 0.5) / n);
            const Vec2 v = b.p0 + ev * (b.eps * (c + 0.5) / n);
            const Vec2 basis[2] = {{1.0, 0.0}, {0.0, 1.0}};
            double g2 = 0.0;
            for (const Vec2& e : basis) {
                const double dx = (b.psi(x + e * step, v) - b.psi(x - e * step, v)) / (2.0 * step);
                const double dv = (b.psi(x, v + e * step) - b.psi(x, v - e * step)) / (2.0 * step);
                g2 += dx * dx + dv * dv;
            }
            p.grad_sup = std::max(p.grad_sup, std::sqrt(g2));
        }
    }
    return p;
}

}  // namespace

BeamData make_beam(const DiskDomain& domain, Vec2 x0, Vec2 direction, double speed, double c0,
                   double c0p, double threshold, BeamProbe* probe) {
    if (!(speed > 0.0) || !(c0 > 0.0) || !(c0p > 0.0))
        throw Error(ErrorCode::invalid_config, "beam speed, c0 and c0p must be positive");
    const double dn = norm(direction);
    if (!(dn > 0.0)) throw Error(ErrorCode::invalid_config, "beam direction must be nonzero");
    direction = direction / dn;
    const BoundaryClass cls = classify(domain, x0, direction * speed);
    if (cls != BoundaryClass::incoming) {
        throw Error(ErrorCode::outgoing_injection,
                    std::string("beam is not incoming at x0 (") + to_string(cls) + ")");
    }
    if (speed < threshold) {
        std::ostringstream msg;
        msg << "speed " << speed << " is below the non-trapping threshold " << threshold;
        throw Error(ErrorCode::below_threshold, msg.str());
    }
    BeamData b;
    b.x0 = x0;
    b.direction = direction;
    b.speed = speed;
    b.p0 = direction * speed;
    b.c0 = c0;
    b.c0p = c0p;
    b.eps = c0 / speed;
    b.radius = domain.radius();
    const BeamProbe p = probe_beam(b);
    if (p.grad_sup > p.grad_limit) {
        std::ostringstream msg;
        msg << "sup|grad psi| = " << p.grad_sup << " exceeds c0p*|p0| = " << p.grad_limit;
        throw Error(ErrorCode::invalid_config, msg.str());
    }
    if (probe) *probe = p;
    return b;
}

BeamData make_beam(const Chord& chord, double speed, double c0, double c0p, double threshold,
                   BeamProbe* probe) {
    return make_beam(DiskDomain(std::hypot(chord.entry.x, chord.entry.y)), chord.entry,
                     chord.direction, speed, c0, c0p, threshold, probe);
}

double ray_distance(const BeamData& beam, Vec2 x) {
    const Vec2 d = x - beam.x0;
    const double t = dot(d, beam.direction);
    if (t <= 0.0) return norm(d);
    return std::abs(dot(d, perp(beam.direction)));
}

double backward_time_bound(double speed, double m0, double radius) {
    // X·u moves at least |v|t − m0 t²/2 along u = v/|v| and stays within the diameter
    const double d = 2.0 * radius;
    if (m0 <= 0.0) return d / speed;
    const double disc = speed * speed - 2.0 * m0 * d;
    if (disc <= 0.0) return std::numeric_limits<double>::infinity();
    return d / (0.5 * (speed + std::sqrt(disc)));
}

double deposit_point(const BeamData& beam, const FieldGrid& field, Vec2 x, int n_v,
                     const TraceOptions& trace_opts, DepositReport* report) {
    const double m0 = field.sup_norm_valid();
    // |v₋ − v| ≤ m0·t₋, so velocities farther than ε + m0·t₋ from p0 never reach supp ψ
    const double reach = beam.eps + m0 * backward_time_bound(beam.speed - 2.0 * beam.eps, m0, beam.radius);
    const double half = std::min(2.0 * beam.eps, reach);
    const double dv = 2.0 * half / n_v;
    const double w = dv * dv;
    double sum = 0.0;
    for (int b = 0; b < n_v; ++b) {
        for (int a = 0; a < n_v; ++a) {
            const Vec2 v = beam.p0 + Vec2{-half + (a + 0.5) * dv, -half + (b + 0.5) * dv};
            const double speed = norm(v);
            const double tb = backward_time_bound(speed, m0, beam.radius);
            if (norm(v - beam.p0) >= beam.eps + m0 * tb) continue;
            const Vec2 u = v / speed;
            const double miss = std::abs(dot(beam.x0 - x, perp(u)));
            if (miss >= beam.eps + 0.5 * m0 * tb * tb) continue;
            if (report) ++report->traces;
            const TraceResult tr = trace({x, v}, field, Direction::backward, trace_opts);
            if (tr.exit.status != ExitStatus::exited) {
                if (report) {
                    if (tr.exit.status == ExitStatus::trapped) ++report->trapped;
                    else ++report->left_grid;
                }
                continue;
            }
            sum += w * beam.psi(tr.exit.x_plus, tr.exit.v_plus);
        }
    }
    return sum;
}

namespace {

std::vector<std::size_t> tube_cells(const BeamData& beam, const GridLayout& L,
                                    const std::vector<std::uint8_t>& inside, double lo, double hi) {
    std::vector<std::size_t> cells;
    for (int j = 0; j < L.side(); ++j) {
        for (int i = 0; i < L.side(); ++i) {
            const std::size_t k = L.index(i, j);
            if (!inside[k]) continue;
            const double d = ray_distance(beam, L.center(i, j));
            if (d > lo && d <= hi) cells.push_back(k);
        }
    }
    return cells;
}

struct CellOutcome {
    double rho{0.0};
    DepositReport r;
};

CellOutcome deposit_cell(const BeamData& beam, const FieldGrid& field, const GridLayout& L,
                         std::size_t k, const DepositOptions& opts) {
    const int i = static_cast<int>(k % L.side());
    const int j = static_cast<int>(k / L.side());
    CellOutcome out;
    out.rho = deposit_point(beam, field, L.center(i, j), opts.n_v, opts.trace, &out.r);
    return out;
}

ScalarGrid finish_deposit(const GridLayout& L, const std::vector<std::size_t>& cells,
                          const std::vector<CellOutcome>& outcomes, DepositReport* report) {
    ScalarGrid rho(L);
    rho.mask = inside_mask(L);
    DepositReport total;
    total.tube_cells = static_cast<int>(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        rho.values[cells[c]] = outcomes[c].rho;
        total.traces += outcomes[c].r.traces;
        total.trapped += outcomes[c].r.trapped;
        total.left_grid += outcomes[c].r.left_grid;
        if (outcomes[c].r.trapped + outcomes[c].r.left_grid > 0) ++total.flagged_cells;
    }
    if (report) *report = total;
    return rho;
}

}  // namespace

ScalarGrid deposit_rho(const BeamData& beam, const FieldGrid& field, const DepositOptions& opts,
                       DepositReport* report) {
    const GridLayout& L = field.layout();
    const auto cells = tube_cells(beam, L, field.inside(), -1.0, opts.tube_scale * beam.eps);
    std::vector<CellOutcome> outcomes(cells.size());
    const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long c = 0; c < n; ++c) outcomes[c] = deposit_cell(beam, field, L, cells[c], opts);
    return finish_deposit(L, cells, outcomes, report);
}

ScalarGrid deposit_rho_serial(const BeamData& beam, const FieldGrid& field,
                              const DepositOptions& opts, DepositReport* report) {
    const GridLayout& L = field.layout();
    const auto cells = tube_cells(beam, L, field.inside(), -1.0, opts.tube_scale * beam.eps);
    std::vector<CellOutcome> outcomes(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        outcomes[c] = deposit_cell(beam, field, L, cells[c], opts);
    return finish_deposit(L, cells, outcomes, report);
}

namespace {

double max_abs_diff(const ScalarGrid& a, const ScalarGrid& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

// Ratios whose numerator sits at the roundoff level of ρ carry no information.
constexpr double kResidualFloor = 1e-11;

bool shell_leaks(const BeamData& beam, const FieldGrid& field, const DepositOptions& opts) {
    const GridLayout& L = field.layout();
    const double inner = opts.tube_scale * beam.eps;
    const auto shell = tube_cells(beam, L, field.inside(), inner, inner + 2.0 * L.h());
    for (std::size_t k : shell) {
        if (deposit_cell(beam, field, L, k, opts).rho > 0.0) return true;
    }
    return false;
}

}  // namespace

KineticState fixed_point_solve(const BeamData& beam, const FieldGrid& doping_field,
                               const FixedPointOptions& opts) {
    if (opts.max_iter < 1 || opts.deposit.n_v < 1)
        throw Error(ErrorCode::invalid_config, "max_iter and n_v must be positive");
    const GridLayout& L = doping_field.layout();
    KineticState st;
    st.rho = ScalarGrid(L);
    st.rho.mask = inside_mask(L);
    st.field = doping_field;
    st.tube_scale = opts.deposit.tube_scale;
    if (!opts.self_field) {
        st.converged = true;
        return st;
    }
    DepositOptions dep = opts.deposit;
    constexpr int kMaxWidening = 3;
    for (int widen = 0;; ++widen) {
        dep.tube_scale = st.tube_scale;
        ScalarGrid prev = st.rho;
        int above_one = 0;
        st.converged = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            ScalarGrid rho = opts.parallel ? deposit_rho(beam, st.field, dep, &st.quality)
                                           : deposit_rho_serial(beam, st.field, dep, &st.quality);
            const double r = max_abs_diff(rho, prev);
            st.residuals.push_back(r);
            ++st.iterations;
            const FieldGrid self = opts.parallel ? assemble_field(rho) : assemble_field_serial(rho);
            st.field = doping_field.combined(1.0, self, -1.0);
            const double floor = kResidualFloor * std::max(rho.sup_norm(), 1e-300);
            const std::size_t n = st.residuals.size();
            if (n >= 2 && r > floor && st.residuals[n - 2] > 0.0) {
                const double ratio = r / st.residuals[n - 2];
                st.lambda_hat = std::max(st.lambda_hat, ratio);
                above_one = ratio >= 1.0 ? above_one + 1 : 0;
                if (above_one >= 2) {
                    std::ostringstream msg;
                    msg << "fixed-point residual ratio >= 1 twice in a row at speed " << beam.speed
                        << " (ratio " << ratio << ")";
                    throw Error(ErrorCode::non_contraction, msg.str());
                }
            }
            prev = std::move(rho);
            if (r <= opts.tol) {
                st.converged = true;
                break;
            }
        }
        st.rho = std::move(prev);
        if (widen >= kMaxWidening || !shell_leaks(beam, st.field, dep)) break;
        st.tube_scale *= 1.5;
    }
    return st;
}

KineticState fixed_point_solve(const BeamData& beam, const DopingProfile& profile,
                               const GridLayout& layout, const FixedPointOptions& opts) {
    return fixed_point_solve(beam, assemble_doping_field(profile, layout), opts);
}

}  // namespace vpinv
