#include "vpinv/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vpinv/albedo.hpp"
#include "vpinv/characteristics.hpp"
#include "vpinv/error.hpp"
#include "vpinv/io.hpp"
#include "vpinv/kinetic.hpp"
#include "vpinv/poisson.hpp"
#include "vpinv/tomography.hpp"

namespace vpinv {

namespace {

class Suite {
  public:
    void add(const std::string& module, const std::string& name, double value, double limit,
             bool passed, const std::string& detail = "") {
        results_.push_back({module, name, passed, value, limit, detail});
    }
    /// value ≤ limit
    void at_most(const std::string& module, const std::string& name, double value, double limit,
                 const std::string& detail = "") {
        add(module, name, value, limit, value <= limit, detail);
    }
    void at_least(const std::string& module, const std::string& name, double value, double limit,
                  const std::string& detail = "") {
        add(module, name, value, limit, value >= limit, detail);
    }
    template <class F>
    void guarded(const std::string& module, const std::string& name, F&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            add(module, name, NAN, NAN, false, std::string("exception: ") + e.what());
        }
    }
    std::vector<CheckResult> take() { return std::move(results_); }

  private:
    std::vector<CheckResult> results_;
};

constexpr double kPi = std::numbers::pi;

void geometry_checks(Suite& s, std::mt19937_64& rng) {
    const DiskDomain dom(1.0);
    std::uniform_real_distribution<double> ua(0.0, kPi), us(-0.99, 0.99);
    double worst_bound = 0.0, worst_exit = 0.0;
    bool classes_ok = true;
    for (int k = 0; k < 200; ++k) {
        const Chord c = chord_from(dom, ua(rng), us(rng));
        worst_bound = std::max({worst_bound, std::abs(dom.xi(c.entry)), std::abs(dom.xi(c.exit()))});
        const LineExit le = line_exit(dom, c.entry, c.direction);
        worst_exit = std::max({worst_exit, std::abs(le.length - c.length), norm(le.point - c.exit())});
        for (double sigma : {0.5, 50.0}) {
            classes_ok &= classify(dom, c.entry, c.direction * sigma) == BoundaryClass::incoming;
            classes_ok &= classify(dom, c.exit(), c.direction * sigma) == BoundaryClass::outgoing;
        }
    }
    s.at_most("geometry", "chord endpoints on boundary", worst_bound, 1e-12);
    s.at_most("geometry", "line_exit reproduces chord", worst_exit, 1e-10);
    s.add("geometry", "entry incoming / exit outgoing", classes_ok, 1, classes_ok);
}

void profile_checks(Suite& s, std::mt19937_64& rng) {
    const DiskDomain dom(1.0);
    std::uniform_real_distribution<double> u(-0.7, 0.7), ua(0.0, kPi), us(-0.95, 0.95);
    const std::vector<DopingProfile> profiles = {DopingProfile::constant(1.0),
                                                 DopingProfile::radial_polynomial({1.0, -0.5, 0.25})};
    double lap_err = 0.0, bdry = 0.0, par = 0.0, lin = 0.0;
    for (const auto& p : profiles) {
        const AnalyticReference ref(p, dom);
        const AnalyticReference ref2(p.scaled(2.0), dom);
        const double h = 1e-3;
        for (int k = 0; k < 50; ++k) {
            const Vec2 x{u(rng), u(rng)};
            const double lap = (ref.potential(x + Vec2{h, 0}) + ref.potential(x - Vec2{h, 0}) +
                                ref.potential(x + Vec2{0, h}) + ref.potential(x - Vec2{0, h}) -
                                4.0 * ref.potential(x)) / (h * h);
            lap_err = std::max(lap_err, std::abs(-lap - p(x)));
            const double a = 2.0 * kPi * k / 50;
            bdry = std::max(bdry, std::abs(ref.potential({std::cos(a), std::sin(a)})));
            lin = std::max(lin, norm(ref2.field(x) - ref.field(x) * 2.0));
            // midpoint quadrature of the field along a chord, projected on θ
            const Chord c = chord_from(dom, ua(rng), us(rng));
            const int n = 2000;
            Vec2 q;
            for (int i = 0; i < n; ++i) q += ref.field(c.point((i + 0.5) * c.length / n));
            q *= c.length / n;
            par = std::max(par, std::abs(dot(q, c.direction)));
        }
    }
    s.at_most("profiles", "-laplacian(phi) = N (5-point FD)", lap_err, 1e-5);
    s.at_most("profiles", "phi = 0 on boundary", bdry, 1e-10);
    s.at_most("profiles", "parallel chord identity (quadrature)", par, 1e-8);
    s.at_most("profiles", "reference linear in amplitude", lin, 1e-14);
    const DopingProfile g = DopingProfile::default_phantom();
    const double probed = probe_m0(g, 1.0, 256);
    s.at_least("profiles", "m0 bounds 256^2 probe", g.m0(), probed);
}

void poisson_checks(Suite& s) {
    const DopingProfile cst = DopingProfile::constant(1.0);
    std::vector<double> errs;
    for (int nx : {32, 64, 128}) {
        const GridLayout L = field_layout(nx, 1.0);
        const FieldGrid f = assemble_doping_field(cst, L);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < L.side(); ++j)
            for (int i = 0; i < L.side(); ++i) {
                if (!f.inside()[L.index(i, j)]) continue;
                const Vec2 r = L.center(i, j) * -0.5;
                num += norm2(f.node(i, j) - r);
                den += norm2(r);
            }
        errs.push_back(std::sqrt(num / den));
    }
    const bool mono = errs[1] < errs[0] && errs[2] < errs[1];
    s.add("poisson", "L2 error decreases for nx 32/64/128", errs[2], errs[1], mono);

    const GridLayout L = field_layout(64, 1.0);
    const DopingProfile g = DopingProfile::default_phantom();
    const FieldGrid e1 = assemble_doping_field(g, L);
    const FieldGrid e2 = assemble_doping_field(g.scaled(-3.0), L);
    double lin = 0.0;
    for (std::size_t k = 0; k < e1.values().size(); ++k)
        lin = std::max(lin, norm(e2.values()[k] + e1.values()[k] * 3.0));
    s.at_most("poisson", "linearity in the source", lin, 1e-12 * std::max(1.0, e1.sup_norm()));

    double curl = 0.0, gmax = 0.0;
    for (int j = 0; j < L.side(); ++j)
        for (int i = 0; i < L.side(); ++i) {
            const Vec2 c = L.center(i, j);
            if (norm(c) > 0.9) continue;
            const Mat2 d = e1.gradients()[L.index(i, j)];
            curl = std::max(curl, std::abs(d(1, 0) - d(0, 1)));
            gmax = std::max(gmax, d.frobenius());
        }
    s.at_most("poisson", "discrete curl O(h)", curl, L.h() * gmax);

    const DopingProfile ring = DopingProfile::gaussian(1.0, {0.0, 0.0}, 0.3);
    const FieldGrid er = assemble_doping_field(ring, L);
    double tang = 0.0;
    for (int k = 0; k < 24; ++k) {
        const double a = 2.0 * kPi * (k + 0.3) / 24;
        const Vec2 x{0.5 * std::cos(a), 0.5 * std::sin(a)};
        const Vec2 e = er.at(x);
        tang = std::max(tang, std::abs(dot(e, perp(x / norm(x)))) / std::abs(dot(e, x / norm(x))));
    }
    s.at_most("poisson", "radial source gives radial field", tang, 1e-3);
}

void characteristics_checks(Suite& s, std::mt19937_64& rng) {
    const DiskDomain dom(1.0);
    const GridLayout L = field_layout(64, 1.0);
    const FieldGrid fc = FieldGrid::sample(L, [](Vec2 x) { return x * -0.5; });
    const FieldGrid fg = assemble_doping_field(DopingProfile::default_phantom(), L);
    std::uniform_real_distribution<double> ua(0.0, 2 * kPi), us(-0.95, 0.95);
    double worst_cap = 0.0, worst_dev = 0.0;
    for (const FieldGrid* f : {&fc, &fg}) {
        const double thr = nontrapping_threshold(*f);
        for (int k = 0; k < 20; ++k) {
            const Chord c = chord_from(dom, ua(rng), us(rng));
            const double speed = std::max(thr, 5.0) * (1.0 + k % 4);
            TraceOptions o;
            o.record_path = true;
            const TraceResult tr = trace({c.entry, c.direction * speed}, *f, Direction::forward, o);
            worst_cap = std::max(worst_cap, tr.exit.t_plus / (4.0 * dom.diameter() / speed));
            double dev = 0.0;
            for (const auto& p : tr.path) dev = std::max(dev, norm(p.x - c.entry - c.direction * speed * p.t));
            const double bound = 0.5 * tr.exit.t_plus * tr.exit.t_plus * f->sup_norm_valid();
            worst_dev = std::max(worst_dev, dev / bound);
        }
    }
    s.at_most("characteristics", "t+ <= 4R/|p0| (ratio)", worst_cap, 1.0);
    s.at_most("characteristics", "straight-line deviation <= M0 t+^2/2 (ratio)", worst_dev, 1.0);

    const Chord c = chord_from(dom, 0.7, 0.3);
    TraceOptions a, b;
    b.step_scale = 0.5;
    const Vec2 va = trace({c.entry, c.direction * 50.0}, fc, Direction::forward, a).exit.v_plus;
    const Vec2 vb = trace({c.entry, c.direction * 50.0}, fc, Direction::forward, b).exit.v_plus;
    s.at_most("characteristics", "step halving changes v+ (relative)", norm(va - vb) / 50.0, 1e-8);

    double det = 0.0;
    for (const FieldGrid* f : {&fc, &fg}) {
        for (int k = 0; k < 5; ++k) {
            const Chord ck = chord_from(dom, ua(rng), us(rng));
            const VariationalResult vr =
                trace_variational({ck.point(0.5 * ck.length), ck.direction * 20.0}, *f, Direction::forward);
            det = std::max(det, std::abs(vr.state.determinant() - 1.0));
        }
    }
    s.at_most("characteristics", "variational determinant = 1", det, 1e-6);
}

void kinetic_checks(Suite& s, const ExperimentConfig& cfg) {
    const DiskDomain dom(1.0);
    const GridLayout L = field_layout(64, 1.0);
    const FieldGrid fg = assemble_doping_field(DopingProfile::default_phantom(), L);
    const Chord c = chord_from(dom, 0.4, 0.15);
    const double thr = nontrapping_threshold(fg);
    FixedPointOptions fo;
    fo.deposit.n_v = cfg.n_v;
    fo.tol = 0.0;
    fo.max_iter = 6;
    std::vector<double> speeds{25.0, 50.0, 100.0}, self, lam;
    double max_f = 0.0, rho_ratio = 0.0, mass_ratio = 0.0;
    bool contained = true;
    for (double sp : speeds) {
        const BeamData b = make_beam(c, sp, cfg.c0, cfg.c0p, thr);
        const KineticState st = fixed_point_solve(b, fg, fo);
        lam.push_back(st.lambda_hat);
        double d = 0.0;
        for (std::size_t k = 0; k < fg.values().size(); ++k)
            if (fg.inside()[k]) d = std::max(d, norm(st.field.values()[k] - fg.values()[k]));
        self.push_back(d / fg.sup_norm());
        const double tb = backward_time_bound(sp - 2.0 * b.eps, st.field.sup_norm_valid(), 1.0);
        const double vr = b.eps + st.field.sup_norm_valid() * tb;
        const double cap = kPi * vr * vr;
        rho_ratio = std::max(rho_ratio, st.rho.sup_norm() / cap);
        double mass = 0.0;
        for (std::size_t k = 0; k < st.rho.values.size(); ++k) {
            mass += st.rho.values[k] * L.h() * L.h();
            const int i = static_cast<int>(k % L.side()), j = static_cast<int>(k / L.side());
            if (st.rho.values[k] > 0.0 && ray_distance(b, L.center(i, j)) > 2.0 * b.eps) contained = false;
        }
        mass_ratio = std::max(mass_ratio, mass / (cap * 4.0 * b.eps * c.length));
        // f = ψ(x₋, v₋) sampled at tube points never exceeds sup ψ = 1
        for (int k = 0; k < 20; ++k) {
            const Vec2 x = c.point(c.length * (k + 0.5) / 20) + c.perp * (b.eps * ((k % 5) - 2) * 0.3);
            const TraceResult tr = trace({x, b.p0}, st.field, Direction::backward);
            if (tr.exit.status == ExitStatus::exited) max_f = std::max(max_f, b.psi(tr.exit.x_plus, tr.exit.v_plus));
        }
    }
    s.at_most("kinetic", "maximum principle sup f <= 1", max_f, 1.0);
    s.add("kinetic", "rho vanishes outside the 2eps tube", contained, 1, contained);
    s.at_most("kinetic", "sup rho <= pi (eps + M0 t_b)^2 (ratio)", rho_ratio, 1.0);
    s.at_most("kinetic", "h^2 sum rho <= c eps^2 area(tube) (ratio)", mass_ratio, 1.0);
    const double rate = loglog_order(speeds, self);
    s.at_least("kinetic", "self-field decay rate in speed", rate, 2.0);
    s.at_most("kinetic", "fixed-point lambda_hat < 1", *std::max_element(lam.begin(), lam.end()), 1.0);
    const bool dec = lam[1] < lam[0] && lam[2] < lam[1];
    s.add("kinetic", "lambda_hat decreases with speed", lam[2], lam[1], dec);
}

void albedo_checks(Suite& s, const ExperimentConfig& cfg) {
    const DiskDomain dom(1.0);
    const GridLayout L = field_layout(64, 1.0);
    const FieldGrid fg = assemble_doping_field(DopingProfile::default_phantom(), L);
    MeasureOptions mo;
    mo.c0 = cfg.c0;
    mo.c0p = cfg.c0p;
    mo.fixed_point.deposit.n_v = cfg.n_v;
    double par = 0.0, arc = 0.0;
    bool mono = true;
    for (double off : {-0.5, 0.15, 0.7}) {
        const Chord c = chord_from(dom, 0.4 + off, off);
        const SpeedSweep sw = sweep_and_extrapolate(c, fg, {25.0, 50.0, 100.0, 200.0}, mo);
        par = std::max(par, std::abs(dot(sw.extrapolated, c.direction)) / std::max(1.0, norm(sw.extrapolated)));
        for (const auto& m : sw.measurements) arc = std::max(arc, std::abs(m.t_star * m.speed - c.length));
        for (std::size_t k = 2; k < sw.measurements.size(); ++k) {
            const double d1 = norm(sw.measurements[k - 1].m - sw.measurements[k - 2].m);
            const double d2 = norm(sw.measurements[k].m - sw.measurements[k - 1].m);
            mono &= d2 < d1;
        }
    }
    s.at_most("albedo", "Dirichlet parallel identity |m_inf . theta|", par, 5e-3);
    s.at_most("albedo", "arc-length identity speed*t* = L", arc, 1e-12);
    s.add("albedo", "successive differences decrease", mono, 1, mono);
    s.guarded("albedo", "measurement within |p0| t+ M0", [&] {
        const Chord c = chord_from(dom, 1.1, -0.2);
        const Measurement m = measure_beam(c, 50.0, fg, mo);
        s.at_most("albedo", "|m| <= |p0| t+ M0 (ratio)", norm(m.m) / (50.0 * m.exit.t_plus * fg.sup_norm_valid()), 1.0);
    });
}

void tomography_checks(Suite& s, const ExperimentConfig& cfg) {
    const DiskDomain dom(1.0);
    const DopingProfile g = DopingProfile::default_phantom();
    const GridLayout L = field_layout(64, 1.0);
    const FieldGrid fg = assemble_doping_field(g, L);
    // evenness: the reversed chord has the same Cartesian integral
    MeasureOptions mo;
    mo.c0 = cfg.c0;
    mo.c0p = cfg.c0p;
    mo.fixed_point.deposit.n_v = cfg.n_v;
    double even = 0.0;
    for (double off : {-0.4, 0.25}) {
        const Chord c = chord_from(dom, 0.9, off);
        const Vec2 a = sweep_and_extrapolate(c, fg, {50.0, 100.0}, mo).extrapolated;
        const Vec2 b = sweep_and_extrapolate(c.reversed(), fg, {50.0, 100.0}, mo).extrapolated;
        even = std::max(even, norm(a - b) / std::max(1e-3, norm(a)));
    }
    s.at_most("tomography", "evenness under chord reversal (relative)", even, 1e-3);

    std::vector<double> errs;
    const int sizes[3][3] = {{45, 33, 32}, {90, 65, 64}, {180, 129, 128}};
    double curl = 0.0, divmax = 0.0;
    for (const auto& sz : sizes) {
        const AcquireResult ar = acquire(fg, sz[0], sz[1]);
        const ReconstructionResult rr = reconstruct(ar.sinogram, sz[2], g);
        errs.push_back(rr.metrics.l2_rel);
        if (sz[2] == 128) {
            const GridLayout& R = rr.e_hat.layout();
            for (int j = 1; j + 1 < R.side(); ++j)
                for (int i = 1; i + 1 < R.side(); ++i) {
                    if (norm(R.center(i, j)) > 0.85) continue;
                    const Mat2 d = rr.e_hat.gradients()[R.index(i, j)];
                    curl = std::max(curl, std::abs(d(1, 0) - d(0, 1)));
                    divmax = std::max(divmax, std::abs(d(0, 0) + d(1, 1)));
                }
        }
    }
    s.add("tomography", "oracle chain error decreases with refinement", errs[2], errs[1],
          errs[1] < errs[0] && errs[2] < errs[1]);
    s.at_most("tomography", "curl of E_hat relative to max div", curl / divmax, 0.05);

    // linearity and rotational equivariance on an analytic gaussian sinogram
    const int na = 90, ns = 65, n = 64;
    Sinogram p(na, ns, 1.0), q(na, ns, 1.0), rot(na, ns, 1.0);
    const Vec2 xc{0.25, -0.1};
    const double sg = 0.15;
    auto proj = [&](double a, double sv, Vec2 c) {
        const Vec2 pp{-std::sin(a), std::cos(a)};
        const double d = sv - dot(c, pp);
        return std::sqrt(2 * kPi) * sg * std::exp(-d * d / (2 * sg * sg));
    };
    const double da = p.angle_step();
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < ns; ++j) {
            p.at(i, j) = {proj(p.angle(i), p.offset(j), xc), 0.0};
            q.at(i, j) = {proj(p.angle(i), p.offset(j), {-0.3, 0.2}), 0.0};
        }
    // rotating by one angle step shifts the rows; row 0 wraps with p(α + π, −s) = p(α, s)
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < ns; ++j) rot.at(i, j) = p.at((i + na - 1) % na, i == 0 ? ns - 1 - j : j);
    const GridLayout R = reconstruction_layout(n, 1.0);
    const ScalarGrid fp = fbp(p, 0, R), fq = fbp(q, 0, R), fr = fbp(rot, 0, R);
    Sinogram sum(na, ns, 1.0);
    for (std::size_t k = 0; k < sum.values.size(); ++k) sum.values[k] = p.values[k] * 2.0 - q.values[k];
    const ScalarGrid fs = fbp(sum, 0, R);
    double lin = 0.0, scale = 0.0, num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t k = R.index(i, j);
            lin = std::max(lin, std::abs(fs.values[k] - 2.0 * fp.values[k] + fq.values[k]));
            scale = std::max(scale, std::abs(fp.values[k]));
            const Vec2 x = R.center(i, j);
            if (norm(x) > 0.85) continue;
            const Vec2 back{x.x * std::cos(da) + x.y * std::sin(da), -x.x * std::sin(da) + x.y * std::cos(da)};
            const double ref = fp.interpolate_clamped(back);
            num += (fr.values[k] - ref) * (fr.values[k] - ref);
            den += ref * ref;
        }
    s.at_most("tomography", "FBP linearity", lin, 1e-12 * scale);
    s.at_most("tomography", "rotational equivariance (relative L2)", std::sqrt(num / den), 0.02);
}

void cli_checks(Suite& s, const ExperimentConfig& cfg) {
    const ExperimentConfig back = ExperimentConfig::parse(cfg.serialize());
    const bool same = back == cfg && back.serialize() == cfg.serialize();
    s.add("cli", "config round-trips through serialization", same, 1, same);
    const GridLayout L = field_layout(32, 1.0);
    const FieldGrid f = assemble_doping_field(DopingProfile::default_phantom(), L);
    const Sinogram a = acquire(f, 16, 17).sinogram;
    const Sinogram b = acquire_serial(f, 16, 17).sinogram;
    bool det = true;
    for (std::size_t k = 0; k < a.values.size(); ++k) det &= a.values[k] == b.values[k];
    s.add("cli", "deterministic sinogram (parallel == serial)", det, 1, det);
}

}  // namespace

std::vector<CheckResult> run_validation(const ExperimentConfig& config) {
    Suite s;
    std::mt19937_64 rng(config.seed);
    s.guarded("geometry", "suite", [&] { geometry_checks(s, rng); });
    s.guarded("profiles", "suite", [&] { profile_checks(s, rng); });
    s.guarded("poisson", "suite", [&] { poisson_checks(s); });
    s.guarded("characteristics", "suite", [&] { characteristics_checks(s, rng); });
    s.guarded("kinetic", "suite", [&] { kinetic_checks(s, config); });
    s.guarded("albedo", "suite", [&] { albedo_checks(s, config); });
    s.guarded("tomography", "suite", [&] { tomography_checks(s, config); });
    s.guarded("cli", "suite", [&] { cli_checks(s, config); });
    return s.take();
}

std::string validation_csv(const std::vector<CheckResult>& results, const std::string& hash) {
    std::ostringstream o;
    o << "# config_hash," << hash << "\n" << "module,name,passed,value,limit,detail\n";
    for (const auto& r : results) {
        std::string detail = r.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        o << r.module << "," << r.name << "," << (r.passed ? 1 : 0) << "," << fmt17(r.value) << ","
          << fmt17(r.limit) << "," << detail << "\n";
    }
    return o.str();
}

}  // namespace vpinv
