#include "vpinv/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

Sinogram::Sinogram(int n_a_, int n_s_, double radius_, double offset_fraction)
    : n_a(n_a_), n_s(n_s_), radius(radius_), offset_max(offset_fraction * radius_) {
    if (n_a < 2 || n_s < 2) throw Error(ErrorCode::invalid_config, "sinogram needs n_a, n_s >= 2");
    if (!(offset_fraction > 0.0 && offset_fraction < 1.0))
        throw Error(ErrorCode::invalid_config, "offset fraction must lie in (0, 1)");
    values.assign(static_cast<std::size_t>(n_a) * n_s, Vec2{});
    parallel_residual.assign(values.size(), 0.0);
}

double Sinogram::angle(int i) const { return i * angle_step(); }
double Sinogram::offset(int j) const { return -offset_max + j * offset_step(); }
double Sinogram::angle_step() const { return std::numbers::pi / n_a; }
double Sinogram::offset_step() const { return 2.0 * offset_max / (n_s - 1); }

Chord Sinogram::chord(int i, int j) const {
    return chord_from(DiskDomain(radius), angle(i), offset(j));
}

void Sinogram::update_residuals() {
    for (int i = 0; i < n_a; ++i) {
        const double a = angle(i);
        const Vec2 theta{std::cos(a), std::sin(a)};
        for (int j = 0; j < n_s; ++j) parallel_residual[index(i, j)] = dot(theta, at(i, j));
    }
}

AcquireMode parse_acquire_mode(const std::string& s) {
    if (s == "simulate") return AcquireMode::simulate;
    if (s == "oracle") return AcquireMode::oracle;
    throw Error(ErrorCode::invalid_config, "unknown acquisition mode '" + s + "'");
}

const char* to_string(AcquireMode m) {
    return m == AcquireMode::simulate ? "simulate" : "oracle";
}

Vec2 chord_integral(const FieldGrid& field, const Chord& chord) {
    const GridLayout& L = field.layout();
    const double h = L.h();
    const double o = L.origin() + 0.5 * h;  // first node line
    std::vector<double> cuts{0.0, chord.length};
    for (int axis = 0; axis < 2; ++axis) {
        const double p0 = chord.entry[axis];
        const double d = chord.direction[axis];
        if (std::abs(d) < 1e-15) continue;
        const double p1 = p0 + d * chord.length;
        const double lo = std::min(p0, p1);
        const double hi = std::max(p0, p1);
        for (int k = static_cast<int>(std::ceil((lo - o) / h)); o + k * h <= hi; ++k) {
            const double t = (o + k * h - p0) / d;
            if (t > 0.0 && t < chord.length) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    const double g = 0.5 / std::sqrt(3.0);
    Vec2 sum;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const double len = b - a;
        sum += (field.at(chord.point(mid - g * len)) + field.at(chord.point(mid + g * len))) * (0.5 * len);
    }
    return sum;
}

namespace {

ChordRecord acquire_chord(const FieldGrid& field, const Sinogram& sino, int i, int j,
                          const AcquireOptions& opts) {
    ChordRecord rec;
    rec.angle_index = i;
    rec.offset_index = j;
    rec.angle = sino.angle(i);
    rec.offset = sino.offset(j);
    const Chord ch = sino.chord(i, j);
    if (opts.mode == AcquireMode::oracle) {
        rec.value = chord_integral(field, ch);
        return rec;
    }
    MeasureOptions mo = opts.measure;
    mo.fixed_point.parallel = false;
    const SpeedSweep sw = sweep_and_extrapolate(ch, field, opts.speeds, mo);
    rec.value = sw.extrapolated;
    rec.speeds = sw.speeds;
    rec.order_hat = sw.order_hat;
    for (const auto& ms : sw.measurements) {
        rec.m.push_back(ms.m);
        rec.t_plus.push_back(ms.exit.t_plus);
        rec.lambda_hat.push_back(ms.lambda_hat);
        rec.iterations.push_back(ms.iterations);
    }
    return rec;
}

// Runs one chord; runtime failures become failed records, validation errors are fatal.
ChordRecord guarded_chord(const FieldGrid& field, const Sinogram& sino, int i, int j,
                          const AcquireOptions& opts, std::exception_ptr& fatal) {
    try {
        return acquire_chord(field, sino, i, j, opts);
    } catch (const Error& e) {
        if (is_validation_error(e.code())) {
#pragma omp critical(vpinv_acquire_fatal)
            if (!fatal) fatal = std::current_exception();
        }
        ChordRecord rec;
        rec.angle_index = i;
        rec.offset_index = j;
        rec.angle = sino.angle(i);
        rec.offset = sino.offset(j);
        rec.failed = true;
        rec.error = std::string(e.name()) + ": " + e.what();
        return rec;
    }
}

AcquireResult finish_acquire(Sinogram sino, std::vector<ChordRecord> records,
                             const AcquireOptions& opts) {
    AcquireResult res;
    std::vector<std::uint8_t> ok(records.size(), 1);
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (records[k].failed) {
            ok[k] = 0;
            ++res.failures;
        } else {
            sino.values[k] = records[k].value;
        }
    }
    const double frac = static_cast<double>(res.failures) / records.size();
    if (res.failures > 0 && frac > opts.max_failure_fraction) {
        std::ostringstream msg;
        msg << res.failures << " of " << records.size() << " chords failed (first: ";
        for (const auto& r : records)
            if (r.failed) {
                msg << r.error;
                break;
            }
        msg << ")";
        throw Error(ErrorCode::too_many_failures, msg.str());
    }
    fill_failed_chords(sino, ok);
    sino.update_residuals();
    res.sinogram = std::move(sino);
    res.records = std::move(records);
    return res;
}

}  // namespace

void fill_failed_chords(Sinogram& sino, const std::vector<std::uint8_t>& ok) {
    for (int i = 0; i < sino.n_a; ++i) {
        for (int j = 0; j < sino.n_s; ++j) {
            if (ok[sino.index(i, j)]) continue;
            int lo = j - 1;
            while (lo >= 0 && !ok[sino.index(i, lo)]) --lo;
            int hi = j + 1;
            while (hi < sino.n_s && !ok[sino.index(i, hi)]) ++hi;
            Vec2 v;
            if (lo >= 0 && hi < sino.n_s) {
                const double w = static_cast<double>(j - lo) / (hi - lo);
                v = sino.at(i, lo) * (1.0 - w) + sino.at(i, hi) * w;
            } else if (lo >= 0) {
                v = sino.at(i, lo);
            } else if (hi < sino.n_s) {
                v = sino.at(i, hi);
            }
            sino.at(i, j) = v;
        }
    }
}

AcquireResult acquire(const FieldGrid& doping_field, int n_a, int n_s, const AcquireOptions& opts) {
    Sinogram sino(n_a, n_s, doping_field.layout().radius, opts.offset_fraction);
    const long total = static_cast<long>(n_a) * n_s;
    std::vector<ChordRecord> records(total);
    std::exception_ptr fatal;
    int done = 0;
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < total; ++k) {
        records[k] = guarded_chord(doping_field, sino, static_cast<int>(k / n_s),
                                   static_cast<int>(k % n_s), opts, fatal);
        if (opts.progress) {
#pragma omp critical(vpinv_acquire_progress)
            opts.progress(++done, static_cast<int>(total));
        }
    }
    if (fatal) std::rethrow_exception(fatal);
    return finish_acquire(std::move(sino), std::move(records), opts);
}

AcquireResult acquire_serial(const FieldGrid& doping_field, int n_a, int n_s,
                             const AcquireOptions& opts) {
    Sinogram sino(n_a, n_s, doping_field.layout().radius, opts.offset_fraction);
    const long total = static_cast<long>(n_a) * n_s;
    std::vector<ChordRecord> records(total);
    std::exception_ptr fatal;
    for (long k = 0; k < total; ++k) {
        records[k] = guarded_chord(doping_field, sino, static_cast<int>(k / n_s),
                                   static_cast<int>(k % n_s), opts, fatal);
        if (opts.progress) opts.progress(static_cast<int>(k + 1), static_cast<int>(total));
    }
    if (fatal) std::rethrow_exception(fatal);
    return finish_acquire(std::move(sino), std::move(records), opts);
}

double ramp_kernel(int k, double ds) {
    if (k == 0) return 1.0 / (4.0 * ds * ds);
    if (k % 2 == 0) return 0.0;
    const double pk = std::numbers::pi * k;
    return -1.0 / (pk * pk * ds * ds);
}

GridLayout reconstruction_layout(int n, double radius) {
    if (n < 4) throw Error(ErrorCode::invalid_config, "reconstruction grid needs n >= 4");
    return GridLayout{n, 0, radius};
}

namespace {

void check_sampling(const Sinogram& sino) {
    if (sino.n_a < 2 || sino.n_s < 2 || sino.values.size() != static_cast<std::size_t>(sino.n_a) * sino.n_s)
        throw Error(ErrorCode::non_uniform_sampling, "sinogram shape does not match n_a x n_s");
}

std::vector<double> filtered_projection(const Sinogram& sino, int component, int i) {
    const int n = sino.n_s;
    const double ds = sino.offset_step();
    std::vector<double> h(2 * n - 1);
    for (int k = -(n - 1); k <= n - 1; ++k) h[k + n - 1] = ramp_kernel(k, ds);
    std::vector<double> q(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += h[j - k + n - 1] * sino.at(i, k)[component];
        q[j] = ds * acc;
    }
    return q;
}

double backproject(const Sinogram& sino, const std::vector<std::vector<double>>& q,
                   const std::vector<Vec2>& perps, Vec2 x) {
    const double ds = sino.offset_step();
    double sum = 0.0;
    for (int i = 0; i < sino.n_a; ++i) {
        const double u = (dot(x, perps[i]) + sino.offset_max) / ds;
        if (u < 0.0 || u > sino.n_s - 1) continue;
        const int j = std::min(static_cast<int>(u), sino.n_s - 2);
        const double w = u - j;
        sum += q[i][j] * (1.0 - w) + q[i][j + 1] * w;
    }
    return sum * sino.angle_step();
}

std::vector<Vec2> perp_table(const Sinogram& sino) {
    std::vector<Vec2> p(sino.n_a);
    for (int i = 0; i < sino.n_a; ++i) p[i] = {-std::sin(sino.angle(i)), std::cos(sino.angle(i))};
    return p;
}

}  // namespace

ScalarGrid fbp(const Sinogram& sino, int component, const GridLayout& layout) {
    check_sampling(sino);
    std::vector<std::vector<double>> q(sino.n_a);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < sino.n_a; ++i) q[i] = filtered_projection(sino, component, i);
    const auto perps = perp_table(sino);
    ScalarGrid out(layout);
    std::fill(out.mask.begin(), out.mask.end(), 1);
    const int n = layout.side();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out(i, j) = backproject(sino, q, perps, layout.center(i, j));
    return out;
}

ScalarGrid fbp_serial(const Sinogram& sino, int component, const GridLayout& layout) {
    check_sampling(sino);
    std::vector<std::vector<double>> q(sino.n_a);
    for (int i = 0; i < sino.n_a; ++i) q[i] = filtered_projection(sino, component, i);
    const auto perps = perp_table(sino);
    ScalarGrid out(layout);
    std::fill(out.mask.begin(), out.mask.end(), 1);
    const int n = layout.side();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out(i, j) = backproject(sino, q, perps, layout.center(i, j));
    return out;
}

FieldGrid reconstruct_field(const Sinogram& sino, int n, bool parallel) {
    const GridLayout L = reconstruction_layout(n, sino.radius);
    const ScalarGrid e1 = parallel ? fbp(sino, 0, L) : fbp_serial(sino, 0, L);
    const ScalarGrid e2 = parallel ? fbp(sino, 1, L) : fbp_serial(sino, 1, L);
    std::vector<Vec2> v(L.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = {e1.values[k], e2.values[k]};
    return FieldGrid::from_all_values(L, std::move(v));
}

ScalarGrid recover_N(const FieldGrid& e_hat) {
    const GridLayout& L = e_hat.layout();
    ScalarGrid out(L);
    const int n = L.side();
    const double inv2h = 0.5 / L.h();
    for (int j = 1; j + 1 < n; ++j) {
        for (int i = 1; i + 1 < n; ++i) {
            const double div = (e_hat.node(i + 1, j).x - e_hat.node(i - 1, j).x) * inv2h +
                               (e_hat.node(i, j + 1).y - e_hat.node(i, j - 1).y) * inv2h;
            out(i, j) = div / kDivergenceSign;
            out.mask[L.index(i, j)] = 1;
        }
    }
    return out;
}

std::string Metrics::csv_header() { return "l2_rel,linf,ref_l2,cells,region"; }

std::string Metrics::csv_row() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g", l2_rel, linf, ref_l2, cells, region);
    return buf;
}

Metrics metrics(const ScalarGrid& n_hat, const DopingProfile& profile, double region) {
    const GridLayout& L = n_hat.layout;
    Metrics m;
    m.region = region;
    double num = 0.0;
    double den = 0.0;
    const double rmax = region * L.radius;
    for (int j = 0; j < L.side(); ++j) {
        for (int i = 0; i < L.side(); ++i) {
            const std::size_t k = L.index(i, j);
            const Vec2 c = L.center(i, j);
            if (!n_hat.mask[k] || norm(c) > rmax) continue;
            const double truth = profile(c);
            const double d = n_hat.values[k] - truth;
            num += d * d;
            den += truth * truth;
            m.linf = std::max(m.linf, std::abs(d));
            ++m.cells;
        }
    }
    m.ref_l2 = std::sqrt(den);
    m.l2_rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return m;
}

ReconstructionResult reconstruct(const Sinogram& sino, int n, const DopingProfile& truth,
                                 bool parallel) {
    ReconstructionResult r;
    r.e_hat = reconstruct_field(sino, n, parallel);
    r.n_hat = recover_N(r.e_hat);
    r.metrics = metrics(r.n_hat, truth);
    return r;
}

}  // namespace vpinv
