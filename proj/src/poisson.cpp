#include "vpinv/poisson.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

namespace {

constexpr double kInv2Pi = 0.5 / std::numbers::pi;

// Compacted source list: only nonzero cells contribute.
struct SourceCells {
    std::vector<double> x, y, ix, iy;  // position and image position
    std::vector<double> w;             // h²·source/(2π)
    std::vector<int> ci, cj;
};

SourceCells compact_sources(const SourceGrid& source) {
    const GridLayout& L = source.layout;
    const double R2 = L.radius * L.radius;
    const double area = L.h() * L.h();
    SourceCells s;
    for (int j = 0; j < L.side(); ++j) {
        for (int i = 0; i < L.side(); ++i) {
            const std::size_t k = L.index(i, j);
            if (!source.mask[k] || source.values[k] == 0.0) continue;
            const Vec2 c = L.center(i, j);
            const double r2 = norm2(c);
            s.x.push_back(c.x);
            s.y.push_back(c.y);
            // y = 0 has its image at infinity; a huge finite image gives a zero term
            const double scale = r2 > 0.0 ? R2 / r2 : 1e300;
            s.ix.push_back(r2 > 0.0 ? c.x * scale : 1e150);
            s.iy.push_back(r2 > 0.0 ? c.y * scale : 0.0);
            s.w.push_back(area * source.values[k] * kInv2Pi);
            s.ci.push_back(i);
            s.cj.push_back(j);
        }
    }
    return s;
}

// Far-field sum over all compacted sources at midpoint resolution.
Vec2 far_sum(const SourceCells& s, double tx, double ty) {
    double ax = 0.0;
    double ay = 0.0;
    const std::size_t n = s.w.size();
    const double* __restrict__ sx = s.x.data();
    const double* __restrict__ sy = s.y.data();
    const double* __restrict__ six = s.ix.data();
    const double* __restrict__ siy = s.iy.data();
    const double* __restrict__ sw = s.w.data();
#pragma omp simd reduction(+ : ax, ay)
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = tx - sx[k];
        const double dy = ty - sy[k];
        const double ex = tx - six[k];
        const double ey = ty - siy[k];
        const double r2 = dx * dx + dy * dy;
        const double q2 = ex * ex + ey * ey;
        // the self cell (r2 = 0) is replaced by the near-field correction
        const double inv_r2 = r2 > 0.0 ? 1.0 / r2 : 0.0;
        const double inv_q2 = 1.0 / q2;
        ax += sw[k] * (ex * inv_q2 - dx * inv_r2);
        ay += sw[k] * (ey * inv_q2 - dy * inv_r2);
    }
    return {ax, ay};
}

// Kernel summed over the refined subcells of source cell (ci, cj), minus its midpoint value.
Vec2 near_correction(const GridLayout& L, double value, int ci, int cj, Vec2 target) {
    const double R2 = L.radius * L.radius;
    const double h = L.h();
    const Vec2 c = L.center(ci, cj);
    const double sub = h / kNearFieldRefine;
    const double wsub = sub * sub * value * kInv2Pi;
    auto kernel = [&](Vec2 y, double w) {
        const Vec2 d = target - y;
        const double r2 = norm2(d);
        // the singular part of a subnode sitting on the target is skipped; the image part stays
        Vec2 k = r2 > 0.0 ? d * (-1.0 / r2) : Vec2{};
        const double y2 = norm2(y);
        if (y2 > 0.0) {
            const Vec2 e = target - y * (R2 / y2);
            k += e / norm2(e);
        }
        return k * w;
    };
    Vec2 acc;
    for (int b = 0; b < kNearFieldRefine; ++b)
        for (int a = 0; a < kNearFieldRefine; ++a) {
            const Vec2 y{c.x - 0.5 * h + (a + 0.5) * sub, c.y - 0.5 * h + (b + 0.5) * sub};
            acc += kernel(y, wsub);
        }
    return acc - kernel(c, h * h * value * kInv2Pi);
}

Vec2 field_at_node(const SourceGrid& source, const SourceCells& cells, int i, int j) {
    const GridLayout& L = source.layout;
    const Vec2 t = L.center(i, j);
    Vec2 e = far_sum(cells, t.x, t.y);
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            const int ii = i + di;
            const int jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= L.side() || jj >= L.side()) continue;
            const std::size_t k = L.index(ii, jj);
            if (!source.mask[k] || source.values[k] == 0.0) continue;
            e += near_correction(L, source.values[k], ii, jj, t);
        }
    return e;
}

std::vector<std::size_t> inside_targets(const GridLayout& L, const std::vector<std::uint8_t>& mask) {
    std::vector<std::size_t> t;
    for (std::size_t k = 0; k < L.size(); ++k)
        if (mask[k]) t.push_back(k);
    return t;
}

}  // namespace

double greens_function(const DiskDomain& domain, Vec2 x, Vec2 y) {
    const double r = norm(x - y);
    if (r == 0.0) throw Error(ErrorCode::singular_kernel, "Green's function evaluated at x = y");
    const double R = domain.radius();
    const double ny = norm(y);
    // G = −ln|x−y|/(2π) + ln(|y||x − y*|/R)/(2π); for y = 0 the image term is ln R/(2π)
    double image;
    if (ny == 0.0) {
        image = std::log(R);
    } else {
        const Vec2 ystar = y * (R * R / (ny * ny));
        image = std::log(ny * norm(x - ystar) / R);
    }
    return kInv2Pi * (image - std::log(r));
}

Vec2 greens_gradient(const DiskDomain& domain, Vec2 x, Vec2 y) {
    const Vec2 d = x - y;
    const double r2 = norm2(d);
    if (r2 == 0.0) {
        std::ostringstream msg;
        msg << "Green's kernel is singular at x = y = (" << x.x << ", " << x.y << ")";
        throw Error(ErrorCode::singular_kernel, msg.str());
    }
    Vec2 g = d * (-kInv2Pi / r2);
    const double y2 = norm2(y);
    if (y2 > 0.0) {
        const double R2 = domain.radius() * domain.radius();
        const Vec2 e = x - y * (R2 / y2);
        g += e * (kInv2Pi / norm2(e));
    }
    return g;
}

FieldGrid assemble_field_serial(const SourceGrid& source) {
    const GridLayout& L = source.layout;
    const SourceCells cells = compact_sources(source);
    const auto mask = inside_mask(L);
    const auto targets = inside_targets(L, mask);
    std::vector<Vec2> values(L.size());
    if (!cells.w.empty()) {
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const std::size_t k = targets[t];
            const int i = static_cast<int>(k % L.side());
            const int j = static_cast<int>(k / L.side());
            values[k] = field_at_node(source, cells, i, j);
        }
    }
    return FieldGrid::from_inside_values(L, std::move(values));
}

FieldGrid assemble_field(const SourceGrid& source) {
    const GridLayout& L = source.layout;
    const SourceCells cells = compact_sources(source);
    const auto mask = inside_mask(L);
    const auto targets = inside_targets(L, mask);
    std::vector<Vec2> values(L.size());
    if (!cells.w.empty()) {
        const long n = static_cast<long>(targets.size());
#pragma omp parallel for schedule(static)
        for (long t = 0; t < n; ++t) {
            const std::size_t k = targets[t];
            const int i = static_cast<int>(k % L.side());
            const int j = static_cast<int>(k / L.side());
            values[k] = field_at_node(source, cells, i, j);
        }
    }
    return FieldGrid::from_inside_values(L, std::move(values));
}

FieldGrid assemble_doping_field(const DopingProfile& profile, const GridLayout& layout) {
    return assemble_field(make_source(layout, [&](Vec2 x) { return profile(x); }));
}

FieldBoundReport field_bound_diagnostics(const FieldGrid& field, const DopingProfile& profile,
                                         double rho_sup, double eps, double ratio_limit) {
    FieldBoundReport r;
    r.m0 = field.sup_norm();
    r.m1 = field.gradient_sup_norm();
    const GridLayout& L = field.layout();
    for (int j = 0; j < L.side(); ++j)
        for (int i = 0; i < L.side(); ++i)
            if (field.inside()[L.index(i, j)])
                r.n_sup = std::max(r.n_sup, std::abs(profile(L.center(i, j))));
    r.rho_sup = rho_sup;
    r.eps = eps;
    const double denom = r.n_sup + eps * eps * rho_sup;
    r.ratio = denom > 0.0 ? r.m0 / denom : 0.0;
    r.ratio_limit = ratio_limit;
    r.flagged = r.ratio > ratio_limit;
    return r;
}

}  // namespace vpinv
