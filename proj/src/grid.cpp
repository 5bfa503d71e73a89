#include "vpinv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

GridLayout field_layout(int cells, double radius) {
    if (cells < 4) throw Error(ErrorCode::invalid_config, "grid needs at least 4 cells");
    return GridLayout{cells, kFieldPad, radius};
}

double ScalarGrid::interpolate_clamped(Vec2 x) const {
    const int n = layout.side();
    const double inv_h = 1.0 / layout.h();
    double u = (x.x - layout.origin()) * inv_h - 0.5;
    double w = (x.y - layout.origin()) * inv_h - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    w = std::clamp(w, 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(u), n - 2);
    const int j = std::min(static_cast<int>(w), n - 2);
    const double a = u - i;
    const double b = w - j;
    auto val = [&](int ii, int jj) {
        const std::size_t k = layout.index(ii, jj);
        return mask[k] ? values[k] : 0.0;
    };
    return (1 - b) * ((1 - a) * val(i, j) + a * val(i + 1, j)) +
           b * ((1 - a) * val(i, j + 1) + a * val(i + 1, j + 1));
}

double ScalarGrid::sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
        if (mask[k]) m = std::max(m, std::abs(values[k]));
    return m;
}

std::vector<std::uint8_t> inside_mask(const GridLayout& layout) {
    const DiskDomain domain(layout.radius);
    std::vector<std::uint8_t> mask(layout.size(), 0);
    for (int j = 0; j < layout.side(); ++j)
        for (int i = 0; i < layout.side(); ++i)
            mask[layout.index(i, j)] = domain.contains(layout.center(i, j)) ? 1 : 0;
    return mask;
}

SourceGrid make_source(const GridLayout& layout, const std::function<double(Vec2)>& f) {
    SourceGrid g(layout);
    g.mask = inside_mask(layout);
    for (int j = 0; j < layout.side(); ++j)
        for (int i = 0; i < layout.side(); ++i) {
            const std::size_t k = layout.index(i, j);
            if (g.mask[k]) g.values[k] = f(layout.center(i, j));
        }
    return g;
}

namespace {

bool in_band(const GridLayout& layout, Vec2 c) {
    return norm(c) <= layout.radius + kFieldPad * layout.h();
}

// Linear least-squares fit over inside nodes of a (2w+1)² window, evaluated at the center.
bool extrapolate_linear(const GridLayout& layout, const std::vector<Vec2>& values,
                        const std::vector<std::uint8_t>& inside, int i, int j, Vec2& out) {
    constexpr int w = 3;
    double s0 = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    Vec2 f0, fx, fy;
    const int n = layout.side();
    for (int l = std::max(0, j - w); l <= std::min(n - 1, j + w); ++l) {
        for (int k = std::max(0, i - w); k <= std::min(n - 1, i + w); ++k) {
            const std::size_t idx = layout.index(k, l);
            if (!inside[idx]) continue;
            const double dx = k - i;
            const double dy = l - j;
            const Vec2 f = values[idx];
            s0 += 1; sx += dx; sy += dy;
            sxx += dx * dx; sxy += dx * dy; syy += dy * dy;
            f0 += f; fx += f * dx; fy += f * dy;
        }
    }
    if (s0 < 3) return false;
    // Cramer's rule for the intercept of [s0 sx sy; sx sxx sxy; sy sxy syy] [a b c]ᵀ = [f0 fx fy]ᵀ
    const double det = s0 * (sxx * syy - sxy * sxy) - sx * (sx * syy - sxy * sy) +
                       sy * (sx * sxy - sxx * sy);
    if (std::abs(det) < 1e-9 * std::max(1.0, s0 * sxx * syy)) return false;
    auto intercept = [&](double r0, double r1, double r2) {
        return (r0 * (sxx * syy - sxy * sxy) - sx * (r1 * syy - sxy * r2) +
                sy * (r1 * sxy - sxx * r2)) /
               det;
    };
    out = {intercept(f0.x, fx.x, fy.x), intercept(f0.y, fx.y, fy.y)};
    return true;
}

}  // namespace

FieldGrid FieldGrid::from_inside_values(const GridLayout& layout, std::vector<Vec2> values) {
    if (values.size() != layout.size())
        throw Error(ErrorCode::invalid_config, "field values do not match the grid layout");
    FieldGrid g;
    g.layout_ = layout;
    g.inside_ = inside_mask(layout);
    g.valid_ = g.inside_;
    g.values_ = std::move(values);
    const int n = layout.side();
    std::vector<Vec2> ghost(layout.size());
    std::vector<std::uint8_t> has_ghost(layout.size(), 0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = layout.index(i, j);
            if (g.inside_[k]) continue;
            g.values_[k] = {};
            if (!in_band(layout, layout.center(i, j))) continue;
            Vec2 v;
            if (extrapolate_linear(layout, g.values_, g.inside_, i, j, v)) {
                ghost[k] = v;
                has_ghost[k] = 1;
            }
        }
    }
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (has_ghost[k]) {
            g.values_[k] = ghost[k];
            g.valid_[k] = 1;
        }
    }
    g.finalize();
    return g;
}

FieldGrid FieldGrid::sample(const GridLayout& layout, const std::function<Vec2(Vec2)>& f) {
    FieldGrid g;
    g.layout_ = layout;
    g.inside_ = inside_mask(layout);
    g.valid_.assign(layout.size(), 0);
    g.values_.assign(layout.size(), Vec2{});
    for (int j = 0; j < layout.side(); ++j)
        for (int i = 0; i < layout.side(); ++i) {
            const std::size_t k = layout.index(i, j);
            const Vec2 c = layout.center(i, j);
            if (g.inside_[k] || in_band(layout, c)) {
                g.values_[k] = f(c);
                g.valid_[k] = 1;
            }
        }
    g.finalize();
    return g;
}

FieldGrid FieldGrid::from_all_values(const GridLayout& layout, std::vector<Vec2> values) {
    if (values.size() != layout.size())
        throw Error(ErrorCode::invalid_config, "field values do not match the grid layout");
    FieldGrid g;
    g.layout_ = layout;
    g.inside_ = inside_mask(layout);
    g.valid_.assign(layout.size(), 1);
    g.values_ = std::move(values);
    g.finalize();
    return g;
}

FieldGrid FieldGrid::zero(const GridLayout& layout) {
    return sample(layout, [](Vec2) { return Vec2{}; });
}

void FieldGrid::finalize() {
    const int n = layout_.side();
    const double inv2h = 0.5 / layout_.h();
    const double invh = 1.0 / layout_.h();
    grad_.assign(layout_.size(), Mat2{});
    grad_valid_.assign(layout_.size(), 0);
    auto ok = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < n && j < n && valid_[layout_.index(i, j)];
    };
    // derivative along axis (di, dj) at node (i, j); false if neither neighbor is valid
    auto diff = [&](int i, int j, int di, int dj, Vec2& d) {
        const bool fwd = ok(i + di, j + dj);
        const bool bwd = ok(i - di, j - dj);
        if (fwd && bwd) {
            d = (node(i + di, j + dj) - node(i - di, j - dj)) * inv2h;
        } else if (fwd) {
            d = (node(i + di, j + dj) - node(i, j)) * invh;
        } else if (bwd) {
            d = (node(i, j) - node(i - di, j - dj)) * invh;
        } else {
            return false;
        }
        return true;
    };
    sup_inside_ = sup_valid_ = grad_sup_inside_ = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = layout_.index(i, j);
            if (!valid_[k]) continue;
            const double mag = norm(values_[k]);
            sup_valid_ = std::max(sup_valid_, mag);
            if (inside_[k]) sup_inside_ = std::max(sup_inside_, mag);
            Vec2 dx, dy;
            if (diff(i, j, 1, 0, dx) && diff(i, j, 0, 1, dy)) {
                grad_[k] = Mat2{{{dx.x, dy.x}, {dx.y, dy.y}}};
                grad_valid_[k] = 1;
                if (inside_[k]) grad_sup_inside_ = std::max(grad_sup_inside_, grad_[k].frobenius());
            }
        }
    }
}

Vec2 FieldGrid::at(Vec2 x) const {
    Vec2 out;
    if (!try_at(x, out)) {
        std::ostringstream msg;
        msg << "field query at (" << x.x << ", " << x.y << ") outside the valid grid region";
        throw Error(ErrorCode::left_grid, msg.str());
    }
    return out;
}

Mat2 FieldGrid::gradient_at(Vec2 x) const {
    Mat2 out;
    if (!try_gradient_at(x, out)) {
        std::ostringstream msg;
        msg << "gradient query at (" << x.x << ", " << x.y << ") outside the valid grid region";
        throw Error(ErrorCode::left_grid, msg.str());
    }
    return out;
}

FieldGrid FieldGrid::combined(double a, const FieldGrid& other, double b) const {
    if (!(layout_ == other.layout_))
        throw Error(ErrorCode::invalid_config, "cannot combine fields on different layouts");
    FieldGrid g = *this;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        g.valid_[k] = valid_[k] & other.valid_[k];
        g.values_[k] = g.valid_[k] ? values_[k] * a + other.values_[k] * b : Vec2{};
    }
    g.finalize();
    return g;
}

}  // namespace vpinv
