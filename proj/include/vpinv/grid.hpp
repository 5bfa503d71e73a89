#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "vpinv/geometry.hpp"
#include "vpinv/linalg.hpp"

namespace vpinv {

/*!
 * Cell-centered Cartesian layout over the bounding square [−R, R]² of the
 * disk, with `pad` extra cells on every side.
 *
 * `cells` counts cells across the diameter, so h = 2R/cells; the total node
 * count per side is cells + 2·pad. The padding holds extrapolated values so
 * trajectories can be interpolated up to and slightly past ∂Ω.
 */
struct GridLayout {
    int cells{64};
    int pad{0};
    double radius{1.0};

    int side() const { return cells + 2 * pad; }
    std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }
    double h() const { return 2.0 * radius / cells; }
    double origin() const { return -radius - pad * h(); }
    double coord(int i) const { return origin() + (i + 0.5) * h(); }
    Vec2 center(int i, int j) const { return {coord(i), coord(j)}; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * side() + i; }
    bool operator==(const GridLayout&) const = default;
};

/// Cells padded beyond the bounding square for field grids.
inline constexpr int kFieldPad = 3;

GridLayout field_layout(int cells, double radius);

/// Scalar values at cell centers with a mask (1 = meaningful value).
struct ScalarGrid {
    GridLayout layout;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    ScalarGrid() = default;
    explicit ScalarGrid(const GridLayout& l)
        : layout(l), values(l.size(), 0.0), mask(l.size(), 0) {}

    double& operator()(int i, int j) { return values[layout.index(i, j)]; }
    double operator()(int i, int j) const { return values[layout.index(i, j)]; }

    /// Bilinear interpolation, clamped to the node hull; masked-out nodes read as 0.
    double interpolate_clamped(Vec2 x) const;
    /// max |value| over masked nodes.
    double sup_norm() const;
};

/// Source N − ρ at cell centers; zero and unmasked where ξ(center) ≤ 0.
using SourceGrid = ScalarGrid;

/// Mask of nodes whose center lies strictly inside the disk.
std::vector<std::uint8_t> inside_mask(const GridLayout& layout);

/// Sample f at the inside cell centers, zero elsewhere.
SourceGrid make_source(const GridLayout& layout, const std::function<double(Vec2)>& f);

/*!
 * Sampled 2-vector field with bilinear interpolation and a finite-difference
 * gradient.
 *
 * Node classes: `inside` (center in Ω, carries computed values), `valid`
 * (inside plus the extrapolated ghost band just outside ∂Ω). Interpolation
 * succeeds only if all four surrounding nodes are valid. The gradient
 * ∇E (row j = component, column k = ∂/∂x_k) uses central differences, falling
 * back to one-sided differences at the edge of the valid region.
 */
class FieldGrid {
  public:
    FieldGrid() = default;

    /// Values given at inside nodes; ghost band filled by local linear least squares.
    static FieldGrid from_inside_values(const GridLayout& layout, std::vector<Vec2> values);
    /// Sample an analytic field on every node within the ghost band.
    static FieldGrid sample(const GridLayout& layout, const std::function<Vec2(Vec2)>& f);
    /// All nodes valid (reconstruction grids without a disk mask).
    static FieldGrid from_all_values(const GridLayout& layout, std::vector<Vec2> values);
    static FieldGrid zero(const GridLayout& layout);

    const GridLayout& layout() const { return layout_; }
    DiskDomain domain() const { return DiskDomain(layout_.radius); }

    const std::vector<Vec2>& values() const { return values_; }
    const std::vector<Mat2>& gradients() const { return grad_; }
    const std::vector<std::uint8_t>& inside() const { return inside_; }
    const std::vector<std::uint8_t>& valid() const { return valid_; }
    Vec2 node(int i, int j) const { return values_[layout_.index(i, j)]; }

    /// Bilinear interpolation; false when x is outside the valid region.
    bool try_at(Vec2 x, Vec2& out) const;
    bool try_gradient_at(Vec2 x, Mat2& out) const;
    /// Throwing variants (left-grid).
    Vec2 at(Vec2 x) const;
    Mat2 gradient_at(Vec2 x) const;

    /// M0 = max |E| over inside nodes.
    double sup_norm() const { return sup_inside_; }
    /// max |E| over all valid nodes; bounds every interpolated value.
    double sup_norm_valid() const { return sup_valid_; }
    /// M1 = max Frobenius norm of ∇E over inside nodes.
    double gradient_sup_norm() const { return grad_sup_inside_; }

    /// a·this + b·other on a shared layout (ghost extrapolation is linear, so this commutes).
    FieldGrid combined(double a, const FieldGrid& other, double b) const;

  private:
    void finalize();

    GridLayout layout_;
    std::vector<Vec2> values_;
    std::vector<Mat2> grad_;
    std::vector<std::uint8_t> inside_;
    std::vector<std::uint8_t> valid_;
    std::vector<std::uint8_t> grad_valid_;
    double sup_inside_{0.0};
    double sup_valid_{0.0};
    double grad_sup_inside_{0.0};
};

inline bool FieldGrid::try_at(Vec2 x, Vec2& out) const {
    const double inv_h = 1.0 / layout_.h();
    const double u = (x.x - layout_.origin()) * inv_h - 0.5;
    const double w = (x.y - layout_.origin()) * inv_h - 0.5;
    const double fu = std::floor(u);
    const double fw = std::floor(w);
    const int n = layout_.side();
    if (!(fu >= 0.0 && fw >= 0.0 && fu <= n - 2 && fw <= n - 2)) return false;
    const int i = static_cast<int>(fu);
    const int j = static_cast<int>(fw);
    const std::size_t k = layout_.index(i, j);
    const std::size_t nn = static_cast<std::size_t>(n);
    if (!(valid_[k] & valid_[k + 1] & valid_[k + nn] & valid_[k + nn + 1])) return false;
    const double a = u - fu;
    const double b = w - fw;
    const Vec2 lo = values_[k] * (1.0 - a) + values_[k + 1] * a;
    const Vec2 hi = values_[k + nn] * (1.0 - a) + values_[k + nn + 1] * a;
    out = lo * (1.0 - b) + hi * b;
    return true;
}

inline bool FieldGrid::try_gradient_at(Vec2 x, Mat2& out) const {
    const double inv_h = 1.0 / layout_.h();
    const double u = (x.x - layout_.origin()) * inv_h - 0.5;
    const double w = (x.y - layout_.origin()) * inv_h - 0.5;
    const double fu = std::floor(u);
    const double fw = std::floor(w);
    const int n = layout_.side();
    if (!(fu >= 0.0 && fw >= 0.0 && fu <= n - 2 && fw <= n - 2)) return false;
    const int i = static_cast<int>(fu);
    const int j = static_cast<int>(fw);
    const std::size_t k = layout_.index(i, j);
    const std::size_t nn = static_cast<std::size_t>(n);
    if (!(grad_valid_[k] & grad_valid_[k + 1] & grad_valid_[k + nn] & grad_valid_[k + nn + 1]))
        return false;
    const double a = u - fu;
    const double b = w - fw;
    const Mat2 lo = grad_[k] * (1.0 - a) + grad_[k + 1] * a;
    const Mat2 hi = grad_[k + nn] * (1.0 - a) + grad_[k + nn + 1] * a;
    out = lo * (1.0 - b) + hi * b;
    return true;
}

}  // namespace vpinv
