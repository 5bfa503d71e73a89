#pragma once

#include "vpinv/geometry.hpp"
#include "vpinv/grid.hpp"
#include "vpinv/profiles.hpp"

namespace vpinv {

/// Dirichlet Green's function of −Δ on the disk (image-charge form).
double greens_function(const DiskDomain& domain, Vec2 x, Vec2 y);

/*!
 * ∇_x G(x, y) = −(x − y)/(2π|x − y|²) + (x − y*)/(2π|x − y*|²),
 * y* = R² y/|y|². The image term vanishes in the y → 0 limit.
 * Throws singular-kernel for x = y.
 */
Vec2 greens_gradient(const DiskDomain& domain, Vec2 x, Vec2 y);

/// Refinement factor of the 3×3 near-field neighborhood.
inline constexpr int kNearFieldRefine = 4;

/*!
 * E(x) = Σ_cells h²·∇_xG(x, y_c)·source(y_c) at every inside cell center.
 *
 * The 3×3 neighborhood of each target is re-integrated on a 4× refined
 * midpoint subgrid (piecewise-constant source); subnodes coinciding with
 * the target are skipped. Ghost nodes outside ∂Ω are then extrapolated.
 * Parallel over target cells; each target sums its sources in a fixed
 * order, so the result is bitwise identical to assemble_field_serial.
 */
FieldGrid assemble_field(const SourceGrid& source);
FieldGrid assemble_field_serial(const SourceGrid& source);

/// Ẽ_N on the field layout.
FieldGrid assemble_doping_field(const DopingProfile& profile, const GridLayout& layout);

struct FieldBoundReport {
    double m0{0.0};          ///< ‖E‖_∞ over inside nodes
    double m1{0.0};          ///< ‖∇E‖_∞ (finite differences)
    double n_sup{0.0};       ///< ‖N‖_∞
    double rho_sup{0.0};
    double eps{0.0};
    double ratio{0.0};       ///< m0 / (‖N‖_∞ + ε²·rho_sup)
    double ratio_limit{0.0};
    bool flagged{false};     ///< ratio exceeds the configured constant
};

/// Compares M0 against the C(‖N‖ + ε^d‖g‖) shape; flags but never fails.
FieldBoundReport field_bound_diagnostics(const FieldGrid& field, const DopingProfile& profile,
                                         double rho_sup, double eps, double ratio_limit = 2.0);

}  // namespace vpinv
