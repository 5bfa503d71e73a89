#pragma once

#include <optional>
#include <vector>

#include "vpinv/grid.hpp"
#include "vpinv/linalg.hpp"

namespace vpinv {

struct PhasePoint {
    Vec2 x;
    Vec2 v;
};

enum class Direction { forward, backward };

enum class ExitStatus { exited, trapped, left_grid };

const char* to_string(ExitStatus s);

/*!
 * Boundary exit of a characteristic. For forward traces this is (t₊, x₊, v₊);
 * for backward traces the same fields hold (t₋, x₋, v₋) with t ≥ 0 the
 * elapsed backward time, x₋ = X(−t₋) and v₋ = V(−t₋).
 */
struct ExitRecord {
    double t_plus{0.0};
    Vec2 x_plus;
    Vec2 v_plus;
    ExitStatus status{ExitStatus::exited};
    int steps{0};
};

struct PathSample {
    double t;
    Vec2 x;
    Vec2 v;
};

struct TraceOptions {
    /// Multiplier on the default step min(h/(2|v|), t_cap/64).
    double step_scale{1.0};
    int max_bisection{60};
    bool record_path{false};
};

struct TraceResult {
    ExitRecord exit;
    std::vector<PathSample> path;
};

/// t_cap = 4·diam(Ω)/|v|
double exit_time_cap(const FieldGrid& field, double speed);
/// Δt = step_scale·min(h/(2|v|), t_cap/64)
double trace_step(const FieldGrid& field, double speed, const TraceOptions& opts = {});

/*!
 * Integrates Ẋ = V, V̇ = E(X) with classical RK4 at fixed step until the
 * first step with ξ(X) < 0, then bisects that step to localize the crossing.
 * Reports trapped once the elapsed time exceeds 10·t_cap and left_grid when
 * the field cannot be evaluated.
 */
TraceResult trace(const PhasePoint& start, const FieldGrid& field, Direction dir,
                  const TraceOptions& opts = {});

/// (X, V)(±duration) with the trace step rule and no exit detection.
PhasePoint propagate(const PhasePoint& start, const FieldGrid& field, double duration,
                     Direction dir = Direction::forward, const TraceOptions& opts = {});

/*!
 * Jacobian ∂(X, V)/∂(x, v) in the usual convention: xx(j, i) = ∂X_j/∂x_i.
 * The row-derivative gradient ∇_x X (row = derivative index) is xx.transposed().
 */
struct VariationalState {
    Mat2 xx = Mat2::identity();
    Mat2 xv;
    Mat2 vx;
    Mat2 vv = Mat2::identity();

    double determinant() const;
};

/// Co-integrated quadratures along the trajectory, with s the signed time:
/// a(s) = ∫_0^s ∇X·∇E(X(τ)) dτ and b(s) = ∫_0^s a, for the x- and v-derivative blocks.
struct TrajectoryQuadratures {
    Mat2 a_x, a_v, b_x, b_v;
};

struct VariationalResult {
    ExitRecord exit;
    VariationalState state;
    TrajectoryQuadratures quad;
};

/// Trajectory plus the linearized flow, with ∇E from the grid's central differences.
VariationalResult trace_variational(const PhasePoint& start, const FieldGrid& field,
                                    Direction dir, const TraceOptions& opts = {});

/// Linearized flow over a fixed duration (no exit detection).
VariationalState propagate_variational(const PhasePoint& start, const FieldGrid& field,
                                       double duration, Direction dir = Direction::forward,
                                       const TraceOptions& opts = {});

/// Derivatives of the backward exit map, row index = derivative variable.
struct ExitJacobians {
    ExitRecord exit;  ///< backward exit (t₋, x₋, v₋)
    Vec2 dt_dx, dt_dv;
    Mat2 dx_dx, dx_dv;  ///< (∇_x x₋)_{ij} = ∂x₋_j/∂x_i
    Mat2 dv_dx, dv_dv;
    double obliquity{0.0};  ///< |n_{x₋}·v₋|/|v₋|
};

/// Closed-form exit-map derivatives from the variational trace. Throws
/// degenerate-exit when |n_{x₋}·v₋| < 1e-6·|v₋|.
ExitJacobians exit_map_jacobians(const PhasePoint& start, const FieldGrid& field,
                                 const TraceOptions& opts = {});

/// 1 + 2√(2·M0·R), R = diam(Ω).
double nontrapping_threshold(double m0, double diameter);
double nontrapping_threshold(const FieldGrid& field);

/// (C/(δ|p0|))·(1 + (M1/|p0|²)·e^{C(1+M1)/|p0|}), the shape of the |∇_x t₋| estimate.
double t_minus_gradient_bound(double c, double delta, double speed, double m1);

}  // namespace vpinv
