#pragma once

#include <vector>

#include "vpinv/characteristics.hpp"
#include "vpinv/grid.hpp"
#include "vpinv/profiles.hpp"

namespace vpinv {

/// χ(r) = exp(1 − 1/(1 − r²)) for r < 1, else 0.
double bump(double r);
/// sup |χ'| (attained near r ≈ 0.75).
double bump_slope_max();

/*!
 * Incoming beam data ψ(x, v) = χ(|x − x0|/ε)·χ(|v − p0|/ε), ε = c0/|p0|.
 */
struct BeamData {
    Vec2 x0;
    Vec2 p0;
    Vec2 direction;
    double speed{0.0};
    double eps{0.0};
    double c0{1.0};
    double c0p{4.0};
    double radius{1.0};

    double psi(Vec2 x, Vec2 v) const;
};

/// Probed properties of ψ, recorded by make_beam.
struct BeamProbe {
    double peak{0.0};           ///< ψ(x0, p0)
    double grad_sup{0.0};       ///< finite-difference sup |∇_{x,v} ψ| over the support
    double grad_limit{0.0};     ///< c0p·|p0|
};

/*!
 * Validates and builds beam data. x0 must lie on ∂Ω with speed·direction
 * incoming (outgoing-injection otherwise) and speed ≥ threshold
 * (below-threshold otherwise). Throws invalid-config when the probed
 * sup|∇ψ| exceeds c0p·|p0|.
 */
BeamData make_beam(const DiskDomain& domain, Vec2 x0, Vec2 direction, double speed, double c0,
                   double c0p, double threshold, BeamProbe* probe = nullptr);
BeamData make_beam(const Chord& chord, double speed, double c0, double c0p, double threshold,
                   BeamProbe* probe = nullptr);

struct DepositOptions {
    int n_v{8};
    /// Tube Σ half-width in units of ε (default 2ε).
    double tube_scale{2.0};
    TraceOptions trace{};
};

struct DepositReport {
    int tube_cells{0};
    long traces{0};     ///< backward traces actually run (after the support prefilter)
    int trapped{0};     ///< (cell, velocity) pairs whose backward trace did not exit
    int left_grid{0};
    int flagged_cells{0};
};

/// Distance from x to the ray x0 + p0ℝ₊.
double ray_distance(const BeamData& beam, Vec2 x);

/// Upper bound on the backward exit time at speed |v| in a field bounded by m0.
double backward_time_bound(double speed, double m0, double radius);

/*!
 * ρ(x) = Σ_k w_k ψ(x₋(x, v_k), v₋(x, v_k)) at every inside cell within the
 * tube, with v_k an n_v×n_v midpoint grid on [p0 − a, p0 + a]²,
 * a = min(2ε, ε + M0·t_b) where t_b bounds the backward exit time. Pairs that
 * provably miss supp ψ are skipped without tracing. Parallel over tube
 * cells; bitwise identical to deposit_rho_serial.
 */
ScalarGrid deposit_rho(const BeamData& beam, const FieldGrid& field, const DepositOptions& opts = {},
                       DepositReport* report = nullptr);
ScalarGrid deposit_rho_serial(const BeamData& beam, const FieldGrid& field,
                              const DepositOptions& opts = {}, DepositReport* report = nullptr);

/// ρ at one point (for oracles and shell checks).
double deposit_point(const BeamData& beam, const FieldGrid& field, Vec2 x, int n_v,
                     const TraceOptions& trace = {}, DepositReport* report = nullptr);

struct FixedPointOptions {
    double tol{1e-10};
    int max_iter{20};
    DepositOptions deposit{};
    /// false: E = Ẽ_N, no density is deposited.
    bool self_field{true};
    bool parallel{true};
};

struct KineticState {
    ScalarGrid rho;
    FieldGrid field;                ///< E_f = Ẽ_N − Ẽ_ρ
    int iterations{0};
    std::vector<double> residuals;  ///< ‖ρⁿ − ρⁿ⁻¹‖_∞, n = 1, 2, ...
    double lambda_hat{0.0};         ///< max ratio of successive residuals above roundoff
    bool converged{false};
    double tube_scale{2.0};         ///< final tube width (grows if ρ leaks out)
    DepositReport quality;
};

/*!
 * Fixed point ρⁿ⁺¹ = deposit(Eⁿ), Eⁿ⁺¹ = Ẽ_N − assemble(ρⁿ⁺¹) starting from
 * E⁰ = Ẽ_N. Stops when the residual is ≤ tol. Throws non-contraction when
 * two consecutive residual ratios are ≥ 1.
 */
KineticState fixed_point_solve(const BeamData& beam, const FieldGrid& doping_field,
                               const FixedPointOptions& opts = {});
KineticState fixed_point_solve(const BeamData& beam, const DopingProfile& profile,
                               const GridLayout& layout, const FixedPointOptions& opts = {});

}  // namespace vpinv
