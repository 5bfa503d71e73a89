#pragma once

#include <optional>
#include <vector>

#include "vpinv/characteristics.hpp"
#include "vpinv/geometry.hpp"
#include "vpinv/kinetic.hpp"
#include "vpinv/profiles.hpp"

namespace vpinv {

struct MeasureOptions {
    double c0{1.0};
    double c0p{4.0};
    FixedPointOptions fixed_point{};
    /// Step multiplier for the central characteristic (finer than the deposit traces).
    double central_step_scale{0.125};
    /// Sample the outgoing distribution on Γ₊ and locate its maximum.
    bool verify_peak{false};
    int peak_samples{41};
    bool record_path{false};
};

/// Location of the sampled maximum of f on Γ₊ near the traced exit.
struct PeakCheck {
    Vec2 x_peak;
    Vec2 v_peak;
    double f_peak{0.0};
    double position_error{0.0};  ///< |x_peak − x₊|
    double velocity_error{0.0};  ///< |v_peak − v₊|
    double resolution{0.0};      ///< sampling step in x and v
};

struct Measurement {
    Chord chord;
    double speed{0.0};
    ExitRecord exit;
    Vec2 m;                  ///< |p0|·(v₊ − p0), Cartesian
    double m_parallel{0.0};  ///< θ·m
    double m_perp{0.0};      ///< θ⊥·m
    double t_star{0.0};      ///< L/|p0|
    double threshold{0.0};
    double eps{0.0};
    int iterations{0};
    double lambda_hat{0.0};
    std::vector<double> residuals;
    DepositReport quality;
    std::optional<PeakCheck> peak;
    std::vector<PathSample> path;
};

/*!
 * Runs the beam (chord.entry, speed·θ) to self-consistency in Ẽ_N (given as
 * an assembled field) and traces the central characteristic in E_f.
 * Throws below-threshold, trapped, left-grid or non-contraction.
 */
Measurement measure_beam(const Chord& chord, double speed, const FieldGrid& doping_field,
                         const MeasureOptions& opts = {}, KineticState* state = nullptr);

struct SpeedSweep {
    Chord chord;
    std::vector<double> speeds;
    std::vector<Measurement> measurements;
    Vec2 extrapolated;      ///< Richardson limit from the two largest speeds
    Vec2 raw_largest;       ///< m at the largest speed
    double order_hat{0.0};  ///< log-log slope of |m(σ) − m_∞| against 1/σ
};

/// m_∞ = (r²·m(σ₂) − m(σ₁))/(r² − 1), r = σ₂/σ₁ (r = 2 gives (4m(2σ) − m(σ))/3).
Vec2 richardson(double s1, Vec2 m1, double s2, Vec2 m2);

/// Least-squares slope of log y against log(1/x); NaN if fewer than two positive points.
double loglog_order(const std::vector<double>& speeds, const std::vector<double>& errors);

SpeedSweep sweep_and_extrapolate(const Chord& chord, const FieldGrid& doping_field,
                                 std::vector<double> speeds, const MeasureOptions& opts = {});

struct ExitTimeReport {
    std::vector<double> speeds;
    std::vector<double> t_plus;
    std::vector<double> t_star;
    std::vector<double> deviation;  ///< |t₊ − t₊*|
    std::vector<double> t_cap;      ///< 4R/|p0|
    double k_fit{0.0};              ///< K = deviation·speed³ at the smallest speed
    bool cap_ok{true};              ///< every t₊ ≤ 4R/|p0|
    bool cubic_ok{true};            ///< deviation ≤ 1.5·K/speed³ at every speed
    double order_hat{0.0};          ///< log-log decay order of the deviation
};

ExitTimeReport exit_time_consistency(const Chord& chord, const FieldGrid& doping_field,
                                     std::vector<double> speeds, const MeasureOptions& opts = {});
ExitTimeReport exit_time_consistency(const SpeedSweep& sweep, double diameter);

}  // namespace vpinv
