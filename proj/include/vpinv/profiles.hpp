#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vpinv/geometry.hpp"
#include "vpinv/grid.hpp"

namespace vpinv {

/// Sign s in div Ẽ_N = s·N. With −Δφ = N and Ẽ_N = ∇φ, s = −1.
inline constexpr double kDivergenceSign = -1.0;

enum class ProfileKind { constant, gaussian, radial_polynomial, grid };

const char* to_string(ProfileKind kind);

/*!
 * Doping profile N with its W^{1,∞} bound m0 = sup|N| + sup|∇N|.
 *
 * - constant: N ≡ n0
 * - gaussian: N = A·exp(−|x − c|²/(2σ²))
 * - radial_polynomial: N = Σ_k c_k |x|^{2k}
 * - grid: bilinear interpolation of a sampled grid, clamped outside it
 */
class DopingProfile {
  public:
    static DopingProfile constant(double n0);
    static DopingProfile gaussian(double amplitude, Vec2 center, double width);
    static DopingProfile radial_polynomial(std::vector<double> coeffs);
    static DopingProfile sampled(ScalarGrid grid);
    /// Canonical test phantom: A = 1, center (0.2, 0), σ = 0.15.
    static DopingProfile default_phantom();

    ProfileKind kind() const { return kind_; }
    double operator()(Vec2 x) const;
    Vec2 gradient(Vec2 x) const;
    double m0() const { return m0_; }
    /// Same profile with every value multiplied by s.
    DopingProfile scaled(double s) const;

    double n0() const { return params_.at(0); }
    double amplitude() const { return params_.at(0); }
    Vec2 center() const { return {params_.at(1), params_.at(2)}; }
    double width() const { return params_.at(3); }
    const std::vector<double>& coefficients() const { return params_; }
    const ScalarGrid& grid() const { return *grid_; }

    /// One-line description, e.g. "gaussian(1,0.2,0,0.15)".
    std::string describe() const;

  private:
    void compute_m0();

    ProfileKind kind_{ProfileKind::constant};
    std::vector<double> params_;
    std::shared_ptr<const ScalarGrid> grid_;
    double m0_{0.0};
};

/// m0 estimate by probing |N| and a central-difference |∇N| on an n×n grid over the disk.
double probe_m0(const DopingProfile& profile, double radius, int n = 256);

/*!
 * Closed-form potential φ_N (−Δφ_N = N, φ_N = 0 on ∂Ω) and field Ẽ_N = ∇φ_N.
 * Available for constant and radial-polynomial profiles on a disk of any
 * radius; other kinds throw no-analytic-reference.
 */
class AnalyticReference {
  public:
    AnalyticReference(DopingProfile profile, DiskDomain domain);

    double potential(Vec2 x) const;
    Vec2 field(Vec2 x) const;
    /// ∫_0^L Ẽ_N(entry + θ t) dt in Cartesian components.
    Vec2 chord_integral(const Chord& chord) const;

    const DopingProfile& profile() const { return profile_; }
    const DiskDomain& domain() const { return domain_; }

  private:
    DopingProfile profile_;
    DiskDomain domain_;
    std::vector<double> coeffs_;  // radial coefficients; constant → {n0}
};

/// Ẽ_N for constant n0: −n0·x/2.
Vec2 reference_field(const DopingProfile& profile, Vec2 x);
/// Chord integral of reference_field; θ-component 0, θ⊥-component −n0·s·√(R²−s²).
Vec2 reference_chord_integral(const DopingProfile& profile, const DiskDomain& domain,
                              const Chord& chord);

}  // namespace vpinv
