#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vpinv/albedo.hpp"
#include "vpinv/geometry.hpp"
#include "vpinv/grid.hpp"
#include "vpinv/profiles.hpp"

namespace vpinv {

/*!
 * Vector sinogram over n_a uniform angles in [0, π) and n_s uniform offsets
 * in [−s_max, s_max], s_max = 0.95·R by default. Values are Cartesian
 * components of the chord integral; parallel_residual = θ·value.
 */
struct Sinogram {
    int n_a{0};
    int n_s{0};
    double radius{1.0};
    double offset_max{0.95};
    std::vector<Vec2> values;
    std::vector<double> parallel_residual;

    Sinogram() = default;
    Sinogram(int n_a, int n_s, double radius, double offset_fraction = 0.95);

    double angle(int i) const;
    double offset(int j) const;
    double angle_step() const;
    double offset_step() const;
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_s + j; }
    Vec2& at(int i, int j) { return values[index(i, j)]; }
    const Vec2& at(int i, int j) const { return values[index(i, j)]; }
    Chord chord(int i, int j) const;
    /// Recomputes parallel_residual from values.
    void update_residuals();
};

enum class AcquireMode { simulate, oracle };

AcquireMode parse_acquire_mode(const std::string& s);
const char* to_string(AcquireMode m);

struct ChordRecord {
    int angle_index{0};
    int offset_index{0};
    double angle{0.0};
    double offset{0.0};
    bool failed{false};
    std::string error;
    Vec2 value;
    /// Simulate mode only.
    std::vector<double> speeds;
    std::vector<Vec2> m;
    std::vector<double> t_plus;
    std::vector<double> lambda_hat;
    std::vector<int> iterations;
    double order_hat{0.0};
};

struct AcquireOptions {
    AcquireMode mode{AcquireMode::oracle};
    std::vector<double> speeds{50.0, 100.0};
    MeasureOptions measure{};
    double offset_fraction{0.95};
    double max_failure_fraction{0.02};
    bool parallel{true};
    /// Called after each finished chord with (done, total); serialized.
    std::function<void(int, int)> progress;
};

struct AcquireResult {
    Sinogram sinogram;
    std::vector<ChordRecord> records;
    int failures{0};
};

/// Replaces entries with ok = 0 by linear interpolation between the nearest good
/// offsets at the same angle (nearest value at the ends).
void fill_failed_chords(Sinogram& sino, const std::vector<std::uint8_t>& ok);

/// Exact ∫_0^L E(entry + θt) dt of the bilinear interpolant (2-point Gauss per cell piece).
Vec2 chord_integral(const FieldGrid& field, const Chord& chord);

/*!
 * Fills the sinogram of Ẽ_N (given as an assembled field). Simulate mode runs
 * sweep_and_extrapolate per chord; oracle mode integrates the field along the
 * chord. Failed chords are interpolated from offset neighbours when they
 * make up at most max_failure_fraction of entries, else too-many-failures.
 */
AcquireResult acquire(const FieldGrid& doping_field, int n_a, int n_s,
                      const AcquireOptions& opts = {});
AcquireResult acquire_serial(const FieldGrid& doping_field, int n_a, int n_s,
                             const AcquireOptions& opts = {});

/// Discrete Ram-Lak kernel value h[k] for offset step ds.
double ramp_kernel(int k, double ds);

/// Filtered back-projection of one Cartesian component (0 or 1) onto `layout` cell centers.
ScalarGrid fbp(const Sinogram& sino, int component, const GridLayout& layout);
ScalarGrid fbp_serial(const Sinogram& sino, int component, const GridLayout& layout);

/// Reconstruction grid: n cells across [−R, R]², no padding.
GridLayout reconstruction_layout(int n, double radius);

/// Both components by FBP, as a field on the reconstruction grid.
FieldGrid reconstruct_field(const Sinogram& sino, int n, bool parallel = true);

/// N̂ = div Ê / kDivergenceSign by central differences; the outer cell ring is masked out.
ScalarGrid recover_N(const FieldGrid& e_hat);

struct Metrics {
    double l2_rel{0.0};
    double linf{0.0};
    double ref_l2{0.0};
    int cells{0};
    double region{0.85};

    static std::string csv_header();
    std::string csv_row() const;
};

/// Relative L² and absolute L∞ error of N̂ over masked cells with |x| ≤ region·R.
Metrics metrics(const ScalarGrid& n_hat, const DopingProfile& profile, double region = 0.85);

struct ReconstructionResult {
    FieldGrid e_hat;
    ScalarGrid n_hat;
    Metrics metrics;
};

ReconstructionResult reconstruct(const Sinogram& sino, int n, const DopingProfile& truth,
                                 bool parallel = true);

}  // namespace vpinv
