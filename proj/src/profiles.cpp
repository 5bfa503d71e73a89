#include "vpinv/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

const char* to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::constant: return "constant";
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::radial_polynomial: return "radial";
        case ProfileKind::grid: return "grid";
    }
    return "?";
}

DopingProfile DopingProfile::constant(double n0) {
    DopingProfile p;
    p.kind_ = ProfileKind::constant;
    p.params_ = {n0};
    p.compute_m0();
    return p;
}

DopingProfile DopingProfile::gaussian(double amplitude, Vec2 center, double width) {
    if (!(width > 0.0)) throw Error(ErrorCode::invalid_config, "gaussian width must be positive");
    DopingProfile p;
    p.kind_ = ProfileKind::gaussian;
    p.params_ = {amplitude, center.x, center.y, width};
    p.compute_m0();
    return p;
}

DopingProfile DopingProfile::radial_polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw Error(ErrorCode::invalid_config, "radial profile needs coefficients");
    DopingProfile p;
    p.kind_ = ProfileKind::radial_polynomial;
    p.params_ = std::move(coeffs);
    p.compute_m0();
    return p;
}

DopingProfile DopingProfile::sampled(ScalarGrid grid) {
    DopingProfile p;
    p.kind_ = ProfileKind::grid;
    p.grid_ = std::make_shared<const ScalarGrid>(std::move(grid));
    p.compute_m0();
    return p;
}

DopingProfile DopingProfile::default_phantom() { return gaussian(1.0, {0.2, 0.0}, 0.15); }

double DopingProfile::operator()(Vec2 x) const {
    switch (kind_) {
        case ProfileKind::constant: return params_[0];
        case ProfileKind::gaussian: {
            const double s = params_[3];
            const Vec2 d = x - Vec2{params_[1], params_[2]};
            return params_[0] * std::exp(-norm2(d) / (2.0 * s * s));
        }
        case ProfileKind::radial_polynomial: {
            const double r2 = norm2(x);
            double acc = 0.0;
            for (auto it = params_.rbegin(); it != params_.rend(); ++it) acc = acc * r2 + *it;
            return acc;
        }
        case ProfileKind::grid: return grid_->interpolate_clamped(x);
    }
    return 0.0;
}

Vec2 DopingProfile::gradient(Vec2 x) const {
    switch (kind_) {
        case ProfileKind::constant: return {};
        case ProfileKind::gaussian: {
            const double s = params_[3];
            const Vec2 d = x - Vec2{params_[1], params_[2]};
            return d * (-(*this)(x) / (s * s));
        }
        case ProfileKind::radial_polynomial: {
            // d/dx Σ c_k r^{2k} = Σ 2k c_k r^{2k−2} x
            const double r2 = norm2(x);
            double acc = 0.0;
            for (std::size_t k = params_.size(); k-- > 1;) acc = acc * r2 + 2.0 * k * params_[k];
            return x * acc;
        }
        case ProfileKind::grid: {
            const double h = grid_->layout.h() * 0.5;
            return {((*this)(x + Vec2{h, 0}) - (*this)(x - Vec2{h, 0})) / (2 * h),
                    ((*this)(x + Vec2{0, h}) - (*this)(x - Vec2{0, h})) / (2 * h)};
        }
    }
    return {};
}

void DopingProfile::compute_m0() {
    switch (kind_) {
        case ProfileKind::constant: m0_ = std::abs(params_[0]); break;
        case ProfileKind::gaussian:
            // max |∇N| = |A| e^{−1/2}/σ at distance σ from the center
            m0_ = std::abs(params_[0]) * (1.0 + std::exp(-0.5) / params_[3]);
            break;
        case ProfileKind::radial_polynomial:
        case ProfileKind::grid: {
            const double radius = kind_ == ProfileKind::grid ? grid_->layout.radius : 1.0;
            m0_ = probe_m0(*this, radius);
            break;
        }
    }
}

DopingProfile DopingProfile::scaled(double s) const {
    DopingProfile p = *this;
    switch (kind_) {
        case ProfileKind::constant:
        case ProfileKind::gaussian: p.params_[0] *= s; break;
        case ProfileKind::radial_polynomial:
            for (double& c : p.params_) c *= s;
            break;
        case ProfileKind::grid: {
            ScalarGrid g = *grid_;
            for (double& v : g.values) v *= s;
            p.grid_ = std::make_shared<const ScalarGrid>(std::move(g));
            break;
        }
    }
    p.m0_ = std::abs(s) * m0_;
    return p;
}

std::string DopingProfile::describe() const {
    std::ostringstream out;
    out.precision(17);
    out << to_string(kind_) << "(";
    if (kind_ == ProfileKind::grid) {
        out << grid_->layout.cells << "x" << grid_->layout.cells;
    } else {
        for (std::size_t k = 0; k < params_.size(); ++k) out << (k ? "," : "") << params_[k];
    }
    out << ")";
    return out.str();
}

double probe_m0(const DopingProfile& profile, double radius, int n) {
    const double h = 2.0 * radius / n;
    double sup_n = 0.0;
    double sup_g = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Vec2 x{-radius + (i + 0.5) * h, -radius + (j + 0.5) * h};
            if (norm2(x) > radius * radius) continue;
            sup_n = std::max(sup_n, std::abs(profile(x)));
            const double gx = (profile(x + Vec2{h, 0}) - profile(x - Vec2{h, 0})) / (2 * h);
            const double gy = (profile(x + Vec2{0, h}) - profile(x - Vec2{0, h})) / (2 * h);
            sup_g = std::max(sup_g, std::hypot(gx, gy));
        }
    }
    return sup_n + sup_g;
}

AnalyticReference::AnalyticReference(DopingProfile profile, DiskDomain domain)
    : profile_(std::move(profile)), domain_(domain) {
    switch (profile_.kind()) {
        case ProfileKind::constant: coeffs_ = {profile_.n0()}; break;
        case ProfileKind::radial_polynomial: coeffs_ = profile_.coefficients(); break;
        default:
            throw Error(ErrorCode::no_analytic_reference,
                        std::string("no closed-form field for profile kind ") +
                            to_string(profile_.kind()));
    }
}

// N = Σ c_k r^{2k}:  φ = Σ c_k (R^{2k+2} − r^{2k+2}) / (2k+2)²,  ∇φ = −Σ c_k r^{2k} x / (2k+2)
double AnalyticReference::potential(Vec2 x) const {
    const double r2 = norm2(x);
    const double R2 = domain_.radius() * domain_.radius();
    double acc = 0.0;
    double rp = r2;
    double Rp = R2;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const double m = 2.0 * k + 2.0;
        acc += coeffs_[k] * (Rp - rp) / (m * m);
        rp *= r2;
        Rp *= R2;
    }
    return acc;
}

Vec2 AnalyticReference::field(Vec2 x) const {
    const double r2 = norm2(x);
    double acc = 0.0;
    double rp = 1.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        acc += coeffs_[k] * rp / (2.0 * k + 2.0);
        rp *= r2;
    }
    return x * (-acc);
}

Vec2 AnalyticReference::chord_integral(const Chord& chord) const {
    // Along x = s θ⊥ + u θ, u ∈ [−a, a]: r² = s² + u², θ-part is odd in u and vanishes.
    // θ⊥-part: −s Σ c_k/(2k+2) ∫_{−a}^{a} (s² + u²)^k du, expanded binomially.
    const double s = chord.offset;
    const double a = 0.5 * chord.length;
    double perp_part = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        double integral = 0.0;
        double binom = 1.0;
        for (std::size_t j = 0; j <= k; ++j) {
            // C(k, j) s^{2(k−j)} ∫ u^{2j} = C(k, j) s^{2(k−j)} 2 a^{2j+1}/(2j+1)
            integral += binom * std::pow(s, 2.0 * (k - j)) * 2.0 * std::pow(a, 2.0 * j + 1) /
                        (2.0 * j + 1);
            binom = binom * (k - j) / (j + 1);
        }
        perp_part += coeffs_[k] / (2.0 * k + 2.0) * integral;
    }
    return chord.perp * (-s * perp_part);
}

Vec2 reference_field(const DopingProfile& profile, Vec2 x) {
    if (profile.kind() != ProfileKind::constant)
        throw Error(ErrorCode::no_analytic_reference, "reference_field needs a constant profile");
    return x * (-0.5 * profile.n0());
}

Vec2 reference_chord_integral(const DopingProfile& profile, const DiskDomain& domain,
                              const Chord& chord) {
    if (profile.kind() != ProfileKind::constant)
        throw Error(ErrorCode::no_analytic_reference,
                    "reference_chord_integral needs a constant profile");
    return AnalyticReference(profile, domain).chord_integral(chord);
}

}  // namespace vpinv
