#pragma once

#include "vpinv/linalg.hpp"

namespace vpinv {

/*!
 * Origin-centered disk Ω = {|x| < radius}.
 *
 * Boundary function ξ(x) = radius² − |x|² is positive inside, zero on ∂Ω and
 * negative outside. Outward normals are n_x = x/|x|.
 */
class DiskDomain {
  public:
    explicit DiskDomain(double radius = 1.0);

    double radius() const { return radius_; }
    /// diam(Ω)
    double diameter() const { return 2.0 * radius_; }

    double xi(Vec2 x) const { return radius_ * radius_ - norm2(x); }
    bool contains(Vec2 x) const { return xi(x) > 0.0; }
    Vec2 normal(Vec2 x) const;

    /// Absolute tolerance on |ξ| for a point to count as a boundary point.
    double boundary_tolerance() const { return 1e-9 * radius_ * radius_; }

  private:
    double radius_;
};

enum class BoundaryClass { incoming, outgoing, tangent };

const char* to_string(BoundaryClass c);

/// Phase-boundary classification by the sign of v·n_x; |v·n_x| ≤ 1e-12|v| is tangent.
/// Throws not-on-boundary when |ξ(x)| exceeds the boundary tolerance.
BoundaryClass classify(const DiskDomain& domain, Vec2 x, Vec2 v);

/// Oriented line segment through the disk: x(t) = entry + t·direction, t ∈ [0, length].
struct Chord {
    double angle{0.0};   ///< α ∈ [0, π) (or [0, 2π) for reversed chords)
    double offset{0.0};  ///< signed distance s of the line from the origin along perp
    Vec2 direction;      ///< θ = (cos α, sin α)
    Vec2 perp;           ///< θ⊥ = (−sin α, cos α)
    Vec2 entry;          ///< s·θ⊥ − √(R²−s²)·θ
    double length{0.0};  ///< 2√(R²−s²)

    Vec2 exit() const { return entry + direction * length; }
    Vec2 point(double t) const { return entry + direction * t; }
    /// Same line traversed the other way: angle α+π, offset −s.
    Chord reversed() const;
};

/// Throws no-intersection when |offset| ≥ radius.
Chord chord_from(const DiskDomain& domain, double angle, double offset);

struct LineExit {
    double length{0.0};
    Vec2 point;
};

/// Distance along unit direction e from x ∈ Ω̄ to the point where the ray leaves Ω.
LineExit line_exit(const DiskDomain& domain, Vec2 x, Vec2 e);

}  // namespace vpinv
