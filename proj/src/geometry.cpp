#include "vpinv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vpinv/error.hpp"

namespace vpinv {

DiskDomain::DiskDomain(double radius) : radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(ErrorCode::invalid_config, "disk radius must be positive and finite");
    }
}

Vec2 DiskDomain::normal(Vec2 x) const {
    const double r = norm(x);
    if (r == 0.0) return {1.0, 0.0};
    return x / r;
}

const char* to_string(BoundaryClass c) {
    switch (c) {
        case BoundaryClass::incoming: return "incoming";
        case BoundaryClass::outgoing: return "outgoing";
        case BoundaryClass::tangent: return "tangent";
    }
    return "?";
}

BoundaryClass classify(const DiskDomain& domain, Vec2 x, Vec2 v) {
    if (std::abs(domain.xi(x)) > domain.boundary_tolerance()) {
        std::ostringstream msg;
        msg << "point (" << x.x << ", " << x.y << ") is not on the boundary, xi = " << domain.xi(x);
        throw Error(ErrorCode::not_on_boundary, msg.str());
    }
    const double vn = dot(v, domain.normal(x));
    if (std::abs(vn) <= 1e-12 * norm(v)) return BoundaryClass::tangent;
    return vn < 0.0 ? BoundaryClass::incoming : BoundaryClass::outgoing;
}

Chord Chord::reversed() const {
    Chord r = *this;
    r.angle = angle + M_PI;
    r.offset = -offset;
    r.direction = -direction;
    r.perp = -perp;
    r.entry = exit();
    return r;
}

Chord chord_from(const DiskDomain& domain, double angle, double offset) {
    const double R = domain.radius();
    if (!(std::abs(offset) < R)) {
        std::ostringstream msg;
        msg << "line with offset " << offset << " does not cross the disk of radius " << R;
        throw Error(ErrorCode::no_intersection, msg.str());
    }
    Chord c;
    c.angle = angle;
    c.offset = offset;
    c.direction = {std::cos(angle), std::sin(angle)};
    c.perp = perp(c.direction);
    const double half = std::sqrt((R - offset) * (R + offset));
    c.entry = c.perp * offset - c.direction * half;
    c.length = 2.0 * half;
    return c;
}

LineExit line_exit(const DiskDomain& domain, Vec2 x, Vec2 e) {
    // |x + l e|² = R²  →  l² + 2 b l − ξ(x) = 0 with b = x·e
    const double b = dot(x, e);
    const double xi = std::max(domain.xi(x), 0.0);
    const double disc = b * b + xi;
    const double root = std::sqrt(disc);
    // larger root, written to avoid cancellation when b < 0
    double l = b <= 0.0 ? root - b : xi / (root + b);
    if (l < 0.0) l = 0.0;
    return {l, x + e * l};
}

}  // namespace vpinv
