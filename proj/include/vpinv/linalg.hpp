#pragma once

#include <cmath>

namespace vpinv {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 r) { x += r.x; y += r.y; return *this; }
    constexpr Vec2& operator-=(Vec2 r) { x -= r.x; y -= r.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double operator[](int i) const { return i == 0 ? x : y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Row-major 2x2 matrix, m[r][c].
struct Mat2 {
    double m[2][2]{{0.0, 0.0}, {0.0, 0.0}};

    static constexpr Mat2 identity() { return Mat2{{{1.0, 0.0}, {0.0, 1.0}}}; }
    static constexpr Mat2 diag(double d) { return Mat2{{{d, 0.0}, {0.0, d}}}; }

    constexpr double operator()(int r, int c) const { return m[r][c]; }
    constexpr double& operator()(int r, int c) { return m[r][c]; }

    constexpr Mat2 operator+(const Mat2& o) const {
        Mat2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out.m[r][c] = m[r][c] + o.m[r][c];
        return out;
    }
    constexpr Mat2 operator-(const Mat2& o) const { return *this + o * -1.0; }
    constexpr Mat2 operator*(double s) const {
        Mat2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out.m[r][c] = m[r][c] * s;
        return out;
    }
    constexpr Mat2 operator*(const Mat2& o) const {
        Mat2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out.m[r][c] = m[r][0] * o.m[0][c] + m[r][1] * o.m[1][c];
        return out;
    }
    constexpr Vec2 operator*(Vec2 v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }
    constexpr Mat2& operator+=(const Mat2& o) { return *this = *this + o; }

    constexpr Mat2 transposed() const { return Mat2{{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }
    constexpr double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    double frobenius() const {
        return std::sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] +
                         m[1][1] * m[1][1]);
    }
};

/// Outer product (a ⊗ b)_{ij} = a_i b_j.
constexpr Mat2 outer(Vec2 a, Vec2 b) { return Mat2{{{a.x * b.x, a.x * b.y}, {a.y * b.x, a.y * b.y}}}; }

}  // namespace vpinv
