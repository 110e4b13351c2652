#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prethermal {

/// Raised when a documented precondition of a public operation is violated.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Axis : int { X = 0, Y = 1, Z = 2 };

constexpr int index_of(Axis a) { return static_cast<int>(a); }
Axis axis_from_string(const std::string& s);
const char* to_string(Axis a);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) { return v * (1.0 / norm(v)); }

constexpr Vec3 unit_vector(Axis a)
{
    switch (a) {
    case Axis::X: return {1.0, 0.0, 0.0};
    case Axis::Y: return {0.0, 1.0, 0.0};
    default: return {0.0, 0.0, 1.0};
    }
}

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> a{};

    constexpr double operator()(int r, int c) const { return a[3 * r + c]; }
    constexpr double& operator()(int r, int c) { return a[3 * r + c]; }

    static constexpr Mat3 identity()
    {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }
    /// e_a e_b^T
    static constexpr Mat3 outer(Axis r, Axis c)
    {
        Mat3 m;
        m(index_of(r), index_of(c)) = 1.0;
        return m;
    }

    constexpr Mat3& operator+=(const Mat3& o)
    {
        for (int i = 0; i < 9; ++i) a[i] += o.a[i];
        return *this;
    }
    constexpr Mat3& operator*=(double s)
    {
        for (auto& v : a) v *= s;
        return *this;
    }
    friend constexpr Mat3 operator+(Mat3 l, const Mat3& r) { return l += r; }
    friend constexpr Mat3 operator*(Mat3 m, double s) { return m *= s; }
    friend constexpr Mat3 operator*(double s, Mat3 m) { return m *= s; }
    friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Vec3 operator*(const Mat3& m, const Vec3& v)
{
    return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
            m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
            m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

constexpr Mat3 operator*(const Mat3& l, const Mat3& r)
{
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
            out(i, j) = s;
        }
    return out;
}

constexpr Mat3 transpose(const Mat3& m)
{
    Mat3 t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t(i, j) = m(j, i);
    return t;
}

/// Rank-3 tensor T[a][b][c], used for trilinear three-site couplings.
struct Tensor3 {
    std::array<double, 27> a{};

    constexpr double operator()(int i, int j, int k) const { return a[9 * i + 3 * j + k]; }
    constexpr double& operator()(int i, int j, int k) { return a[9 * i + 3 * j + k]; }

    constexpr Tensor3& operator+=(const Tensor3& o)
    {
        for (int i = 0; i < 27; ++i) a[i] += o.a[i];
        return *this;
    }
    constexpr Tensor3& operator*=(double s)
    {
        for (auto& v : a) v *= s;
        return *this;
    }
    friend constexpr bool operator==(const Tensor3&, const Tensor3&) = default;
};

/// Rotation matrix for a right-handed rotation by `angle` about the unit vector `axis`.
Mat3 rotation_matrix(const Vec3& axis, double angle);

/// Rodrigues rotation of v about a unit axis. Throws ContractError if |axis| differs from 1 by more than 1e-9.
Vec3 rotate_about_axis(const Vec3& v, const Vec3& axis, double angle);

/// Rotation about a coordinate axis given the precomputed cosine and sine of the angle.
constexpr Vec3 rotate_cardinal(const Vec3& v, Axis axis, double c, double s)
{
    switch (axis) {
    case Axis::X: return {v.x, c * v.y - s * v.z, s * v.y + c * v.z};
    case Axis::Y: return {c * v.x + s * v.z, v.y, -s * v.x + c * v.z};
    default: return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
    }
}

inline Vec3 rotate_cardinal(const Vec3& v, Axis axis, double angle)
{
    return rotate_cardinal(v, axis, std::cos(angle), std::sin(angle));
}

} // namespace prethermal
