#include "prethermal/vec3.hpp"

namespace prethermal {

Axis axis_from_string(const std::string& s)
{
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw ContractError("unknown axis '" + s + "' (expected x|y|z)");
}

const char* to_string(Axis a)
{
    switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    default: return "z";
    }
}

Mat3 rotation_matrix(const Vec3& k, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double t = 1.0 - c;
    Mat3 r;
    r(0, 0) = c + t * k.x * k.x;
    r(0, 1) = t * k.x * k.y - s * k.z;
    r(0, 2) = t * k.x * k.z + s * k.y;
    r(1, 0) = t * k.y * k.x + s * k.z;
    r(1, 1) = c + t * k.y * k.y;
    r(1, 2) = t * k.y * k.z - s * k.x;
    r(2, 0) = t * k.z * k.x - s * k.y;
    r(2, 1) = t * k.z * k.y + s * k.x;
    r(2, 2) = c + t * k.z * k.z;
    return r;
}

Vec3 rotate_about_axis(const Vec3& v, const Vec3& axis, double angle)
{
    if (std::abs(norm(axis) - 1.0) > 1e-9) throw ContractError("rotation axis must be a unit vector");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

} // namespace prethermal
