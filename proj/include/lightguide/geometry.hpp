#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace lightguide {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return a / length(a); }

inline constexpr double kUnitTolerance = 1e-6;

inline bool is_unit(Vec3 a) { return std::abs(length(a) - 1.0) <= kUnitTolerance; }

/// Axis-aligned rectangle lying in the plane `axis = offset`. The in-plane
/// axes are u = (axis + 1) % 3 and v = (axis + 2) % 3. `facing` is +1 or -1
/// and selects the side the normal points to.
struct Rect {
    int axis = 2;
    double offset = 0.0;
    double u0 = 0.0, u1 = 0.0;
    double v0 = 0.0, v1 = 0.0;
    int facing = 1;

    int u_axis() const { return (axis + 1) % 3; }
    int v_axis() const { return (axis + 2) % 3; }
    double width() const { return u1 - u0; }
    double height() const { return v1 - v0; }
    double area() const { return width() * height(); }

    Vec3 normal() const {
        Vec3 n;
        n[axis] = static_cast<double>(facing);
        return n;
    }

    /// Point at in-plane coordinates (u, v).
    Vec3 point(double u, double v) const {
        Vec3 p;
        p[axis] = offset;
        p[u_axis()] = u;
        p[v_axis()] = v;
        return p;
    }

    Vec3 center() const { return point(0.5 * (u0 + u1), 0.5 * (v0 + v1)); }
    Vec3 min_corner() const { return point(u0, v0); }
    Vec3 max_corner() const { return point(u1, v1); }

    /// True when the open segment a->b crosses the rectangle's interior.
    /// Endpoints within `eps` (parametric) of the rectangle do not count.
    bool blocks_segment(Vec3 a, Vec3 b, double eps = 1e-9) const {
        const double da = a[axis] - offset;
        const double db = b[axis] - offset;
        if ((da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0)) return false;
        const double denom = da - db;
        if (denom == 0.0) return false;  // segment lies in the plane
        const double t = da / denom;
        if (t <= eps || t >= 1.0 - eps) return false;
        const double u = a[u_axis()] + t * (b[u_axis()] - a[u_axis()]);
        const double v = a[v_axis()] + t * (b[v_axis()] - a[v_axis()]);
        return u > u0 && u < u1 && v > v0 && v < v1;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Builds a rectangle from two opposite corners that agree on exactly one
/// coordinate, plus the normal direction ("+x", "-z", ...). Returns nullopt
/// when the corners do not describe a flat rectangle matching the normal.
std::optional<Rect> make_rect(Vec3 min_corner, Vec3 max_corner, const std::string& normal);

/// "+x", "-y", ... for the rectangle's normal.
std::string normal_name(const Rect& r);

/// Solid angle subtended by a rectangle as seen from `p` (steradians).
double solid_angle(const Rect& r, Vec3 p);

}  // namespace lightguide
