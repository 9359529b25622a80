#include "lightguide/geometry.hpp"

#include <cmath>

namespace lightguide {

std::optional<Rect> make_rect(Vec3 a, Vec3 b, const std::string& normal) {
    if (normal.size() != 2 || (normal[0] != '+' && normal[0] != '-')) return std::nullopt;
    int axis = -1;
    switch (normal[1]) {
        case 'x': axis = 0; break;
        case 'y': axis = 1; break;
        case 'z': axis = 2; break;
        default: return std::nullopt;
    }
    if (a[axis] != b[axis]) return std::nullopt;
    Rect r;
    r.axis = axis;
    r.offset = a[axis];
    r.facing = normal[0] == '+' ? 1 : -1;
    r.u0 = a[r.u_axis()];
    r.u1 = b[r.u_axis()];
    r.v0 = a[r.v_axis()];
    r.v1 = b[r.v_axis()];
    if (!(r.u1 > r.u0) || !(r.v1 > r.v0)) return std::nullopt;
    return r;
}

std::string normal_name(const Rect& r) {
    static constexpr char axes[] = {'x', 'y', 'z'};
    return std::string(1, r.facing > 0 ? '+' : '-') + axes[r.axis];
}

namespace {

// Van Oosterom-Strackee solid angle of triangle (a, b, c) seen from the origin.
double triangle_solid_angle(Vec3 a, Vec3 b, Vec3 c) {
    const double la = length(a), lb = length(b), lc = length(c);
    const double numer = std::abs(dot(a, cross(b, c)));
    const double denom = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    return 2.0 * std::atan2(numer, denom);
}

}  // namespace

double solid_angle(const Rect& r, Vec3 p) {
    const Vec3 c00 = r.point(r.u0, r.v0) - p;
    const Vec3 c10 = r.point(r.u1, r.v0) - p;
    const Vec3 c11 = r.point(r.u1, r.v1) - p;
    const Vec3 c01 = r.point(r.u0, r.v1) - p;
    return triangle_solid_angle(c00, c10, c11) + triangle_solid_angle(c00, c11, c01);
}

}  // namespace lightguide
