#include "lightguide/thumbnail.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

Camera default_camera(const Room& room) {
    const double span = std::max(room.width, room.depth);
    Camera c;
    c.target = {room.width / 2, room.depth / 2, room.height * 0.3};
    c.eye = {room.width / 2, -0.75 * span, room.height + 0.9 * span};
    c.fov_deg = 38.0;
    return c;
}

ojson camera_to_json(const Camera& c) {
    ojson j;
    j["eye"] = vec3_to_json(c.eye);
    j["target"] = vec3_to_json(c.target);
    j["fov"] = c.fov_deg;
    j["false_color"] = c.false_color;
    return j;
}

Camera camera_from_json(const ojson& j) {
    Camera c;
    c.eye = vec3_from_json(j.at("eye"));
    c.target = vec3_from_json(j.at("target"));
    c.fov_deg = j.value("fov", 50.0);
    c.false_color = j.value("false_color", false);
    return c;
}

double Thumbnail::mean_luminance() const {
    if (rgb.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < rgb.size(); i += 3)
        sum += 0.2126 * rgb[i] + 0.7152 * rgb[i + 1] + 0.0722 * rgb[i + 2];
    return sum / static_cast<double>(rgb.size() / 3);
}

namespace {

// Luminance at which the tone curve reaches half scale, cd/m^2.
constexpr double kToneKnee = 60.0;

using Rgb = std::array<double, 3>;

Rgb tone(double luminance) {
    const double v = luminance / (luminance + kToneKnee);
    return {v, v, v};
}

// Irradiance ramp, log scale from 10 lx to 2000 lx: blue, cyan, green, yellow, red.
Rgb false_color(double lux) {
    static constexpr std::array<Rgb, 5> stops{{{0, 0, 1}, {0, 1, 1}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}}};
    if (lux <= 0.0) return {0, 0, 0};
    double t = std::clamp(std::log10(lux / 10.0) / std::log10(200.0), 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    t -= i;
    Rgb out;
    for (int c = 0; c < 3; ++c) out[c] = stops[i][c] * (1 - t) + stops[i + 1][c] * t;
    return out;
}

struct View {
    Vec3 eye, right, up, forward;
    double focal = 1.0;  // pixels per unit of tan
    double cx = 0.0, cy = 0.0;

    // Screen x, y and view depth; depth <= 0 means behind the camera.
    Vec3 project(Vec3 p) const {
        const Vec3 d = p - eye;
        const double z = dot(d, forward);
        if (z <= 1e-6) return {0, 0, -1};
        return {cx + focal * dot(d, right) / z, cy - focal * dot(d, up) / z, z};
    }
};

View make_view(const Camera& c, int w, int h) {
    View v;
    v.eye = c.eye;
    v.forward = normalized(c.target - c.eye);
    Vec3 world_up{0, 0, 1};
    if (std::abs(dot(world_up, v.forward)) > 0.999) world_up = {0, 1, 0};
    v.right = normalized(cross(v.forward, world_up));
    v.up = cross(v.right, v.forward);
    v.focal = (h / 2.0) / std::tan(c.fov_deg * kPi / 360.0);
    v.cx = w / 2.0;
    v.cy = h / 2.0;
    return v;
}

struct Raster {
    int w, h;
    std::vector<double> depth;
    std::vector<Rgb> color;

    Raster(int w_, int h_)
        : w(w_), h(h_), depth(static_cast<std::size_t>(w_ * h_), std::numeric_limits<double>::infinity()),
          color(static_cast<std::size_t>(w_ * h_), Rgb{0, 0, 0}) {}

    void triangle(Vec3 a, Vec3 b, Vec3 c, const Rgb& col) {
        if (a.z <= 0 || b.z <= 0 || c.z <= 0) return;
        const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if (std::abs(area) < 1e-12) return;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                const double w0 = ((b.x - px) * (c.y - py) - (b.y - py) * (c.x - px)) / area;
                const double w1 = ((c.x - px) * (a.y - py) - (c.y - py) * (a.x - px)) / area;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                const double z = w0 * a.z + w1 * b.z + w2 * c.z;
                const auto idx = static_cast<std::size_t>(y * w + x);
                if (z < depth[idx]) {
                    depth[idx] = z;
                    color[idx] = col;
                }
            }
        }
    }
};

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Thumbnail render_thumbnail(const Scene& scene, const LightMap& map, const Camera& camera) {
    Thumbnail img;
    img.camera = camera;
    const View view = make_view(camera, img.width, img.height);
    Raster raster(img.width, img.height);

    const auto& geo = map.geometry();
    for (std::size_t i = 0; i < geo.surface_patch_count(); ++i) {
        const Patch& p = geo.patches()[i];
        if (dot(p.normal, camera.eye - p.center) <= 0) continue;
        const Rect& r = p.rect;
        const Vec3 c00 = view.project(r.point(r.u0, r.v0)), c10 = view.project(r.point(r.u1, r.v0));
        const Vec3 c11 = view.project(r.point(r.u1, r.v1)), c01 = view.project(r.point(r.u0, r.v1));
        const Rgb col = camera.false_color ? false_color(map.irradiance[i]) : tone(map.exitance(i) / kPi);
        raster.triangle(c00, c10, c11, col);
        raster.triangle(c00, c11, c01, col);
    }

    // Luminaires as small emissive squares, scaled by dimming.
    for (const auto& l : scene.luminaires) {
        const Vec3 s = view.project(l.position);
        if (s.z <= 0) continue;
        const Rgb col{l.dim, l.dim, l.dim * 0.85};
        const int x = static_cast<int>(s.x), y = static_cast<int>(s.y);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -2; dx <= 2; ++dx) {
                const int px = x + dx, py = y + dy;
                if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
                const auto idx = static_cast<std::size_t>(py * img.width + px);
                if (s.z <= raster.depth[idx] + 1e-3) {
                    raster.depth[idx] = s.z;
                    raster.color[idx] = col;
                }
            }
        }
    }

    img.rgb.resize(raster.color.size() * 3);
    for (std::size_t i = 0; i < raster.color.size(); ++i)
        for (int c = 0; c < 3; ++c) img.rgb[i * 3 + c] = to_byte(raster.color[i][c]);
    return img;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out += static_cast<char>((v >> 24) & 0xff);
    out += static_cast<char>((v >> 16) & 0xff);
    out += static_cast<char>((v >> 8) & 0xff);
    out += static_cast<char>(v & 0xff);
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    put_u32(out, static_cast<std::uint32_t>(
                     crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace

std::string encode_png(const Thumbnail& image) {
    std::string raw;
    raw.reserve(static_cast<std::size_t>(image.height) * (1 + image.width * 3));
    for (int y = 0; y < image.height; ++y) {
        raw += '\0';  // filter: none
        raw.append(reinterpret_cast<const char*>(image.rgb.data()) + static_cast<std::size_t>(y) * image.width * 3,
                   static_cast<std::size_t>(image.width) * 3);
    }
    uLongf size = compressBound(static_cast<uLong>(raw.size()));
    std::string packed(size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(packed.data()), &size, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw Error("png compression failed");
    packed.resize(size);

    std::string out = "\x89PNG\r\n\x1a\n";
    std::string header;
    put_u32(header, static_cast<std::uint32_t>(image.width));
    put_u32(header, static_cast<std::uint32_t>(image.height));
    header += static_cast<char>(8);  // bit depth
    header += static_cast<char>(2);  // truecolor
    header += std::string(3, '\0');
    put_chunk(out, "IHDR", header);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", "");
    return out;
}

}  // namespace lightguide
