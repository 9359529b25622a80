#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/geometry.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/simulation.hpp"

namespace lightguide {

inline constexpr int kThumbnailWidth = 320;
inline constexpr int kThumbnailHeight = 180;

struct Camera {
    Vec3 eye;
    Vec3 target;
    double fov_deg = 50.0;  ///< vertical field of view
    bool false_color = false;

    friend bool operator==(const Camera&, const Camera&) = default;
};

/// Oblique view from above the front wall, framing the whole room.
Camera default_camera(const Room& room);

nlohmann::ordered_json camera_to_json(const Camera& c);
Camera camera_from_json(const nlohmann::ordered_json& j);

struct Thumbnail {
    std::string id;
    std::string node;
    Camera camera;
    int width = kThumbnailWidth;
    int height = kThumbnailHeight;
    std::vector<std::uint8_t> rgb;  ///< row-major, top row first

    double mean_luminance() const;
};

/// Software rasterization of the surface patches, shaded by reflected
/// luminance with a fixed tone curve. Faces turned away from the camera are
/// culled, which opens the walls nearest to the viewer.
Thumbnail render_thumbnail(const Scene& scene, const LightMap& map, const Camera& camera);

/// RGB8 PNG, zlib-compressed.
std::string encode_png(const Thumbnail& image);

}  // namespace lightguide
