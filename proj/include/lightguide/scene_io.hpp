#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lightguide/catalog.hpp"
#include "lightguide/scene.hpp"

namespace lightguide {

using json = nlohmann::ordered_json;

inline constexpr const char* kSceneFormat = "lightguide-scene/1";
inline constexpr const char* kCatalogFormat = "lightguide-catalog/1";

Catalog catalog_from_json(const json& doc);
json catalog_to_json(const Catalog& catalog);
Catalog load_catalog_file(const std::filesystem::path& path);

/// Parses and validates a scene document against an already loaded catalog.
/// The document's catalog_ref is kept verbatim but not resolved.
Scene scene_from_json(const json& doc, CatalogPtr catalog);

/// Reads a scene file and resolves its catalog_ref relative to the file's
/// directory. Throws ParseError or ValidationError.
Scene load_scene_file(const std::filesystem::path& path);

/// Canonical form: fixed key order, groups own the membership lists.
json scene_to_json(const Scene& scene);

Edit edit_from_json(const json& doc);
json edit_to_json(const Edit& edit);

Vec3 vec3_from_json(const json& j);
json vec3_to_json(Vec3 v);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lightguide
