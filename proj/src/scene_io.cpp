#include "lightguide/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "lightguide/error.hpp"

namespace lightguide {

namespace {

template <typename T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("key '") + key + "': " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get<T>(j, key);
}

std::optional<double> get_opt(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    return get<double>(j, key);
}

const json& array_at(const json& j, const char* key) {
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_array()) throw ParseError(std::string("key '") + key + "' must be an array");
    return j.at(key);
}

Rect rect_from_json(const json& j, const std::string& who) {
    const auto r = make_rect(vec3_from_json(j.at("min")), vec3_from_json(j.at("max")), get<std::string>(j, "normal"));
    if (!r) throw ValidationError(who + ": min/max/normal do not describe an axis-aligned rectangle");
    return *r;
}

void rect_to_json(json& j, const Rect& r) {
    j["min"] = vec3_to_json(r.min_corner());
    j["max"] = vec3_to_json(r.max_corner());
    j["normal"] = normal_name(r);
}

SurfaceKind surface_kind_from(const std::string& s) {
    if (s == "floor") return SurfaceKind::floor;
    if (s == "ceiling") return SurfaceKind::ceiling;
    if (s == "wall") return SurfaceKind::wall;
    if (s == "furniture") return SurfaceKind::furniture;
    throw ParseError("unknown surface kind '" + s + "'");
}

std::vector<std::string> string_list(const json& j, const char* key) {
    return get_or<std::vector<std::string>>(j, key, {});
}

}  // namespace

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const json::exception& e) {
        throw ParseError(std::string("vector component: ") + e.what());
    }
}

json vec3_to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

// ---------------------------------------------------------------------------
// Catalog

Catalog catalog_from_json(const json& doc) {
    std::vector<LuminaireModel> models;
    try {
        for (const auto& m : array_at(doc, "models")) {
            LuminaireModel model;
            model.id = get<std::string>(m, "id");
            model.collection = get<std::string>(m, "collection");
            model.version = get<std::string>(m, "version");
            model.flux = get<double>(m, "flux");
            model.cct = get<double>(m, "cct");
            model.cri = get<double>(m, "cri");
            const auto& d = m.at("distribution");
            const auto type = get<std::string>(d, "type");
            if (type == "isotropic") {
                model.distribution.type = DistributionType::isotropic;
            } else if (type == "cosine_lobe") {
                model.distribution.type = DistributionType::cosine_lobe;
                model.distribution.exponent = get<double>(d, "exponent");
            } else if (type == "tabulated") {
                model.distribution.type = DistributionType::tabulated;
                model.distribution.angles_deg = get<std::vector<double>>(d, "angles");
                model.distribution.cd_per_klm = get<std::vector<double>>(d, "cd_per_klm");
            } else {
                throw ParseError("unknown distribution type '" + type + "'");
            }
            const auto mount = get<std::string>(m, "mount");
            if (mount == "pendant") model.mount = MountType::pendant;
            else if (mount == "surface") model.mount = MountType::surface;
            else throw ParseError("unknown mount type '" + mount + "'");
            model.luminous_area = get<double>(m, "luminous_area");
            if (m.contains("height_range")) {
                const auto hr = get<std::vector<double>>(m, "height_range");
                if (hr.size() != 2) throw ParseError("height_range must have two entries");
                model.min_height = hr[0];
                model.max_height = hr[1];
            }
            models.push_back(std::move(model));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("catalog: ") + e.what());
    }
    return Catalog(std::move(models));
}

json catalog_to_json(const Catalog& catalog) {
    json doc;
    doc["format"] = kCatalogFormat;
    json models = json::array();
    for (const auto& m : catalog.models()) {
        json j;
        j["id"] = m.id;
        j["collection"] = m.collection;
        j["version"] = m.version;
        j["flux"] = m.flux;
        j["cct"] = m.cct;
        j["cri"] = m.cri;
        json d;
        d["type"] = to_string(m.distribution.type);
        if (m.distribution.type == DistributionType::cosine_lobe) d["exponent"] = m.distribution.exponent;
        if (m.distribution.type == DistributionType::tabulated) {
            d["angles"] = m.distribution.angles_deg;
            d["cd_per_klm"] = m.distribution.cd_per_klm;
        }
        j["distribution"] = d;
        j["mount"] = to_string(m.mount);
        j["luminous_area"] = m.luminous_area;
        if (m.mount == MountType::pendant) j["height_range"] = json::array({m.min_height, m.max_height});
        models.push_back(std::move(j));
    }
    doc["models"] = std::move(models);
    return doc;
}

Catalog load_catalog_file(const std::filesystem::path& path) { return catalog_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Scene

Scene scene_from_json(const json& doc, CatalogPtr catalog) {
    Scene s;
    try {
        if (!doc.is_object()) throw ParseError("scene document must be an object");
        if (doc.contains("format") && get<std::string>(doc, "format") != kSceneFormat)
            throw ParseError("unsupported scene format '" + get<std::string>(doc, "format") + "'");
        s.catalog_ref = get_or<std::string>(doc, "catalog_ref", "");
        s.catalog = std::move(catalog);

        const auto& room = doc.at("room");
        s.room.width = get<double>(room, "width");
        s.room.depth = get<double>(room, "depth");
        s.room.height = get<double>(room, "height");
        s.room.patch_resolution = get<double>(room, "patch_resolution");

        for (const auto& j : array_at(doc, "surfaces")) {
            Surface surf;
            surf.id = get<std::string>(j, "id");
            surf.kind = surface_kind_from(get<std::string>(j, "kind"));
            surf.reflectance = get<double>(j, "reflectance");
            surf.rect = rect_from_json(j, "surface '" + surf.id + "'");
            s.surfaces.push_back(std::move(surf));
        }
        for (const auto& j : array_at(doc, "luminaires")) {
            LuminaireInstance l;
            l.id = get<std::string>(j, "id");
            l.model = get<std::string>(j, "model");
            l.position = vec3_from_json(j.at("position"));
            l.aim = vec3_from_json(j.at("aim"));
            l.dim = get<double>(j, "dim");
            l.group = get_or<std::string>(j, "group", "");
            s.luminaires.push_back(std::move(l));
        }
        for (const auto& j : array_at(doc, "measuring_surfaces")) {
            MeasuringSurface m;
            m.id = get<std::string>(j, "id");
            m.rect = rect_from_json(j, "measuring surface '" + m.id + "'");
            if (j.contains("targets")) {
                const auto& t = j.at("targets");
                m.targets.avg = get_opt(t, "avg");
                m.targets.g1 = get_opt(t, "g1");
                m.targets.g2 = get_opt(t, "g2");
            }
            s.measuring_surfaces.push_back(std::move(m));
        }
        for (const auto& j : array_at(doc, "glare_probes")) {
            GlareProbe p;
            p.id = get<std::string>(j, "id");
            p.eye = vec3_from_json(j.at("eye"));
            p.view = vec3_from_json(j.at("view"));
            p.half_angle_deg = get<double>(j, "half_angle");
            p.ugr_max = get<double>(j, "ugr_max");
            s.glare_probes.push_back(std::move(p));
        }
        for (const auto& j : array_at(doc, "groups")) {
            MeasurementGroup g;
            g.id = get<std::string>(j, "id");
            g.name = get_or<std::string>(j, "name", g.id);
            g.tag = get_or<std::string>(j, "tag", "");
            g.members = string_list(j, "members");
            s.groups.push_back(std::move(g));
        }
        if (doc.contains("global_targets")) {
            const auto& g = doc.at("global_targets");
            if (g.contains("cct")) {
                const auto band = get<std::vector<double>>(g, "cct");
                if (band.size() != 2) throw ParseError("global_targets.cct must be [lo, hi]");
                s.global_targets.cct_lo = band[0];
                s.global_targets.cct_hi = band[1];
            }
            s.global_targets.cri_min = get_opt(g, "cri");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scene: ") + e.what());
    }
    s.validate();
    return s;
}

Scene load_scene_file(const std::filesystem::path& path) {
    const json doc = read_json_file(path);
    const auto ref = get_or<std::string>(doc, "catalog_ref", "");
    if (ref.empty()) throw ParseError("scene '" + path.string() + "' has no catalog_ref");
    auto catalog = std::make_shared<const Catalog>(load_catalog_file(path.parent_path() / ref));
    return scene_from_json(doc, std::move(catalog));
}

json scene_to_json(const Scene& s) {
    json doc;
    doc["format"] = kSceneFormat;
    doc["catalog_ref"] = s.catalog_ref;
    doc["room"] = {{"width", s.room.width},
                   {"depth", s.room.depth},
                   {"height", s.room.height},
                   {"patch_resolution", s.room.patch_resolution}};
    json surfaces = json::array();
    for (const auto& surf : s.surfaces) {
        json j;
        j["id"] = surf.id;
        j["kind"] = to_string(surf.kind);
        j["reflectance"] = surf.reflectance;
        rect_to_json(j, surf.rect);
        surfaces.push_back(std::move(j));
    }
    doc["surfaces"] = std::move(surfaces);
    json lights = json::array();
    for (const auto& l : s.luminaires) {
        json j;
        j["id"] = l.id;
        j["model"] = l.model;
        j["position"] = vec3_to_json(l.position);
        j["aim"] = vec3_to_json(l.aim);
        j["dim"] = l.dim;
        if (!l.group.empty()) j["group"] = l.group;
        lights.push_back(std::move(j));
    }
    doc["luminaires"] = std::move(lights);
    json surfaces_m = json::array();
    for (const auto& m : s.measuring_surfaces) {
        json j;
        j["id"] = m.id;
        rect_to_json(j, m.rect);
        json t = json::object();
        if (m.targets.avg) t["avg"] = *m.targets.avg;
        if (m.targets.g1) t["g1"] = *m.targets.g1;
        if (m.targets.g2) t["g2"] = *m.targets.g2;
        j["targets"] = std::move(t);
        surfaces_m.push_back(std::move(j));
    }
    doc["measuring_surfaces"] = std::move(surfaces_m);
    json probes = json::array();
    for (const auto& p : s.glare_probes) {
        json j;
        j["id"] = p.id;
        j["eye"] = vec3_to_json(p.eye);
        j["view"] = vec3_to_json(p.view);
        j["half_angle"] = p.half_angle_deg;
        j["ugr_max"] = p.ugr_max;
        probes.push_back(std::move(j));
    }
    doc["glare_probes"] = std::move(probes);
    json groups = json::array();
    for (const auto& g : s.groups)
        groups.push_back({{"id", g.id}, {"name", g.name}, {"tag", g.tag}, {"members", g.members}});
    doc["groups"] = std::move(groups);
    if (s.has_global_targets()) {
        json g = json::object();
        if (s.global_targets.cct_lo) g["cct"] = json::array({*s.global_targets.cct_lo, *s.global_targets.cct_hi});
        if (s.global_targets.cri_min) g["cri"] = *s.global_targets.cri_min;
        doc["global_targets"] = std::move(g);
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Edits

namespace {

LuminaireInstance light_from_json(const json& j) {
    LuminaireInstance l;
    l.id = get<std::string>(j, "id");
    l.model = get<std::string>(j, "model");
    l.position = vec3_from_json(j.at("position"));
    l.aim = j.contains("aim") ? vec3_from_json(j.at("aim")) : Vec3{0.0, 0.0, -1.0};
    l.dim = get_or<double>(j, "dim", 1.0);
    l.group = get_or<std::string>(j, "group", "");
    return l;
}

json light_to_json(const LuminaireInstance& l) {
    json j;
    j["id"] = l.id;
    j["model"] = l.model;
    j["position"] = vec3_to_json(l.position);
    j["aim"] = vec3_to_json(l.aim);
    j["dim"] = l.dim;
    if (!l.group.empty()) j["group"] = l.group;
    return j;
}

struct EditWriter {
    json operator()(const AddLightEdit& e) const { return {{"type", "add_light"}, {"light", light_to_json(e.light)}}; }
    json operator()(const RemoveLightEdit& e) const { return {{"type", "remove_light"}, {"id", e.id}}; }
    json operator()(const MoveLightEdit& e) const {
        return {{"type", "move_light"}, {"id", e.id}, {"delta", vec3_to_json(e.delta)}};
    }
    json operator()(const SetPositionEdit& e) const {
        return {{"type", "set_position"}, {"id", e.id}, {"position", vec3_to_json(e.position)}};
    }
    json operator()(const RotateLightEdit& e) const {
        return {{"type", "rotate_light"}, {"id", e.id}, {"aim", vec3_to_json(e.aim)}};
    }
    json operator()(const SetDimEdit& e) const { return {{"type", "set_dim"}, {"ids", e.ids}, {"dim", e.dim}}; }
    json operator()(const ScaleDimEdit& e) const { return {{"type", "scale_dim"}, {"factor", e.factor}}; }
    json operator()(const ShiftHeightEdit& e) const { return {{"type", "shift_height"}, {"ids", e.ids}, {"dz", e.dz}}; }
    json operator()(const ExchangeModelEdit& e) const {
        return {{"type", "exchange_model"}, {"ids", e.ids}, {"model", e.model}};
    }
    json operator()(const SetLightGroupEdit& e) const {
        return {{"type", "set_light_group"}, {"id", e.id}, {"group", e.group}};
    }
};

}  // namespace

Edit edit_from_json(const json& j) {
    try {
        const auto type = get<std::string>(j, "type");
        if (type == "add_light") return AddLightEdit{light_from_json(j.at("light"))};
        if (type == "remove_light") return RemoveLightEdit{get<std::string>(j, "id")};
        if (type == "move_light") return MoveLightEdit{get<std::string>(j, "id"), vec3_from_json(j.at("delta"))};
        if (type == "set_position")
            return SetPositionEdit{get<std::string>(j, "id"), vec3_from_json(j.at("position"))};
        if (type == "rotate_light") return RotateLightEdit{get<std::string>(j, "id"), vec3_from_json(j.at("aim"))};
        if (type == "set_dim") return SetDimEdit{string_list(j, "ids"), get<double>(j, "dim")};
        if (type == "scale_dim") return ScaleDimEdit{get<double>(j, "factor")};
        if (type == "shift_height") return ShiftHeightEdit{string_list(j, "ids"), get<double>(j, "dz")};
        if (type == "exchange_model") return ExchangeModelEdit{string_list(j, "ids"), get<std::string>(j, "model")};
        if (type == "set_light_group")
            return SetLightGroupEdit{get<std::string>(j, "id"), get<std::string>(j, "group")};
        throw ParseError("unknown edit type '" + type + "'");
    } catch (const json::exception& e) {
        throw ParseError(std::string("edit: ") + e.what());
    }
}

json edit_to_json(const Edit& edit) { return std::visit(EditWriter{}, edit); }

// ---------------------------------------------------------------------------

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace lightguide
