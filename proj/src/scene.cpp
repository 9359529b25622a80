#include "lightguide/scene.hpp"

#include <algorithm>
#include <set>

#include "lightguide/error.hpp"

namespace lightguide {

namespace {

bool rect_inside(const Room& room, const Rect& r) {
    return room.contains(r.min_corner()) && room.contains(r.max_corner());
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

void require_geometry(bool ok, const std::string& message) {
    if (!ok) throw GeometryError(message);
}

void validate_luminaire(const Scene& s, const LuminaireInstance& l) {
    const std::string who = "luminaire '" + l.id + "': ";
    require(s.catalog != nullptr, "scene has no catalog");
    const auto* model = s.catalog->find(l.model);
    if (!model) throw ValidationError(who + "unknown model '" + l.model + "'");
    require_geometry(s.room.contains(l.position), who + "position outside the room volume");
    require(is_unit(l.aim), who + "aim must be a unit vector");
    require(l.dim >= 0.0 && l.dim <= 1.0, who + "dim must be in [0, 1]");
    if (model->mount == MountType::pendant) {
        require_geometry(l.position.z < s.room.height, who + "pendant must hang below the ceiling plane");
        require_geometry(l.position.z >= model->min_height - 1e-9 && l.position.z <= model->max_height + 1e-9,
                         who + "pendant height outside the model's legal range");
    }
}

}  // namespace

void Scene::validate() {
    require(room.width > 0.0 && room.depth > 0.0 && room.height > 0.0, "room dimensions must be > 0");
    require(room.patch_resolution > 0.0, "room patch_resolution must be > 0");

    std::set<std::string> surface_ids;
    for (const auto& s : surfaces) {
        require(!s.id.empty(), "surface with empty id");
        require(surface_ids.insert(s.id).second, "duplicate surface id '" + s.id + "'");
        require(s.reflectance >= 0.0 && s.reflectance <= 1.0,
                "surface '" + s.id + "': reflectance must be in [0, 1]");
        require(rect_inside(room, s.rect), "surface '" + s.id + "' lies outside the room bounding box");
    }

    std::set<std::string> light_ids;
    for (const auto& l : luminaires) {
        require(!l.id.empty(), "luminaire with empty id");
        require(light_ids.insert(l.id).second, "duplicate luminaire id '" + l.id + "'");
        validate_luminaire(*this, l);
    }

    std::set<std::string> object_ids{kSceneObject};
    for (const auto& m : measuring_surfaces) {
        const std::string who = "measuring surface '" + m.id + "': ";
        require(!m.id.empty(), "measuring surface with empty id");
        require(object_ids.insert(m.id).second, "duplicate measurement object id '" + m.id + "'");
        require(m.rect.area() > 0.0, who + "area must be > 0");
        require(rect_inside(room, m.rect), who + "lies outside the room bounding box");
        for (const auto& t : {m.targets.avg, m.targets.g1, m.targets.g2})
            require(!t || *t > 0.0, who + "targets must be > 0");
    }
    for (const auto& p : glare_probes) {
        const std::string who = "glare probe '" + p.id + "': ";
        require(!p.id.empty(), "glare probe with empty id");
        require(object_ids.insert(p.id).second, "duplicate measurement object id '" + p.id + "'");
        require(is_unit(p.view), who + "view must be a unit vector");
        require(p.half_angle_deg > 0.0 && p.half_angle_deg <= 90.0, who + "half_angle must be in (0, 90]");
        require(room.contains(p.eye), who + "eye outside the room volume");
        require(p.ugr_max > 0.0, who + "ugr_max must be > 0");
    }

    require(global_targets.cct_lo.has_value() == global_targets.cct_hi.has_value(),
            "global cct band needs both bounds");
    if (global_targets.cct_lo)
        require(*global_targets.cct_lo > 0.0 && *global_targets.cct_lo < *global_targets.cct_hi,
                "global cct band must satisfy 0 < lo < hi");
    if (global_targets.cri_min)
        require(*global_targets.cri_min > 0.0 && *global_targets.cri_min <= 100.0,
                "global cri target must be in (0, 100]");

    std::set<std::string> group_ids;
    std::map<std::string, std::string> owner;
    for (const auto& g : groups) {
        require(!g.id.empty(), "group with empty id");
        require(g.id != kGlobalGroup, "group id '" + kGlobalGroup + "' is reserved");
        require(group_ids.insert(g.id).second, "duplicate group id '" + g.id + "'");
        for (const auto& member : g.members) {
            require(member != kSceneObject && object_ids.count(member) != 0,
                    "group '" + g.id + "': unknown member '" + member + "'");
            require(owner.emplace(member, g.id).second,
                    "measurement object '" + member + "' belongs to more than one group");
        }
    }
    for (auto& m : measuring_surfaces) {
        auto it = owner.find(m.id);
        require(it != owner.end(), "measuring surface '" + m.id + "' belongs to no group");
        m.group = it->second;
    }
    for (auto& p : glare_probes) {
        auto it = owner.find(p.id);
        require(it != owner.end(), "glare probe '" + p.id + "' belongs to no group");
        p.group = it->second;
    }
}

const LuminaireInstance* Scene::find_luminaire(const std::string& id) const {
    auto it = std::find_if(luminaires.begin(), luminaires.end(), [&](const auto& l) { return l.id == id; });
    return it == luminaires.end() ? nullptr : &*it;
}

const LuminaireModel& Scene::model_of(const LuminaireInstance& l) const { return catalog->model(l.model); }

std::string Scene::group_of(const std::string& object_id) const {
    if (object_id == kSceneObject) return has_global_targets() ? kGlobalGroup : std::string{};
    for (const auto& g : groups)
        if (std::find(g.members.begin(), g.members.end(), object_id) != g.members.end()) return g.id;
    return {};
}

bool Scene::has_global_targets() const {
    return global_targets.cct_lo.has_value() || global_targets.cri_min.has_value();
}

std::vector<std::string> Scene::report_groups() const {
    std::vector<std::string> out;
    for (const auto& g : groups) out.push_back(g.id);
    if (has_global_targets()) out.push_back(kGlobalGroup);
    return out;
}

std::string Scene::next_luminaire_id() const {
    for (int n = 1;; ++n) {
        std::string id = "L" + std::to_string(n);
        if (!find_luminaire(id)) return id;
    }
}

// ---------------------------------------------------------------------------

namespace {

LuminaireInstance& light_or_throw(Scene& s, const std::string& id) {
    for (auto& l : s.luminaires)
        if (l.id == id) return l;
    throw UnknownIdError("unknown luminaire '" + id + "'");
}

template <typename F>
void for_listed(Scene& s, const std::vector<std::string>& ids, F&& f) {
    if (ids.empty()) {
        for (auto& l : s.luminaires) f(l);
        return;
    }
    for (const auto& id : ids) f(light_or_throw(s, id));
}

struct EditApplier {
    Scene& s;

    void operator()(const AddLightEdit& e) {
        if (s.find_luminaire(e.light.id)) throw ValidationError("duplicate luminaire id '" + e.light.id + "'");
        s.luminaires.push_back(e.light);
    }
    void operator()(const RemoveLightEdit& e) {
        light_or_throw(s, e.id);
        std::erase_if(s.luminaires, [&](const auto& l) { return l.id == e.id; });
    }
    void operator()(const MoveLightEdit& e) {
        auto& l = light_or_throw(s, e.id);
        l.position = l.position + e.delta;
    }
    void operator()(const SetPositionEdit& e) { light_or_throw(s, e.id).position = e.position; }
    void operator()(const RotateLightEdit& e) { light_or_throw(s, e.id).aim = e.aim; }
    void operator()(const SetDimEdit& e) {
        for_listed(s, e.ids, [&](LuminaireInstance& l) { l.dim = e.dim; });
    }
    void operator()(const ScaleDimEdit& e) {
        if (!(e.factor >= 0.0 && e.factor <= 1.0)) throw ValidationError("dim factor must be in [0, 1]");
        for (auto& l : s.luminaires) l.dim *= e.factor;
    }
    void operator()(const ShiftHeightEdit& e) {
        bool any = false;
        for_listed(s, e.ids, [&](LuminaireInstance& l) {
            if (s.model_of(l).mount != MountType::pendant) {
                if (!e.ids.empty()) throw GeometryError("luminaire '" + l.id + "' is not a pendant");
                return;
            }
            l.position.z += e.dz;
            any = true;
        });
        if (!any) throw GeometryError("no pendant luminaire to shift");
    }
    void operator()(const ExchangeModelEdit& e) {
        s.catalog->model(e.model);
        for_listed(s, e.ids, [&](LuminaireInstance& l) { l.model = e.model; });
    }
    void operator()(const SetLightGroupEdit& e) { light_or_throw(s, e.id).group = e.group; }
};

}  // namespace

Scene apply_edit(const Scene& scene, const Edit& edit) {
    Scene next = scene;
    std::visit(EditApplier{next}, edit);
    next.validate();
    return next;
}

Scene apply_edits(const Scene& scene, const std::vector<Edit>& edits) {
    Scene next = scene;
    for (const auto& e : edits) std::visit(EditApplier{next}, e);
    next.validate();
    return next;
}

std::string to_string(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::floor: return "floor";
        case SurfaceKind::ceiling: return "ceiling";
        case SurfaceKind::wall: return "wall";
        case SurfaceKind::furniture: return "furniture";
    }
    return "wall";
}

}  // namespace lightguide
