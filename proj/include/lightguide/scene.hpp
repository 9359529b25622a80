#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lightguide/catalog.hpp"
#include "lightguide/geometry.hpp"

namespace lightguide {

enum class SurfaceKind { floor, ceiling, wall, furniture };

struct Surface {
    std::string id;
    SurfaceKind kind = SurfaceKind::wall;
    Rect rect;
    double reflectance = 0.5;
};

struct Room {
    double width = 0.0;   ///< x extent, m
    double depth = 0.0;   ///< y extent, m
    double height = 0.0;  ///< z extent, m
    double patch_resolution = 0.1;  ///< m per patch edge

    bool contains(Vec3 p, double eps = 1e-9) const {
        return p.x >= -eps && p.x <= width + eps && p.y >= -eps && p.y <= depth + eps &&
               p.z >= -eps && p.z <= height + eps;
    }
};

struct LuminaireInstance {
    std::string id;
    std::string model;  ///< catalog model id
    Vec3 position;
    Vec3 aim{0.0, 0.0, -1.0};
    double dim = 1.0;
    std::string group;  ///< optional designer grouping of lights, may be empty
};

/// Targets of a measuring surface; unset means the constraint does not apply.
struct SurfaceTargets {
    std::optional<double> avg;  ///< minimum average illuminance, lx
    std::optional<double> g1;   ///< minimum min/avg
    std::optional<double> g2;   ///< minimum min/max
};

struct MeasuringSurface {
    std::string id;
    Rect rect;
    std::string group;  ///< filled from the owning MeasurementGroup
    SurfaceTargets targets;
};

/// Cone-shaped field of view of a seated or standing observer.
struct GlareProbe {
    std::string id;
    Vec3 eye;
    Vec3 view{1.0, 0.0, 0.0};
    double half_angle_deg = 60.0;
    double ugr_max = 19.0;
    std::string group;  ///< filled from the owning MeasurementGroup
};

struct MeasurementGroup {
    std::string id;
    std::string name;
    std::string tag;
    std::vector<std::string> members;
};

/// Scene-wide targets evaluated from luminaire metadata.
struct GlobalTargets {
    std::optional<double> cct_lo;
    std::optional<double> cct_hi;
    std::optional<double> cri_min;
};

/// Reserved group id under which the scene-wide constraints (K, CRI) are reported.
inline const std::string kGlobalGroup = "global";
/// Measurement-object id of the scene-wide constraints.
inline const std::string kSceneObject = "scene";

/// Validated, immutable design state. Copies are cheap to share through
/// `ScenePtr`; edits produce new instances.
class Scene {
public:
    Room room;
    std::vector<Surface> surfaces;
    std::vector<LuminaireInstance> luminaires;
    std::vector<MeasuringSurface> measuring_surfaces;
    std::vector<GlareProbe> glare_probes;
    std::vector<MeasurementGroup> groups;
    GlobalTargets global_targets;
    std::string catalog_ref;
    CatalogPtr catalog;

    /// Throws ValidationError (GeometryError for placement violations)
    /// naming the first violated invariant. Also assigns the `group` field
    /// of measuring surfaces and glare probes from `groups`.
    void validate();

    const LuminaireInstance* find_luminaire(const std::string& id) const;
    const LuminaireModel& model_of(const LuminaireInstance& l) const;
    /// Group id owning a measurement object, or empty.
    std::string group_of(const std::string& object_id) const;
    /// Group ids in scene order, followed by kGlobalGroup when global targets exist.
    std::vector<std::string> report_groups() const;
    bool has_global_targets() const;

    /// Smallest positive integer n such that "L<n>" is not an instance id.
    std::string next_luminaire_id() const;
};

using ScenePtr = std::shared_ptr<const Scene>;

// ---------------------------------------------------------------------------
// Edits

struct AddLightEdit {
    LuminaireInstance light;
};
struct RemoveLightEdit {
    std::string id;
};
struct MoveLightEdit {
    std::string id;
    Vec3 delta;
};
struct SetPositionEdit {
    std::string id;
    Vec3 position;
};
struct RotateLightEdit {
    std::string id;
    Vec3 aim;
};
/// Sets the dim factor of the listed lights (all lights when `ids` is empty).
struct SetDimEdit {
    std::vector<std::string> ids;
    double dim = 1.0;
};
/// Multiplies every light's dim factor by `factor`.
struct ScaleDimEdit {
    double factor = 1.0;
};
/// Vertical shift of the listed pendants (all pendants when `ids` is empty).
struct ShiftHeightEdit {
    std::vector<std::string> ids;
    double dz = 0.0;
};
/// Replaces the model of the listed lights (all lights when `ids` is empty).
struct ExchangeModelEdit {
    std::vector<std::string> ids;
    std::string model;
};
struct SetLightGroupEdit {
    std::string id;
    std::string group;
};

using Edit = std::variant<AddLightEdit, RemoveLightEdit, MoveLightEdit, SetPositionEdit,
                          RotateLightEdit, SetDimEdit, ScaleDimEdit, ShiftHeightEdit,
                          ExchangeModelEdit, SetLightGroupEdit>;

/// Returns a new validated snapshot; `scene` is never modified. Unknown ids
/// throw UnknownIdError; illegal geometry throws GeometryError.
Scene apply_edit(const Scene& scene, const Edit& edit);
Scene apply_edits(const Scene& scene, const std::vector<Edit>& edits);

std::string to_string(SurfaceKind k);

}  // namespace lightguide
