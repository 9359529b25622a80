#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/geometry.hpp"
#include "lightguide/scene.hpp"

namespace lightguide {

enum class ConvergenceMode { full, progressive };

struct SimSettings {
    int bounces = 3;
    /// Patch edge length; unset means the scene's room.patch_resolution.
    std::optional<double> resolution;
    std::uint64_t seed = 0;
    ConvergenceMode mode = ConvergenceMode::full;

    double effective_resolution(const Scene& scene) const {
        return resolution.value_or(scene.room.patch_resolution);
    }
    /// Throws ValidationError.
    void validate() const;
};

struct Patch {
    Rect rect;  ///< the patch itself, a sub-rectangle of its grid's rectangle
    Vec3 center;
    Vec3 normal;
    double area = 0.0;
    int grid = 0;
};

/// Regular subdivision of one surface or measuring surface.
struct PatchGrid {
    std::string id;
    bool sensor = false;  ///< measuring surfaces receive light but neither reflect nor occlude
    Rect rect;
    int nu = 0;
    int nv = 0;
    std::size_t first = 0;  ///< index of the first patch; patches are row-major in v, then u

    std::size_t count() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
};

/// Patch layout, occluders and the diffuse transfer matrix of a room. Depends
/// only on geometry and resolution, never on luminaires or reflectances, so
/// one instance serves every snapshot of a session.
class TransportGeometry {
public:
    TransportGeometry(const Scene& scene, double resolution, std::stop_token stop = {});

    double resolution() const { return resolution_; }
    const std::vector<PatchGrid>& grids() const { return grids_; }
    const std::vector<Patch>& patches() const { return patches_; }
    const std::vector<Rect>& occluders() const { return occluders_; }
    /// Surface patches are [0, surface_patch_count()); sensor patches follow.
    std::size_t surface_patch_count() const { return surface_patches_; }
    const PatchGrid* find_grid(const std::string& id) const;

    /// Form factor F_ij from receiver patch i (any patch) to surface patch j:
    /// fraction of the diffuse flux leaving j that arrives per unit area at i,
    /// scaled so that E_i = sum_j F_ij * M_j.
    double form_factor(std::size_t i, std::size_t j) const {
        return kernel_[i * surface_patches_ + j] * patches_[j].area;
    }

    /// True when the segment a->b is not blocked by any room surface.
    bool visible(Vec3 a, Vec3 b) const;

    /// Irradiance at every patch from surface exitance `exitance` (lm/m^2,
    /// indexed by surface patch). One gathering step.
    std::vector<double> gather(const std::vector<double>& exitance, std::stop_token stop = {}) const;

    /// Irradiance at point `p` with normal `n` from surface exitance.
    double gather_at(Vec3 p, Vec3 n, const std::vector<double>& exitance) const;

private:
    double resolution_ = 0.0;
    std::vector<PatchGrid> grids_;
    std::vector<Patch> patches_;
    std::vector<Rect> occluders_;
    std::size_t surface_patches_ = 0;
    std::vector<double> kernel_;  ///< symmetric point-to-point kernel incl. visibility, rows = all patches
};

using GeometryPtr = std::shared_ptr<const TransportGeometry>;

/// Simulated irradiance per patch.
class LightMap {
public:
    LightMap() = default;
    LightMap(GeometryPtr geometry, std::vector<double> reflectance);

    const TransportGeometry& geometry() const { return *geometry_; }
    GeometryPtr geometry_ptr() const { return geometry_; }
    bool empty() const { return geometry_ == nullptr; }

    std::vector<double> direct;      ///< lx, first hit only
    std::vector<double> irradiance;  ///< lx, direct plus all computed bounces
    std::vector<double> reflectance; ///< per surface patch
    int bounces = 0;

    /// Reflected flux density rho * E of a surface patch (lm/m^2).
    double exitance(std::size_t patch) const { return reflectance[patch] * irradiance[patch]; }
    std::vector<double> exitance() const;
    /// Irradiance values of one grid; throws UnknownIdError.
    std::vector<double> grid_values(const std::string& grid_id) const;

    friend bool operator==(const LightMap& a, const LightMap& b) {
        return a.geometry_ == b.geometry_ && a.direct == b.direct && a.irradiance == b.irradiance &&
               a.reflectance == b.reflectance && a.bounces == b.bounces;
    }

private:
    GeometryPtr geometry_;
};

/// Called with the intermediate map after the direct pass in progressive mode.
using ProgressCallback = std::function<void(const LightMap&)>;

/// Deterministic light transport. Holds a cache of transport geometries so
/// repeated simulations of the same room reuse the form factors. Thread-safe.
class Simulator {
public:
    explicit Simulator(std::size_t cache_capacity = 8) : capacity_(cache_capacity) {}

    /// Throws CancelledError when `stop` is requested mid-run.
    LightMap simulate(const Scene& scene, const SimSettings& settings, std::stop_token stop = {},
                      const ProgressCallback& progress = {}) const;

    GeometryPtr geometry(const Scene& scene, double resolution, std::stop_token stop = {}) const;

    /// Runs every scene as an independent job on up to `threads` workers.
    /// Result i belongs to scenes[i] regardless of scheduling. Throws
    /// CancelledError if `stop` fires before all jobs finish.
    std::vector<LightMap> simulate_batch(const std::vector<ScenePtr>& scenes, const SimSettings& settings,
                                         std::stop_token stop = {}, std::size_t threads = 0) const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    mutable std::vector<std::pair<std::string, GeometryPtr>> cache_;
};

/// One-shot simulation without a shared cache.
LightMap simulate(const Scene& scene, const SimSettings& settings);

/// Same contract as simulate(); a cancellable unit of work for suggestion batches.
LightMap simulate_candidate(const Simulator& simulator, const Scene& scene, const SimSettings& settings,
                            std::stop_token stop);

/// Direct irradiance at point `p` with normal `n` from one luminaire, with
/// visibility against `geometry` occluders. Point evaluation, lx.
double direct_irradiance_at(const Scene& scene, const LuminaireInstance& light, const TransportGeometry& geometry,
                            Vec3 p, Vec3 n);

/// Intensity (cd, dimming applied) a luminaire sends towards `target`.
double intensity_towards(const Scene& scene, const LuminaireInstance& light, Vec3 target);

// ---------------------------------------------------------------------------
// Glare

struct GlareSource {
    std::string luminaire;
    double luminance = 0.0;        ///< L_s, cd/m^2
    double solid_angle = 0.0;      ///< omega, sr
    double position_index = 1.0;   ///< Guth p
};

struct GlareScan {
    std::string probe;
    std::vector<GlareSource> sources;
    double background_luminance = 0.0;  ///< L_b, cd/m^2, before any flooring
};

/// Guth position index from the angle between line of sight and source
/// direction (beta) and the angle of the plane through both from vertical
/// (alpha), both in degrees. 1 on axis, clamped to [1, 16].
double guth_position_index(double alpha_deg, double beta_deg);

GlareScan probe_luminances(const Scene& scene, const LightMap& map, const GlareProbe& probe);

/// Grid dump used for golden files and the CLI --dump-map flag.
nlohmann::ordered_json lightmap_to_json(const LightMap& map);

}  // namespace lightguide
