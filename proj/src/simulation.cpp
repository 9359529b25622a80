#include "lightguide/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lightguide/error.hpp"
#include "parallel.hpp"

namespace lightguide {

void SimSettings::validate() const {
    if (bounces < 0) throw ValidationError("bounce count must be >= 0");
    if (resolution && !(*resolution > 0.0)) throw ValidationError("patch resolution must be > 0");
}

// ---------------------------------------------------------------------------
// TransportGeometry

namespace {

int cells(double extent, double resolution) {
    return std::max(1, static_cast<int>(std::ceil(extent / resolution - 1e-9)));
}

void add_grid(std::vector<PatchGrid>& grids, std::vector<Patch>& patches, const std::string& id, const Rect& rect,
              bool sensor, double resolution) {
    PatchGrid g;
    g.id = id;
    g.sensor = sensor;
    g.rect = rect;
    g.nu = cells(rect.width(), resolution);
    g.nv = cells(rect.height(), resolution);
    g.first = patches.size();
    const double du = rect.width() / g.nu;
    const double dv = rect.height() / g.nv;
    const int grid_index = static_cast<int>(grids.size());
    for (int iv = 0; iv < g.nv; ++iv) {
        for (int iu = 0; iu < g.nu; ++iu) {
            Patch p;
            p.rect = rect;
            p.rect.u0 = rect.u0 + du * iu;
            p.rect.u1 = iu + 1 == g.nu ? rect.u1 : rect.u0 + du * (iu + 1);
            p.rect.v0 = rect.v0 + dv * iv;
            p.rect.v1 = iv + 1 == g.nv ? rect.v1 : rect.v0 + dv * (iv + 1);
            p.center = p.rect.center();
            p.normal = rect.normal();
            p.area = p.rect.area();
            p.grid = grid_index;
            patches.push_back(p);
        }
    }
    grids.push_back(std::move(g));
}

}  // namespace

TransportGeometry::TransportGeometry(const Scene& scene, double resolution, std::stop_token stop)
    : resolution_(resolution) {
    if (!(resolution > 0.0)) throw ValidationError("patch resolution must be > 0");
    for (const auto& s : scene.surfaces) {
        add_grid(grids_, patches_, s.id, s.rect, false, resolution);
        occluders_.push_back(s.rect);
    }
    surface_patches_ = patches_.size();
    for (const auto& m : scene.measuring_surfaces) add_grid(grids_, patches_, m.id, m.rect, true, resolution);

    const std::size_t rows = patches_.size();
    const std::size_t cols = surface_patches_;
    kernel_.assign(rows * cols, 0.0);

    auto kernel = [&](const Patch& a, const Patch& b) -> double {
        const Vec3 d = b.center - a.center;
        const double r2 = dot(d, d);
        if (r2 == 0.0) return 0.0;
        const double r = std::sqrt(r2);
        const double cos_a = dot(a.normal, d) / r;
        const double cos_b = -dot(b.normal, d) / r;
        if (cos_a <= 0.0 || cos_b <= 0.0) return 0.0;
        if (!visible(a.center, b.center)) return 0.0;
        // Disc-regularized point-to-point kernel; symmetric in (a, b).
        return cos_a * cos_b / (kPi * r2 + 0.5 * (a.area + b.area));
    };

    // Surface-surface block is symmetric: row i fills (i, j) and (j, i) for j > i.
    detail::parallel_for(rows, stop, [&](std::size_t i) {
        const Patch& a = patches_[i];
        const std::size_t start = i < cols ? i + 1 : 0;
        for (std::size_t j = start; j < cols; ++j) {
            const Patch& b = patches_[j];
            if (a.grid == b.grid) continue;
            const double k = kernel(a, b);
            kernel_[i * cols + j] = k;
            if (i < cols) kernel_[j * cols + i] = k;
        }
    });

    // The disc kernel can overshoot slightly for adjacent patches; one global
    // factor keeps every surface row sum <= 1 without breaking reciprocity.
    double max_row = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) sum += kernel_[i * cols + j] * patches_[j].area;
        max_row = std::max(max_row, sum);
    }
    if (max_row > 1.0)
        for (auto& k : kernel_) k /= max_row;
}

const PatchGrid* TransportGeometry::find_grid(const std::string& id) const {
    for (const auto& g : grids_)
        if (g.id == id) return &g;
    return nullptr;
}

bool TransportGeometry::visible(Vec3 a, Vec3 b) const {
    for (const auto& r : occluders_)
        if (r.blocks_segment(a, b)) return false;
    return true;
}

std::vector<double> TransportGeometry::gather(const std::vector<double>& exitance, std::stop_token stop) const {
    const std::size_t cols = surface_patches_;
    std::vector<double> flux(cols);
    for (std::size_t j = 0; j < cols; ++j) flux[j] = exitance[j] * patches_[j].area;
    std::vector<double> out(patches_.size(), 0.0);
    detail::parallel_for(patches_.size(), stop, [&](std::size_t i) {
        const double* row = &kernel_[i * cols];
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) sum += row[j] * flux[j];
        out[i] = sum;
    });
    return out;
}

double TransportGeometry::gather_at(Vec3 p, Vec3 n, const std::vector<double>& exitance) const {
    double e = 0.0;
    for (std::size_t j = 0; j < surface_patches_; ++j) {
        if (exitance[j] <= 0.0) continue;
        const Patch& q = patches_[j];
        const Vec3 d = q.center - p;
        const double r = length(d);
        if (r == 0.0) continue;
        const double cos_p = dot(n, d) / r;
        if (cos_p <= 0.0 || -dot(q.normal, d) <= 0.0) continue;
        if (!visible(p, q.center)) continue;
        // Lambertian patch of luminance M / pi seen under solid angle omega.
        e += exitance[j] / kPi * solid_angle(q.rect, p) * cos_p;
    }
    return e;
}

// ---------------------------------------------------------------------------
// LightMap

LightMap::LightMap(GeometryPtr geometry, std::vector<double> refl)
    : reflectance(std::move(refl)), geometry_(std::move(geometry)) {
    direct.assign(geometry_->patches().size(), 0.0);
    irradiance.assign(geometry_->patches().size(), 0.0);
}

std::vector<double> LightMap::exitance() const {
    std::vector<double> m(geometry_->surface_patch_count());
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = exitance(j);
    return m;
}

std::vector<double> LightMap::grid_values(const std::string& grid_id) const {
    const auto* g = geometry_ ? geometry_->find_grid(grid_id) : nullptr;
    if (!g) throw UnknownIdError("light map has no grid '" + grid_id + "'");
    return {irradiance.begin() + static_cast<std::ptrdiff_t>(g->first),
            irradiance.begin() + static_cast<std::ptrdiff_t>(g->first + g->count())};
}

// ---------------------------------------------------------------------------
// Direct light

double intensity_towards(const Scene& scene, const LuminaireInstance& light, Vec3 target) {
    const auto& model = scene.model_of(light);
    const Vec3 d = target - light.position;
    const double r = length(d);
    if (r == 0.0) return 0.0;
    const double c = std::clamp(dot(light.aim, d) / r, -1.0, 1.0);
    return model.distribution.intensity(model.flux, std::acos(c)) * light.dim;
}

double direct_irradiance_at(const Scene& scene, const LuminaireInstance& light, const TransportGeometry& geometry,
                            Vec3 p, Vec3 n) {
    const Vec3 d = light.position - p;
    const double r2 = dot(d, d);
    if (r2 == 0.0) return 0.0;
    const double cos_in = dot(n, d) / std::sqrt(r2);
    if (cos_in <= 0.0 || !geometry.visible(p, light.position)) return 0.0;
    return intensity_towards(scene, light, p) * cos_in / r2;
}

namespace {

// Adds one luminaire's direct irradiance. Each patch receives the intensity
// toward its center times the exact solid angle it subtends, divided by its
// area. The luminaire's total on room surfaces is capped at its emitted flux
// to absorb the quadrature error of that rule for very close patches.
void add_direct(const Scene& scene, const LuminaireInstance& light, const TransportGeometry& geom,
                std::vector<double>& direct, std::stop_token stop) {
    const auto& patches = geom.patches();
    std::vector<double> e(patches.size(), 0.0);
    detail::parallel_for(patches.size(), stop, [&](std::size_t i) {
        const Patch& p = patches[i];
        if (dot(p.normal, light.position - p.center) <= 0.0) return;
        if (!geom.visible(p.center, light.position)) return;
        const double intensity = intensity_towards(scene, light, p.center);
        if (intensity <= 0.0) return;
        e[i] = intensity * solid_angle(p.rect, light.position) / p.area;
    });
    const double emitted = scene.model_of(light).flux * light.dim;
    double received = 0.0;
    for (std::size_t i = 0; i < geom.surface_patch_count(); ++i) received += e[i] * patches[i].area;
    const double scale = received > emitted ? emitted / received : 1.0;
    for (std::size_t i = 0; i < e.size(); ++i) direct[i] += e[i] * scale;
}

std::string geometry_key(const Scene& scene, double resolution) {
    std::ostringstream key;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%a,", v);
        key << buf;
    };
    put(resolution);
    auto put_rect = [&](const std::string& id, const Rect& r) {
        key << id << ':' << r.axis << r.facing;
        for (double v : {r.offset, r.u0, r.u1, r.v0, r.v1}) put(v);
        key << ';';
    };
    for (const auto& s : scene.surfaces) put_rect(s.id, s.rect);
    key << '|';
    for (const auto& m : scene.measuring_surfaces) put_rect(m.id, m.rect);
    return key.str();
}

LightMap run_simulation(const Scene& scene, const SimSettings& settings, GeometryPtr geom, std::stop_token stop,
                        const ProgressCallback& progress) {
    std::vector<double> refl(geom->surface_patch_count(), 0.0);
    for (std::size_t j = 0; j < refl.size(); ++j) {
        const auto& grid = geom->grids()[static_cast<std::size_t>(geom->patches()[j].grid)];
        for (const auto& s : scene.surfaces)
            if (s.id == grid.id) refl[j] = s.reflectance;
    }
    LightMap map(geom, std::move(refl));
    for (const auto& light : scene.luminaires) add_direct(scene, light, *geom, map.direct, stop);
    map.irradiance = map.direct;
    if (settings.mode == ConvergenceMode::progressive && progress) progress(map);

    std::vector<double> current = map.direct;
    std::vector<double> exitance(geom->surface_patch_count());
    for (int b = 0; b < settings.bounces; ++b) {
        for (std::size_t j = 0; j < exitance.size(); ++j) exitance[j] = map.reflectance[j] * current[j];
        current = geom->gather(exitance, stop);
        for (std::size_t i = 0; i < current.size(); ++i) map.irradiance[i] += current[i];
        map.bounces = b + 1;
    }
    if (stop.stop_requested()) throw CancelledError();
    return map;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulator

GeometryPtr Simulator::geometry(const Scene& scene, double resolution, std::stop_token stop) const {
    const std::string key = geometry_key(scene, resolution);
    {
        std::lock_guard lock(mutex_);
        for (const auto& [k, g] : cache_)
            if (k == key) return g;
    }
    auto built = std::make_shared<const TransportGeometry>(scene, resolution, stop);
    std::lock_guard lock(mutex_);
    for (const auto& [k, g] : cache_)
        if (k == key) return g;
    cache_.emplace_back(key, built);
    if (cache_.size() > capacity_) cache_.erase(cache_.begin());
    return built;
}

LightMap Simulator::simulate(const Scene& scene, const SimSettings& settings, std::stop_token stop,
                             const ProgressCallback& progress) const {
    settings.validate();
    auto geom = geometry(scene, settings.effective_resolution(scene), stop);
    return run_simulation(scene, settings, std::move(geom), stop, progress);
}

std::vector<LightMap> Simulator::simulate_batch(const std::vector<ScenePtr>& scenes, const SimSettings& settings,
                                                std::stop_token stop, std::size_t threads) const {
    std::vector<LightMap> out(scenes.size());
    // Jobs run sequentially inside each worker; the per-job kernel is not split further.
    detail::parallel_for(
        scenes.size(), stop, [&](std::size_t i) { out[i] = simulate_candidate(*this, *scenes[i], settings, stop); },
        threads);
    return out;
}

LightMap simulate(const Scene& scene, const SimSettings& settings) { return Simulator{}.simulate(scene, settings); }

LightMap simulate_candidate(const Simulator& simulator, const Scene& scene, const SimSettings& settings,
                            std::stop_token stop) {
    return simulator.simulate(scene, settings, stop);
}

// ---------------------------------------------------------------------------
// Glare

double guth_position_index(double alpha_deg, double beta_deg) {
    const double a = alpha_deg;
    const double b = beta_deg;
    const double ln_p = (35.2 - 0.31889 * a - 1.22 * std::exp(-2.0 * a / 9.0)) * 1e-3 * b +
                        (21.0 + 0.26667 * a - 0.002963 * a * a) * 1e-5 * b * b;
    return std::clamp(std::exp(ln_p), 1.0, 16.0);
}

GlareScan probe_luminances(const Scene& scene, const LightMap& map, const GlareProbe& probe) {
    GlareScan scan;
    scan.probe = probe.id;
    const auto& geom = map.geometry();
    const Vec3 up{0.0, 0.0, 1.0};
    Vec3 up_perp = up - probe.view * dot(up, probe.view);
    const bool has_up = length(up_perp) > 1e-9;
    if (has_up) up_perp = normalized(up_perp);

    for (const auto& light : scene.luminaires) {
        const Vec3 d = light.position - probe.eye;
        const double r = length(d);
        if (r == 0.0) continue;
        const Vec3 s = d / r;
        const double beta = std::atan2(length(cross(probe.view, s)), dot(probe.view, s)) * 180.0 / kPi;
        if (beta > probe.half_angle_deg) continue;
        if (!geom.visible(probe.eye, light.position)) continue;

        const auto& model = scene.model_of(light);
        double cos_emit = 1.0;
        if (model.distribution.type != DistributionType::isotropic) {
            cos_emit = -dot(light.aim, s);
            if (cos_emit <= 0.0) continue;
        }
        const double intensity = intensity_towards(scene, light, probe.eye);
        if (intensity <= 0.0) continue;
        const double projected = model.luminous_area * cos_emit;

        double alpha = 0.0;
        const Vec3 s_perp = s - probe.view * dot(s, probe.view);
        if (has_up && length(s_perp) > 1e-12)
            alpha = std::acos(std::clamp(dot(normalized(s_perp), up_perp), -1.0, 1.0)) * 180.0 / kPi;

        GlareSource src;
        src.luminaire = light.id;
        src.luminance = intensity / projected;
        src.solid_angle = projected / (r * r);
        src.position_index = guth_position_index(alpha, beta);
        scan.sources.push_back(src);
    }
    scan.background_luminance = geom.gather_at(probe.eye, probe.view, map.exitance()) / kPi;
    return scan;
}

nlohmann::ordered_json lightmap_to_json(const LightMap& map) {
    nlohmann::ordered_json doc;
    doc["format"] = "lightguide-lightmap/1";
    doc["resolution"] = map.geometry().resolution();
    doc["bounces"] = map.bounces;
    auto grids = nlohmann::ordered_json::array();
    for (const auto& g : map.geometry().grids()) {
        nlohmann::ordered_json j;
        j["id"] = g.id;
        j["sensor"] = g.sensor;
        j["nu"] = g.nu;
        j["nv"] = g.nv;
        const auto first = static_cast<std::ptrdiff_t>(g.first);
        const auto last = first + static_cast<std::ptrdiff_t>(g.count());
        j["irradiance"] = std::vector<double>(map.irradiance.begin() + first, map.irradiance.begin() + last);
        j["direct"] = std::vector<double>(map.direct.begin() + first, map.direct.begin() + last);
        grids.push_back(std::move(j));
    }
    doc["grids"] = std::move(grids);
    return doc;
}

}  // namespace lightguide
