#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <algorithm>

#include "lightguide/catalog.hpp"
#include "lightguide/guidance.hpp"
#include "lightguide/metrics.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/scene_io.hpp"

namespace lgtest {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(LIGHTGUIDE_DATA_DIR) / name;
}

inline lightguide::Scene fixture(const std::string& name) { return lightguide::load_scene_file(data_path(name)); }

inline lightguide::LuminaireModel isotropic_model(const std::string& id, double candela, double cct = 4000,
                                                  double cri = 80) {
    lightguide::LuminaireModel m;
    m.id = id;
    m.collection = id;
    m.version = "v1";
    m.flux = candela * 4.0 * lightguide::kPi;
    m.cct = cct;
    m.cri = cri;
    m.distribution.type = lightguide::DistributionType::isotropic;
    m.mount = lightguide::MountType::surface;
    m.luminous_area = 0.01;
    return m;
}

inline lightguide::CatalogPtr catalog_of(std::vector<lightguide::LuminaireModel> models) {
    return std::make_shared<const lightguide::Catalog>(std::move(models));
}

inline lightguide::Surface surface(const std::string& id, lightguide::SurfaceKind kind, lightguide::Vec3 lo,
                                   lightguide::Vec3 hi, const std::string& normal, double rho) {
    lightguide::Surface s;
    s.id = id;
    s.kind = kind;
    s.rect = *lightguide::make_rect(lo, hi, normal);
    s.reflectance = rho;
    return s;
}

/// Room with floor only (black by default), for direct-light checks.
inline lightguide::Scene open_floor(double w, double d, double h, double res, lightguide::CatalogPtr catalog,
                                    double floor_rho = 0.0) {
    using namespace lightguide;
    Scene s;
    s.room = {w, d, h, res};
    s.catalog = std::move(catalog);
    s.surfaces.push_back(surface("floor", SurfaceKind::floor, {0, 0, 0}, {w, d, 0}, "+z", floor_rho));
    return s;
}

inline lightguide::LuminaireInstance light(const std::string& id, const std::string& model, lightguide::Vec3 p,
                                           double dim = 1.0) {
    lightguide::LuminaireInstance l;
    l.id = id;
    l.model = model;
    l.position = p;
    l.dim = dim;
    return l;
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Point-source illuminance on a surface with normal n: I cos(theta) / d^2.
inline double point_illuminance(double candela, lightguide::Vec3 source, lightguide::Vec3 p, lightguide::Vec3 n) {
    const lightguide::Vec3 d = source - p;
    const double r = lightguide::length(d);
    const double c = lightguide::dot(d, n) / r;
    return c <= 0 ? 0.0 : candela * c / (r * r);
}

/// Form factor between two directly opposed, parallel, equal a x b rectangles
/// at distance c (standard closed form).
inline double parallel_plate_form_factor(double a, double b, double c) {
    const double X = a / c, Y = b / c;
    const double X2 = X * X, Y2 = Y * Y;
    return 2.0 / (M_PI * X * Y) *
           (std::log(std::sqrt((1 + X2) * (1 + Y2) / (1 + X2 + Y2))) + X * std::sqrt(1 + Y2) * std::atan(X / std::sqrt(1 + Y2)) +
            Y * std::sqrt(1 + X2) * std::atan(Y / std::sqrt(1 + X2)) - X * std::atan(X) - Y * std::atan(Y));
}

// Flat triple loop over kinds, groups and objects; no shared code with the
// hierarchical implementation.
inline double brute_force_score(const std::vector<lightguide::FulfillmentEntry>& entries,
                                const lightguide::WeightConfig& w) {
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 6; ++k) {
        const double wc = w.constraints[k];
        if (wc <= 0) continue;
        std::vector<std::string> groups;
        for (const auto& e : entries)
            if (static_cast<int>(e.kind) == k && std::find(groups.begin(), groups.end(), e.group) == groups.end())
                groups.push_back(e.group);
        double kn = 0.0, kd = 0.0;
        for (const auto& g : groups) {
            const double wg = w.group(g);
            if (wg <= 0) continue;
            double sum = 0.0;
            int n = 0;
            for (const auto& e : entries) {
                if (static_cast<int>(e.kind) != k || e.group != g) continue;
                sum += e.f;
                ++n;
            }
            kn += wg * sum / n;
            kd += wg;
        }
        if (kd <= 0) continue;
        num += wc * kn / kd;
        den += wc;
    }
    return den > 0 ? num / den : 0.0;
}

/// Random flat report: 1-4 groups, 1-3 objects each, random kinds, f and weights.
struct RandomReport {
    std::vector<lightguide::FulfillmentEntry> entries;
    lightguide::WeightConfig weights;
};

inline RandomReport random_report(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> groups_n(1, 4), objects_n(1, 3);
    RandomReport r;
    const int groups = groups_n(rng);
    for (int g = 0; g < groups; ++g) {
        const std::string gid = "g" + std::to_string(g);
        const int objects = objects_n(rng);
        for (int o = 0; o < objects; ++o) {
            for (lightguide::ConstraintKind k : lightguide::kAllKinds) {
                if (unit(rng) < 0.3) continue;
                lightguide::FulfillmentEntry e;
                e.object = gid + "o" + std::to_string(o);
                e.group = gid;
                e.kind = k;
                e.f = unit(rng) < 0.2 ? 1.0 : unit(rng);
                e.measured = e.f;
                r.entries.push_back(e);
            }
        }
        r.weights.groups[gid] = unit(rng) < 0.15 ? 0.0 : unit(rng) * 3;
    }
    for (auto& w : r.weights.constraints) w = unit(rng) < 0.15 ? 0.0 : unit(rng) * 2;
    return r;
}

// Exhaustive oracle: score every row, sort by score then row index.
inline std::vector<lightguide::ActionKind> oracle_order(const lightguide::PerformanceTable& t,
                                                       const lightguide::WeightConfig& w) {
    std::vector<std::pair<double, int>> rows;
    for (int i = 0; i < 7; ++i) {
        double s = 0.0;
        for (int j = 0; j < 6; ++j) s += w.constraints[j] * t.row(static_cast<lightguide::ActionKind>(i))[j];
        rows.push_back({s, i});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<lightguide::ActionKind> out;
    for (const auto& r : rows) out.push_back(static_cast<lightguide::ActionKind>(r.second));
    return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lgtest
