#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/scene.hpp"
#include "lightguide/simulation.hpp"

namespace lightguide {

/// Illumination constraint kinds, in the column order of the action
/// performance table.
enum class ConstraintKind { K, CRI, UGR, AVG, G1, G2 };

inline constexpr std::array<ConstraintKind, 6> kAllKinds{ConstraintKind::K,   ConstraintKind::CRI,
                                                         ConstraintKind::UGR, ConstraintKind::AVG,
                                                         ConstraintKind::G1,  ConstraintKind::G2};

enum class Direction { at_least, at_most, band };

constexpr Direction direction(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::UGR: return Direction::at_most;
        case ConstraintKind::K: return Direction::band;
        default: return Direction::at_least;
    }
}

constexpr std::size_t index_of(ConstraintKind k) { return static_cast<std::size_t>(k); }

std::string to_string(ConstraintKind k);
/// Accepts "AVG", "avg", ... Throws ParseError.
ConstraintKind kind_from_string(const std::string& s);

/// Target of one constraint; `hi` is used only by the K band.
struct Target {
    double value = 0.0;
    double hi = 0.0;

    friend bool operator==(const Target&, const Target&) = default;
};

/// Maps a measured value onto [0, 1]; 1 exactly when the constraint is met.
double fulfillment(ConstraintKind kind, double measured, const Target& target);

struct SurfaceStats {
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
};

/// Area-weighted statistics over a measuring surface's patches. Throws
/// UnknownIdError when the map has no grid for the surface.
SurfaceStats measure_surface(const LightMap& map, const MeasuringSurface& surface);
/// Statistics over explicit (irradiance, area) samples.
SurfaceStats surface_stats(const std::vector<double>& irradiance, const std::vector<double>& areas);

/// Background luminance is floored at this value before taking the logarithm.
inline constexpr double kMinBackgroundLuminance = 1.0;

/// Unified glare rating of a scan; 0 for an empty scan.
double measure_ugr(const GlareScan& scan);

struct GlobalValues {
    std::optional<double> cct;  ///< lumen-weighted mean, unset without emitting lights
    std::optional<double> cri;  ///< minimum over lights, unset without lights
};

GlobalValues measure_global(const Scene& scene);

/// Constraint weights w_C and group weights w_G. Missing groups weigh 1.
struct WeightConfig {
    std::array<double, 6> constraints{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    std::map<std::string, double> groups;

    double constraint(ConstraintKind k) const { return constraints[index_of(k)]; }
    double group(const std::string& id) const {
        auto it = groups.find(id);
        return it == groups.end() ? 1.0 : it->second;
    }
    /// Throws ValidationError: weights must be finite and >= 0 with at least
    /// one positive constraint weight and one positive group weight among
    /// `group_ids` (or among the listed groups when `group_ids` is empty).
    void validate(const std::vector<std::string>& group_ids = {}) const;

    friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

struct FulfillmentEntry {
    std::string object;  ///< measurement object id
    std::string group;
    ConstraintKind kind = ConstraintKind::AVG;
    std::optional<double> measured;  ///< unset when undefined (e.g. K without lights)
    Target target;
    double f = 0.0;

    friend bool operator==(const FulfillmentEntry&, const FulfillmentEntry&) = default;
};

struct GroupKindSummary {
    std::string group;
    ConstraintKind kind = ConstraintKind::AVG;
    double mean_f = 0.0;   ///< unweighted mean over member objects
    double worst_f = 0.0;  ///< minimum over member objects
    std::optional<double> worst_measured;  ///< highest UGR, lowest otherwise
    std::size_t objects = 0;

    friend bool operator==(const GroupKindSummary&, const GroupKindSummary&) = default;
};

struct FulfillmentReport {
    std::vector<FulfillmentEntry> entries;
    std::vector<GroupKindSummary> groups;        ///< ordered by group order, then kind
    std::array<std::optional<double>, 6> kind_f; ///< group-weighted mean per kind, unset if not applicable
    double score = 0.0;
    /// Group order used for summaries and layouts.
    std::vector<std::string> group_order;

    bool all_met() const;
    friend bool operator==(const FulfillmentReport&, const FulfillmentReport&) = default;
};

/// Measures every constraint of the scene and aggregates with `weights`.
FulfillmentReport evaluate(const Scene& scene, const LightMap& map, const WeightConfig& weights);

/// Recomputes the aggregates (summaries, kind means, score) of `entries`.
FulfillmentReport aggregate(std::vector<FulfillmentEntry> entries, std::vector<std::string> group_order,
                            const WeightConfig& weights);

/// Hierarchical progress score: per (group, kind) mean over objects, per kind
/// group-weighted mean, then constraint-weighted mean. Kinds with zero weight
/// or without applicable groups do not enter the denominator; 0 when nothing
/// is weighted.
double progress_score(const std::vector<FulfillmentEntry>& entries, const WeightConfig& weights);

nlohmann::ordered_json report_to_json(const FulfillmentReport& report);
FulfillmentReport report_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json weights_to_json(const WeightConfig& weights);
/// Accepts {"constraints": {"AVG": 1, ...}, "groups": {"desks": 2}}. Throws ParseError.
WeightConfig weights_from_json(const nlohmann::ordered_json& doc);

}  // namespace lightguide
