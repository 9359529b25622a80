#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/metrics.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/simulation.hpp"

namespace lightguide {

/// Modeling actions, in the row order of the performance table.
enum class ActionKind { AddLight, RemoveLight, DimLights, HeightIncrease, HeightDecrease, ChangeCollection, ChangeVersion };

inline constexpr std::array<ActionKind, 7> kAllActions{
    ActionKind::AddLight,       ActionKind::RemoveLight,      ActionKind::DimLights,    ActionKind::HeightIncrease,
    ActionKind::HeightDecrease, ActionKind::ChangeCollection, ActionKind::ChangeVersion};

std::string to_string(ActionKind k);
ActionKind action_from_string(const std::string& s);
/// Provenance link letter: A, R, d, H or C.
char action_letter(ActionKind k);

/// Usefulness a_ij of action i for constraint j (columns in ConstraintKind order).
class PerformanceTable {
public:
    using Row = std::array<int, 6>;

    /// The expert-defined default values.
    PerformanceTable();
    explicit PerformanceTable(std::array<Row, 7> rows) : rows_(rows) {}

    int value(ActionKind a, ConstraintKind c) const {
        return rows_[static_cast<std::size_t>(a)][index_of(c)];
    }
    const Row& row(ActionKind a) const { return rows_[static_cast<std::size_t>(a)]; }

    static PerformanceTable from_json(const nlohmann::ordered_json& doc);
    static PerformanceTable load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;

    friend bool operator==(const PerformanceTable&, const PerformanceTable&) = default;

private:
    std::array<Row, 7> rows_;
};

struct RankedAction {
    ActionKind kind;
    double score = 0.0;
};

/// Weighted-sum score sum_j w_Cj * a_ij per action, descending; equal scores
/// keep table row order.
std::vector<RankedAction> wsm_rank(const PerformanceTable& table, const WeightConfig& weights);

/// One concrete, parameterized modeling action.
struct Action {
    ActionKind kind = ActionKind::AddLight;
    std::string light;       ///< target light (Remove, single-light Height, ChangeVersion), may be empty
    Vec3 position;           ///< AddLight
    std::string model;       ///< AddLight model, ChangeVersion target model
    std::string collection;  ///< ChangeCollection target
    double factor = 1.0;     ///< DimLights multiplier
    double shift = 0.0;      ///< Height: signed vertical shift, m

    /// Scene edits realizing the action. Throws UnknownIdError.
    std::vector<Edit> edits(const Scene& scene) const;
    std::string description() const;
    char letter() const { return action_letter(kind); }

    nlohmann::ordered_json to_json() const;
    static Action from_json(const nlohmann::ordered_json& doc);

    friend bool operator==(const Action&, const Action&) = default;
};

struct GuidanceSettings {
    int actions = 2;                ///< top-ranked actions explored
    int candidates_per_action = 5;
    int max_suggestions = 3;
    int retry_cap = 25;             ///< draws per requested candidate before giving up
    double add_radius = 1.0;        ///< m, disc around the neighbour light
    double dim_lo = 0.5, dim_hi = 0.95;
    double shift_lo = 0.1, shift_hi = 0.6;  ///< m
    double working_plane_guard = 1.2;        ///< no light below this height, m
    std::optional<double> candidate_resolution;  ///< coarser patches for candidates
    std::size_t threads = 0;
};

/// True when the action applies cleanly: edits validate and every light
/// stays above the working-plane guard.
bool is_valid(const Scene& scene, const Action& action, const GuidanceSettings& settings);

/// Draws up to `candidates_per_action` distinct valid parameterizations.
/// Empty when the action cannot apply to the scene.
std::vector<Action> parameterize(ActionKind kind, const Scene& scene, std::uint64_t seed,
                                 const GuidanceSettings& settings = {});

struct Candidate {
    Action action;
    ScenePtr scene;
    LightMap map;
    FulfillmentReport report;
    double score = 0.0;
};

struct GuidanceResult {
    std::vector<RankedAction> ranking;
    std::vector<ActionKind> explored;  ///< the top-ranked actions that were parameterized
    std::vector<Candidate> pool;       ///< every simulated candidate, in generation order
    std::vector<Candidate> suggestions;  ///< best candidates by score, descending
};

/// Independent seed for the `index`-th round or batch of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Ranks actions, parameterizes the top ones, simulates every candidate as a
/// cancellable batch and keeps the highest-scoring few. Pure given inputs and
/// seed. Throws CancelledError when `stop` fires.
GuidanceResult generate_suggestions(const Scene& state, const WeightConfig& weights, const PerformanceTable& table,
                                    const GuidanceSettings& settings, const SimSettings& sim,
                                    const Simulator& simulator, std::uint64_t seed, std::stop_token stop = {});

}  // namespace lightguide
