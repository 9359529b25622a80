#include "lightguide/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 7> kActionNames{"add",    "remove", "dim", "height_increase", "height_decrease",
                                                  "change_collection", "change_version"};

}  // namespace

std::string to_string(ActionKind k) { return kActionNames[static_cast<std::size_t>(k)]; }

ActionKind action_from_string(const std::string& s) {
    for (auto k : kAllActions)
        if (to_string(k) == s) return k;
    throw ParseError("unknown action '" + s + "'");
}

char action_letter(ActionKind k) {
    switch (k) {
        case ActionKind::AddLight: return 'A';
        case ActionKind::RemoveLight: return 'R';
        case ActionKind::DimLights: return 'd';
        case ActionKind::HeightIncrease:
        case ActionKind::HeightDecrease: return 'H';
        case ActionKind::ChangeCollection:
        case ActionKind::ChangeVersion: return 'C';
    }
    return 'M';
}

// ---------------------------------------------------------------------------
// Performance table

//                     K  CRI UGR AVG G1  G2
PerformanceTable::PerformanceTable()
    : rows_{{{1, 1, 3, 10, 10, 7},     // add
             {1, 1, 10, 1, 5, 5},      // remove
             {1, 1, 10, 1, 1, 1},      // dim
             {1, 1, 10, 4, 6, 10},     // height increase
             {1, 1, 10, 6, 10, 4},     // height decrease
             {10, 10, 6, 4, 4, 6},     // change collection
             {10, 10, 1, 1, 6, 4}}} {} // change version

PerformanceTable PerformanceTable::from_json(const ojson& doc) {
    std::array<Row, 7> rows{};
    try {
        const auto columns = doc.at("columns").get<std::vector<std::string>>();
        if (columns.size() != 6) throw ParseError("performance table needs 6 columns");
        std::array<ConstraintKind, 6> order{};
        for (std::size_t c = 0; c < 6; ++c) order[c] = kind_from_string(columns[c]);
        const auto& table = doc.at("rows");
        if (table.size() != 7) throw ParseError("performance table needs 7 rows");
        for (auto a : kAllActions) {
            const auto values = table.at(to_string(a)).get<std::vector<int>>();
            if (values.size() != 6) throw ParseError("row '" + to_string(a) + "' needs 6 values");
            for (std::size_t c = 0; c < 6; ++c) rows[static_cast<std::size_t>(a)][index_of(order[c])] = values[c];
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("performance table: ") + e.what());
    }
    return PerformanceTable(rows);
}

PerformanceTable PerformanceTable::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

ojson PerformanceTable::to_json() const {
    ojson doc;
    doc["format"] = "lightguide-performance/1";
    auto cols = ojson::array();
    for (auto k : kAllKinds) cols.push_back(lightguide::to_string(k));
    doc["columns"] = cols;
    ojson rows;
    for (auto a : kAllActions) rows[lightguide::to_string(a)] = row(a);
    doc["rows"] = rows;
    return doc;
}

std::vector<RankedAction> wsm_rank(const PerformanceTable& table, const WeightConfig& weights) {
    std::vector<RankedAction> out;
    for (auto a : kAllActions) {
        double s = 0.0;
        for (auto c : kAllKinds) s += weights.constraint(c) * table.value(a, c);
        out.push_back({a, s});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.score > y.score; });
    return out;
}

// ---------------------------------------------------------------------------
// Actions

namespace {

const LuminaireModel* collection_model(const Catalog& catalog, const std::string& collection,
                                       const std::string& preferred_version) {
    const auto versions = catalog.versions(collection);
    if (versions.empty()) return nullptr;
    for (const auto* v : versions)
        if (v->version == preferred_version) return v;
    return versions.front();
}

}  // namespace

std::vector<Edit> Action::edits(const Scene& scene) const {
    switch (kind) {
        case ActionKind::AddLight: {
            LuminaireInstance l;
            l.id = scene.next_luminaire_id();
            l.model = model;
            l.position = position;
            l.aim = {0.0, 0.0, -1.0};
            return {AddLightEdit{l}};
        }
        case ActionKind::RemoveLight:
            return {RemoveLightEdit{light}};
        case ActionKind::DimLights:
            return {ScaleDimEdit{factor}};
        case ActionKind::HeightIncrease:
        case ActionKind::HeightDecrease: {
            std::vector<std::string> ids;
            if (!light.empty()) ids.push_back(light);
            return {ShiftHeightEdit{ids, shift}};
        }
        case ActionKind::ChangeCollection: {
            std::vector<Edit> out;
            for (const auto& l : scene.luminaires) {
                const auto& current = scene.model_of(l);
                const auto* target = collection_model(*scene.catalog, collection, current.version);
                if (!target) throw UnknownIdError("unknown collection '" + collection + "'");
                out.push_back(ExchangeModelEdit{{l.id}, target->id});
                if (target->mount != current.mount) {
                    Vec3 p = l.position;
                    p.z = target->mount == MountType::surface ? scene.room.height : target->max_height;
                    out.push_back(SetPositionEdit{l.id, p});
                }
            }
            return out;
        }
        case ActionKind::ChangeVersion:
            return {ExchangeModelEdit{{light}, model}};
    }
    return {};
}

std::string Action::description() const {
    std::ostringstream out;
    out.precision(3);
    switch (kind) {
        case ActionKind::AddLight:
            out << "add light " << model << " at (" << position.x << ", " << position.y << ", " << position.z << ")";
            break;
        case ActionKind::RemoveLight: out << "remove light " << light; break;
        case ActionKind::DimLights: out << "dim all lights to " << factor * 100.0 << "%"; break;
        case ActionKind::HeightIncrease:
        case ActionKind::HeightDecrease:
            out << "move " << (light.empty() ? std::string("all pendants") : "pendant " + light) << " by "
                << (shift >= 0 ? "+" : "") << shift << " m";
            break;
        case ActionKind::ChangeCollection: out << "switch all lights to collection " << collection; break;
        case ActionKind::ChangeVersion: out << "replace light " << light << " by " << model; break;
    }
    return out.str();
}

ojson Action::to_json() const {
    ojson j;
    j["kind"] = lightguide::to_string(kind);
    j["letter"] = std::string(1, letter());
    j["description"] = description();
    ojson p = ojson::object();
    switch (kind) {
        case ActionKind::AddLight:
            p["position"] = vec3_to_json(position);
            p["model"] = model;
            break;
        case ActionKind::RemoveLight: p["light"] = light; break;
        case ActionKind::DimLights: p["factor"] = factor; break;
        case ActionKind::HeightIncrease:
        case ActionKind::HeightDecrease:
            p["shift"] = shift;
            if (!light.empty()) p["light"] = light;
            break;
        case ActionKind::ChangeCollection: p["collection"] = collection; break;
        case ActionKind::ChangeVersion:
            p["light"] = light;
            p["model"] = model;
            break;
    }
    j["parameters"] = std::move(p);
    return j;
}

Action Action::from_json(const ojson& j) {
    try {
        Action a;
        a.kind = action_from_string(j.at("kind").get<std::string>());
        const auto& p = j.at("parameters");
        if (p.contains("position")) a.position = vec3_from_json(p.at("position"));
        if (p.contains("model")) a.model = p.at("model").get<std::string>();
        if (p.contains("light")) a.light = p.at("light").get<std::string>();
        if (p.contains("factor")) a.factor = p.at("factor").get<double>();
        if (p.contains("shift")) a.shift = p.at("shift").get<double>();
        if (p.contains("collection")) a.collection = p.at("collection").get<std::string>();
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("action: ") + e.what());
    }
}

bool is_valid(const Scene& scene, const Action& action, const GuidanceSettings& settings) {
    try {
        const Scene next = apply_edits(scene, action.edits(scene));
        return std::all_of(next.luminaires.begin(), next.luminaires.end(),
                           [&](const auto& l) { return l.position.z >= settings.working_plane_guard; });
    } catch (const Error&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Parameterization

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over the combined state
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, ActionKind kind) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(kind), 0x4c47u};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[pick(rng, i)]);
}

std::string most_common_model(const Scene& scene) {
    std::map<std::string, int> counts;
    for (const auto& l : scene.luminaires) ++counts[l.model];
    std::string best;
    int best_count = 0;
    for (const auto& l : scene.luminaires) {
        if (counts[l.model] > best_count) {
            best = l.model;
            best_count = counts[l.model];
        }
    }
    return best;
}

std::vector<std::string> pendant_ids(const Scene& scene) {
    std::vector<std::string> ids;
    for (const auto& l : scene.luminaires)
        if (scene.model_of(l).mount == MountType::pendant) ids.push_back(l.id);
    return ids;
}

// Keeps drawing until `wanted` distinct valid actions exist or the retry cap is spent.
template <typename Draw>
std::vector<Action> sample(const Scene& scene, const GuidanceSettings& settings, std::size_t wanted, Draw&& draw) {
    std::vector<Action> out;
    const int budget = settings.retry_cap * static_cast<int>(wanted);
    for (int attempt = 0; attempt < budget && out.size() < wanted; ++attempt) {
        Action a = draw();
        if (std::find(out.begin(), out.end(), a) != out.end()) continue;
        if (is_valid(scene, a, settings)) out.push_back(std::move(a));
    }
    return out;
}

// Walks a shuffled list of discrete options and keeps the valid ones.
std::vector<Action> from_options(const Scene& scene, const GuidanceSettings& settings, std::vector<Action> options,
                                 std::mt19937_64& rng) {
    shuffle(options, rng);
    std::vector<Action> out;
    for (auto& a : options) {
        if (out.size() >= static_cast<std::size_t>(settings.candidates_per_action)) break;
        if (is_valid(scene, a, settings)) out.push_back(std::move(a));
    }
    return out;
}

}  // namespace

std::vector<Action> parameterize(ActionKind kind, const Scene& scene, std::uint64_t seed,
                                 const GuidanceSettings& settings) {
    auto rng = make_rng(seed, kind);
    const auto wanted = static_cast<std::size_t>(std::max(0, settings.candidates_per_action));
    const auto& catalog = *scene.catalog;

    switch (kind) {
        case ActionKind::AddLight: {
            if (catalog.models().empty()) return {};
            std::string model_id = most_common_model(scene);
            if (model_id.empty()) model_id = catalog.models().front().id;
            const auto& model = catalog.model(model_id);
            return sample(scene, settings, wanted, [&] {
                // Empty room: start from the center, pendants hung a little below the ceiling.
                Vec3 base{scene.room.width / 2.0, scene.room.depth / 2.0,
                          model.mount == MountType::pendant ? std::min(model.max_height, scene.room.height - 0.3)
                                                            : scene.room.height};
                if (!scene.luminaires.empty()) base = scene.luminaires[pick(rng, scene.luminaires.size())].position;
                const double r = settings.add_radius * std::sqrt(uniform(rng, 0.0, 1.0));
                const double phi = uniform(rng, 0.0, 2.0 * kPi);
                Action a;
                a.kind = kind;
                a.model = model_id;
                a.position = {base.x + r * std::cos(phi), base.y + r * std::sin(phi), base.z};
                return a;
            });
        }
        case ActionKind::RemoveLight: {
            std::vector<Action> options;
            for (const auto& l : scene.luminaires) {
                Action a;
                a.kind = kind;
                a.light = l.id;
                options.push_back(a);
            }
            return from_options(scene, settings, std::move(options), rng);
        }
        case ActionKind::DimLights: {
            if (scene.luminaires.empty()) return {};
            return sample(scene, settings, wanted, [&] {
                Action a;
                a.kind = kind;
                a.factor = uniform(rng, settings.dim_lo, settings.dim_hi);
                return a;
            });
        }
        case ActionKind::HeightIncrease:
        case ActionKind::HeightDecrease: {
            const auto pendants = pendant_ids(scene);
            if (pendants.empty()) return {};
            const double sign = kind == ActionKind::HeightIncrease ? 1.0 : -1.0;
            return sample(scene, settings, wanted, [&] {
                Action a;
                a.kind = kind;
                a.shift = sign * uniform(rng, settings.shift_lo, settings.shift_hi);
                if (uniform(rng, 0.0, 1.0) < 0.5) a.light = pendants[pick(rng, pendants.size())];
                return a;
            });
        }
        case ActionKind::ChangeCollection: {
            if (scene.luminaires.empty()) return {};
            const auto current = catalog.model(most_common_model(scene)).collection;
            std::vector<Action> options;
            for (const auto& c : catalog.collections()) {
                if (c == current) continue;
                Action a;
                a.kind = kind;
                a.collection = c;
                options.push_back(a);
            }
            return from_options(scene, settings, std::move(options), rng);
        }
        case ActionKind::ChangeVersion: {
            std::vector<Action> options;
            for (const auto& l : scene.luminaires) {
                const auto& current = scene.model_of(l);
                for (const auto* v : catalog.versions(current.collection)) {
                    if (v->id == current.id) continue;
                    Action a;
                    a.kind = kind;
                    a.light = l.id;
                    a.model = v->id;
                    options.push_back(a);
                }
            }
            return from_options(scene, settings, std::move(options), rng);
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

GuidanceResult generate_suggestions(const Scene& state, const WeightConfig& weights, const PerformanceTable& table,
                                    const GuidanceSettings& settings, const SimSettings& sim,
                                    const Simulator& simulator, std::uint64_t seed, std::stop_token stop) {
    GuidanceResult result;
    result.ranking = wsm_rank(table, weights);
    const auto explored = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, settings.actions)),
                                                result.ranking.size());

    std::vector<Action> actions;
    for (std::size_t i = 0; i < explored; ++i) {
        const ActionKind kind = result.ranking[i].kind;
        result.explored.push_back(kind);
        for (auto& a : parameterize(kind, state, seed, settings)) actions.push_back(std::move(a));
    }

    std::vector<ScenePtr> scenes;
    for (const auto& a : actions) scenes.push_back(std::make_shared<const Scene>(apply_edits(state, a.edits(state))));

    SimSettings candidate_sim = sim;
    if (settings.candidate_resolution) candidate_sim.resolution = settings.candidate_resolution;
    auto maps = simulator.simulate_batch(scenes, candidate_sim, stop, settings.threads);

    for (std::size_t i = 0; i < actions.size(); ++i) {
        Candidate c;
        c.action = actions[i];
        c.scene = scenes[i];
        c.report = evaluate(*scenes[i], maps[i], weights);
        c.score = c.report.score;
        c.map = std::move(maps[i]);
        result.pool.push_back(std::move(c));
    }

    std::vector<std::size_t> order(result.pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return result.pool[a].score > result.pool[b].score; });
    const auto keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(0, settings.max_suggestions)));
    for (std::size_t i = 0; i < keep; ++i) result.suggestions.push_back(result.pool[order[i]]);
    return result;
}

}  // namespace lightguide
