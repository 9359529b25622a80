#include "lightguide/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lightguide/error.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

std::string to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::K: return "K";
        case ConstraintKind::CRI: return "CRI";
        case ConstraintKind::UGR: return "UGR";
        case ConstraintKind::AVG: return "AVG";
        case ConstraintKind::G1: return "G1";
        case ConstraintKind::G2: return "G2";
    }
    return "AVG";
}

ConstraintKind kind_from_string(const std::string& s) {
    std::string upper = s;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (auto k : kAllKinds)
        if (to_string(k) == upper) return k;
    throw ParseError("unknown constraint kind '" + s + "'");
}

double fulfillment(ConstraintKind kind, double measured, const Target& target) {
    double f = 0.0;
    switch (direction(kind)) {
        case Direction::at_least:
            f = measured >= target.value ? 1.0 : measured / target.value;
            break;
        case Direction::at_most:
            f = measured <= target.value ? 1.0 : target.value / measured;
            break;
        case Direction::band: {
            if (measured >= target.value && measured <= target.hi) return 1.0;
            const double distance = measured < target.value ? target.value - measured : measured - target.hi;
            f = 1.0 - std::min(1.0, distance / (target.hi - target.value));
            break;
        }
    }
    if (!(f >= 0.0)) return 0.0;
    return std::min(1.0, f);
}

// ---------------------------------------------------------------------------

SurfaceStats surface_stats(const std::vector<double>& irradiance, const std::vector<double>& areas) {
    SurfaceStats st;
    if (irradiance.empty()) return st;
    double weighted = 0.0, total_area = 0.0;
    st.min = irradiance.front();
    st.max = irradiance.front();
    for (std::size_t i = 0; i < irradiance.size(); ++i) {
        weighted += irradiance[i] * areas[i];
        total_area += areas[i];
        st.min = std::min(st.min, irradiance[i]);
        st.max = std::max(st.max, irradiance[i]);
    }
    st.avg = weighted / total_area;
    st.g1 = st.avg > 0.0 ? st.min / st.avg : 0.0;
    st.g2 = st.max > 0.0 ? st.min / st.max : 0.0;
    return st;
}

SurfaceStats measure_surface(const LightMap& map, const MeasuringSurface& surface) {
    const auto* grid = map.empty() ? nullptr : map.geometry().find_grid(surface.id);
    if (!grid || !grid->sensor) throw UnknownIdError("light map does not cover measuring surface '" + surface.id + "'");
    std::vector<double> e(grid->count()), a(grid->count());
    for (std::size_t i = 0; i < grid->count(); ++i) {
        e[i] = map.irradiance[grid->first + i];
        a[i] = map.geometry().patches()[grid->first + i].area;
    }
    return surface_stats(e, a);
}

double measure_ugr(const GlareScan& scan) {
    if (scan.sources.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : scan.sources)
        sum += s.luminance * s.luminance * s.solid_angle / (s.position_index * s.position_index);
    if (!(sum > 0.0)) return 0.0;
    const double background = std::max(scan.background_luminance, kMinBackgroundLuminance);
    return 8.0 * std::log10(0.25 / background * sum);
}

GlobalValues measure_global(const Scene& scene) {
    GlobalValues g;
    double weighted = 0.0, lumens = 0.0;
    for (const auto& l : scene.luminaires) {
        const auto& m = scene.model_of(l);
        const double emitted = m.flux * l.dim;
        weighted += m.cct * emitted;
        lumens += emitted;
        g.cri = g.cri ? std::min(*g.cri, m.cri) : m.cri;
    }
    if (lumens > 0.0) g.cct = weighted / lumens;
    return g;
}

// ---------------------------------------------------------------------------

void WeightConfig::validate(const std::vector<std::string>& group_ids) const {
    bool any_constraint = false;
    for (double w : constraints) {
        if (!std::isfinite(w) || w < 0.0) throw ValidationError("constraint weights must be finite and >= 0");
        any_constraint = any_constraint || w > 0.0;
    }
    if (!any_constraint) throw ValidationError("at least one constraint weight must be > 0");
    for (const auto& [id, w] : groups)
        if (!std::isfinite(w) || w < 0.0) throw ValidationError("group weight of '" + id + "' must be finite and >= 0");
    bool any_group = false;
    if (!group_ids.empty()) {
        for (const auto& id : group_ids) any_group = any_group || group(id) > 0.0;
    } else {
        any_group = groups.empty() || std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.second > 0.0; });
    }
    if (!any_group) throw ValidationError("at least one group weight must be > 0");
}

bool FulfillmentReport::all_met() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.f >= 1.0; });
}

namespace {

struct Accumulator {
    double sum = 0.0;
    double worst = 1.0;
    std::optional<double> worst_measured;
    std::size_t count = 0;
};

// Group order: the given order first, then any group only seen in entries.
std::vector<std::string> full_group_order(const std::vector<FulfillmentEntry>& entries,
                                          std::vector<std::string> order) {
    for (const auto& e : entries)
        if (std::find(order.begin(), order.end(), e.group) == order.end()) order.push_back(e.group);
    return order;
}

std::map<std::pair<std::string, ConstraintKind>, Accumulator> accumulate(const std::vector<FulfillmentEntry>& entries) {
    std::map<std::pair<std::string, ConstraintKind>, Accumulator> acc;
    for (const auto& e : entries) {
        auto& a = acc[{e.group, e.kind}];
        a.sum += e.f;
        a.worst = a.count == 0 ? e.f : std::min(a.worst, e.f);
        if (e.measured) {
            const bool worse = !a.worst_measured ||
                               (e.kind == ConstraintKind::UGR ? *e.measured > *a.worst_measured
                                                              : *e.measured < *a.worst_measured);
            if (worse) a.worst_measured = e.measured;
        }
        ++a.count;
    }
    return acc;
}

std::array<std::optional<double>, 6> kind_means(
    const std::map<std::pair<std::string, ConstraintKind>, Accumulator>& acc, const std::vector<std::string>& order,
    const WeightConfig& weights) {
    std::array<std::optional<double>, 6> out;
    for (auto k : kAllKinds) {
        double num = 0.0, den = 0.0;
        for (const auto& g : order) {
            auto it = acc.find({g, k});
            if (it == acc.end()) continue;
            const double w = weights.group(g);
            if (w <= 0.0) continue;
            num += w * (it->second.sum / static_cast<double>(it->second.count));
            den += w;
        }
        if (den > 0.0) out[index_of(k)] = num / den;
    }
    return out;
}

double score_from_kinds(const std::array<std::optional<double>, 6>& kind_f, const WeightConfig& weights) {
    double num = 0.0, den = 0.0;
    for (auto k : kAllKinds) {
        const double w = weights.constraint(k);
        if (w <= 0.0 || !kind_f[index_of(k)]) continue;
        num += w * *kind_f[index_of(k)];
        den += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double progress_score(const std::vector<FulfillmentEntry>& entries, const WeightConfig& weights) {
    const auto order = full_group_order(entries, {});
    return score_from_kinds(kind_means(accumulate(entries), order, weights), weights);
}

FulfillmentReport aggregate(std::vector<FulfillmentEntry> entries, std::vector<std::string> group_order,
                            const WeightConfig& weights) {
    FulfillmentReport r;
    r.group_order = full_group_order(entries, std::move(group_order));
    const auto acc = accumulate(entries);
    for (const auto& g : r.group_order) {
        for (auto k : kAllKinds) {
            auto it = acc.find({g, k});
            if (it == acc.end()) continue;
            GroupKindSummary s;
            s.group = g;
            s.kind = k;
            s.mean_f = it->second.sum / static_cast<double>(it->second.count);
            s.worst_f = it->second.worst;
            s.worst_measured = it->second.worst_measured;
            s.objects = it->second.count;
            r.groups.push_back(s);
        }
    }
    r.kind_f = kind_means(acc, r.group_order, weights);
    r.score = score_from_kinds(r.kind_f, weights);
    r.entries = std::move(entries);
    return r;
}

FulfillmentReport evaluate(const Scene& scene, const LightMap& map, const WeightConfig& weights) {
    std::vector<FulfillmentEntry> entries;
    auto add = [&](const std::string& object, const std::string& group, ConstraintKind kind,
                   std::optional<double> measured, Target target) {
        FulfillmentEntry e{object, group, kind, measured, target, 0.0};
        e.f = measured ? fulfillment(kind, *measured, target) : 0.0;
        entries.push_back(std::move(e));
    };
    for (const auto& m : scene.measuring_surfaces) {
        const auto st = measure_surface(map, m);
        if (m.targets.avg) add(m.id, m.group, ConstraintKind::AVG, st.avg, {*m.targets.avg, 0.0});
        if (m.targets.g1) add(m.id, m.group, ConstraintKind::G1, st.g1, {*m.targets.g1, 0.0});
        if (m.targets.g2) add(m.id, m.group, ConstraintKind::G2, st.g2, {*m.targets.g2, 0.0});
    }
    for (const auto& p : scene.glare_probes)
        add(p.id, p.group, ConstraintKind::UGR, measure_ugr(probe_luminances(scene, map, p)), {p.ugr_max, 0.0});
    const auto global = measure_global(scene);
    const auto& gt = scene.global_targets;
    if (gt.cct_lo) add(kSceneObject, kGlobalGroup, ConstraintKind::K, global.cct, {*gt.cct_lo, *gt.cct_hi});
    if (gt.cri_min) add(kSceneObject, kGlobalGroup, ConstraintKind::CRI, global.cri, {*gt.cri_min, 0.0});
    return aggregate(std::move(entries), scene.report_groups(), weights);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> optional_from(const ojson& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

ojson report_to_json(const FulfillmentReport& r) {
    ojson doc;
    auto entries = ojson::array();
    for (const auto& e : r.entries) {
        ojson j;
        j["object"] = e.object;
        j["group"] = e.group;
        j["kind"] = to_string(e.kind);
        j["measured"] = optional_number(e.measured);
        j["target"] = e.target.value;
        if (direction(e.kind) == Direction::band) j["target_hi"] = e.target.hi;
        j["f"] = e.f;
        entries.push_back(std::move(j));
    }
    doc["entries"] = std::move(entries);
    auto groups = ojson::array();
    for (const auto& g : r.groups) {
        ojson j;
        j["group"] = g.group;
        j["kind"] = to_string(g.kind);
        j["mean_f"] = g.mean_f;
        j["worst_f"] = g.worst_f;
        j["worst_measured"] = optional_number(g.worst_measured);
        j["objects"] = g.objects;
        groups.push_back(std::move(j));
    }
    doc["groups"] = std::move(groups);
    ojson kinds;
    for (auto k : kAllKinds) kinds[to_string(k)] = optional_number(r.kind_f[index_of(k)]);
    doc["kind_f"] = std::move(kinds);
    doc["score"] = r.score;
    doc["group_order"] = r.group_order;
    return doc;
}

FulfillmentReport report_from_json(const ojson& doc) {
    try {
        FulfillmentReport r;
        for (const auto& j : doc.at("entries")) {
            FulfillmentEntry e;
            e.object = j.at("object").get<std::string>();
            e.group = j.at("group").get<std::string>();
            e.kind = kind_from_string(j.at("kind").get<std::string>());
            e.measured = optional_from(j.at("measured"));
            e.target.value = j.at("target").get<double>();
            if (j.contains("target_hi")) e.target.hi = j.at("target_hi").get<double>();
            e.f = j.at("f").get<double>();
            r.entries.push_back(std::move(e));
        }
        for (const auto& j : doc.at("groups")) {
            GroupKindSummary g;
            g.group = j.at("group").get<std::string>();
            g.kind = kind_from_string(j.at("kind").get<std::string>());
            g.mean_f = j.at("mean_f").get<double>();
            g.worst_f = j.at("worst_f").get<double>();
            g.worst_measured = optional_from(j.at("worst_measured"));
            g.objects = j.at("objects").get<std::size_t>();
            r.groups.push_back(std::move(g));
        }
        for (auto k : kAllKinds) r.kind_f[index_of(k)] = optional_from(doc.at("kind_f").at(to_string(k)));
        r.score = doc.at("score").get<double>();
        r.group_order = doc.at("group_order").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

ojson weights_to_json(const WeightConfig& w) {
    ojson doc;
    ojson c;
    for (auto k : kAllKinds) c[to_string(k)] = w.constraint(k);
    doc["constraints"] = std::move(c);
    ojson g = ojson::object();
    for (const auto& [id, v] : w.groups) g[id] = v;
    doc["groups"] = std::move(g);
    return doc;
}

WeightConfig weights_from_json(const ojson& doc) {
    WeightConfig w;
    try {
        if (doc.contains("constraints"))
            for (const auto& [key, value] : doc.at("constraints").items())
                w.constraints[index_of(kind_from_string(key))] = value.get<double>();
        if (doc.contains("groups"))
            for (const auto& [key, value] : doc.at("groups").items()) w.groups[key] = value.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("weights: ") + e.what());
    }
    return w;
}

}  // namespace lightguide
