#include "lightguide/treemap.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lightguide {

namespace {

TreemapMode mode_of(const GroupModes& modes, const std::string& group) {
    auto it = modes.find(group);
    return it == modes.end() ? TreemapMode::summary : it->second;
}

}  // namespace

std::vector<CellValue> cell_values(const FulfillmentReport& report, const GroupModes& modes) {
    std::vector<CellValue> out;
    for (auto k : kAllKinds) {
        for (const auto& g : report.group_order) {
            if (mode_of(modes, g) == TreemapMode::summary) {
                for (const auto& s : report.groups)
                    if (s.group == g && s.kind == k) out.push_back({k, g, {}, s.worst_f});
            } else {
                for (const auto& e : report.entries)
                    if (e.group == g && e.kind == k) out.push_back({k, g, e.object, e.f});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double worst_ratio(const std::vector<double>& row, double side) {
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    const double s2 = sum * sum, w2 = side * side;
    return std::max(w2 * *hi / s2, s2 / (w2 * *lo));
}

}  // namespace

std::vector<Box> squarify(const std::vector<double>& areas, Box box) {
    std::vector<Box> out(areas.size());
    if (areas.empty()) return out;
    const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
    std::vector<std::size_t> order(areas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return areas[a] > areas[b]; });
    std::vector<double> scaled(areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) scaled[i] = areas[i] / total * box.area();

    std::size_t next = 0;
    while (next < order.size()) {
        const double side = std::min(box.w, box.h);
        std::vector<double> row{scaled[order[next]]};
        std::size_t end = next + 1;
        while (end < order.size()) {
            auto candidate = row;
            candidate.push_back(scaled[order[end]]);
            if (worst_ratio(candidate, side) > worst_ratio(row, side)) break;
            row = std::move(candidate);
            ++end;
        }
        const bool last_row = end == order.size();
        const double row_area = std::accumulate(row.begin(), row.end(), 0.0);
        const bool wide = box.w >= box.h;
        // Strip along the shorter side; the final strip absorbs rounding.
        const double thickness = last_row ? (wide ? box.w : box.h) : row_area / side;
        double offset = 0.0;
        for (std::size_t i = next; i < end; ++i) {
            const double a = scaled[order[i]];
            const double len = i + 1 == end ? side - offset : a / thickness;
            Box& b = out[order[i]];
            if (wide) b = {box.x, box.y + offset, thickness, len};
            else b = {box.x + offset, box.y, len, thickness};
            offset += len;
        }
        if (wide) {
            box.x += thickness;
            box.w -= thickness;
        } else {
            box.y += thickness;
            box.h -= thickness;
        }
        next = end;
    }
    return out;
}

TreemapLayout layout_treemap(const FulfillmentReport& report, const WeightConfig& weights, const GroupModes& modes,
                             double aspect) {
    TreemapLayout layout;
    layout.aspect = aspect;
    layout.modes = modes;
    const auto values = cell_values(report, modes);

    // Kind -> group -> cells, with the weight that sizes each level.
    struct GroupBlock {
        std::string group;
        double weight = 0.0;
        std::vector<std::size_t> cells;
    };
    struct KindBlock {
        ConstraintKind kind;
        double weight = 0.0;
        std::vector<GroupBlock> groups;
    };
    std::vector<KindBlock> kinds;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& v = values[i];
        const double wk = weights.constraint(v.kind);
        const double wg = weights.group(v.group);
        if (wk <= 0.0 || wg <= 0.0) continue;
        if (kinds.empty() || kinds.back().kind != v.kind) kinds.push_back({v.kind, wk, {}});
        auto& groups = kinds.back().groups;
        if (groups.empty() || groups.back().group != v.group) groups.push_back({v.group, wg, {}});
        groups.back().cells.push_back(i);
    }
    if (kinds.empty()) return layout;

    std::vector<double> kind_weights;
    for (const auto& k : kinds) kind_weights.push_back(k.weight);
    const auto kind_boxes = squarify(kind_weights, {0.0, 0.0, aspect, 1.0});
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
        std::vector<double> group_weights;
        for (const auto& g : kinds[ki].groups) group_weights.push_back(g.weight);
        const auto group_boxes = squarify(group_weights, kind_boxes[ki]);
        for (std::size_t gi = 0; gi < kinds[ki].groups.size(); ++gi) {
            const auto& cells = kinds[ki].groups[gi].cells;
            const auto cell_boxes = squarify(std::vector<double>(cells.size(), 1.0), group_boxes[gi]);
            for (std::size_t ci = 0; ci < cells.size(); ++ci) {
                Box b = cell_boxes[ci];
                b.x /= aspect;
                b.w /= aspect;
                layout.cells.push_back({values[cells[ci]], b, b.area()});
            }
        }
    }
    return layout;
}

nlohmann::ordered_json layout_to_json(const TreemapLayout& layout) {
    nlohmann::ordered_json doc;
    doc["aspect"] = layout.aspect;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : layout.cells) {
        nlohmann::ordered_json j;
        j["kind"] = to_string(c.value.kind);
        j["group"] = c.value.group;
        if (!c.value.object.empty()) j["object"] = c.value.object;
        j["f"] = c.value.f;
        j["x"] = c.box.x;
        j["y"] = c.box.y;
        j["w"] = c.box.w;
        j["h"] = c.box.h;
        j["area"] = c.area;
        cells.push_back(std::move(j));
    }
    doc["cells"] = std::move(cells);
    auto modes = nlohmann::ordered_json::object();
    for (const auto& [g, m] : layout.modes) modes[g] = m == TreemapMode::summary ? "summary" : "detail";
    doc["modes"] = std::move(modes);
    return doc;
}

}  // namespace lightguide
