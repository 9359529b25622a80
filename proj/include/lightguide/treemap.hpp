#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/metrics.hpp"

namespace lightguide {

enum class TreemapMode { summary, detail };

/// Axis-aligned box in layout coordinates.
struct Box {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
    double area() const { return w * h; }
};

/// Per-group display mode; groups not listed use summary.
using GroupModes = std::map<std::string, TreemapMode>;

/// Fulfillment of one treemap cell: a group's worst value in summary mode,
/// one measurement object's value in detail mode.
struct CellValue {
    ConstraintKind kind = ConstraintKind::AVG;
    std::string group;
    std::string object;  ///< empty in summary mode
    double f = 0.0;
};

/// Cells of a report in canonical order: kinds in table order, groups in
/// report order, objects in entry order.
std::vector<CellValue> cell_values(const FulfillmentReport& report, const GroupModes& modes = {});

struct TreemapCell {
    CellValue value;
    Box box;  ///< inside the unit square
    double area = 0.0;
};

struct TreemapLayout {
    double aspect = 1.0;  ///< width / height of the node the layout is drawn into
    std::vector<TreemapCell> cells;
    GroupModes modes;
};

/// Squarified subdivision of `box` into rectangles with the given areas
/// (any positive scale; rescaled to the box). Output order matches input.
std::vector<Box> squarify(const std::vector<double>& areas, Box box);

/// Kind areas follow the constraint weights, each kind's area is split over
/// its groups by group weight, and detail-mode groups split equally over
/// their objects. Zero-weight cells are omitted. Kinds or groups absent from
/// the report take no space.
TreemapLayout layout_treemap(const FulfillmentReport& report, const WeightConfig& weights,
                             const GroupModes& modes = {}, double aspect = 1.0);

nlohmann::ordered_json layout_to_json(const TreemapLayout& layout);

}  // namespace lightguide
