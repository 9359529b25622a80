#include "lightguide/provenance.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::committed: return "committed";
        case NodeKind::suggestion: return "suggestion";
        case NodeKind::rejected: return "rejected";
    }
    return "committed";
}

namespace {

NodeKind node_kind_from(const std::string& s) {
    if (s == "committed") return NodeKind::committed;
    if (s == "suggestion") return NodeKind::suggestion;
    if (s == "rejected") return NodeKind::rejected;
    throw ParseError("unknown node kind '" + s + "'");
}

void check_label(char label) {
    if (kActionLetters.find(label) == std::string_view::npos)
        throw ValidationError(std::string("invalid action label '") + label + "'");
}

}  // namespace

ProvenanceTree::ProvenanceTree(NodeData root, bool retain_rejected) : retain_rejected_(retain_rejected) {
    root_ = add(std::nullopt, std::move(root), NodeKind::committed, 0);
    selection_ = root_;
}

NodeId ProvenanceTree::add(std::optional<NodeId> parent, NodeData data, NodeKind kind, std::uint64_t batch) {
    check_label(data.label);
    if (!data.scene) throw ValidationError("provenance node needs a scene snapshot");
    ProvenanceNode n;
    n.id = ++next_id_;
    n.parent = parent;
    n.label = data.label;
    n.action = std::move(data.action);
    n.scene = std::move(data.scene);
    n.score = data.report.score;
    n.report = std::move(data.report);
    n.thumbnail = std::move(data.thumbnail);
    n.kind = kind;
    n.batch = batch;
    if (parent) mutable_node(*parent).children.push_back(n.id);
    const NodeId id = n.id;
    nodes_.emplace(id, std::move(n));
    return id;
}

const ProvenanceNode& ProvenanceTree::node(NodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownIdError("unknown node " + std::to_string(id));
    return it->second;
}

ProvenanceNode& ProvenanceTree::mutable_node(NodeId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownIdError("unknown node " + std::to_string(id));
    return it->second;
}

NodeId ProvenanceTree::commit_state(NodeId parent, NodeData data) {
    if (node(parent).kind == NodeKind::suggestion) throw ValidationError("suggestion nodes stay leaves until accepted");
    return add(parent, std::move(data), NodeKind::committed, 0);
}

NodeId ProvenanceTree::add_suggestion(NodeId parent, NodeData data, std::uint64_t batch) {
    if (node(parent).kind == NodeKind::suggestion) throw ValidationError("suggestion nodes stay leaves until accepted");
    return add(parent, std::move(data), NodeKind::suggestion, batch);
}

NodeId ProvenanceTree::accept(NodeId id) {
    auto& n = mutable_node(id);
    if (n.kind != NodeKind::suggestion) throw StaleIdError("node " + std::to_string(id) + " is not a live suggestion");
    n.kind = NodeKind::committed;
    const NodeId parent = *n.parent;
    std::vector<NodeId> siblings;
    for (NodeId c : node(parent).children)
        if (c != id && node(c).kind == NodeKind::suggestion) siblings.push_back(c);
    for (NodeId s : siblings) {
        if (retain_rejected_) {
            mutable_node(s).kind = NodeKind::rejected;
        } else {
            remove_leaf(s);
        }
    }
    return id;
}

std::vector<NodeId> ProvenanceTree::suggestions() const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (n.kind == NodeKind::suggestion) out.push_back(id);
    return out;
}

std::size_t ProvenanceTree::drop_suggestions() {
    const auto ids = suggestions();
    for (NodeId id : ids) remove_leaf(id);
    return ids.size();
}

void ProvenanceTree::remove_leaf(NodeId id) {
    const auto& n = node(id);
    if (id == root_) throw ValidationError("the root node cannot be removed");
    if (!n.children.empty()) throw ValidationError("node " + std::to_string(id) + " is not a leaf");
    const NodeId parent = *n.parent;
    auto& siblings = mutable_node(parent).children;
    std::erase(siblings, id);
    if (selection_ == id) selection_ = parent;
    nodes_.erase(id);
}

std::vector<NodeId> ProvenanceTree::select(NodeId id) {
    auto path = path_to(id);
    selection_ = id;
    return path;
}

std::vector<NodeId> ProvenanceTree::path_to(NodeId id) const {
    std::vector<NodeId> path;
    std::optional<NodeId> cur = id;
    while (cur) {
        const auto& n = node(*cur);
        path.push_back(n.id);
        if (path.size() > nodes_.size()) throw ValidationError("cycle in provenance tree");
        cur = n.parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<NodeId> ProvenanceTree::leaves() const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (n.children.empty()) out.push_back(id);
    return out;
}

bool ProvenanceTree::check_integrity() const {
    if (nodes_.empty()) return false;
    std::size_t roots = 0;
    for (const auto& [id, n] : nodes_) {
        if (!n.parent) {
            ++roots;
            if (id != root_) return false;
            continue;
        }
        auto p = nodes_.find(*n.parent);
        if (p == nodes_.end()) return false;
        const auto& kids = p->second.children;
        if (std::count(kids.begin(), kids.end(), id) != 1) return false;
    }
    if (roots != 1) return false;
    // Every node reachable from the root exactly once.
    std::set<NodeId> seen;
    std::vector<NodeId> stack{root_};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) return false;
        auto it = nodes_.find(id);
        if (it == nodes_.end()) return false;
        for (NodeId c : it->second.children) stack.push_back(c);
    }
    return seen.size() == nodes_.size() && nodes_.count(selection_) != 0;
}

// ---------------------------------------------------------------------------
// Persistence

ojson ProvenanceTree::to_json() const {
    ojson doc;
    doc["root"] = root_;
    doc["selection"] = selection_;
    doc["next_id"] = next_id_;
    doc["retain_rejected"] = retain_rejected_;
    auto nodes = ojson::array();
    for (const auto& [id, n] : nodes_) {
        ojson j;
        j["id"] = n.id;
        j["parent"] = n.parent ? ojson(*n.parent) : ojson(nullptr);
        j["label"] = std::string(1, n.label);
        j["kind"] = to_string(n.kind);
        j["batch"] = n.batch;
        j["action"] = n.action;
        j["score"] = n.score;
        j["thumbnail"] = n.thumbnail;
        j["children"] = n.children;
        j["report"] = report_to_json(n.report);
        j["scene"] = scene_to_json(*n.scene);
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

ProvenanceTree ProvenanceTree::from_json(const ojson& doc, CatalogPtr catalog) {
    ProvenanceTree t;
    try {
        t.root_ = doc.at("root").get<NodeId>();
        t.selection_ = doc.at("selection").get<NodeId>();
        t.next_id_ = doc.at("next_id").get<NodeId>();
        t.retain_rejected_ = doc.at("retain_rejected").get<bool>();
        for (const auto& j : doc.at("nodes")) {
            ProvenanceNode n;
            n.id = j.at("id").get<NodeId>();
            if (!j.at("parent").is_null()) n.parent = j.at("parent").get<NodeId>();
            const auto label = j.at("label").get<std::string>();
            if (label.size() != 1) throw ParseError("node label must be one letter");
            n.label = label[0];
            check_label(n.label);
            n.kind = node_kind_from(j.at("kind").get<std::string>());
            n.batch = j.at("batch").get<std::uint64_t>();
            n.action = j.at("action");
            n.score = j.at("score").get<double>();
            n.thumbnail = j.at("thumbnail").get<std::string>();
            n.children = j.at("children").get<std::vector<NodeId>>();
            n.report = report_from_json(j.at("report"));
            n.scene = std::make_shared<const Scene>(scene_from_json(j.at("scene"), catalog));
            t.nodes_.emplace(n.id, std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("provenance tree: ") + e.what());
    }
    if (!t.check_integrity()) throw ValidationError("provenance tree is not a connected, acyclic tree");
    return t;
}

std::string ProvenanceTree::to_dot() const {
    std::ostringstream out;
    out << "digraph provenance {\n  node [shape=box, fontname=\"Helvetica\"];\n";
    const auto path = active_path();
    for (const auto& [id, n] : nodes_) {
        out << "  n" << id << " [label=\"" << id << "\\ns=" << n.score << "\"";
        if (n.kind != NodeKind::committed) out << ", style=dashed";
        if (std::find(path.begin(), path.end(), id) != path.end()) out << ", color=red";
        out << "];\n";
    }
    for (const auto& [id, n] : nodes_) {
        if (!n.parent) continue;
        std::string tip = n.action.contains("description") ? n.action["description"].get<std::string>() : "";
        std::string escaped;
        for (char c : tip) {
            if (c == '"' || c == '\\') escaped += '\\';
            escaped += c;
        }
        out << "  n" << *n.parent << " -> n" << id << " [label=\"" << n.label << "\", tooltip=\"" << escaped << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<NodeDiff> diff_encoding(const ProvenanceTree& tree, NodeId reference, DiffMode mode,
                                    std::optional<NodeId> other, const GroupModes& modes) {
    const auto ref_cells = cell_values(tree.node(reference).report, modes);
    auto compare = [&](NodeId id) {
        NodeDiff d;
        d.node = id;
        for (const auto& c : cell_values(tree.node(id).report, modes)) {
            auto it = std::find_if(ref_cells.begin(), ref_cells.end(), [&](const CellValue& r) {
                return r.kind == c.kind && r.group == c.group && r.object == c.object;
            });
            if (it == ref_cells.end()) continue;
            const double delta = c.f - it->f;
            d.cells.push_back({c, delta, diff_lightness(delta)});
        }
        return d;
    };
    std::vector<NodeDiff> out;
    if (mode == DiffMode::local) {
        if (!other) throw UnknownIdError("local comparison needs a second node");
        out.push_back(compare(tree.node(*other).id));
        return out;
    }
    for (const auto& [id, n] : tree.nodes()) out.push_back(compare(id));
    return out;
}

ojson diff_to_json(const std::vector<NodeDiff>& diffs) {
    auto doc = ojson::array();
    for (const auto& d : diffs) {
        ojson j;
        j["node"] = d.node;
        auto cells = ojson::array();
        for (const auto& c : d.cells) {
            ojson cj;
            cj["kind"] = to_string(c.cell.kind);
            cj["group"] = c.cell.group;
            if (!c.cell.object.empty()) cj["object"] = c.cell.object;
            cj["delta"] = c.delta;
            cj["lightness"] = c.lightness;
            cells.push_back(std::move(cj));
        }
        j["cells"] = std::move(cells);
        doc.push_back(std::move(j));
    }
    return doc;
}

}  // namespace lightguide
