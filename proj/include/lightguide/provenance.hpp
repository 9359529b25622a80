#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightguide/metrics.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/treemap.hpp"

namespace lightguide {

using NodeId = std::uint64_t;

enum class NodeKind { committed, suggestion, rejected };

std::string to_string(NodeKind k);

/// Link letters: manual, add, remove, dim, height, change.
inline constexpr std::string_view kActionLetters = "MARdHC";

struct ProvenanceNode {
    NodeId id = 0;
    std::optional<NodeId> parent;
    char label = 'M';
    nlohmann::ordered_json action;  ///< descriptor: kind, letter, description, parameters
    ScenePtr scene;
    FulfillmentReport report;
    double score = 0.0;            ///< s as generated, under the weights active then
    std::string thumbnail;
    NodeKind kind = NodeKind::committed;
    std::uint64_t batch = 0;       ///< suggestion batch that produced the node, 0 for manual nodes
    std::vector<NodeId> children;
};

/// Node contents supplied when a node is added.
struct NodeData {
    char label = 'M';
    nlohmann::ordered_json action = nlohmann::ordered_json::object();
    ScenePtr scene;
    FulfillmentReport report;
    std::string thumbnail;
};

/// Branching history of simulated design states. Node ids are never reused.
/// Committed nodes only change by the suggestion-to-committed flip; removal
/// is limited to leaves.
class ProvenanceTree {
public:
    ProvenanceTree() = default;
    explicit ProvenanceTree(NodeData root, bool retain_rejected = false);

    NodeId root() const { return root_; }
    NodeId selection() const { return selection_; }
    bool contains(NodeId id) const { return nodes_.count(id) != 0; }
    /// Throws UnknownIdError.
    const ProvenanceNode& node(NodeId id) const;
    const std::map<NodeId, ProvenanceNode>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    /// Highest id ever handed out; ids at or below it that are missing were removed.
    NodeId last_issued() const { return next_id_; }
    bool retains_rejected() const { return retain_rejected_; }

    /// Appends a committed child of `parent`. Selection is unchanged. A
    /// suggestion cannot be a parent (ValidationError).
    NodeId commit_state(NodeId parent, NodeData data);
    /// Appends a suggestion leaf produced by `batch`.
    NodeId add_suggestion(NodeId parent, NodeData data, std::uint64_t batch);
    /// Flips a suggestion to committed and discards (or, when retaining,
    /// marks rejected) its suggestion siblings. Throws UnknownIdError, or
    /// StaleIdError when `id` is not a live suggestion.
    NodeId accept(NodeId id);
    /// Removes every live suggestion node; returns how many were removed.
    std::size_t drop_suggestions();
    /// Ids of the live suggestion nodes, in id order.
    std::vector<NodeId> suggestions() const;
    /// Deletes a leaf other than the root. Selection moves to the parent if it
    /// pointed at the leaf. Throws UnknownIdError or ValidationError.
    void remove_leaf(NodeId id);

    /// Updates the selection and returns the path root -> id.
    std::vector<NodeId> select(NodeId id);
    std::vector<NodeId> path_to(NodeId id) const;
    std::vector<NodeId> active_path() const { return path_to(selection_); }
    std::vector<NodeId> leaves() const;

    /// Acyclic, connected, single root, parent/child links consistent.
    bool check_integrity() const;

    nlohmann::ordered_json to_json() const;
    static ProvenanceTree from_json(const nlohmann::ordered_json& doc, CatalogPtr catalog);
    std::string to_dot() const;

private:
    NodeId add(std::optional<NodeId> parent, NodeData data, NodeKind kind, std::uint64_t batch);
    ProvenanceNode& mutable_node(NodeId id);

    std::map<NodeId, ProvenanceNode> nodes_;
    NodeId root_ = 0;
    NodeId selection_ = 0;
    NodeId next_id_ = 0;
    bool retain_rejected_ = false;
};

enum class DiffMode { global, local };

struct CellDelta {
    CellValue cell;       ///< the compared node's cell
    double delta = 0.0;   ///< f_other - f_reference
    double lightness = 0.5;
};

struct NodeDiff {
    NodeId node = 0;
    std::vector<CellDelta> cells;
};

/// Grayscale lightness for a fulfillment difference: 0.5 at equality.
inline double diff_lightness(double delta) { return std::clamp(0.5 + 0.5 * delta, 0.0, 1.0); }

/// Differences of every node (global) or of `other` only (local) against
/// `reference`. Cells are matched by (kind, group, object). Throws UnknownIdError.
std::vector<NodeDiff> diff_encoding(const ProvenanceTree& tree, NodeId reference, DiffMode mode,
                                    std::optional<NodeId> other = std::nullopt, const GroupModes& modes = {});

nlohmann::ordered_json diff_to_json(const std::vector<NodeDiff>& diffs);

}  // namespace lightguide
