#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lightguide/guidance.hpp"
#include "lightguide/metrics.hpp"
#include "lightguide/provenance.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/simulation.hpp"
#include "lightguide/thumbnail.hpp"

namespace lightguide {

struct SessionConfig {
    SimSettings sim;
    GuidanceSettings guidance;
    PerformanceTable table;
    WeightConfig weights;
    std::uint64_t seed = 0;
    bool retain_rejected = false;
    /// Start a suggestion batch on every commit, selection and weight change.
    bool auto_suggest = true;
};

nlohmann::ordered_json sim_settings_to_json(const SimSettings& s);
SimSettings sim_settings_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json guidance_settings_to_json(const GuidanceSettings& s);
GuidanceSettings guidance_settings_from_json(const nlohmann::ordered_json& j);

enum class BatchState { idle, running, ready };

std::string to_string(BatchState s);

struct SessionEvent {
    std::uint64_t seq = 0;
    std::string type;
    nlohmann::ordered_json data;
};

/// One design session. Every public method is a command on a single
/// serialized stream; suggestion batches run on a background thread and are
/// published only if still current when they finish.
class Session {
public:
    Session(std::string id, Scene scene, SessionConfig config, std::shared_ptr<const Simulator> simulator = nullptr);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const { return id_; }

    /// Applies an edit to the selected state, commits it as a manual node,
    /// selects it and restarts suggestions. Invalid edits leave the tree untouched.
    NodeId handle_edit(const Edit& edit);
    /// Returns false (and does nothing) when the weights equal the current ones.
    bool handle_weights(const WeightConfig& weights);
    /// Throws StaleIdError for suggestions of a superseded batch.
    NodeId accept_suggestion(NodeId id);
    std::vector<NodeId> select(NodeId id);
    /// Cancels any running batch and starts a new one from the selection,
    /// also when automatic suggestions are off.
    void request_suggestions();

    /// Blocks until no batch is running. Returns false on timeout.
    bool wait_idle(std::chrono::milliseconds timeout = std::chrono::minutes(5));

    BatchState batch_state() const;
    std::uint64_t batch_id() const;
    WeightConfig weights() const;
    NodeId selection() const;
    ProvenanceTree tree() const;

    nlohmann::ordered_json tree_json(const GroupModes& modes = {}) const;
    nlohmann::ordered_json suggestions_json() const;
    nlohmann::ordered_json report_json(NodeId id) const;
    Thumbnail thumbnail(NodeId id) const;

    /// Events with seq > `since`, waiting up to `wait` for at least one.
    std::vector<SessionEvent> events_since(std::uint64_t since,
                                           std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;
    std::vector<SessionEvent> events() const { return events_since(0); }

    /// Cancels the running batch and refuses further work; wakes event waiters.
    void close();

    nlohmann::ordered_json save() const;
    static std::unique_ptr<Session> load(const nlohmann::ordered_json& doc,
                                         std::shared_ptr<const Simulator> simulator = nullptr);

private:
    Session(std::string id, SessionConfig config, std::shared_ptr<const Simulator> simulator);

    NodeData make_node(ScenePtr scene, char label, nlohmann::ordered_json action, const Camera& camera);
    void emit(const std::string& type, nlohmann::ordered_json data);
    void restart_batch(bool force = false);
    void run_batch(std::stop_token stop, std::uint64_t batch, NodeId parent, Scene scene, WeightConfig weights,
                   std::uint64_t seed);
    void reap();
    const Camera& camera_of(NodeId id) const;

    std::string id_;
    SessionConfig config_;
    std::shared_ptr<const Simulator> simulator_;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    ProvenanceTree tree_;
    std::map<NodeId, Camera> cameras_;
    mutable std::map<NodeId, Thumbnail> thumbnails_;
    std::deque<SessionEvent> events_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t batch_id_ = 0;
    BatchState batch_state_ = BatchState::idle;
    bool closed_ = false;
    std::jthread worker_;
    std::vector<std::jthread> retired_;
};

}  // namespace lightguide
