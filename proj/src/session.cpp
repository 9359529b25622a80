#include "lightguide/session.hpp"

#include <algorithm>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"
#include "lightguide/treemap.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kSessionFormat = "lightguide-session/1";
constexpr std::size_t kMaxEvents = 4096;

std::string thumbnail_id(NodeId id) { return "thumb-" + std::to_string(id); }

}  // namespace

std::string to_string(BatchState s) {
    switch (s) {
        case BatchState::idle: return "idle";
        case BatchState::running: return "running";
        case BatchState::ready: return "ready";
    }
    return "idle";
}

ojson sim_settings_to_json(const SimSettings& s) {
    ojson j;
    j["bounces"] = s.bounces;
    j["resolution"] = s.resolution ? ojson(*s.resolution) : ojson(nullptr);
    j["seed"] = s.seed;
    j["mode"] = s.mode == ConvergenceMode::full ? "full" : "progressive";
    return j;
}

SimSettings sim_settings_from_json(const ojson& j) {
    SimSettings s;
    try {
        s.bounces = j.value("bounces", s.bounces);
        if (j.contains("resolution") && !j["resolution"].is_null()) s.resolution = j["resolution"].get<double>();
        s.seed = j.value("seed", s.seed);
        const auto mode = j.value("mode", std::string("full"));
        if (mode == "progressive") {
            s.mode = ConvergenceMode::progressive;
        } else if (mode != "full") {
            throw ParseError("unknown simulation mode '" + mode + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("simulation settings: ") + e.what());
    }
    s.validate();
    return s;
}

ojson guidance_settings_to_json(const GuidanceSettings& s) {
    ojson j;
    j["actions"] = s.actions;
    j["candidates_per_action"] = s.candidates_per_action;
    j["max_suggestions"] = s.max_suggestions;
    j["retry_cap"] = s.retry_cap;
    j["add_radius"] = s.add_radius;
    j["dim"] = {s.dim_lo, s.dim_hi};
    j["shift"] = {s.shift_lo, s.shift_hi};
    j["working_plane_guard"] = s.working_plane_guard;
    j["candidate_resolution"] = s.candidate_resolution ? ojson(*s.candidate_resolution) : ojson(nullptr);
    return j;
}

GuidanceSettings guidance_settings_from_json(const ojson& j) {
    GuidanceSettings s;
    try {
        s.actions = j.value("actions", s.actions);
        s.candidates_per_action = j.value("candidates_per_action", s.candidates_per_action);
        s.max_suggestions = j.value("max_suggestions", s.max_suggestions);
        s.retry_cap = j.value("retry_cap", s.retry_cap);
        s.add_radius = j.value("add_radius", s.add_radius);
        if (j.contains("dim")) {
            s.dim_lo = j["dim"].at(0).get<double>();
            s.dim_hi = j["dim"].at(1).get<double>();
        }
        if (j.contains("shift")) {
            s.shift_lo = j["shift"].at(0).get<double>();
            s.shift_hi = j["shift"].at(1).get<double>();
        }
        s.working_plane_guard = j.value("working_plane_guard", s.working_plane_guard);
        if (j.contains("candidate_resolution") && !j["candidate_resolution"].is_null())
            s.candidate_resolution = j["candidate_resolution"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("guidance settings: ") + e.what());
    }
    if (s.actions < 1 || s.actions > 7) throw ValidationError("actions must be in [1, 7]");
    if (s.candidates_per_action < 1 || s.max_suggestions < 1 || s.retry_cap < 1)
        throw ValidationError("candidate counts must be positive");
    if (!(s.dim_lo > 0 && s.dim_lo <= s.dim_hi && s.dim_hi <= 1)) throw ValidationError("dim range must lie in (0, 1]");
    if (!(s.shift_lo > 0 && s.shift_lo <= s.shift_hi)) throw ValidationError("shift range must be positive");
    return s;
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, SessionConfig config, std::shared_ptr<const Simulator> simulator)
    : id_(std::move(id)), config_(std::move(config)), simulator_(std::move(simulator)) {
    if (!simulator_) simulator_ = std::make_shared<Simulator>();
    config_.sim.validate();
}

Session::Session(std::string id, Scene scene, SessionConfig config, std::shared_ptr<const Simulator> simulator)
    : Session(std::move(id), std::move(config), std::move(simulator)) {
    scene.validate();
    config_.weights.validate(scene.report_groups());
    auto root = std::make_shared<const Scene>(std::move(scene));
    const Camera camera = default_camera(root->room);
    std::lock_guard lock(mutex_);
    tree_ = ProvenanceTree(make_node(root, 'M', ojson::object(), camera), config_.retain_rejected);
    cameras_[tree_.root()] = camera;
    emit("node_committed", {{"node", tree_.root()}, {"parent", nullptr}, {"label", "M"}});
    emit("selection_changed", {{"node", tree_.root()}, {"path", tree_.active_path()}});
    restart_batch();
}

Session::~Session() {
    close();
    if (worker_.joinable()) worker_.join();
    for (auto& t : retired_)
        if (t.joinable()) t.join();
}

void Session::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
        if (batch_state_ == BatchState::running) {
            worker_.request_stop();
            emit("batch_cancelled", {{"batch", batch_id_}});
            batch_state_ = BatchState::idle;
        }
        changed_.notify_all();
    }
    reap();
}

NodeData Session::make_node(ScenePtr scene, char label, ojson action, const Camera& camera) {
    const LightMap map = simulator_->simulate(*scene, config_.sim);
    NodeData data;
    data.label = label;
    data.action = std::move(action);
    data.report = evaluate(*scene, map, config_.weights);
    data.thumbnail = thumbnail_id(tree_.last_issued() + 1);
    auto image = render_thumbnail(*scene, map, camera);
    image.id = data.thumbnail;
    image.node = std::to_string(tree_.last_issued() + 1);
    thumbnails_[tree_.last_issued() + 1] = std::move(image);
    data.scene = std::move(scene);
    return data;
}

void Session::emit(const std::string& type, ojson data) {
    events_.push_back({++next_seq_, type, std::move(data)});
    while (events_.size() > kMaxEvents) events_.pop_front();
    changed_.notify_all();
}

const Camera& Session::camera_of(NodeId id) const {
    auto it = cameras_.find(id);
    if (it == cameras_.end()) throw UnknownIdError("unknown node " + std::to_string(id));
    return it->second;
}

void Session::restart_batch(bool force) {
    if (batch_state_ == BatchState::running) {
        worker_.request_stop();
        emit("batch_cancelled", {{"batch", batch_id_}});
    }
    if (worker_.joinable()) retired_.push_back(std::move(worker_));
    for (NodeId s : tree_.suggestions()) {
        tree_.remove_leaf(s);
        cameras_.erase(s);
        thumbnails_.erase(s);
    }
    batch_state_ = BatchState::idle;
    if (closed_ || !(config_.auto_suggest || force)) return;

    ++batch_id_;
    batch_state_ = BatchState::running;
    const NodeId parent = tree_.selection();
    emit("batch_started", {{"batch", batch_id_}, {"parent", parent}});
    worker_ = std::jthread([this, batch = batch_id_, parent, scene = *tree_.node(parent).scene,
                            weights = config_.weights,
                            seed = derive_seed(config_.seed, batch_id_)](std::stop_token stop) {
        run_batch(stop, batch, parent, scene, weights, seed);
    });
}

void Session::run_batch(std::stop_token stop, std::uint64_t batch, NodeId parent, Scene scene, WeightConfig weights,
                        std::uint64_t seed) {
    GuidanceResult result;
    try {
        result = generate_suggestions(scene, weights, config_.table, config_.guidance, config_.sim, *simulator_, seed,
                                      stop);
    } catch (const CancelledError&) {
        return;
    } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        if (batch != batch_id_ || batch_state_ != BatchState::running) return;
        batch_state_ = BatchState::idle;
        emit("batch_failed", {{"batch", batch}, {"error", e.what()}});
        return;
    }

    std::lock_guard lock(mutex_);
    if (stop.stop_requested() || batch != batch_id_ || batch_state_ != BatchState::running) return;
    // Suggestions are viewed from the same angle as their parent.
    const Camera camera = camera_of(parent);
    auto ids = ojson::array();
    for (auto& c : result.suggestions) {
        NodeData data;
        data.label = c.action.letter();
        data.action = c.action.to_json();
        data.scene = c.scene;
        data.report = c.report;
        const NodeId next = tree_.last_issued() + 1;
        data.thumbnail = thumbnail_id(next);
        auto image = render_thumbnail(*c.scene, c.map, camera);
        image.id = data.thumbnail;
        image.node = std::to_string(next);
        const NodeId nid = tree_.add_suggestion(parent, std::move(data), batch);
        thumbnails_[nid] = std::move(image);
        cameras_[nid] = camera;
        ids.push_back(nid);
    }
    batch_state_ = BatchState::ready;
    emit("batch_ready", {{"batch", batch}, {"parent", parent}, {"suggestions", ids}});
}

void Session::reap() {
    std::vector<std::jthread> done;
    {
        std::lock_guard lock(mutex_);
        done.swap(retired_);
    }
    for (auto& t : done)
        if (t.joinable()) t.join();
}

NodeId Session::handle_edit(const Edit& edit) {
    NodeId id = 0;
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ValidationError("session is closed");
        const NodeId parent = tree_.selection();
        auto next = std::make_shared<const Scene>(apply_edit(*tree_.node(parent).scene, edit));
        ojson action;
        action["kind"] = "manual";
        action["letter"] = "M";
        action["description"] = "manual edit";
        action["parameters"] = edit_to_json(edit);
        const Camera camera = camera_of(parent);
        id = tree_.commit_state(parent, make_node(next, 'M', std::move(action), camera));
        cameras_[id] = camera;
        emit("node_committed", {{"node", id}, {"parent", parent}, {"label", "M"}});
        tree_.select(id);
        emit("selection_changed", {{"node", id}, {"path", tree_.active_path()}});
        restart_batch();
    }
    reap();
    return id;
}

bool Session::handle_weights(const WeightConfig& weights) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ValidationError("session is closed");
        weights.validate(tree_.node(tree_.root()).scene->report_groups());
        if (weights == config_.weights) return false;
        config_.weights = weights;
        emit("weights_changed", {{"weights", weights_to_json(weights)}});
        restart_batch();
    }
    reap();
    return true;
}

NodeId Session::accept_suggestion(NodeId id) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ValidationError("session is closed");
        if (!tree_.contains(id)) {
            if (id > 0 && id <= tree_.last_issued())
                throw StaleIdError("node " + std::to_string(id) + " belongs to a superseded batch");
            throw UnknownIdError("unknown node " + std::to_string(id));
        }
        const auto before = tree_.nodes();
        tree_.accept(id);
        for (const auto& [nid, n] : before) {
            if (!tree_.contains(nid)) {
                cameras_.erase(nid);
                thumbnails_.erase(nid);
            }
        }
        const auto& node = tree_.node(id);
        emit("node_committed", {{"node", id}, {"parent", *node.parent}, {"label", std::string(1, node.label)}});
        tree_.select(id);
        emit("selection_changed", {{"node", id}, {"path", tree_.active_path()}});
        restart_batch();
    }
    reap();
    return id;
}

std::vector<NodeId> Session::select(NodeId id) {
    std::vector<NodeId> path;
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ValidationError("session is closed");
        if (tree_.node(id).kind == NodeKind::suggestion)
            throw ValidationError("node " + std::to_string(id) + " is a pending suggestion; accept it first");
        path = tree_.select(id);
        emit("selection_changed", {{"node", id}, {"path", path}});
        restart_batch();
    }
    reap();
    return path;
}

void Session::request_suggestions() {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ValidationError("session is closed");
        restart_batch(true);
    }
    reap();
}

bool Session::wait_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return changed_.wait_for(lock, timeout, [&] { return batch_state_ != BatchState::running; });
}

BatchState Session::batch_state() const {
    std::lock_guard lock(mutex_);
    return batch_state_;
}

std::uint64_t Session::batch_id() const {
    std::lock_guard lock(mutex_);
    return batch_id_;
}

WeightConfig Session::weights() const {
    std::lock_guard lock(mutex_);
    return config_.weights;
}

NodeId Session::selection() const {
    std::lock_guard lock(mutex_);
    return tree_.selection();
}

ProvenanceTree Session::tree() const {
    std::lock_guard lock(mutex_);
    return tree_;
}

ojson Session::tree_json(const GroupModes& modes) const {
    std::lock_guard lock(mutex_);
    ojson doc;
    doc["session"] = id_;
    doc["root"] = tree_.root();
    doc["selection"] = tree_.selection();
    doc["active_path"] = tree_.active_path();
    doc["batch"] = {{"id", batch_id_}, {"state", to_string(batch_state_)}};
    doc["weights"] = weights_to_json(config_.weights);
    auto nodes = ojson::array();
    for (const auto& [id, n] : tree_.nodes()) {
        ojson j;
        j["id"] = id;
        j["parent"] = n.parent ? ojson(*n.parent) : ojson(nullptr);
        j["label"] = std::string(1, n.label);
        j["kind"] = to_string(n.kind);
        j["batch"] = n.batch;
        j["action"] = n.action;
        j["score"] = n.score;
        j["score_current"] = progress_score(n.report.entries, config_.weights);
        j["all_met"] = n.report.all_met();
        j["thumbnail"] = n.thumbnail;
        j["children"] = n.children;
        j["layout"] = layout_to_json(layout_treemap(n.report, config_.weights, modes));
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

ojson Session::suggestions_json() const {
    std::lock_guard lock(mutex_);
    ojson doc;
    doc["batch"] = batch_id_;
    doc["state"] = to_string(batch_state_);
    doc["parent"] = tree_.selection();
    auto ids = tree_.suggestions();
    std::stable_sort(ids.begin(), ids.end(),
                     [&](NodeId a, NodeId b) { return tree_.node(a).score > tree_.node(b).score; });
    auto list = ojson::array();
    for (NodeId id : ids) {
        const auto& n = tree_.node(id);
        ojson j;
        j["node"] = id;
        j["parent"] = *n.parent;
        j["label"] = std::string(1, n.label);
        j["action"] = n.action;
        j["score"] = n.score;
        j["thumbnail"] = n.thumbnail;
        list.push_back(std::move(j));
    }
    doc["suggestions"] = std::move(list);
    return doc;
}

ojson Session::report_json(NodeId id) const {
    std::lock_guard lock(mutex_);
    const auto& n = tree_.node(id);
    ojson doc;
    doc["node"] = id;
    doc["score"] = n.score;
    doc["score_current"] = progress_score(n.report.entries, config_.weights);
    doc["report"] = report_to_json(n.report);
    doc["layout"] = layout_to_json(layout_treemap(n.report, config_.weights));
    return doc;
}

Thumbnail Session::thumbnail(NodeId id) const {
    std::lock_guard lock(mutex_);
    const auto& n = tree_.node(id);
    if (auto it = thumbnails_.find(id); it != thumbnails_.end()) return it->second;
    // Not cached after a reload: re-render from the stored snapshot.
    const LightMap map = simulator_->simulate(*n.scene, config_.sim);
    auto image = render_thumbnail(*n.scene, map, camera_of(id));
    image.id = n.thumbnail;
    image.node = std::to_string(id);
    return thumbnails_[id] = std::move(image);
}

std::vector<SessionEvent> Session::events_since(std::uint64_t since, std::chrono::milliseconds wait) const {
    std::unique_lock lock(mutex_);
    if (wait.count() > 0)
        changed_.wait_for(lock, wait, [&] { return closed_ || next_seq_ > since; });
    std::vector<SessionEvent> out;
    for (const auto& e : events_)
        if (e.seq > since) out.push_back(e);
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

ojson Session::save() const {
    std::lock_guard lock(mutex_);
    ojson doc;
    doc["format"] = kSessionFormat;
    doc["id"] = id_;
    doc["seed"] = config_.seed;
    doc["retain_rejected"] = config_.retain_rejected;
    doc["auto_suggest"] = config_.auto_suggest;
    doc["batch_counter"] = batch_id_;
    doc["settings"] = sim_settings_to_json(config_.sim);
    doc["guidance"] = guidance_settings_to_json(config_.guidance);
    doc["performance_table"] = config_.table.to_json();
    doc["weights"] = weights_to_json(config_.weights);
    doc["catalog"] = catalog_to_json(*tree_.node(tree_.root()).scene->catalog);
    ojson cams = ojson::object();
    for (const auto& [id, c] : cameras_) cams[std::to_string(id)] = camera_to_json(c);
    doc["cameras"] = std::move(cams);
    doc["tree"] = tree_.to_json();
    return doc;
}

std::unique_ptr<Session> Session::load(const ojson& doc, std::shared_ptr<const Simulator> simulator) {
    if (doc.value("format", std::string()) != kSessionFormat) throw ParseError("not a lightguide session file");
    SessionConfig config;
    std::unique_ptr<Session> s;
    try {
        config.seed = doc.at("seed").get<std::uint64_t>();
        config.retain_rejected = doc.at("retain_rejected").get<bool>();
        config.auto_suggest = doc.at("auto_suggest").get<bool>();
        config.sim = sim_settings_from_json(doc.at("settings"));
        config.guidance = guidance_settings_from_json(doc.at("guidance"));
        config.table = PerformanceTable::from_json(doc.at("performance_table"));
        config.weights = weights_from_json(doc.at("weights"));
        auto catalog = std::make_shared<const Catalog>(catalog_from_json(doc.at("catalog")));
        s.reset(new Session(doc.at("id").get<std::string>(), std::move(config), std::move(simulator)));
        s->tree_ = ProvenanceTree::from_json(doc.at("tree"), catalog);
        s->batch_id_ = doc.at("batch_counter").get<std::uint64_t>();
        for (const auto& [key, cam] : doc.at("cameras").items())
            s->cameras_[std::stoull(key)] = camera_from_json(cam);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("session file: ") + e.what());
    }
    for (const auto& [id, n] : s->tree_.nodes())
        if (!s->cameras_.count(id)) s->cameras_[id] = default_camera(n.scene->room);
    s->batch_state_ = s->tree_.suggestions().empty() ? BatchState::idle : BatchState::ready;
    return s;
}

}  // namespace lightguide
