#include "lightguide/server.hpp"

#include <httplib.h>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

Service::Service(SessionConfig defaults)
    : defaults_(std::move(defaults)), simulator_(std::make_shared<Simulator>()) {}

std::shared_ptr<Session> Service::create(const ojson& body) {
    if (!body.is_object() || !body.contains("scene") || !body.contains("catalog"))
        throw ParseError("session request needs 'scene' and 'catalog'");
    auto catalog = std::make_shared<const Catalog>(catalog_from_json(body["catalog"]));
    Scene scene = scene_from_json(body["scene"], catalog);
    SessionConfig config = defaults_;
    if (body.contains("weights")) config.weights = weights_from_json(body["weights"]);
    if (body.contains("settings")) config.sim = sim_settings_from_json(body["settings"]);
    if (body.contains("guidance")) config.guidance = guidance_settings_from_json(body["guidance"]);
    if (body.contains("seed")) config.seed = body["seed"].get<std::uint64_t>();
    if (body.contains("auto_suggest")) config.auto_suggest = body["auto_suggest"].get<bool>();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = "s" + std::to_string(++next_id_);
    }
    auto session = std::make_shared<Session>(id, std::move(scene), std::move(config), simulator_);
    std::lock_guard lock(mutex_);
    sessions_[id] = session;
    return session;
}

std::shared_ptr<Session> Service::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownIdError("unknown session '" + id + "'");
    return it->second;
}

void Service::close_all() {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_) s->close();
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, const ojson& doc, int status = 200) {
    res.status = status;
    res.set_content(doc.dump(), "application/json");
}

// Runs a handler and maps engine errors onto HTTP status codes.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const nlohmann::json::exception& e) {
            send_json(res, {{"error", e.what()}, {"type", "parse"}}, 400);
        } catch (const ParseError& e) {
            send_json(res, {{"error", e.what()}, {"type", "parse"}}, 400);
        } catch (const ValidationError& e) {
            send_json(res, {{"error", e.what()}, {"type", "validation"}}, 422);
        } catch (const UnknownIdError& e) {
            send_json(res, {{"error", e.what()}, {"type", "unknown_id"}}, 404);
        } catch (const StaleIdError& e) {
            send_json(res, {{"error", e.what()}, {"type", "stale_id"}}, 409);
        } catch (const std::exception& e) {
            send_json(res, {{"error", e.what()}, {"type", "internal"}}, 500);
        }
    };
}

ojson parse_body(const httplib::Request& req) {
    try {
        return ojson::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("request body: ") + e.what());
    }
}

NodeId node_param(const httplib::Request& req, std::size_t index) {
    const std::string s = req.matches[index];
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw UnknownIdError("unknown node '" + s + "'");
    }
}

ojson event_to_json(const SessionEvent& e) {
    return {{"seq", e.seq}, {"type", e.type}, {"data", e.data}};
}

GroupModes modes_param(const httplib::Request& req) {
    GroupModes modes;
    if (!req.has_param("detail")) return modes;
    const std::string list = req.get_param_value("detail");
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = std::min(list.find(',', start), list.size());
        if (end > start) modes[list.substr(start, end - start)] = TreemapMode::detail;
        start = end + 1;
    }
    return modes;
}

}  // namespace

HttpServer::HttpServer(SessionConfig defaults)
    : service_(std::move(defaults)), http_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
    auto& http = *http_;
    const std::string sid = "/sessions/([A-Za-z0-9_-]+)";

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = service_.create(parse_body(req));
        send_json(res, {{"session", session->id()}, {"tree", session->tree_json()}}, 201);
    }));

    http.Get(sid + "/tree", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, service_.get(req.matches[1])->tree_json(modes_param(req)));
    }));

    http.Post(sid + "/edits", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = service_.get(req.matches[1]);
        const NodeId id = session->handle_edit(edit_from_json(parse_body(req)));
        send_json(res, {{"node", id}}, 201);
    }));

    http.Post(sid + "/weights", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = service_.get(req.matches[1]);
        const bool changed = session->handle_weights(weights_from_json(parse_body(req)));
        send_json(res, {{"changed", changed}, {"weights", weights_to_json(session->weights())}});
    }));

    http.Get(sid + "/suggestions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, service_.get(req.matches[1])->suggestions_json());
    }));

    http.Post(sid + R"(/suggestions/(\d+)/accept)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto session = service_.get(req.matches[1]);
                  send_json(res, {{"node", session->accept_suggestion(node_param(req, 2))}});
              }));

    http.Post(sid + R"(/select/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = service_.get(req.matches[1]);
        const auto path = session->select(node_param(req, 2));
        send_json(res, {{"selection", path.back()}, {"path", path}});
    }));

    http.Get(sid + R"(/nodes/(\d+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, service_.get(req.matches[1])->report_json(node_param(req, 2)));
    }));

    http.Get(sid + R"(/nodes/(\d+)/thumbnail\.png)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto image = service_.get(req.matches[1])->thumbnail(node_param(req, 2));
                 res.set_content(encode_png(image), "image/png");
             }));

    http.Get(sid + "/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = service_.get(req.matches[1]);
        std::uint64_t since = 0;
        if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
        if (req.has_header("Last-Event-ID")) since = std::stoull(req.get_header_value("Last-Event-ID"));

        if (req.get_param_value("format") == "json") {
            // Polling fallback.
            long wait_ms = req.has_param("wait_ms") ? std::stol(req.get_param_value("wait_ms")) : 0;
            wait_ms = std::clamp(wait_ms, 0L, 30000L);
            auto list = ojson::array();
            std::uint64_t last = since;
            for (const auto& e : session->events_since(since, std::chrono::milliseconds(wait_ms))) {
                list.push_back(event_to_json(e));
                last = e.seq;
            }
            send_json(res, {{"events", list}, {"last", last}});
            return;
        }

        auto cursor = std::make_shared<std::uint64_t>(since);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, session, cursor](std::size_t, httplib::DataSink& sink) {
                if (stopping_) return false;
                const auto events = session->events_since(*cursor, std::chrono::milliseconds(500));
                if (events.empty()) {
                    const std::string ping = ": keep-alive\n\n";
                    return sink.write(ping.data(), ping.size());
                }
                for (const auto& e : events) {
                    const std::string chunk = "id: " + std::to_string(e.seq) + "\nevent: " + e.type +
                                              "\ndata: " + event_to_json(e).dump() + "\n\n";
                    if (!sink.write(chunk.data(), chunk.size())) return false;
                    *cursor = e.seq;
                }
                return true;
            });
    }));
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return http_->bind_to_any_port(host);
    if (!http_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::run() { http_->listen_after_bind(); }

void HttpServer::start() {
    thread_ = std::thread([this] { run(); });
    http_->wait_until_ready();
}

void HttpServer::stop() {
    stopping_ = true;
    service_.close_all();
    http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace lightguide
