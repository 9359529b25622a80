#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "lightguide/session.hpp"

namespace httplib {
class Server;
}

namespace lightguide {

/// Session registry shared by the HTTP front end and tests.
class Service {
public:
    explicit Service(SessionConfig defaults = {});

    /// Body: {scene, catalog, weights?, seed?, settings?, guidance?, auto_suggest?}.
    std::shared_ptr<Session> create(const nlohmann::ordered_json& body);
    /// Throws UnknownIdError.
    std::shared_ptr<Session> get(const std::string& id) const;
    void close_all();

private:
    SessionConfig defaults_;
    std::shared_ptr<const Simulator> simulator_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 0;
};

/// JSON-over-HTTP front end with a server-sent event stream per session.
class HttpServer {
public:
    explicit HttpServer(SessionConfig defaults = {});
    ~HttpServer();

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call bind() first.
    void run();
    /// run() on a background thread; returns once the server accepts requests.
    void start();
    void stop();

    Service& service() { return service_; }

private:
    void routes();

    Service service_;
    std::unique_ptr<httplib::Server> http_;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

}  // namespace lightguide
