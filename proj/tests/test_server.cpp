#include <doctest.h>

#include <httplib.h>

#include "lightguide/scene_io.hpp"
#include "lightguide/server.hpp"
#include "support.hpp"

using namespace lightguide;
using ojson = nlohmann::ordered_json;

namespace {

struct Running {
    HttpServer server;
    int port = 0;
    std::unique_ptr<httplib::Client> client;

    Running() {
        port = server.bind("127.0.0.1", 0);
        server.start();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_read_timeout(30, 0);
    }
    ~Running() { server.stop(); }

    ojson post(const std::string& path, const ojson& body, int expect) {
        auto res = client->Post(path, body.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == expect);
        return ojson::parse(res->body);
    }
    ojson get(const std::string& path, int expect = 200) {
        auto res = client->Get(path);
        REQUIRE(res);
        CHECK(res->status == expect);
        return ojson::parse(res->body);
    }
};

ojson create_body(const std::string& scene_file) {
    return {{"scene", read_json_file(lgtest::data_path(scene_file))},
            {"catalog", read_json_file(lgtest::data_path("catalog.json"))},
            {"seed", 5}};
}

// Polls the event log until a batch_ready for `batch` shows up.
void await_ready(Running& r, const std::string& sid, std::uint64_t batch) {
    std::uint64_t since = 0;
    for (int i = 0; i < 200; ++i) {
        const auto doc = r.get("/sessions/" + sid + "/events?format=json&wait_ms=500&since=" + std::to_string(since));
        for (const auto& e : doc["events"])
            if (e["type"] == "batch_ready" && e["data"]["batch"].get<std::uint64_t>() == batch) return;
        since = doc["last"].get<std::uint64_t>();
    }
    FAIL("batch never became ready");
}

}  // namespace

TEST_SUITE("server") {

TEST_CASE("http session round trip") {
    Running r;
    const auto created = r.post("/sessions", create_body("office.json"), 201);
    const std::string sid = created["session"];
    const std::string base = "/sessions/" + sid;
    CHECK(created["tree"]["nodes"].size() >= 1);
    const NodeId root = created["tree"]["root"];

    await_ready(r, sid, created["tree"]["batch"]["id"]);
    const auto sugg = r.get(base + "/suggestions");
    CHECK(sugg["state"] == "ready");
    REQUIRE(sugg["suggestions"].size() == 3);
    double prev = 2.0;
    for (const auto& s : sugg["suggestions"]) {
        CHECK(s["score"].get<double>() <= prev);
        prev = s["score"];
    }

    // Edit -> new manual node.
    const auto edit = r.post(base + "/edits", {{"type", "move_light"}, {"id", "L1"}, {"delta", {0.1, 0, 0}}}, 201);
    const NodeId n = edit["node"];
    auto tree = r.get(base + "/tree");
    CHECK(tree["selection"] == n);
    CHECK(tree["active_path"] == ojson::array({root, n}));
    r.post(base + "/edits", {{"type", "set_position"}, {"id", "L1"}, {"position", {1, 1, 9}}}, 422);
    r.post(base + "/edits", {{"type", "warp"}}, 400);

    // Weights.
    const auto same = r.post(base + "/weights", {{"constraints", ojson::object()}}, 200);
    CHECK(same["changed"] == false);
    const auto changed = r.post(base + "/weights", {{"constraints", {{"UGR", 0}}}}, 200);
    CHECK(changed["changed"] == true);
    r.post(base + "/weights", {{"constraints", {{"K", 0}, {"CRI", 0}, {"UGR", 0}, {"AVG", 0}, {"G1", 0}, {"G2", 0}}}},
           422);
    tree = r.get(base + "/tree");
    for (const auto& node : tree["nodes"])
        for (const auto& c : node["layout"]["cells"]) CHECK(c["kind"] != "UGR");

    // Accept the best suggestion of the current batch.
    await_ready(r, sid, r.get(base + "/tree")["batch"]["id"]);
    const auto fresh = r.get(base + "/suggestions");
    REQUIRE_FALSE(fresh["suggestions"].empty());
    const NodeId top = fresh["suggestions"][0]["node"];
    const NodeId other = fresh["suggestions"].back()["node"];
    const auto accepted = r.post(base + "/suggestions/" + std::to_string(top) + "/accept", ojson::object(), 200);
    CHECK(accepted["node"] == top);
    r.post(base + "/suggestions/" + std::to_string(other) + "/accept", ojson::object(), 409);

    // Reports and thumbnails.
    const auto report = r.get(base + "/nodes/" + std::to_string(top) + "/report");
    CHECK(report["report"]["entries"].size() > 0);
    auto png = r.client->Get(base + "/nodes/" + std::to_string(top) + "/thumbnail.png");
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->get_header_value("Content-Type") == "image/png");
    CHECK(png->body.substr(1, 3) == "PNG");

    // Undo by selecting the parent.
    const auto sel = r.post(base + "/select/" + std::to_string(n), ojson::object(), 200);
    CHECK(sel["selection"] == n);

    r.get(base + "/nodes/99999/report", 404);
    r.get("/sessions/nope/tree", 404);
    r.post("/sessions", {{"scene", 1}}, 400);

    // Event ordering on the wire: each commit precedes the next batch start.
    const auto events = r.get(base + "/events?format=json")["events"];
    std::int64_t last_commit = -1, last_start = -1;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i]["type"] == "node_committed") last_commit = static_cast<std::int64_t>(i);
        if (events[i]["type"] == "batch_started") last_start = static_cast<std::int64_t>(i);
    }
    CHECK(last_start > last_commit);
}

TEST_CASE("server-sent event stream") {
    Running r;
    const auto created = r.post("/sessions", create_body("minimal.json"), 201);
    const std::string sid = created["session"];
    std::string received;
    httplib::Client sse("127.0.0.1", r.port);
    sse.set_read_timeout(10, 0);
    auto res = sse.Get("/sessions/" + sid + "/events", [&](const char* data, std::size_t len) {
        received.append(data, len);
        return received.find("event: batch_started") == std::string::npos;
    });
    CHECK(received.find("event: node_committed") != std::string::npos);
    CHECK(received.find("event: batch_started") != std::string::npos);
    CHECK(received.find("id: 1\n") != std::string::npos);
}

}  // TEST_SUITE
