#include "lightguide/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "lightguide/error.hpp"
#include "lightguide/scene_io.hpp"
#include "lightguide/server.hpp"
#include "lightguide/session.hpp"

namespace lightguide {

using ojson = nlohmann::ordered_json;

namespace {

struct CommonFlags {
    int bounces = 3;
    std::optional<double> resolution;
    std::uint64_t seed = 0;
    std::string weights;
    std::string format = "text";
    std::string out;
};

struct Options {
    CommonFlags common;
    std::string scene;
    std::string dump_map;
    int steps = 10;
    int retries = 4;
    std::string table;
    std::string host = "127.0.0.1";
    int port = 8080;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::vector<std::string>& formats) {
    cmd->add_option("--bounces", f.bounces, "indirect bounces")->check(CLI::Range(0, 64))->capture_default_str();
    cmd->add_option("--resolution", f.resolution, "patch edge length in m (default: scene value)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
    cmd->add_option("--weights", f.weights, "weights file (JSON)");
    cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember(formats))->capture_default_str();
    cmd->add_option("--out", f.out, "output file");
}

SimSettings sim_settings(const CommonFlags& f) {
    SimSettings s;
    s.bounces = f.bounces;
    s.resolution = f.resolution;
    s.seed = f.seed;
    s.validate();
    return s;
}

WeightConfig load_weights(const std::string& path) {
    if (path.empty()) return {};
    return weights_from_json(read_json_file(path));
}

std::string fmt_value(const std::optional<double>& v, int precision = 3) {
    if (!v) return "undefined";
    std::ostringstream s;
    s << std::setprecision(precision) << std::fixed << *v;
    return s.str();
}

std::string fmt_target(ConstraintKind kind, const Target& t) {
    std::ostringstream s;
    s << std::setprecision(3) << std::fixed;
    switch (kind) {
        case ConstraintKind::K: s << "[" << t.value << ", " << t.hi << "]"; break;
        case ConstraintKind::UGR: s << "<= " << t.value; break;
        default: s << ">= " << t.value; break;
    }
    return s.str();
}

void print_report_text(std::ostream& out, const FulfillmentReport& report) {
    for (ConstraintKind kind : kAllKinds) {
        const bool any = std::any_of(report.entries.begin(), report.entries.end(),
                                     [&](const auto& e) { return e.kind == kind; });
        if (!any) continue;
        out << to_string(kind) << "\n";
        for (const auto& e : report.entries) {
            if (e.kind != kind) continue;
            out << "  " << std::left << std::setw(14) << e.object << std::setw(10) << e.group << std::right
                << std::setw(12) << fmt_value(e.measured) << "  " << std::left << std::setw(22)
                << fmt_target(kind, e.target) << std::right << "f=" << fmt_value(e.f, 4)
                << (e.f >= 1.0 ? "" : "  *") << "\n";
        }
    }
    out << "s = " << std::setprecision(6) << std::fixed << report.score << "\n";
    out << (report.all_met() ? "all constraints met" : "constraints not met") << "\n";
    out.unsetf(std::ios::floatfield);
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.common.out.empty()) {
        out << text;
    } else {
        write_text_file(o.common.out, text);
    }
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const Scene scene = load_scene_file(o.scene);
    const WeightConfig weights = load_weights(o.common.weights);
    weights.validate(scene.report_groups());
    const LightMap map = simulate(scene, sim_settings(o.common));
    const FulfillmentReport report = evaluate(scene, map, weights);

    if (!o.dump_map.empty()) write_text_file(o.dump_map, lightmap_to_json(map).dump(1) + "\n");
    if (o.common.format == "json") {
        emit(o, out, report_to_json(report).dump(2) + "\n");
    } else {
        std::ostringstream s;
        print_report_text(s, report);
        emit(o, out, s.str());
    }
    return report.all_met() ? kExitOk : kExitUnmet;
}

int cmd_guide(const Options& o, std::ostream& out) {
    Scene scene = load_scene_file(o.scene);
    SessionConfig config;
    config.sim = sim_settings(o.common);
    config.weights = load_weights(o.common.weights);
    config.seed = o.common.seed;
    config.auto_suggest = false;
    if (!o.table.empty()) config.table = PerformanceTable::load(o.table);
    Session session("guide", std::move(scene), std::move(config));

    struct Step {
        int round;
        NodeId node;
        std::string letter;
        std::string description;
        double score;
    };
    std::vector<Step> trajectory;
    {
        const auto tree = session.tree();
        trajectory.push_back({0, tree.root(), "M", "initial state", tree.node(tree.root()).score});
    }
    int redrawn = 0;
    bool stalled = false;
    for (int round = 1; round <= o.steps && !stalled; ++round) {
        // Only improving suggestions are accepted; a batch without one is redrawn.
        for (int attempt = 0;; ++attempt) {
            session.request_suggestions();
            session.wait_idle();
            const auto tree = session.tree();
            const auto ids = tree.suggestions();
            NodeId best = 0;
            for (NodeId id : ids)
                if (best == 0 || tree.node(id).score > tree.node(best).score) best = id;
            if (best != 0 && tree.node(best).score > trajectory.back().score) {
                session.accept_suggestion(best);
                const auto& n = tree.node(best);
                trajectory.push_back({round, best, std::string(1, n.label), n.action.value("description", ""), n.score});
                break;
            }
            if (attempt >= o.retries) {
                stalled = true;
                break;
            }
            ++redrawn;
        }
    }
    if (stalled) {
        // Leave no pending suggestions in the saved tree.
        session.select(session.selection());
    }

    if (!o.common.out.empty()) write_text_file(o.common.out, session.save().dump(1) + "\n");

    if (o.common.format == "dot") {
        out << session.tree().to_dot();
    } else if (o.common.format == "json") {
        auto list = ojson::array();
        for (const auto& s : trajectory)
            list.push_back({{"round", s.round}, {"node", s.node}, {"label", s.letter},
                            {"description", s.description}, {"score", s.score}});
        out << ojson{{"trajectory", list}, {"redrawn", redrawn}, {"stalled", stalled}}.dump(2) << "\n";
    } else {
        for (const auto& s : trajectory)
            out << "round " << std::setw(2) << s.round << "  node " << std::setw(3) << s.node << "  " << s.letter
                << "  s = " << std::setprecision(6) << std::fixed << s.score << std::defaultfloat << "  "
                << s.description << "\n";
        if (redrawn > 0) out << redrawn << " batch(es) redrawn without an improving suggestion\n";
        if (stalled) out << "stopped early: no improving suggestion after " << o.retries + 1 << " batches\n";
    }
    return kExitOk;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const Options& o, std::ostream& out) {
    SessionConfig defaults;
    defaults.sim = sim_settings(o.common);
    defaults.weights = load_weights(o.common.weights);
    defaults.seed = o.common.seed;
    if (!o.table.empty()) defaults.table = PerformanceTable::load(o.table);
    HttpServer server(defaults);
    const int port = server.bind(o.host, o.port);
    out << "listening on http://" << o.host << ":" << port << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"lighting design engine: simulation, constraint evaluation and guidance"};
    app.set_config("--config", "", "read flags from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);

    Options o;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate a scene and evaluate its constraints");
    simulate_cmd->add_option("scene", o.scene, "scene file")->required()->check(CLI::ExistingFile);
    add_common(simulate_cmd, o.common, {"text", "json"});
    simulate_cmd->add_option("--dump-map", o.dump_map, "write the irradiance grids (JSON)");

    auto* guide_cmd = app.add_subcommand("guide", "run greedy auto-accept guidance rounds");
    guide_cmd->add_option("scene", o.scene, "scene file")->required()->check(CLI::ExistingFile);
    add_common(guide_cmd, o.common, {"text", "json", "dot"});
    guide_cmd->add_option("--steps", o.steps, "guidance rounds")->check(CLI::NonNegativeNumber)->capture_default_str();
    guide_cmd->add_option("--retries", o.retries, "fresh batches per round before giving up")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    guide_cmd->add_option("--table", o.table, "performance table file (JSON)");

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
    add_common(serve_cmd, o.common, {"text"});
    serve_cmd->add_option("--host", o.host)->capture_default_str();
    serve_cmd->add_option("--port", o.port)->check(CLI::Range(0, 65535))->capture_default_str();
    serve_cmd->add_option("--table", o.table, "performance table file (JSON)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (app.got_subcommand(simulate_cmd)) return cmd_simulate(o, out);
        if (app.got_subcommand(guide_cmd)) return cmd_guide(o, out);
        return cmd_serve(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace lightguide
