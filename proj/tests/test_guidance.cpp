#include <doctest.h>

#include <random>
#include <set>

#include "lightguide/error.hpp"
#include "lightguide/guidance.hpp"
#include "support.hpp"

using namespace lightguide;

namespace {

WeightConfig only(ConstraintKind k) {
    WeightConfig w;
    w.constraints = {0, 0, 0, 0, 0, 0};
    w.constraints[index_of(k)] = 1.0;
    return w;
}

}  // namespace

TEST_SUITE("guidance") {

TEST_CASE("default performance table row sums") {
    const PerformanceTable table;
    const std::array<int, 7> sums{32, 23, 15, 32, 32, 40, 32};
    for (ActionKind a : kAllActions) {
        const auto& row = table.row(a);
        CHECK(std::accumulate(row.begin(), row.end(), 0) == sums[static_cast<std::size_t>(a)]);
    }
    const auto ranked = wsm_rank(table, {});
    CHECK(ranked[0].kind == ActionKind::ChangeCollection);
    CHECK(ranked[0].score == 40.0);
    for (const auto& r : ranked) CHECK(r.score == sums[static_cast<std::size_t>(r.kind)]);

    // The shipped data file matches the built-in table.
    CHECK(PerformanceTable::load(lgtest::data_path("performance_table.json")) == table);
    CHECK(PerformanceTable::from_json(table.to_json()) == table);
}

TEST_CASE("single-constraint rankings") {
    const PerformanceTable table;
    const auto ugr = wsm_rank(table, only(ConstraintKind::UGR));
    CHECK(ugr[0].kind == ActionKind::RemoveLight);
    CHECK(ugr[1].kind == ActionKind::DimLights);
    for (int i = 0; i < 4; ++i) CHECK(ugr[i].score == 10.0);

    const auto avg = wsm_rank(table, only(ConstraintKind::AVG));
    CHECK(avg[0].kind == ActionKind::AddLight);
    CHECK(avg[0].score == 10.0);
}

TEST_CASE("top-2 matches an exhaustive sort") {
    const PerformanceTable table;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        WeightConfig w;
        for (auto& c : w.constraints) c = unit(rng);
        const auto ranked = wsm_rank(table, w);
        const auto oracle = lgtest::oracle_order(table, w);
        CHECK(ranked[0].kind == oracle[0]);
        CHECK(ranked[1].kind == oracle[1]);
    }
}

TEST_CASE("dim parameterization") {
    const Scene office = lgtest::fixture("office.json");
    GuidanceSettings settings;
    const auto a = parameterize(ActionKind::DimLights, office, 5, settings);
    CHECK(a.size() >= 3);
    CHECK(a.size() <= 5);
    for (const auto& x : a) {
        CHECK(x.factor >= 0.5);
        CHECK(x.factor <= 0.95);
    }
    CHECK(parameterize(ActionKind::DimLights, office, 5, settings) == a);
    CHECK(parameterize(ActionKind::DimLights, office, 6, settings) != a);
}

TEST_CASE("inapplicable actions yield nothing") {
    const Scene minimal = lgtest::fixture("minimal.json");
    CHECK(parameterize(ActionKind::RemoveLight, minimal, 1).empty());
    CHECK(parameterize(ActionKind::DimLights, minimal, 1).empty());
    CHECK(parameterize(ActionKind::HeightIncrease, minimal, 1).empty());
    // Adding is always possible.
    CHECK_FALSE(parameterize(ActionKind::AddLight, minimal, 1).empty());
}

TEST_CASE("height draws respect the working-plane guard") {
    const Scene office = lgtest::fixture("office.json");  // pendants at 2.2 m
    GuidanceSettings settings;
    settings.working_plane_guard = 2.0;
    const auto drawn = parameterize(ActionKind::HeightDecrease, office, 3, settings);
    CHECK_FALSE(drawn.empty());
    for (const auto& a : drawn) {
        CHECK(is_valid(office, a, settings));
        const Scene next = apply_edits(office, a.edits(office));
        for (const auto& l : next.luminaires) CHECK(l.position.z >= settings.working_plane_guard);
    }

    // An unconstrained sampler over the same range would produce invalid draws.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> shift(settings.shift_lo, settings.shift_hi);
    int invalid = 0;
    for (int i = 0; i < 200; ++i)
        if (2.2 - shift(rng) < settings.working_plane_guard) ++invalid;
    CHECK(invalid > 100);
}

TEST_CASE("actions serialize with their provenance letter") {
    const Scene office = lgtest::fixture("office.json");
    for (ActionKind k : kAllActions) {
        for (const auto& a : parameterize(k, office, 11)) {
            const auto j = a.to_json();
            CHECK(j["letter"].get<std::string>() == std::string(1, a.letter()));
            CHECK(Action::from_json(j) == a);
            CHECK_FALSE(a.description().empty());
        }
    }
    CHECK(action_letter(ActionKind::AddLight) == 'A');
    CHECK(action_letter(ActionKind::RemoveLight) == 'R');
    CHECK(action_letter(ActionKind::DimLights) == 'd');
    CHECK(action_letter(ActionKind::HeightIncrease) == 'H');
    CHECK(action_letter(ActionKind::ChangeVersion) == 'C');
}

TEST_CASE("suggestions are the top three of the pool") {
    const Scene office = lgtest::fixture("office.json");
    Simulator sim;
    const WeightConfig weights;
    const auto r = generate_suggestions(office, weights, {}, {}, {}, sim, 42);
    CHECK(r.pool.size() <= 10);
    REQUIRE(r.suggestions.size() == std::min<std::size_t>(3, r.pool.size()));

    std::vector<double> scores;
    for (const auto& c : r.pool) scores.push_back(c.score);
    std::vector<double> sorted = scores;
    std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t i = 0; i < r.suggestions.size(); ++i) CHECK(r.suggestions[i].score == sorted[i]);

    for (const auto& c : r.pool) {
        Scene copy = *c.scene;
        CHECK_NOTHROW(copy.validate());
        for (const auto& l : copy.luminaires) CHECK(l.position.z >= GuidanceSettings{}.working_plane_guard);
        CHECK(c.score == progress_score(c.report.entries, weights));
    }

    // Deterministic under a fixed seed.
    const auto again = generate_suggestions(office, weights, {}, {}, {}, sim, 42);
    REQUIRE(again.suggestions.size() == r.suggestions.size());
    for (std::size_t i = 0; i < r.suggestions.size(); ++i) {
        CHECK(again.suggestions[i].action == r.suggestions[i].action);
        CHECK(again.suggestions[i].score == r.suggestions[i].score);
    }
}

TEST_CASE("AVG-only failure with AVG-dominant weights") {
    Scene office = lgtest::fixture("office_satisfied.json");
    for (auto& m : office.measuring_surfaces)
        if (m.targets.avg) m.targets.avg = *m.targets.avg * 2.0;
    office.validate();
    Simulator sim;
    const auto base = evaluate(office, sim.simulate(office, {}), {});
    for (const auto& e : base.entries)
        if (e.kind != ConstraintKind::AVG) CHECK(e.f == 1.0);

    WeightConfig w;
    w.constraints = {0.1, 0.1, 0.1, 1.0, 0.1, 0.1};
    const auto r = generate_suggestions(office, w, {}, {}, {}, sim, 8);
    std::vector<double> scores;
    for (const auto& c : r.pool) scores.push_back(c.score);
    std::sort(scores.begin(), scores.end());
    const double median = scores.size() % 2 ? scores[scores.size() / 2]
                                             : 0.5 * (scores[scores.size() / 2 - 1] + scores[scores.size() / 2]);
    for (const auto& c : r.suggestions) {
        CHECK(c.score >= median);
        CHECK((c.action.kind == ActionKind::AddLight || c.action.kind == ActionKind::HeightDecrease));
    }
}

TEST_CASE("satisfied scenes still get suggestions") {
    const Scene s = lgtest::fixture("office_satisfied.json");
    Simulator sim;
    CHECK(evaluate(s, sim.simulate(s, {}), {}).all_met());
    const auto r = generate_suggestions(s, {}, {}, {}, {}, sim, 1);
    CHECK_FALSE(r.suggestions.empty());
}

TEST_CASE("cancelled generation throws") {
    const Scene s = lgtest::fixture("office.json");
    std::stop_source src;
    src.request_stop();
    Simulator sim;
    CHECK_THROWS_AS(generate_suggestions(s, {}, {}, {}, {}, sim, 1, src.get_token()), CancelledError);
}

TEST_CASE("derived seeds differ per index") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(5, i));
    CHECK(seen.size() == 100);
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}

}  // TEST_SUITE
