#include <doctest.h>

#include <random>

#include "lightguide/error.hpp"
#include "lightguide/metrics.hpp"
#include "support.hpp"

using namespace lightguide;

namespace {

FulfillmentEntry entry(const std::string& obj, const std::string& group, ConstraintKind k, double f) {
    FulfillmentEntry e;
    e.object = obj;
    e.group = group;
    e.kind = k;
    e.f = f;
    e.measured = f;
    return e;
}

GlareScan scan_of(std::vector<GlareSource> sources, double lb) {
    GlareScan s;
    s.probe = "P";
    s.sources = std::move(sources);
    s.background_luminance = lb;
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("surface statistics hand cases") {
    const auto s = surface_stats({100, 200, 300}, {1, 1, 1});
    CHECK(s.avg == 200.0);
    CHECK(s.g1 == 0.5);
    CHECK(s.g2 == 1.0 / 3.0);
    CHECK(s.min == 100.0);
    CHECK(s.max == 300.0);

    const auto u = surface_stats({500, 500, 500, 500}, {0.25, 0.25, 0.25, 0.25});
    CHECK(u.g1 == 1.0);
    CHECK(u.g2 == 1.0);

    const auto z = surface_stats({0, 0, 0}, {1, 1, 1});
    CHECK(z.avg == 0.0);
    CHECK(z.g1 == 0.0);
    CHECK(z.g2 == 0.0);

    // Area weighting.
    const auto w = surface_stats({100, 400}, {3, 1});
    CHECK(w.avg == 175.0);
}

TEST_CASE("UGR closed-form deltas") {
    const GlareSource src{"L1", 5000.0, 0.002, 1.0};
    const double one = measure_ugr(scan_of({src}, 30.0));
    const double two = measure_ugr(scan_of({src, src}, 30.0));
    CHECK(std::abs((two - one) - 8.0 * std::log10(2.0)) < 1e-6);

    GlareSource bright = src;
    bright.luminance *= 2;
    const double scaled = measure_ugr(scan_of({bright}, 30.0));
    CHECK(std::abs((scaled - one) - 8.0 * std::log10(4.0)) < 1e-6);

    CHECK(measure_ugr(scan_of({}, 30.0)) == 0.0);
    // Direct evaluation of the defining sum.
    CHECK(one == doctest::Approx(8.0 * std::log10(0.25 / 30.0 * 5000.0 * 5000.0 * 0.002)));
    // Background luminance below the floor is raised to it.
    CHECK(measure_ugr(scan_of({src}, 0.0)) == measure_ugr(scan_of({src}, kMinBackgroundLuminance)));
}

TEST_CASE("color temperature and colour rendering") {
    LuminaireModel a = lgtest::isotropic_model("a", 1, 3000, 80);
    a.flux = 1000;
    LuminaireModel b = lgtest::isotropic_model("b", 1, 4000, 90);
    b.flux = 3000;
    Scene s = lgtest::open_floor(4, 4, 3, 0.5, lgtest::catalog_of({a, b}));
    s.luminaires = {lgtest::light("L1", "a", {1, 1, 2}), lgtest::light("L2", "b", {3, 3, 2})};
    s.validate();
    const auto g = measure_global(s);
    CHECK(*g.cct == 3750.0);
    CHECK(*g.cri == 80.0);

    s.luminaires.pop_back();
    const auto single = measure_global(s);
    CHECK(*single.cct == 3000.0);

    s.luminaires.clear();
    const auto none = measure_global(s);
    CHECK_FALSE(none.cct);
    CHECK_FALSE(none.cri);
}

TEST_CASE("fulfillment rules") {
    CHECK(fulfillment(ConstraintKind::AVG, 250, {500, 0}) == 0.5);
    CHECK(fulfillment(ConstraintKind::AVG, 600, {500, 0}) == 1.0);
    CHECK(fulfillment(ConstraintKind::UGR, 19, {19, 0}) == 1.0);
    CHECK(fulfillment(ConstraintKind::UGR, 22, {19, 0}) == doctest::Approx(19.0 / 22.0));
    CHECK(fulfillment(ConstraintKind::K, 3500, {3000, 4000}) == 1.0);
    CHECK(fulfillment(ConstraintKind::K, 4500, {3000, 4000}) == 0.5);
    CHECK(fulfillment(ConstraintKind::K, 1000, {3000, 4000}) == 0.0);
    CHECK(fulfillment(ConstraintKind::G1, 0.3, {0.6, 0}) == 0.5);
}

TEST_CASE("score hand cases") {
    WeightConfig w;
    CHECK(progress_score({entry("a", "g", ConstraintKind::AVG, 0.5)}, w) == 0.5);

    std::vector<FulfillmentEntry> all_one;
    for (ConstraintKind k : kAllKinds) all_one.push_back(entry("a", "g", k, 1.0));
    CHECK(progress_score(all_one, w) == 1.0);

    w.groups = {{"g1", 2.0}, {"g2", 1.0}};
    const std::vector<FulfillmentEntry> two{entry("a", "g1", ConstraintKind::AVG, 0.9),
                                            entry("b", "g2", ConstraintKind::AVG, 0.3)};
    CHECK(progress_score(two, w) == doctest::Approx(0.7).epsilon(1e-15));

    // Object mean within a group.
    WeightConfig u;
    const std::vector<FulfillmentEntry> objs{entry("a", "g", ConstraintKind::AVG, 0.2),
                                             entry("b", "g", ConstraintKind::AVG, 0.6)};
    CHECK(progress_score(objs, u) == doctest::Approx(0.4));

    CHECK(progress_score({}, u) == 0.0);
}

TEST_CASE("score matches a brute-force oracle on random reports") {
    std::mt19937_64 rng(20261016);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto r = lgtest::random_report(rng);
        const double a = progress_score(r.entries, r.weights);
        const double b = lgtest::brute_force_score(r.entries, r.weights);
        worst = std::max(worst, std::abs(a - b));
        const auto report = aggregate(r.entries, {}, r.weights);
        CHECK(report.score == a);
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("score is scale invariant and monotone") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        auto r = lgtest::random_report(rng);
        const double s = progress_score(r.entries, r.weights);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);

        WeightConfig scaled = r.weights;
        const double c = 0.1 + 10 * unit(rng);
        for (auto& w : scaled.constraints) w *= c;
        for (auto& [g, w] : scaled.groups) w *= c;
        CHECK(progress_score(r.entries, scaled) == doctest::Approx(s).epsilon(1e-12));

        auto raised = r.entries;
        auto& e = raised[static_cast<std::size_t>(unit(rng) * raised.size()) % raised.size()];
        e.f = std::min(1.0, e.f + 0.25);
        CHECK(progress_score(raised, r.weights) >= s - 1e-15);
    }
}

TEST_CASE("evaluate the office fixture") {
    const Scene office = lgtest::fixture("office.json");
    const auto map = simulate(office, {});
    const auto report = evaluate(office, map, {});
    for (ConstraintKind k : kAllKinds) CHECK(report.kind_f[index_of(k)].has_value());
    CHECK(report.entries.size() == 2 + 2 + 3 * 3);
    CHECK(report.score == doctest::Approx(progress_score(report.entries, {})));
    CHECK(report.group_order == std::vector<std::string>{"desks", "floor", "glare", kGlobalGroup});

    // Summary cells carry the worst member value.
    for (const auto& g : report.groups) {
        double worst = 1.0;
        for (const auto& e : report.entries)
            if (e.group == g.group && e.kind == g.kind) worst = std::min(worst, e.f);
        CHECK(g.worst_f == worst);
    }
}

TEST_CASE("zero-light scene yields zero fulfillment") {
    Scene office = lgtest::fixture("office.json");
    office.luminaires.clear();
    const auto report = evaluate(office, simulate(office, {}), {});
    CHECK_FALSE(report.all_met());
    for (const auto& e : report.entries) {
        if (e.kind == ConstraintKind::UGR) {
            CHECK(e.f == 1.0);  // no glare without sources
        } else {
            CHECK(e.f == 0.0);
        }
    }
}

TEST_CASE("report json round trip") {
    const Scene office = lgtest::fixture("office.json");
    const auto report = evaluate(office, simulate(office, {}), {});
    const auto back = report_from_json(report_to_json(report));
    CHECK(back == report);
    CHECK(report_to_json(back).dump() == report_to_json(report).dump());
}

TEST_CASE("weights") {
    WeightConfig w;
    CHECK_NOTHROW(w.validate());
    w.constraints = {0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(w.validate(), ValidationError);
    WeightConfig neg;
    neg.constraints[0] = -1;
    CHECK_THROWS_AS(neg.validate(), ValidationError);
    WeightConfig groups;
    groups.groups = {{"desks", 0.0}};
    CHECK_THROWS_AS(groups.validate({"desks"}), ValidationError);

    const auto parsed = weights_from_json(nlohmann::ordered_json::parse(R"({"constraints": {"UGR": 2}})"));
    CHECK(parsed.constraint(ConstraintKind::UGR) == 2.0);
    CHECK(parsed.constraint(ConstraintKind::AVG) == 1.0);
    CHECK(weights_from_json(weights_to_json(parsed)) == parsed);
    CHECK_THROWS_AS(weights_from_json(nlohmann::ordered_json::parse(R"({"constraints": {"LUX": 2}})")), ParseError);
}

}  // TEST_SUITE
