#include <doctest.h>

#include "lightguide/error.hpp"
#include "lightguide/scene.hpp"
#include "lightguide/scene_io.hpp"
#include "support.hpp"

using namespace lightguide;

TEST_SUITE("scene") {

TEST_CASE("rectangles from corners") {
    auto r = make_rect({1, 2, 0}, {3, 5, 0}, "+z");
    REQUIRE(r);
    CHECK(r->area() == doctest::Approx(6.0));
    CHECK(r->normal() == Vec3{0, 0, 1});
    CHECK(r->center() == Vec3{2, 3.5, 0});
    CHECK(normal_name(*r) == "+z");

    auto wall = make_rect({0, 0, 0}, {0, 4, 3}, "+x");
    REQUIRE(wall);
    CHECK(wall->area() == doctest::Approx(12.0));

    CHECK_FALSE(make_rect({0, 0, 0}, {1, 1, 1}, "+z"));  // not flat
    CHECK_FALSE(make_rect({0, 0, 0}, {1, 1, 0}, "+x"));  // normal does not match the plane
    CHECK_FALSE(make_rect({0, 0, 0}, {0, 1, 0}, "+z"));  // degenerate
}

TEST_CASE("segment blocking uses the open interior") {
    auto r = *make_rect({0, 0, 1}, {1, 1, 1}, "-z");
    CHECK(r.blocks_segment({0.5, 0.5, 0}, {0.5, 0.5, 2}));
    CHECK_FALSE(r.blocks_segment({1.5, 0.5, 0}, {1.5, 0.5, 2}));
    CHECK_FALSE(r.blocks_segment({0.5, 0.5, 0}, {0.5, 0.5, 1}));  // endpoint on the plane
    CHECK_FALSE(r.blocks_segment({0.5, 0.5, 0}, {0.5, 0.5, 0.9}));
}

TEST_CASE("solid angle of a small rectangle approaches A cos / r^2") {
    auto r = *make_rect({0, 0, 0}, {0.01, 0.01, 0}, "+z");
    const Vec3 p{0.005, 0.005 + 1.0, 2.0};
    const Vec3 d = p - r.center();
    const double approx = r.area() * (d.z / length(d)) / dot(d, d);
    CHECK(lgtest::rel_err(solid_angle(r, p), approx) < 1e-4);
    // A large square seen from close above its center covers nearly a hemisphere.
    auto big = *make_rect({-1000, -1000, 0}, {1000, 1000, 0}, "+z");
    CHECK(solid_angle(big, {0, 0, 0.001}) == doctest::Approx(2 * kPi).epsilon(1e-5));
}

TEST_CASE("catalog lookup") {
    const auto catalog = load_catalog_file(lgtest::data_path("catalog.json"));
    const auto& m = catalog.lookup("officeline", "v2");
    CHECK(m.id == "officeline-v2");
    CHECK(m.flux == 4000);
    CHECK(m.cct == 4000);
    CHECK(m.cri == 80);
    CHECK(m.mount == MountType::pendant);
    CHECK_THROWS_AS(catalog.lookup("officeline", "v999"), UnknownIdError);
    CHECK_THROWS_AS(catalog.lookup("nosuch", "v1"), UnknownIdError);

    const auto versions = catalog.versions("officeline");
    REQUIRE(versions.size() >= 2);
    CHECK(versions[0]->distribution == versions[1]->distribution);
    CHECK(versions[0]->flux != versions[1]->flux);
}

TEST_CASE("catalog rejects versions with different shapes") {
    auto a = lgtest::isotropic_model("a", 100);
    auto b = a;
    b.id = "b";
    b.version = "v2";
    b.distribution.type = DistributionType::cosine_lobe;
    CHECK_THROWS_AS(Catalog({a, b}), ValidationError);
}

TEST_CASE("fixture documents") {
    const Scene minimal = lgtest::fixture("minimal.json");
    CHECK(minimal.luminaires.empty());
    CHECK(minimal.surfaces.size() == 2);

    const Scene office = lgtest::fixture("office.json");
    CHECK(office.room.width == 6);
    CHECK(office.room.depth == 4);
    CHECK(office.room.height == 3);
    CHECK(office.luminaires.size() == 4);
    CHECK(office.measuring_surfaces.size() == 3);
    CHECK(office.glare_probes.size() == 2);
    CHECK(office.groups.size() == 3);
    CHECK(office.group_of("desk1") == "desks");
    CHECK(office.group_of("P2") == "glare");
}

TEST_CASE("reflectance bound is validated") {
    auto doc = read_json_file(lgtest::data_path("office.json"));
    for (auto& s : doc["surfaces"])
        if (s["kind"] == "wall") {
            s["reflectance"] = 1.3;
            break;
        }
    const auto catalog = std::make_shared<const Catalog>(load_catalog_file(lgtest::data_path("catalog.json")));
    try {
        scene_from_json(doc, catalog);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("reflectance") != std::string::npos);
    }
}

TEST_CASE("malformed documents are parse errors") {
    const auto catalog = std::make_shared<const Catalog>(load_catalog_file(lgtest::data_path("catalog.json")));
    nlohmann::ordered_json doc = {{"format", "lightguide-scene/1"}, {"room", "big"}};
    CHECK_THROWS_AS(scene_from_json(doc, catalog), ParseError);
}

TEST_CASE("scene json round trip") {
    const Scene office = lgtest::fixture("office.json");
    const auto doc = scene_to_json(office);
    const Scene back = scene_from_json(doc, office.catalog);
    CHECK(scene_to_json(back) == doc);
}

TEST_CASE("edits produce new snapshots") {
    const Scene office = lgtest::fixture("office.json");
    const std::string id = office.luminaires[0].id;
    const double z = office.luminaires[0].position.z;

    const Scene moved = apply_edit(office, MoveLightEdit{id, {0, 0, -0.4}});
    CHECK(moved.find_luminaire(id)->position.z == doctest::Approx(z - 0.4));
    CHECK(office.find_luminaire(id)->position.z == z);  // input untouched

    const Scene dimmed = apply_edit(office, SetDimEdit{{}, 0.8});
    for (const auto& l : dimmed.luminaires) CHECK(l.dim == 0.8);

    CHECK_THROWS_AS(apply_edit(office, SetPositionEdit{id, {1.8, 1.3, 3.2}}), GeometryError);
    CHECK_THROWS_AS(apply_edit(office, ShiftHeightEdit{{id}, 2.0}), GeometryError);
    CHECK_THROWS_AS(apply_edit(office, RemoveLightEdit{"nope"}), UnknownIdError);
    CHECK_THROWS_AS(apply_edit(office, SetDimEdit{{}, 1.5}), ValidationError);

    const Scene removed = apply_edit(office, RemoveLightEdit{id});
    CHECK(removed.luminaires.size() == 3);
    CHECK(removed.next_luminaire_id() == id);

    const Scene swapped = apply_edit(office, ExchangeModelEdit{{}, "officeline-v1"});
    for (const auto& l : swapped.luminaires) CHECK(l.model == "officeline-v1");
}

TEST_CASE("edit json round trip") {
    const std::vector<Edit> edits{AddLightEdit{lgtest::light("L9", "officeline-v1", {1, 1, 2.2})},
                                  RemoveLightEdit{"L1"},
                                  MoveLightEdit{"L1", {0.1, 0, 0}},
                                  SetDimEdit{{"L1", "L2"}, 0.7},
                                  ScaleDimEdit{0.9},
                                  ShiftHeightEdit{{}, -0.2},
                                  ExchangeModelEdit{{"L3"}, "panel-v1"}};
    for (const auto& e : edits) {
        const auto j = edit_to_json(e);
        CHECK(edit_to_json(edit_from_json(j)) == j);
    }
    CHECK_THROWS_AS(edit_from_json({{"type", "teleport"}}), ParseError);
}

}  // TEST_SUITE
