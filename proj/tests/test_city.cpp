#include <doctest.h>

#include <functional>

#include "citywall/city/ingest.hpp"
#include "citywall/city/layout.hpp"
#include "citywall/core/error.hpp"
#include "live.hpp"
#include "oracles.hpp"

using namespace citywall;
using namespace citywall::city;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvariantViolation;
}

std::string petclinic_text() {
  return testing::read_text(testing::data_dir() + "/structure/petclinic.json");
}

std::string traces_text() {
  return testing::read_text(testing::data_dir() + "/traces/petclinic-100.jsonl");
}

TraceRecord span(std::string trace, std::string id, std::optional<std::string> parent,
                 std::string method) {
  return {std::move(trace), std::move(id), std::move(parent), std::move(method), 10, 20};
}

StructureModel two_classes() {
  StructureModel m;
  const auto app = m.add_application("shop", "java");
  const auto pkg = m.add_root_package(app, "orders");
  m.add_class(pkg, "A", 2);
  m.add_class(pkg, "B", 9);
  return m;
}

}  // namespace

TEST_CASE("empty structure file") {
  const auto m = ingest_structure(R"({"applications": []})");
  CHECK(m.applications.empty());
  CHECK(m.packages.empty());
  CHECK(m.classes.empty());
}

TEST_CASE("PetClinic fixture ingests with the counts found by walking the file") {
  const auto text = petclinic_text();
  const auto m = ingest_structure(text);
  CHECK(m.applications.size() == 3);
  CHECK(m.applications.size() == testing::application_count_from_file(text));
  CHECK(m.packages.size() == testing::package_count_from_file(text));
  const auto fqns = testing::class_fqns_from_file(text);
  CHECK(m.classes.size() == fqns.size());
  const StructureIndex index(m);
  for (const auto& fqn : fqns) CHECK(index.find_class(fqn) != nullptr);
  CHECK(validate_structure(m).empty());
}

TEST_CASE("package references may reuse a definition once but never form a cycle") {
  const auto shared = R"({"applications": [{"name": "a", "language": "java", "packages": [
      {"name": "p", "id": "P", "classes": [{"name": "X", "methodCount": 1}]},
      {"name": "q", "subPackages": [{"ref": "P"}]}]}]})";
  CHECK(code_of([&] { ingest_structure(shared); }) == ErrorCode::ValidationError);

  const auto cyclic = R"({"applications": [{"name": "a", "language": "java", "packages": [
      {"name": "p", "id": "P", "subPackages": [{"name": "q", "subPackages": [{"ref": "P"}]}]}]}]})";
  try {
    ingest_structure(cyclic);
    FAIL("cyclic structure accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK_FALSE(e.details().empty());
  }

  const auto dangling = R"({"applications": [{"name": "a", "language": "java",
      "packages": [{"ref": "nowhere"}]}]})";
  CHECK(code_of([&] { ingest_structure(dangling); }) == ErrorCode::ValidationError);
}

TEST_CASE("structure parse errors") {
  CHECK(code_of([] { ingest_structure("{"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { ingest_structure("[]"); }) == ErrorCode::ParseError);
  CHECK(code_of([] {
          ingest_structure(R"({"applications": [{"name": 3, "language": "java"}]})");
        }) == ErrorCode::ParseError);
  CHECK(code_of([] {
          ingest_structure(R"({"applications": [{"name": "a", "language": "java", "packages":
            [{"name": "p", "classes": [{"name": "X", "methodCount": "many"}]}]}]})");
        }) == ErrorCode::ParseError);
}

TEST_CASE("trace files round-trip and are validated") {
  const auto records = ingest_traces(traces_text());
  CHECK(records.size() == 100);
  CHECK(validate_traces(records).empty());
  CHECK(ingest_traces(dump_traces(records)) == records);
  CHECK(ingest_traces("\n\n").empty());

  auto bad = records;
  bad[0].end_nanos = bad[0].start_nanos - 1;
  CHECK_FALSE(validate_traces(bad).empty());
  auto orphan = records;
  orphan[1].parent_span_id = "missing";
  CHECK_FALSE(validate_traces(orphan).empty());
  auto duplicate = records;
  duplicate[1].span_id = duplicate[0].span_id;
  CHECK_FALSE(validate_traces(duplicate).empty());

  CHECK(code_of([] { ingest_traces("{\"traceId\": \"t\"}\nnot json\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_traces(dump_traces(bad)); }) == ErrorCode::ValidationError);
}

TEST_CASE("aggregation of nothing is nothing") {
  const auto agg = aggregate_traces({}, two_classes());
  CHECK(agg.links.empty());
  CHECK(agg.dropped_spans == 0);
}

TEST_CASE("one parent-child pair across classes is one link") {
  const auto agg = aggregate_traces({span("t", "1", std::nullopt, "shop.orders.A.run"),
                                     span("t", "2", "1", "shop.orders.B.load")},
                                    two_classes());
  REQUIRE(agg.links.size() == 1);
  CHECK(agg.links[0] == CommunicationLink{"shop.orders.A", "shop.orders.B", 1});
}

TEST_CASE("self calls, unknown methods and other traces do not link") {
  const auto agg = aggregate_traces(
      {span("t", "1", std::nullopt, "shop.orders.A.run"), span("t", "2", "1", "shop.orders.A.step"),
       span("t", "3", "1", "elsewhere.Thing.do"), span("u", "2", std::nullopt, "shop.orders.B.x")},
      two_classes());
  CHECK(agg.links.empty());
  CHECK(agg.self_calls == 1);
  CHECK(agg.dropped_spans == 1);
}

TEST_CASE("100-span fixture aggregates to the brute-force count") {
  const auto text = petclinic_text();
  const auto model = ingest_structure(text);
  const auto records = ingest_traces(traces_text());
  const auto agg = aggregate_traces(records, model);
  const auto oracle = testing::brute_force_links(records, testing::class_fqns_from_file(text));
  std::map<std::pair<std::string, std::string>, std::uint64_t> got;
  for (const auto& l : agg.links) got[{l.source_fqn, l.target_fqn}] += l.call_count;
  CHECK(got == oracle.links);
  CHECK(agg.dropped_spans == oracle.dropped_spans);
  CHECK(agg.dropped_spans == 2);
  CHECK(std::is_sorted(agg.links.begin(), agg.links.end()));
}

TEST_CASE("empty model lays out as an empty city") {
  const auto layout = layout_city(StructureModel{}, {});
  CHECK(layout.districts.empty());
  CHECK(layout.buildings.empty());
  CHECK(layout.arcs.empty());
}

TEST_CASE("one class with four methods") {
  StructureModel m;
  const auto app = m.add_application("a", "java");
  const auto pkg = m.add_root_package(app, "p");
  m.add_class(pkg, "C", 4);
  const LayoutParams params;
  const auto layout = layout_city(m, {}, params);
  // The application ground plot plus one package slab.
  REQUIRE(layout.districts.size() == 2);
  CHECK(layout.districts[1].package_path == "a.p");
  REQUIRE(layout.buildings.size() == 1);
  CHECK(layout.buildings[0].class_fqn == "a.p.C");
  CHECK(layout.buildings[0].height == doctest::Approx(4 * params.height_per_method));
  CHECK(layout.buildings[0].height == doctest::Approx(2.0));
  CHECK(layout.buildings[0].district == 1);
  CHECK(layout.arcs.empty());
  CHECK(testing::layout_problems(m, layout, params).empty());
}

TEST_CASE("height and width encodings clamp") {
  CHECK(building_height(0) == 0.5);
  CHECK(building_height(3) == 1.5);
  CHECK(building_height(1000) == 30.0);
  CHECK(arc_width(1) == doctest::Approx(0.1));
  CHECK(arc_width(0) == 0.05);
  CHECK(arc_width(1u << 20) == 1.0);
}

TEST_CASE("PetClinic city satisfies every invariant and has one arc per link") {
  const auto model = ingest_structure(petclinic_text());
  const auto agg = aggregate_traces(ingest_traces(traces_text()), model);
  REQUIRE_FALSE(agg.links.empty());
  const auto layout = layout_city(model, agg.links);
  CHECK(layout.arcs.size() == agg.links.size());
  CHECK(layout.buildings.size() == model.classes.size());
  const auto problems = testing::layout_problems(model, layout);
  for (const auto& p : problems) INFO(p);
  CHECK(problems.empty());
  bool inter = false;
  for (const auto& arc : layout.arcs) inter |= !arc.intra_application;
  CHECK(inter);
}

TEST_CASE("layout output is byte-identical across runs") {
  const auto text = petclinic_text();
  const auto model = ingest_structure(text);
  const auto links = aggregate_traces(ingest_traces(traces_text()), model).links;
  const auto first = to_json(layout_city(model, links)).dump();
  const auto second = to_json(layout_city(ingest_structure(text), links)).dump();
  CHECK(first == second);
}

TEST_CASE("adding a class never shrinks its district") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto model = testing::random_model(rng, 3, 3, 60);
    if (model.packages.empty()) continue;
    const auto pkg = std::uniform_int_distribution<std::size_t>(0, model.packages.size() - 1)(rng);
    const auto before = layout_city(model, {});
    model.add_class(pkg, "ZzAdded", 3);
    const auto after = layout_city(model, {});
    const auto fqn_prefix = [&](const CityLayout& layout) {
      for (const auto& b : layout.buildings) {
        if (b.class_fqn.size() > 8 && b.class_fqn.ends_with(".ZzAdded")) {
          return layout.districts[b.district].package_path;
        }
      }
      return std::string{};
    };
    const auto path = fqn_prefix(after);
    REQUIRE_FALSE(path.empty());
    double area_before = -1, area_after = -1;
    for (const auto& d : before.districts) if (d.package_path == path) area_before = d.rect.area();
    for (const auto& d : after.districts) if (d.package_path == path) area_after = d.rect.area();
    REQUIRE(area_before > 0);
    CHECK(area_after >= area_before);
  }
}

TEST_CASE("random models lay out soundly") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const auto model = testing::random_model(rng);
    const auto problems = testing::layout_problems(model, layout_city(model, {}));
    if (!problems.empty()) FAIL_CHECK(problems.front());
  }
}

TEST_CASE("links to unknown classes are rejected") {
  CHECK(code_of([] {
          layout_city(two_classes(), {{"shop.orders.A", "shop.orders.Ghost", 1}});
        }) == ErrorCode::UnresolvedLink);
}
