#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "citywall/core/error.hpp"
#include "citywall/core/identifiers.hpp"
#include "citywall/core/pose.hpp"
#include "citywall/core/projection.hpp"
#include "citywall/core/structure.hpp"
#include "oracles.hpp"

using namespace citywall;

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

ProjectionMatrix unit_frustum() {
  return ProjectionMatrix(testing::gl_frustum(-1, 1, -1, 1, 1, 10));
}

}  // namespace

TEST_CASE("identifiers accept the documented character set") {
  CHECK(is_valid_identifier("projector-3"));
  CHECK(is_valid_identifier("A_z-09"));
  CHECK(is_valid_identifier(std::string(64, 'a')));
  CHECK_FALSE(is_valid_identifier(""));
  CHECK_FALSE(is_valid_identifier(std::string(65, 'a')));
  CHECK_FALSE(is_valid_identifier("has space"));
  CHECK_FALSE(is_valid_identifier("dotted.name"));
  CHECK_FALSE(is_valid_identifier("caf\xc3\xa9"));

  CHECK(DeviceId("left").str() == "left");
  CHECK(code_of([] { RoomId(""); }) == ErrorCode::BadIdentifier);
  CHECK(code_of([] { DeviceId("a/b"); }) == ErrorCode::BadIdentifier);
  CHECK(RoomId("a") < RoomId("b"));
}

TEST_CASE("projection matrices must be finite, invertible and forward-looking") {
  const auto m = testing::gl_frustum(-1, 1, -1, 1, 1, 10);
  const auto inspection = inspect_matrix(m);
  CHECK(inspection.finite);
  CHECK(inspection.invertible);
  CHECK(inspection.forward_perspective);

  CHECK(code_of([] { ProjectionMatrix(Eigen::Matrix4d::Zero()); }) ==
        ErrorCode::InvariantViolation);

  Eigen::Matrix4d nan = m;
  nan(1, 1) = std::nan("");
  CHECK(code_of([&] { ProjectionMatrix{nan}; }) == ErrorCode::InvariantViolation);

  // Identity is invertible but has no perspective divide.
  CHECK_FALSE(inspect_matrix(Eigen::Matrix4d::Identity()).forward_perspective);
  CHECK(code_of([] { ProjectionMatrix(Eigen::Matrix4d::Identity()); }) ==
        ErrorCode::InvariantViolation);

  // Looking backwards: w = +z puts the clip volume behind the camera.
  Eigen::Matrix4d backwards = m;
  backwards.row(3) = -backwards.row(3);
  CHECK_FALSE(inspect_matrix(backwards).forward_perspective);
}

TEST_CASE("projection matrices round-trip column-major") {
  const auto p = unit_frustum();
  const auto cm = p.column_major();
  CHECK(cm[0] == doctest::Approx(1.0));
  CHECK(cm[10] == doctest::Approx(-11.0 / 9.0));  // (3,3)
  CHECK(cm[11] == doctest::Approx(-1.0));         // (4,3)
  CHECK(cm[14] == doctest::Approx(-20.0 / 9.0));  // (3,4)
  CHECK(ProjectionMatrix::from_column_major(cm) == p);
  CHECK(from_column_major(to_column_major(p.matrix())) == p.matrix());
}

TEST_CASE("camera poses renormalize their orientation") {
  const CameraPose pose(Eigen::Vector3d(1, 2, 3), Eigen::Quaterniond(2, 0, 0, 0), 7);
  CHECK(pose.orientation().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pose.seq() == 7);
  CHECK(std::abs(CameraPose::identity(1).orientation().w() - 1.0) < 1e-15);

  CHECK(code_of([] { CameraPose(Eigen::Vector3d::Zero(), Eigen::Quaterniond(0, 0, 0, 0), 1); }) ==
        ErrorCode::InvariantViolation);
  CHECK(code_of([] {
          CameraPose(Eigen::Vector3d(std::nan(""), 0, 0), Eigen::Quaterniond::Identity(), 1);
        }) == ErrorCode::InvariantViolation);
}

TEST_CASE("view configurations need exactly one main and unique devices") {
  const auto p = unit_frustum();
  const ViewConfiguration ok("office", {{DeviceId("left"), p, Role::Main},
                                        {DeviceId("right"), p, Role::Auxiliary}});
  CHECK(ok.main_view().device_id.str() == "left");
  CHECK(ok.find(DeviceId("right")) != nullptr);
  CHECK(ok.find(DeviceId("other")) == nullptr);

  CHECK(code_of([&] {
          ViewConfiguration("x", {{DeviceId("a"), p, Role::Auxiliary}});
        }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] {
          ViewConfiguration("x", {{DeviceId("a"), p, Role::Main}, {DeviceId("b"), p, Role::Main}});
        }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] {
          ViewConfiguration("x", {{DeviceId("a"), p, Role::Main}, {DeviceId("a"), p, Role::Auxiliary}});
        }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { ViewConfiguration("x", {}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { ViewConfiguration("", {{DeviceId("a"), p, Role::Main}}); }) ==
        ErrorCode::InvalidConfig);

  try {
    ViewConfiguration("x", {{DeviceId("a"), p, Role::Main}, {DeviceId("a"), p, Role::Main}});
  } catch (const Error& e) {
    CHECK(e.details().size() >= 2);  // both the duplicate and the main count
  }
}

TEST_CASE("structural diagnostics name each problem") {
  ConfigDocument doc;
  doc.config_id = "x";
  doc.views.push_back({"a", "main", to_column_major(unit_frustum().matrix())});
  doc.views.push_back({"a", "boss", to_column_major(unit_frustum().matrix())});
  doc.views.push_back({"bad id", "auxiliary", to_column_major(unit_frustum().matrix())});
  std::set<std::string> codes;
  for (const auto& d : structural_diagnostics(doc)) codes.insert(d.code);
  CHECK(codes.count("duplicate_device"));
  CHECK(codes.count("bad_role"));
  CHECK(codes.count("bad_device_id"));

  const auto round = to_document(ViewConfiguration("y", {{DeviceId("m"), unit_frustum(), Role::Main}}));
  CHECK(round.config_id == "y");
  CHECK(round.views.at(0).role == "main");
  CHECK(structural_diagnostics(round).empty());
}

TEST_CASE("roles parse strictly") {
  CHECK(parse_role("main") == Role::Main);
  CHECK(parse_role("auxiliary") == Role::Auxiliary);
  CHECK(to_string(Role::Main) == "main");
  CHECK(code_of([] { parse_role("Main"); }) == ErrorCode::ParseError);
}

TEST_CASE("validate_structure accepts an empty model") {
  CHECK(validate_structure(StructureModel{}).empty());
}

TEST_CASE("validate_structure reports a duplicated class once") {
  StructureModel m;
  const auto app = m.add_application("shop", "java");
  const auto pkg = m.add_root_package(app, "orders");
  m.add_class(pkg, "A", 3);
  m.add_class(pkg, "A", 4);
  const auto v = validate_structure(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == "duplicate_fqn");
  CHECK(v[0].path == "shop.orders.A");
}

TEST_CASE("validate_structure rejects shared and cyclic packages") {
  StructureModel shared;
  const auto app = shared.add_application("a", "java");
  const auto p = shared.add_root_package(app, "p");
  const auto q = shared.add_root_package(app, "q");
  const auto child = shared.add_sub_package(p, "c");
  shared.packages[q].sub_packages.push_back(child);
  bool saw_shared = false;
  for (const auto& v : validate_structure(shared)) saw_shared |= v.kind == "shared_package";
  CHECK(saw_shared);

  StructureModel cyclic;
  const auto app2 = cyclic.add_application("a", "java");
  const auto root = cyclic.add_root_package(app2, "p");
  const auto inner = cyclic.add_sub_package(root, "q");
  cyclic.packages[inner].sub_packages.push_back(root);
  bool saw_cycle = false;
  for (const auto& v : validate_structure(cyclic)) saw_cycle |= v.kind == "package_cycle";
  CHECK(saw_cycle);
}

TEST_CASE("validate_structure flags names, counts and orphans") {
  StructureModel m;
  const auto app = m.add_application("a.b", "java");
  const auto pkg = m.add_root_package(app, "");
  m.add_class(pkg, "X", -1);
  m.packages.push_back({"floating", {}, {}});
  std::set<std::string> kinds;
  for (const auto& v : validate_structure(m)) kinds.insert(v.kind);
  CHECK(kinds.count("invalid_name"));
  CHECK(kinds.count("negative_method_count"));
  CHECK(kinds.count("orphan_package"));

  StructureModel twice;
  twice.add_application("a", "java");
  twice.add_application("a", "go");
  CHECK(validate_structure(twice).at(0).kind == "duplicate_application");
}

TEST_CASE("random models from the test generator are valid") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    CHECK(validate_structure(testing::random_model(rng)).empty());
  }
}

TEST_CASE("structure index resolves classes and methods") {
  StructureModel m;
  const auto app = m.add_application("shop", "java");
  const auto pkg = m.add_root_package(app, "orders");
  const auto sub = m.add_sub_package(pkg, "web");
  m.add_class(sub, "OrderController", 5);
  const StructureIndex index(m);
  const auto* info = index.find_class("shop.orders.web.OrderController");
  REQUIRE(info != nullptr);
  CHECK(info->package_path == "shop.orders.web");
  CHECK(info->application == app);
  CHECK(index.class_of_method("shop.orders.web.OrderController.list") ==
        std::optional<std::string>("shop.orders.web.OrderController"));
  CHECK_FALSE(index.class_of_method("shop.orders.web.Missing.list"));
  CHECK_FALSE(index.class_of_method("nodots"));
}

TEST_CASE("error codes have stable names") {
  CHECK(to_string(ErrorCode::NotMain) == "NotMain");
  CHECK(to_string(ErrorCode::EyeOnScreenPlane) == "EyeOnScreenPlane");
  const Error e(ErrorCode::ValidationError, "bad", {"one", "two"});
  CHECK(e.details().size() == 2);
}
