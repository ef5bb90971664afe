#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "jmm/kinematics.hpp"
#include "jmm/units.hpp"

using namespace jmm;

namespace {

RobotModel planar_two_link() {
    RobotModel r;
    r.name = "planar";
    r.joints = {
        {"j1", {0, 0, 1}, {0, 0, 0}, -3.2, 3.2, 0.0},
        {"j2", {0, 0, 1}, {1, 0, 0}, -3.2, 3.2, 0.0},
    };
    r.ee_offset = {1, 0, 0};
    return r;
}

} // namespace

TEST_CASE("builtin robots expose the documented mappings") {
    auto [arm5, map5] = builtin_robot("arm-5dof");
    CHECK(arm5.joints.size() == 5);
    CHECK(map5.entries.at(PrimitiveKind::ShoulderAdduction).joint == 0);
    CHECK(map5.entries.at(PrimitiveKind::ShoulderFlexion).joint == 2);
    CHECK(map5.entries.at(PrimitiveKind::ElbowFlexion).joint == 3);
    CHECK(map5.entries.at(PrimitiveKind::ForearmRotation).joint == 4);

    auto [hum, maph] = builtin_robot("humanoid-arm");
    CHECK(hum.joints.size() == 4);
    CHECK(hum.joints[maph.entries.at(PrimitiveKind::ForearmRotation).joint].name ==
          "wrist_twist");

    CHECK_THROWS_AS(builtin_robot("no-such-robot"), std::out_of_range);
}

TEST_CASE("map_primitives applies sign, rest angles and limit clamps") {
    auto [robot, mapping] = builtin_robot("arm-5dof");
    mapping.entries[PrimitiveKind::ShoulderAdduction].sign = -1.0;

    std::map<PrimitiveKind, double> zero{{PrimitiveKind::ShoulderAdduction, 0.0}};
    auto cmd = map_primitives(mapping, zero, robot);
    CHECK(cmd.q.isZero(0.0)); // all rest angles are zero on this arm
    CHECK_FALSE(cmd.any_clamped());

    std::map<PrimitiveKind, double> ten{{PrimitiveKind::ShoulderAdduction, deg2rad(10.0)}};
    cmd = map_primitives(mapping, ten, robot);
    CHECK(cmd.q[0] == doctest::Approx(deg2rad(-10.0)));

    std::map<PrimitiveKind, double> beyond{{PrimitiveKind::ElbowFlexion, deg2rad(150.0)}};
    cmd = map_primitives(mapping, beyond, robot);
    CHECK(cmd.q[3] == doctest::Approx(deg2rad(102.5))); // clamped to the limit
    CHECK(cmd.clamped[3]);
    CHECK_FALSE(cmd.clamped[0]);

    std::map<PrimitiveKind, double> unmapped{{PrimitiveKind::ElbowFlexion, 0.1}};
    PrimitiveMapping empty;
    CHECK_THROWS_AS(map_primitives(empty, unmapped, robot), std::invalid_argument);
}

TEST_CASE("clamping is idempotent") {
    auto [robot, mapping] = builtin_robot("arm-5dof");
    std::map<PrimitiveKind, double> angles{{PrimitiveKind::ElbowFlexion, deg2rad(170.0)},
                                           {PrimitiveKind::ShoulderFlexion, deg2rad(30.0)}};
    const auto once = map_primitives(mapping, angles, robot);
    // feed the clamped values back through as if they were commands
    std::map<PrimitiveKind, double> again;
    for (const auto& [kind, target] : mapping.entries) {
        if (angles.count(kind)) {
            again[kind] = target.sign * once.q[static_cast<Eigen::Index>(target.joint)];
        }
    }
    const auto twice = map_primitives(mapping, again, robot);
    CHECK((twice.q - once.q).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("adduction drives only joint 0 of the 5-dof arm") {
    auto [robot, mapping] = builtin_robot("arm-5dof");
    std::map<PrimitiveKind, double> a{{PrimitiveKind::ShoulderAdduction, deg2rad(5.0)},
                                      {PrimitiveKind::ElbowFlexion, deg2rad(15.0)}};
    std::map<PrimitiveKind, double> b = a;
    b[PrimitiveKind::ShoulderAdduction] = deg2rad(25.0);
    const auto qa = map_primitives(mapping, a, robot).q;
    const auto qb = map_primitives(mapping, b, robot).q;
    for (Eigen::Index i = 0; i < qa.size(); ++i) {
        if (i == 0) {
            CHECK(qa[i] != qb[i]);
        } else {
            CHECK(qa[i] == qb[i]);
        }
    }
}

TEST_CASE("forward kinematics composes offsets and axis rotations") {
    const RobotModel planar = planar_two_link();

    Eigen::VectorXd q(2);
    q << 0.0, 0.0;
    CHECK((forward_kinematics(planar, q) - Eigen::Vector3d(2, 0, 0)).norm() < 1e-12);

    q << 0.0, deg2rad(90.0);
    CHECK((forward_kinematics(planar, q) - Eigen::Vector3d(1, 1, 0)).norm() < 1e-12);

    q << deg2rad(90.0), 0.0;
    CHECK((forward_kinematics(planar, q) - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);

    Eigen::VectorXd wrong(3);
    CHECK_THROWS_AS(forward_kinematics(planar, wrong), std::invalid_argument);
}

TEST_CASE("all-zero joints reach the summed offsets") {
    auto [robot, mapping] = builtin_robot("arm-5dof");
    (void)mapping;
    Eigen::Vector3d expect = robot.ee_offset;
    for (const auto& j : robot.joints) expect += j.offset;
    const Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
    CHECK((forward_kinematics(robot, q) - expect).norm() < 1e-12);
}

TEST_CASE("twisting the last joint leaves an axial tool point fixed") {
    auto [robot, mapping] = builtin_robot("arm-5dof");
    (void)mapping;
    Eigen::VectorXd q(5);
    q << 0.3, -0.2, 0.5, 0.4, 0.0;
    const Eigen::Vector3d base = forward_kinematics(robot, q);
    for (double tw : {-1.5, -0.4, 0.7, 2.0}) {
        q[4] = tw;
        CHECK((forward_kinematics(robot, q) - base).norm() < 1e-12);
    }
}

TEST_CASE("FK is Lipschitz in the joint angles") {
    auto [robot, mapping] = builtin_robot("humanoid-arm");
    (void)mapping;
    const double bound = robot.reach();
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    std::uniform_real_distribution<double> eps(-1e-4, 1e-4);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd q(4), dq(4);
        for (int i = 0; i < 4; ++i) {
            q[i] = angle(rng);
            dq[i] = eps(rng);
        }
        const double moved = (forward_kinematics(robot, q + dq) - forward_kinematics(robot, q)).norm();
        CHECK(moved <= bound * dq.cwiseAbs().sum() + 1e-12);
    }
}

TEST_CASE("robot JSON round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "jmm_kin_test";
    fs::create_directories(dir);
    const std::string path = (dir / "robot.json").string();
    {
        std::ofstream out(path);
        out << R"({
            "name": "test-arm",
            "joints": [
                {"name": "base", "axis": [0, 0, 2], "offset": [0, 0, 0.1],
                 "limits_deg": [-180, 180], "rest_deg": 10},
                {"name": "bend", "axis": [0, 1, 0], "offset": [0, 0, 0.2],
                 "limits_deg": [-90, 90]}
            ],
            "ee_offset": [0, 0, 0.05],
            "mapping": {
                "shoulder_flexion": {"joint": 1, "sign": 1, "rc": 0.8},
                "shoulder_adduction": {"joint": 0, "sign": -1}
            }
        })";
    }
    auto [robot, mapping] = load_robot_json(path);
    CHECK(robot.name == "test-arm");
    CHECK(robot.joints[0].axis.norm() == doctest::Approx(1.0)); // normalized on load
    CHECK(robot.joints[0].rest_angle == doctest::Approx(deg2rad(10.0)));
    CHECK(robot.joints[1].rest_angle == 0.0);
    CHECK(mapping.entries.at(PrimitiveKind::ShoulderFlexion).rc == doctest::Approx(0.8));
    CHECK(mapping.entries.at(PrimitiveKind::ShoulderAdduction).sign == -1.0);

    CHECK_THROWS_AS(load_robot_json((dir / "missing.json").string()), std::invalid_argument);

    const std::string bad = (dir / "bad.json").string();
    std::ofstream(bad) << R"({"name": "x", "joints": [], "ee_offset": [0,0,0]})";
    CHECK_THROWS_AS(load_robot_json(bad), std::invalid_argument);
}

TEST_CASE("model validation catches malformed robots") {
    RobotModel r = planar_two_link();
    r.joints[1].name = "j1"; // duplicate
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);

    r = planar_two_link();
    r.joints[0].axis = {0, 0, 2};
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);

    r = planar_two_link();
    r.joints[0].limit_lo = r.joints[0].limit_hi;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);

    PrimitiveMapping m;
    m.entries[PrimitiveKind::ShoulderFlexion] = {7, 1.0, 1.0};
    CHECK_THROWS_AS(m.validate(planar_two_link()), std::invalid_argument);

    m.entries[PrimitiveKind::ShoulderFlexion] = {0, 1.0, 1.0};
    m.entries[PrimitiveKind::ElbowFlexion] = {0, 1.0, 1.0}; // joint used twice
    CHECK_THROWS_AS(m.validate(planar_two_link()), std::invalid_argument);
}
