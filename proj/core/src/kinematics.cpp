#include "jmm/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <Eigen/Geometry>
#include <json.hpp>

#include "jmm/units.hpp"

namespace jmm {

double RobotModel::reach() const {
    double r = ee_offset.norm();
    for (const auto& j : joints) r += j.offset.norm();
    return r;
}

void RobotModel::validate() const {
    if (joints.empty()) throw std::invalid_argument("robot '" + name + "' has no joints");
    std::set<std::string> names;
    for (const auto& j : joints) {
        if (!names.insert(j.name).second) {
            throw std::invalid_argument("duplicate joint name '" + j.name + "'");
        }
        if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
            throw std::invalid_argument("joint '" + j.name + "' axis is not a unit vector");
        }
        if (!(j.limit_lo < j.limit_hi)) {
            throw std::invalid_argument("joint '" + j.name + "' limits must satisfy lo < hi");
        }
    }
}

void PrimitiveMapping::validate(const RobotModel& robot) const {
    std::set<std::size_t> used;
    for (const auto& [kind, target] : entries) {
        if (target.joint >= robot.joints.size()) {
            throw std::invalid_argument("mapping for " + to_string(kind) +
                                        " names joint index out of range");
        }
        if (!used.insert(target.joint).second) {
            throw std::invalid_argument("joint index " + std::to_string(target.joint) +
                                        " mapped to more than one primitive");
        }
        if (target.sign != 1.0 && target.sign != -1.0) {
            throw std::invalid_argument("mapping sign must be +1 or -1");
        }
        if (!(target.rc > 0.0) || !std::isfinite(target.rc)) {
            throw std::invalid_argument("mapping rc must be positive");
        }
    }
}

bool JointCommand::any_clamped() const {
    for (bool c : clamped) {
        if (c) return true;
    }
    return false;
}

namespace {

RobotModel make_humanoid_arm() {
    RobotModel r;
    r.name = "humanoid-arm";
    // Frame: x forward, y left, z up; arm hangs along -z at rest.
    // The elbow coordinate equals the interior elbow angle (180 deg =
    // straight), hence the upward wrist offset that the 180-degree rest
    // rotation folds back down.
    r.joints = {
        {"shoulder_pitch", {0, -1, 0}, {0, 0, 0}, deg2rad(-170), deg2rad(170), 0.0},
        {"shoulder_roll", {1, 0, 0}, {0, 0, 0}, deg2rad(-90), deg2rad(120), 0.0},
        {"elbow_flexion", {0, 1, 0}, {0, 0, -0.18}, deg2rad(0), deg2rad(180), deg2rad(180)},
        {"wrist_twist", {0, 0, 1}, {0, 0, 0.15}, deg2rad(-180), deg2rad(180), 0.0},
    };
    r.ee_offset = {0, 0, 0.08};
    return r;
}

RobotModel make_arm_5dof() {
    RobotModel r;
    r.name = "arm-5dof";
    // Candle pose at rest; joints 1 and 5 are twists, 2-4 rotate about y.
    r.joints = {
        {"joint_1", {0, 0, 1}, {0, 0, 0.147}, deg2rad(-169), deg2rad(169), 0.0},
        {"joint_2", {0, 1, 0}, {0.033, 0, 0}, deg2rad(-90), deg2rad(75), 0.0},
        {"joint_3", {0, 1, 0}, {0, 0, 0.155}, deg2rad(-146), deg2rad(146), 0.0},
        {"joint_4", {0, 1, 0}, {0, 0, 0.135}, deg2rad(-102.5), deg2rad(102.5), 0.0},
        {"joint_5", {0, 0, 1}, {0, 0, 0.113}, deg2rad(-167.5), deg2rad(167.5), 0.0},
    };
    r.ee_offset = {0, 0, 0.105};
    return r;
}

} // namespace

std::pair<RobotModel, PrimitiveMapping> builtin_robot(const std::string& name) {
    if (name == "humanoid-arm") {
        PrimitiveMapping m;
        m.entries = {
            {PrimitiveKind::ShoulderFlexion, {0, +1.0, 1.0}},
            {PrimitiveKind::ShoulderAdduction, {1, +1.0, 1.0}},
            {PrimitiveKind::ElbowFlexion, {2, +1.0, 1.0}},
            {PrimitiveKind::ForearmRotation, {3, +1.0, 1.0}},
        };
        return {make_humanoid_arm(), m};
    }
    if (name == "arm-5dof") {
        PrimitiveMapping m;
        m.entries = {
            {PrimitiveKind::ShoulderAdduction, {0, +1.0, 1.0}},
            {PrimitiveKind::ShoulderFlexion, {2, +1.0, 1.0}},
            {PrimitiveKind::ElbowFlexion, {3, +1.0, 1.0}},
            {PrimitiveKind::ForearmRotation, {4, +1.0, 1.0}},
        };
        return {make_arm_5dof(), m};
    }
    throw std::out_of_range("unknown builtin robot '" + name +
                            "' (expected humanoid-arm or arm-5dof)");
}

JointCommand map_primitives(const PrimitiveMapping& mapping,
                            const std::map<PrimitiveKind, double>& angles,
                            const RobotModel& robot) {
    robot.validate();
    mapping.validate(robot);

    JointCommand cmd;
    cmd.q.resize(static_cast<Eigen::Index>(robot.joints.size()));
    cmd.clamped.assign(robot.joints.size(), false);
    for (std::size_t i = 0; i < robot.joints.size(); ++i) {
        cmd.q[static_cast<Eigen::Index>(i)] = robot.joints[i].rest_angle;
    }
    for (const auto& [kind, angle] : angles) {
        auto it = mapping.entries.find(kind);
        if (it == mapping.entries.end()) {
            throw std::invalid_argument("primitive " + to_string(kind) +
                                        " has no mapping entry for robot '" + robot.name + "'");
        }
        cmd.q[static_cast<Eigen::Index>(it->second.joint)] = it->second.sign * angle;
    }
    for (std::size_t i = 0; i < robot.joints.size(); ++i) {
        const auto& j = robot.joints[i];
        double& qi = cmd.q[static_cast<Eigen::Index>(i)];
        if (qi < j.limit_lo) {
            qi = j.limit_lo;
            cmd.clamped[i] = true;
        } else if (qi > j.limit_hi) {
            qi = j.limit_hi;
            cmd.clamped[i] = true;
        }
    }
    return cmd;
}

Eigen::Vector3d forward_kinematics(const RobotModel& robot, const Eigen::VectorXd& q) {
    if (static_cast<std::size_t>(q.size()) != robot.joints.size()) {
        throw std::invalid_argument("joint vector has " + std::to_string(q.size()) +
                                    " entries, robot has " +
                                    std::to_string(robot.joints.size()) + " joints");
    }
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    for (std::size_t i = 0; i < robot.joints.size(); ++i) {
        const auto& j = robot.joints[i];
        pos += rot * j.offset;
        rot *= Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis).toRotationMatrix();
    }
    return pos + rot * robot.ee_offset;
}

namespace {

Eigen::Vector3d parse_vec3(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) {
        throw std::invalid_argument(what + " must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

std::pair<RobotModel, PrimitiveMapping> load_robot_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open robot file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("robot file " + path + ": " + e.what());
    }

    RobotModel robot;
    PrimitiveMapping mapping;
    try {
        robot.name = doc.at("name").get<std::string>();
        for (const auto& jj : doc.at("joints")) {
            JointSpec js;
            js.name = jj.at("name").get<std::string>();
            js.axis = parse_vec3(jj.at("axis"), "joint axis");
            const double n = js.axis.norm();
            if (n < 1e-9) throw std::invalid_argument("joint '" + js.name + "' axis is zero");
            js.axis /= n;
            js.offset = parse_vec3(jj.at("offset"), "joint offset");
            const auto& lim = jj.at("limits_deg");
            if (!lim.is_array() || lim.size() != 2) {
                throw std::invalid_argument("limits_deg must be [lo, hi]");
            }
            js.limit_lo = deg2rad(lim[0].get<double>());
            js.limit_hi = deg2rad(lim[1].get<double>());
            js.rest_angle = deg2rad(jj.value("rest_deg", 0.0));
            robot.joints.push_back(std::move(js));
        }
        robot.ee_offset = parse_vec3(doc.at("ee_offset"), "ee_offset");
        if (doc.contains("mapping")) {
            for (const auto& [key, val] : doc.at("mapping").items()) {
                PrimitiveTarget target;
                const auto joint_index = val.at("joint").get<long long>();
                if (joint_index < 0) throw std::invalid_argument("mapping joint index negative");
                target.joint = static_cast<std::size_t>(joint_index);
                target.sign = val.at("sign").get<double>();
                target.rc = val.value("rc", 1.0);
                mapping.entries[primitive_kind_from_string(key)] = target;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("robot file " + path + ": " + e.what());
    }
    robot.validate();
    mapping.validate(robot);
    return {robot, mapping};
}

} // namespace jmm
