#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "jmm/profiles.hpp"

namespace jmm {

/// One revolute joint of a serial chain. The joint frame is reached by
/// translating `offset` from the parent frame, then rotating by the joint
/// angle about `axis` (unit vector, parent frame).
struct JointSpec {
    std::string name;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d offset = Eigen::Vector3d::Zero(); // meters
    double limit_lo = 0.0; // radians
    double limit_hi = 0.0;
    double rest_angle = 0.0; // used when no primitive drives this joint
};

struct RobotModel {
    std::string name;
    std::vector<JointSpec> joints;
    Eigen::Vector3d ee_offset = Eigen::Vector3d::Zero(); // tool point from last joint

    /// Sum of link offsets plus tool offset; a Lipschitz bound for FK.
    double reach() const;
    void validate() const;
};

/// Assignment of one motion primitive to a robot joint. The commanded joint
/// angle is sign * primitive angle; rc damps the profile amplitude to suit
/// the robot's kinematics.
struct PrimitiveTarget {
    std::size_t joint = 0;
    double sign = 1.0; // +1 or -1
    double rc = 1.0;
};

struct PrimitiveMapping {
    std::map<PrimitiveKind, PrimitiveTarget> entries;

    void validate(const RobotModel& robot) const;
};

/// Joint-space command with per-joint limit-clamp flags.
struct JointCommand {
    Eigen::VectorXd q;
    std::vector<bool> clamped;

    bool any_clamped() const;
};

/// Built-in robots: "humanoid-arm" (4 joints: shoulder pitch/roll, elbow,
/// wrist twist) and "arm-5dof" (twist-rotate-rotate-rotate-twist chain with
/// the adduction on joint 1 and the forearm rotation on joint 5).
/// Link lengths, rest angles and limits are engineering defaults.
/// Throws std::out_of_range for unknown names.
std::pair<RobotModel, PrimitiveMapping> builtin_robot(const std::string& name);

/// Map primitive angles (radians) onto the robot's joints. Unmapped joints
/// hold their rest angle; every entry is clamped to the joint limits and
/// flagged when clamping occurred. Throws std::invalid_argument when an
/// angle's primitive has no mapping entry.
JointCommand map_primitives(const PrimitiveMapping& mapping,
                            const std::map<PrimitiveKind, double>& angles,
                            const RobotModel& robot);

/// End-effector position for the given joint angles: composes, per joint,
/// translation by its offset followed by rotation about its axis, then
/// translates by the tool offset. Throws std::invalid_argument on a joint
/// count mismatch.
Eigen::Vector3d forward_kinematics(const RobotModel& robot, const Eigen::VectorXd& q);

/// Load a robot definition plus primitive mapping from JSON:
///   {"name": ..., "joints": [{"name", "axis", "offset",
///    "limits_deg": [lo, hi], "rest_deg": r}, ...],
///    "ee_offset": [x, y, z],
///    "mapping": {"shoulder_flexion": {"joint": i, "sign": s, "rc": f}, ...}}
/// Angles are degrees in the file, radians in memory. Axes are normalized.
std::pair<RobotModel, PrimitiveMapping> load_robot_json(const std::string& path);

} // namespace jmm
