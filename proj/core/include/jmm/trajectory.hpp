#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jmm/kinematics.hpp"
#include "jmm/profiles.hpp"

namespace jmm {

/// Optional activity window for one primitive; outside it the joint holds
/// the nearest boundary value. Defaults to the full handover duration.
struct TimeWindow {
    double t_start = 0.0;
    double t_end = 0.0;
};

/// Everything needed to generate one handover motion: per-primitive start
/// and end angles (radians), total duration, and the profile variants.
struct HandoverSpec {
    std::map<PrimitiveKind, double> start; // radians
    std::map<PrimitiveKind, double> end;   // radians
    double duration = 1.2;                 // seconds
    ElbowVariant elbow_variant = ElbowVariant::V1;
    ForearmDirection forearm_direction = ForearmDirection::Pronation;
    EvalMode mode = EvalMode::Anchored;
    ProfileSet profiles;
    std::map<PrimitiveKind, TimeWindow> windows; // default: full span

    void validate() const;
};

struct TrajectoryFrame {
    double t = 0.0;
    Eigen::VectorXd q;   // radians
    Eigen::Vector3d ee;  // meters
};

struct Trajectory {
    double rate = 0.0; // Hz, effective (frames are spaced exactly 1/rate)
    std::vector<std::string> joint_names;
    std::vector<TrajectoryFrame> frames;
    /// Commanded final joint angles, when known; used for endpoint error.
    std::optional<Eigen::VectorXd> target_end;

    std::size_t joint_count() const;
};

struct MetricsReport {
    Eigen::VectorXd mean_squared_jerk;    // rad^2/s^6, per joint
    double ee_path_length = 0.0;          // meters
    Eigen::VectorXd max_angular_velocity; // rad/s, per joint
    Eigen::VectorXd endpoint_error;       // radians, per joint
};

struct TrajectoryComparison {
    MetricsReport metrics_a;
    MetricsReport metrics_b;
    Eigen::VectorXd max_abs_diff;      // radians, per joint, over common grid
    Eigen::VectorXd endpoint_abs_diff; // radians, per joint
};

/// Sample the joint motion model: every primitive's profile is evaluated in
/// parallel over the full duration (or its window), mapped onto the robot's
/// joints, and run through forward kinematics. Frame count is
/// round(duration * rate) + 1 with both endpoints included.
Trajectory generate_jmm(const HandoverSpec& spec, const RobotModel& robot,
                        const PrimitiveMapping& mapping, double rate);

/// Baseline: each mapped joint interpolates linearly from its start to its
/// end angle over the full duration.
Trajectory generate_ljst(const HandoverSpec& spec, const RobotModel& robot,
                         const PrimitiveMapping& mapping, double rate);

/// Finite-difference smoothness and endpoint metrics. Jerk uses third-order
/// central differences, so at least 5 frames are required.
MetricsReport metrics(const Trajectory& traj);

/// Side-by-side metrics plus the per-joint maximum absolute angle difference
/// over a common time grid (linear resampling at the finer rate).
TrajectoryComparison compare(const Trajectory& a, const Trajectory& b);

/// CSV with header `t,<joint names...>,ee_x,ee_y,ee_z`; angles in degrees,
/// positions in meters, six decimal places.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

} // namespace jmm
