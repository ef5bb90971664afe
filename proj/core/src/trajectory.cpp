#include "jmm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jmm/units.hpp"

namespace jmm {

void HandoverSpec::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("handover duration must be positive");
    }
    if (start.empty()) throw std::invalid_argument("handover spec has no primitives");
    if (start.size() != end.size()) {
        throw std::invalid_argument("start and end angle maps must cover the same primitives");
    }
    for (const auto& [kind, angle] : start) {
        (void)angle;
        if (!end.count(kind)) {
            throw std::invalid_argument("primitive " + to_string(kind) +
                                        " has a start angle but no end angle");
        }
    }
    for (const auto& [kind, w] : windows) {
        if (!(w.t_start >= 0.0) || !(w.t_end <= duration) || !(w.t_start < w.t_end)) {
            throw std::invalid_argument("window for " + to_string(kind) +
                                        " must satisfy 0 <= t_start < t_end <= duration");
        }
    }
}

std::size_t Trajectory::joint_count() const {
    return joint_names.size();
}

namespace {

std::size_t frame_count(double duration, double rate) {
    if (!(rate >= 10.0)) throw std::invalid_argument("sampling rate must be at least 10 Hz");
    return static_cast<std::size_t>(std::llround(duration * rate)) + 1;
}

double profile_angle(const HandoverSpec& spec, const PrimitiveMapping& mapping,
                     PrimitiveKind kind, double t) {
    TimeWindow w{0.0, spec.duration};
    if (auto it = spec.windows.find(kind); it != spec.windows.end()) w = it->second;
    const double tl = std::clamp(t, w.t_start, w.t_end) - w.t_start;

    ProfileParams p;
    p.start_angle = spec.start.at(kind);
    p.end_angle = spec.end.at(kind);
    p.duration = w.t_end - w.t_start;
    p.robot_constant = mapping.entries.at(kind).rc;
    p.mode = spec.mode;

    switch (kind) {
        case PrimitiveKind::ShoulderFlexion:
            return adduction_angle(p, spec.profiles.shoulder, tl);
        case PrimitiveKind::ShoulderAdduction:
            return adduction_angle(p, spec.profiles.adduction, tl);
        case PrimitiveKind::ElbowFlexion:
            return elbow_angle_with(p, spec.elbow_variant == ElbowVariant::V1
                                           ? spec.profiles.elbow_v1
                                           : spec.profiles.elbow_v2,
                                    tl);
        case PrimitiveKind::ForearmRotation:
            return forearm_angle(p, spec.profiles.forearm, spec.forearm_direction, tl);
    }
    throw std::invalid_argument("unknown primitive kind");
}

Trajectory sample_trajectory(const HandoverSpec& spec, const RobotModel& robot,
                             const PrimitiveMapping& mapping, double rate, bool linear) {
    spec.validate();
    robot.validate();
    mapping.validate(robot);
    for (const auto& [kind, angle] : spec.start) {
        (void)angle;
        if (!mapping.entries.count(kind)) {
            throw std::invalid_argument("primitive " + to_string(kind) +
                                        " is not mapped on robot '" + robot.name + "'");
        }
    }

    const std::size_t n = frame_count(spec.duration, rate);

    Trajectory traj;
    traj.rate = static_cast<double>(n - 1) / spec.duration;
    for (const auto& j : robot.joints) traj.joint_names.push_back(j.name);
    traj.frames.reserve(n);

    const JointCommand start_cmd = map_primitives(mapping, spec.start, robot);
    const JointCommand end_cmd = map_primitives(mapping, spec.end, robot);
    traj.target_end = end_cmd.q;

    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        const double t = spec.duration * s;
        TrajectoryFrame frame;
        frame.t = t;
        if (linear) {
            frame.q = start_cmd.q + s * (end_cmd.q - start_cmd.q);
        } else {
            std::map<PrimitiveKind, double> angles;
            for (const auto& [kind, angle] : spec.start) {
                (void)angle;
                angles[kind] = profile_angle(spec, mapping, kind, t);
            }
            frame.q = map_primitives(mapping, angles, robot).q;
        }
        frame.ee = forward_kinematics(robot, frame.q);
        traj.frames.push_back(std::move(frame));
    }
    return traj;
}

void check_uniform(const Trajectory& traj) {
    if (traj.frames.size() < 2) throw std::invalid_argument("trajectory needs >= 2 frames");
    const double dt = 1.0 / traj.rate;
    for (std::size_t i = 0; i + 1 < traj.frames.size(); ++i) {
        const double step = traj.frames[i + 1].t - traj.frames[i].t;
        // tolerance covers the 6-decimal rounding of timestamps in CSV files
        if (std::abs(step - dt) > 5e-6 * std::max(1.0, dt)) {
            throw std::invalid_argument("trajectory frames are not uniformly spaced");
        }
    }
}

Eigen::VectorXd sample_joints(const Trajectory& traj, double t) {
    const auto& fr = traj.frames;
    if (t <= fr.front().t) return fr.front().q;
    if (t >= fr.back().t) return fr.back().q;
    const double dt = 1.0 / traj.rate;
    auto idx = static_cast<std::size_t>((t - fr.front().t) / dt);
    idx = std::min(idx, fr.size() - 2);
    const double a = (t - fr[idx].t) / (fr[idx + 1].t - fr[idx].t);
    return fr[idx].q + a * (fr[idx + 1].q - fr[idx].q);
}

} // namespace

Trajectory generate_jmm(const HandoverSpec& spec, const RobotModel& robot,
                        const PrimitiveMapping& mapping, double rate) {
    return sample_trajectory(spec, robot, mapping, rate, /*linear=*/false);
}

Trajectory generate_ljst(const HandoverSpec& spec, const RobotModel& robot,
                         const PrimitiveMapping& mapping, double rate) {
    return sample_trajectory(spec, robot, mapping, rate, /*linear=*/true);
}

MetricsReport metrics(const Trajectory& traj) {
    if (traj.frames.size() < 5) {
        throw std::invalid_argument("metrics need at least 5 frames, got " +
                                    std::to_string(traj.frames.size()));
    }
    check_uniform(traj);

    const auto& fr = traj.frames;
    const std::size_t n = fr.size();
    const auto joints = fr.front().q.size();
    const double h = 1.0 / traj.rate;

    MetricsReport rep;
    rep.mean_squared_jerk = Eigen::VectorXd::Zero(joints);
    rep.max_angular_velocity = Eigen::VectorXd::Zero(joints);
    rep.endpoint_error = Eigen::VectorXd::Zero(joints);

    // q''' ~ (q[i+2] - 2 q[i+1] + 2 q[i-1] - q[i-2]) / (2 h^3), exact for cubics
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const Eigen::VectorXd jerk =
            (fr[i + 2].q - 2.0 * fr[i + 1].q + 2.0 * fr[i - 1].q - fr[i - 2].q) /
            (2.0 * h * h * h);
        rep.mean_squared_jerk += jerk.cwiseProduct(jerk);
    }
    rep.mean_squared_jerk /= static_cast<double>(n - 4);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Eigen::VectorXd vel = (fr[i + 1].q - fr[i].q) / h;
        rep.max_angular_velocity = rep.max_angular_velocity.cwiseMax(vel.cwiseAbs());
        rep.ee_path_length += (fr[i + 1].ee - fr[i].ee).norm();
    }

    if (traj.target_end && traj.target_end->size() == joints) {
        rep.endpoint_error = (fr.back().q - *traj.target_end).cwiseAbs();
    }
    return rep;
}

TrajectoryComparison compare(const Trajectory& a, const Trajectory& b) {
    if (a.joint_count() != b.joint_count()) {
        throw std::invalid_argument("cannot compare trajectories with " +
                                    std::to_string(a.joint_count()) + " vs " +
                                    std::to_string(b.joint_count()) + " joints");
    }
    check_uniform(a);
    check_uniform(b);

    TrajectoryComparison cmp;
    cmp.metrics_a = metrics(a);
    cmp.metrics_b = metrics(b);

    const double t_end = std::min(a.frames.back().t, b.frames.back().t);
    const double rate = std::max(a.rate, b.rate);
    const std::size_t n = static_cast<std::size_t>(std::llround(t_end * rate)) + 1;

    const auto joints = a.frames.front().q.size();
    cmp.max_abs_diff = Eigen::VectorXd::Zero(joints);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
        const Eigen::VectorXd diff = (sample_joints(a, t) - sample_joints(b, t)).cwiseAbs();
        cmp.max_abs_diff = cmp.max_abs_diff.cwiseMax(diff);
        if (i + 1 == n) cmp.endpoint_abs_diff = diff;
    }
    return cmp;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << "t";
    for (const auto& name : traj.joint_names) out << ',' << name;
    out << ",ee_x,ee_y,ee_z\n";
    char buf[32];
    for (const auto& fr : traj.frames) {
        std::snprintf(buf, sizeof buf, "%.6f", fr.t);
        out << buf;
        for (Eigen::Index j = 0; j < fr.q.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.6f", rad2deg(fr.q[j]));
            out << ',' << buf;
        }
        for (int k = 0; k < 3; ++k) {
            std::snprintf(buf, sizeof buf, "%.6f", fr.ee[k]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trajectory file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");

    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) cols.push_back(field);
    }
    if (cols.size() < 5 || cols.front() != "t" || cols[cols.size() - 3] != "ee_x" ||
        cols[cols.size() - 2] != "ee_y" || cols.back() != "ee_z") {
        throw std::invalid_argument(path + ": expected header t,<joints...>,ee_x,ee_y,ee_z");
    }
    const std::size_t joints = cols.size() - 4;

    Trajectory traj;
    traj.joint_names.assign(cols.begin() + 1, cols.end() - 3);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ss, field, ',')) {
            try {
                vals.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": bad number '" + field + "'");
            }
        }
        if (vals.size() != cols.size()) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": wrong field count");
        }
        TrajectoryFrame fr;
        fr.t = vals[0];
        fr.q.resize(static_cast<Eigen::Index>(joints));
        for (std::size_t j = 0; j < joints; ++j) {
            fr.q[static_cast<Eigen::Index>(j)] = deg2rad(vals[1 + j]);
        }
        fr.ee = {vals[joints + 1], vals[joints + 2], vals[joints + 3]};
        traj.frames.push_back(std::move(fr));
    }
    if (traj.frames.size() < 2) throw std::invalid_argument(path + ": needs >= 2 frames");
    traj.rate = static_cast<double>(traj.frames.size() - 1) /
                (traj.frames.back().t - traj.frames.front().t);
    check_uniform(traj);
    return traj;
}

} // namespace jmm
