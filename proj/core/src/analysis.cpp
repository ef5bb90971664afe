#include "jmm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "jmm/units.hpp"

namespace jmm {

void AngleSeries::validate() const {
    if (t.size() != theta.size()) {
        throw std::invalid_argument("angle series: t and theta lengths differ");
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (!(t[i] < t[i + 1])) {
            throw std::invalid_argument("angle series: timestamps not strictly increasing");
        }
    }
}

namespace {

struct Vec2 {
    double x, y;
};

Vec2 centroid_xy(const Skeleton& s) {
    double sx = 0.0, sy = 0.0;
    if (s.points.empty()) throw std::invalid_argument("skeleton has no points");
    for (const auto& [name, p] : s.points) {
        (void)name;
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(s.points.size());
    return {sx / n, sy / n};
}

Eigen::Vector3d as_vec3(const Keypoint& p) {
    return {p.x, p.y, p.z.value_or(0.0)};
}

double interior_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& v, const char* what) {
    const double nu = u.norm(), nv = v.norm();
    if (nu < 1e-9 || nv < 1e-9) {
        throw std::invalid_argument(std::string(what) + ": degenerate (near-zero) limb vector");
    }
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

const Keypoint& required_point(const Skeleton& s, const std::string& name) {
    auto it = s.points.find(name);
    if (it == s.points.end()) {
        throw std::invalid_argument("skeleton is missing required point '" + name + "'");
    }
    return it->second;
}

} // namespace

std::vector<KeypointFrame> track_person(const std::vector<KeypointFrame>& frames,
                                        const TrackSeed& seed, const TrackOptions& opts) {
    if (frames.empty()) throw std::invalid_argument("track_person: no frames");
    for (const auto& f : frames) {
        if (f.skeletons.empty()) {
            throw std::invalid_argument("track_person: frame at t=" + std::to_string(f.t) +
                                        " has no skeletons");
        }
    }

    auto pick_seed = [&](const KeypointFrame& f) -> std::size_t {
        std::size_t best = 0;
        double best_key = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.skeletons.size(); ++i) {
            const Vec2 c = centroid_xy(f.skeletons[i]);
            double key = 0.0;
            switch (seed.kind) {
                case TrackSeed::Kind::Leftmost: key = c.x; break;
                case TrackSeed::Kind::Rightmost: key = -c.x; break;
                case TrackSeed::Kind::Region:
                    key = std::hypot(c.x - seed.x, c.y - seed.y);
                    break;
            }
            if (key < best_key) {
                best_key = key;
                best = i;
            }
        }
        return best;
    };

    std::vector<KeypointFrame> out;
    out.reserve(frames.size());

    Skeleton current = frames.front().skeletons[pick_seed(frames.front())];
    Vec2 last_centroid = centroid_xy(current);
    out.push_back({frames.front().t, {current}});

    int gap = 0;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        const auto& f = frames[i];
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < f.skeletons.size(); ++s) {
            const Vec2 c = centroid_xy(f.skeletons[s]);
            const double d = std::hypot(c.x - last_centroid.x, c.y - last_centroid.y);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        if (best_d <= opts.max_jump) {
            current = f.skeletons[best];
            last_centroid = centroid_xy(current);
            gap = 0;
        } else {
            // nobody near the held centroid; bridge short gaps
            if (++gap > opts.max_gap) {
                throw LostTrackError("lost track at t=" + std::to_string(f.t) +
                                     " (no skeleton within radius " +
                                     std::to_string(opts.max_jump) + " for more than " +
                                     std::to_string(opts.max_gap) + " frames)");
            }
        }
        out.push_back({f.t, {current}});
    }
    return out;
}

double elbow_angle_from_points(const Keypoint& shoulder, const Keypoint& elbow,
                               const Keypoint& wrist) {
    return interior_angle(as_vec3(shoulder) - as_vec3(elbow), as_vec3(wrist) - as_vec3(elbow),
                          "elbow angle");
}

double shoulder_flexion_from_points(const Keypoint& hip, const Keypoint& shoulder,
                                    const Keypoint& elbow) {
    Eigen::Vector3d torso = as_vec3(hip) - as_vec3(shoulder);
    Eigen::Vector3d arm = as_vec3(elbow) - as_vec3(shoulder);
    torso.z() = 0.0; // sagittal projection
    arm.z() = 0.0;
    return interior_angle(torso, arm, "shoulder flexion");
}

double adduction_from_points(const Keypoint& hip, const Keypoint& shoulder,
                             const Keypoint& elbow) {
    if (!shoulder.z || !elbow.z) {
        throw MissingDepthError("adduction needs 3D keypoints (depth missing)");
    }
    (void)hip;
    const Eigen::Vector3d arm = as_vec3(elbow) - as_vec3(shoulder);
    const double fwd = arm.x();
    const double lat = *elbow.z - *shoulder.z;
    if (std::hypot(fwd, lat) < 1e-9) {
        throw std::invalid_argument("adduction: arm has no transverse-plane component");
    }
    return std::atan2(lat, fwd);
}

AngleSeries extract_angle_series(const std::vector<KeypointFrame>& tracked,
                                 PrimitiveKind primitive) {
    AngleSeries series;
    series.primitive = primitive;
    series.t.reserve(tracked.size());
    series.theta.reserve(tracked.size());
    for (const auto& f : tracked) {
        if (f.skeletons.size() != 1) {
            throw std::invalid_argument("angle extraction expects tracked single-skeleton frames");
        }
        const Skeleton& s = f.skeletons.front();
        double theta = 0.0;
        switch (primitive) {
            case PrimitiveKind::ElbowFlexion:
                theta = elbow_angle_from_points(required_point(s, "r_shoulder"),
                                                required_point(s, "r_elbow"),
                                                required_point(s, "r_wrist"));
                break;
            case PrimitiveKind::ShoulderFlexion:
                theta = shoulder_flexion_from_points(required_point(s, "r_hip"),
                                                     required_point(s, "r_shoulder"),
                                                     required_point(s, "r_elbow"));
                break;
            case PrimitiveKind::ShoulderAdduction:
                theta = adduction_from_points(required_point(s, "r_hip"),
                                              required_point(s, "r_shoulder"),
                                              required_point(s, "r_elbow"));
                break;
            case PrimitiveKind::ForearmRotation:
                throw std::invalid_argument(
                    "forearm rotation cannot be extracted from arm keypoints");
        }
        series.t.push_back(f.t);
        series.theta.push_back(theta);
    }
    series.validate();
    return series;
}

namespace {

// Least-squares fit of an order-p polynomial over window samples, evaluated
// at offset `pos` from the window center (in sample units).
Eigen::VectorXd sg_weights(int window, int order, double pos) {
    const int m = window / 2;
    Eigen::MatrixXd A(window, order + 1);
    for (int i = 0; i < window; ++i) {
        double v = 1.0;
        for (int k = 0; k <= order; ++k) {
            A(i, k) = v;
            v *= static_cast<double>(i - m);
        }
    }
    Eigen::VectorXd e(order + 1);
    double v = 1.0;
    for (int k = 0; k <= order; ++k) {
        e[k] = v;
        v *= pos;
    }
    // weights = e^T (A^T A)^-1 A^T
    return A * (A.transpose() * A).ldlt().solve(e);
}

} // namespace

AngleSeries smooth_sg(const AngleSeries& series, int window, int order) {
    series.validate();
    if (window < 5 || window % 2 == 0) {
        throw std::invalid_argument("SG window must be odd and >= 5");
    }
    if (order < 1 || order >= window) {
        throw std::invalid_argument("SG order must be in [1, window)");
    }
    const auto n = static_cast<int>(series.size());
    if (n < window) {
        throw std::invalid_argument("SG needs at least `window` samples, got " +
                                    std::to_string(n));
    }

    const int m = window / 2;
    AngleSeries out = series;
    const Eigen::VectorXd center = sg_weights(window, order, 0.0);

    auto dot = [&](const Eigen::VectorXd& w, int start) {
        double acc = 0.0;
        for (int k = 0; k < window; ++k) acc += w[k] * series.theta[static_cast<std::size_t>(start + k)];
        return acc;
    };

    for (int i = m; i < n - m; ++i) out.theta[static_cast<std::size_t>(i)] = dot(center, i - m);
    for (int i = 0; i < m; ++i) {
        out.theta[static_cast<std::size_t>(i)] = dot(sg_weights(window, order, i - m), 0);
        out.theta[static_cast<std::size_t>(n - m + i)] =
            dot(sg_weights(window, order, i + 1), n - window);
    }
    return out;
}

MotionSegment segment_motion(const AngleSeries& series, const SegmentOptions& opts) {
    series.validate();
    const std::size_t n = series.size();
    if (n < 20) throw std::invalid_argument("segmentation needs at least 20 samples");

    // speed by central differences, one-sided at the ends
    std::vector<double> speed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        speed[i] = std::abs((series.theta[hi] - series.theta[lo]) / (series.t[hi] - series.t[lo]));
    }

    const double peak = *std::max_element(speed.begin(), speed.end());
    if (peak < opts.min_peak_speed) {
        throw NoMotionError("peak speed " + std::to_string(peak) + " rad/s below " +
                            std::to_string(opts.min_peak_speed));
    }

    const double threshold = opts.threshold_frac * peak;
    std::size_t first = 0, last = n - 1;
    while (first < n && speed[first] <= threshold) ++first;
    while (last > 0 && speed[last] <= threshold) --last;
    if (first >= last) throw NoMotionError("no sustained motion above threshold");

    const double tol = opts.tol_frac * peak;
    const double floor = opts.floor_frac * peak;
    while (first > 0 && speed[first] > floor && speed[first - 1] < speed[first] + tol) --first;
    while (last + 1 < n && speed[last] > floor && speed[last + 1] < speed[last] + tol) ++last;

    return {first, last, series.t[first], series.t[last]};
}

AngleSeries slice(const AngleSeries& series, const MotionSegment& seg) {
    series.validate();
    if (seg.last >= series.size() || seg.first >= seg.last) {
        throw std::invalid_argument("invalid segment bounds");
    }
    AngleSeries out;
    out.primitive = series.primitive;
    out.t.assign(series.t.begin() + static_cast<std::ptrdiff_t>(seg.first),
                 series.t.begin() + static_cast<std::ptrdiff_t>(seg.last + 1));
    out.theta.assign(series.theta.begin() + static_cast<std::ptrdiff_t>(seg.first),
                     series.theta.begin() + static_cast<std::ptrdiff_t>(seg.last + 1));
    return out;
}

NormalizedSeries normalize(const AngleSeries& series, NormConvention convention) {
    series.validate();
    if (series.size() < 2) throw std::invalid_argument("normalize needs at least 2 samples");

    constexpr std::size_t kGrid = 101;
    NormalizedSeries out;
    out.u.resize(kGrid);
    out.v.resize(kGrid);

    // linear time resampling onto the uniform grid
    const double t0 = series.t.front(), t1 = series.t.back();
    std::size_t seg = 0;
    for (std::size_t i = 0; i < kGrid; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(kGrid - 1);
        const double t = t0 + (t1 - t0) * u;
        while (seg + 2 < series.size() && series.t[seg + 1] < t) ++seg;
        const double a = (t - series.t[seg]) / (series.t[seg + 1] - series.t[seg]);
        out.u[i] = u;
        out.v[i] = series.theta[seg] + a * (series.theta[seg + 1] - series.theta[seg]);
    }

    // ShoulderStart0: v' = (v - v_start) / (v_end - v_start)
    // ElbowMin0:      v' = (v - v_min) / (v_start - v_min), so v'[0]=1, min=0
    double ref0 = 0.0, ref1 = 0.0;
    if (convention == NormConvention::ShoulderStart0) {
        ref0 = out.v.front();
        ref1 = out.v.back();
    } else {
        ref0 = *std::min_element(out.v.begin(), out.v.end());
        ref1 = out.v.front();
    }
    const double amplitude = ref1 - ref0;
    const double scale_ref = std::max(std::abs(ref0), std::abs(ref1));
    if (std::abs(amplitude) < 1e-9 * std::max(1.0, scale_ref)) {
        throw ZeroAmplitudeError("series amplitude is zero; cannot standardize");
    }
    for (double& v : out.v) v = (v - ref0) / amplitude;
    return out;
}

VariantLabel classify_variant(const NormalizedSeries& n, const VariantThresholds& th) {
    if (n.size() < 3 || n.u.size() != n.v.size()) {
        throw std::invalid_argument("classify_variant: malformed normalized series");
    }
    const double vmin = *std::min_element(n.v.begin(), n.v.end());
    if (std::abs(n.v.front() - 1.0) > 1e-6 || std::abs(vmin) > 1e-6) {
        throw std::invalid_argument(
            "classify_variant expects an elbow-convention series (v[0]=1, min=0)");
    }
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n.size(); ++i) {
        if (n.v[i] < n.v[arg]) arg = i;
    }
    VariantLabel label;
    label.u_min = n.u[arg];
    label.rebound = n.v.back() - n.v[arg];
    label.label = (label.u_min <= th.u_min_max && label.rebound >= th.rebound_min)
                      ? ElbowVariant::V1
                      : ElbowVariant::V2;
    return label;
}

KeypointRecording load_keypoints_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open keypoint file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("keypoint file " + path + ": " + e.what());
    }

    KeypointRecording rec;
    try {
        rec.fps = doc.value("fps", 0.0);
        const auto& frames = doc.at("frames");
        if (!frames.is_array() || frames.empty()) {
            throw std::invalid_argument("keypoint file " + path + ": no frames");
        }
        for (const auto& fj : frames) {
            KeypointFrame frame;
            frame.t = fj.at("t").get<double>();
            for (const auto& sj : fj.at("skeletons")) {
                Skeleton skel;
                for (const auto& [name, pj] : sj.at("points").items()) {
                    if (!pj.is_array() || pj.size() < 2 || pj.size() > 4) {
                        throw std::invalid_argument("point '" + name +
                                                    "' must be [x,y], [x,y,conf] or [x,y,z,conf]");
                    }
                    Keypoint p;
                    p.x = pj[0].get<double>();
                    p.y = pj[1].get<double>();
                    if (pj.size() == 3) {
                        p.confidence = pj[2].get<double>();
                    } else if (pj.size() == 4) {
                        p.z = pj[2].get<double>();
                        p.confidence = pj[3].get<double>();
                    }
                    skel.points[name] = p;
                }
                frame.skeletons.push_back(std::move(skel));
            }
            rec.frames.push_back(std::move(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("keypoint file " + path + ": " + e.what());
    }
    return rec;
}

void write_angle_csv(const AngleSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << "t,theta_deg\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", series.t[i], rad2deg(series.theta[i]));
        out << buf;
    }
}

AngleSeries read_angle_csv(const std::string& path, PrimitiveKind primitive) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open angle file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,theta_deg", 0) != 0) {
        throw std::invalid_argument(path + ": expected header t,theta_deg");
    }
    AngleSeries series;
    series.primitive = primitive;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t, deg;
        if (std::sscanf(line.c_str(), "%lf,%lf", &t, &deg) != 2) {
            throw std::invalid_argument(path + ": bad row '" + line + "'");
        }
        series.t.push_back(t);
        series.theta.push_back(deg2rad(deg));
    }
    series.validate();
    return series;
}

void write_normalized_csv(const NormalizedSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << "u,v\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.8f,%.8f\n", series.u[i], series.v[i]);
        out << buf;
    }
}

NormalizedSeries read_normalized_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open normalized file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("u,v", 0) != 0) {
        throw std::invalid_argument(path + ": expected header u,v");
    }
    NormalizedSeries series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double u, v;
        if (std::sscanf(line.c_str(), "%lf,%lf", &u, &v) != 2) {
            throw std::invalid_argument(path + ": bad row '" + line + "'");
        }
        series.u.push_back(u);
        series.v.push_back(v);
    }
    if (series.size() < 2) throw std::invalid_argument(path + ": too few samples");
    return series;
}

PipelineResult analyze_recording(const std::vector<KeypointFrame>& frames,
                                 PrimitiveKind primitive, const PipelineOptions& opts) {
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("stage '") + name + "': " + e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string("stage '") + name + "': " + e.what());
        }
    };

    PipelineResult res;
    const auto tracked =
        stage("track", [&] { return track_person(frames, opts.seed, opts.track); });
    res.raw = stage("angles", [&] { return extract_angle_series(tracked, primitive); });
    res.smoothed =
        stage("smooth", [&] { return smooth_sg(res.raw, opts.sg_window, opts.sg_order); });
    res.segment = stage("segment", [&] { return segment_motion(res.smoothed, opts.segment); });
    const AngleSeries cut = slice(res.smoothed, res.segment);
    const auto convention = primitive == PrimitiveKind::ElbowFlexion
                                ? NormConvention::ElbowMin0
                                : NormConvention::ShoulderStart0;
    res.normalized = stage("normalize", [&] { return normalize(cut, convention); });
    if (primitive == PrimitiveKind::ElbowFlexion) {
        res.variant =
            stage("classify", [&] { return classify_variant(res.normalized, opts.thresholds); });
    }
    return res;
}

} // namespace jmm
