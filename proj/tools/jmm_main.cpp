// jmm: generate, analyze, fit and compare human-like handover arm motions.
//
// Angles are degrees at this boundary (flags and files) and radians inside
// the library. Exit codes: 0 success, 1 runtime/numeric failure, 2 usage or
// validation failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jmm/analysis.hpp"
#include "jmm/fitting.hpp"
#include "jmm/kinematics.hpp"
#include "jmm/profiles.hpp"
#include "jmm/trajectory.hpp"
#include "jmm/units.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Config {
    std::string robot = "humanoid-arm";
    double duration = 1.2;
    double rate = 100.0;
    jmm::EvalMode mode = jmm::EvalMode::Anchored;
    jmm::ElbowVariant variant = jmm::ElbowVariant::V1;
    jmm::ForearmDirection direction = jmm::ForearmDirection::Pronation;
    jmm::ProfileSet profiles;
};

jmm::EvalMode parse_mode(const std::string& s) {
    if (s == "anchored") return jmm::EvalMode::Anchored;
    if (s == "literal") return jmm::EvalMode::PaperLiteral;
    throw CLI::ValidationError("--mode", "expected 'anchored' or 'literal'");
}

jmm::ElbowVariant parse_variant(const std::string& s) {
    if (s == "v1") return jmm::ElbowVariant::V1;
    if (s == "v2") return jmm::ElbowVariant::V2;
    throw CLI::ValidationError("--variant", "expected 'v1' or 'v2'");
}

jmm::ForearmDirection parse_direction(const std::string& s) {
    if (s == "pronation") return jmm::ForearmDirection::Pronation;
    if (s == "supination") return jmm::ForearmDirection::Supination;
    throw CLI::ValidationError("--direction", "expected 'pronation' or 'supination'");
}

jmm::SigmoidCoefficients sigmoid_from_json(const nlohmann::json& j) {
    if (j.is_array() && j.size() == 3) {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }
    return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>()};
}

jmm::PolyCoefficients poly_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 8) {
        throw std::invalid_argument("polynomial override must be an array of 8 numbers (c0..c7)");
    }
    jmm::PolyCoefficients c;
    for (std::size_t k = 0; k < 8; ++k) c.c[k] = j[k].get<double>();
    return c;
}

Config load_config(const std::string& path) {
    Config cfg;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        if (doc.contains("robot")) cfg.robot = doc["robot"].get<std::string>();
        if (doc.contains("defaults")) {
            const auto& d = doc["defaults"];
            cfg.duration = d.value("duration_s", cfg.duration);
            cfg.rate = d.value("rate_hz", cfg.rate);
            if (d.contains("mode")) cfg.mode = parse_mode(d["mode"].get<std::string>());
            if (d.contains("variant")) cfg.variant = parse_variant(d["variant"].get<std::string>());
            if (d.contains("direction")) {
                cfg.direction = parse_direction(d["direction"].get<std::string>());
            }
        }
        if (doc.contains("profiles")) {
            const auto& p = doc["profiles"];
            if (p.contains("shoulder_sigmoid")) {
                cfg.profiles.shoulder = sigmoid_from_json(p["shoulder_sigmoid"]);
            }
            if (p.contains("adduction_sigmoid")) {
                cfg.profiles.adduction = sigmoid_from_json(p["adduction_sigmoid"]);
            }
            if (p.contains("elbow_v1")) cfg.profiles.elbow_v1 = poly_from_json(p["elbow_v1"]);
            if (p.contains("elbow_v2")) cfg.profiles.elbow_v2 = poly_from_json(p["elbow_v2"]);
            if (p.contains("forearm_poly")) cfg.profiles.forearm = poly_from_json(p["forearm_poly"]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
    return cfg;
}

std::pair<jmm::RobotModel, jmm::PrimitiveMapping> resolve_robot(const std::string& source) {
    if (source == "humanoid-arm" || source == "arm-5dof") return jmm::builtin_robot(source);
    if (std::filesystem::exists(source)) return jmm::load_robot_json(source);
    throw std::invalid_argument("robot '" + source +
                                "' is neither a builtin name nor an existing file");
}

// Default handover endpoints, degrees, per builtin robot. The humanoid's
// elbow joint runs in interior-angle convention (180 = straight); the
// 5-DOF arm's elbow joint is zero when straight, so the same human motion
// is expressed as flexion away from zero.
std::map<jmm::PrimitiveKind, std::pair<double, double>> default_endpoints_deg(
    const std::string& robot_name) {
    using K = jmm::PrimitiveKind;
    if (robot_name == "arm-5dof") {
        return {{K::ShoulderFlexion, {0.0, 50.0}},
                {K::ShoulderAdduction, {0.0, 20.0}},
                {K::ElbowFlexion, {0.0, 20.0}},
                {K::ForearmRotation, {0.0, -60.0}}};
    }
    return {{K::ShoulderFlexion, {0.0, 50.0}},
            {K::ShoulderAdduction, {0.0, 20.0}},
            {K::ElbowFlexion, {180.0, 160.0}},
            {K::ForearmRotation, {0.0, -60.0}}};
}

void apply_angle_overrides(std::map<jmm::PrimitiveKind, std::pair<double, double>>& endpoints,
                           const std::vector<std::string>& overrides) {
    for (const auto& spec : overrides) {
        const auto eq = spec.find('=');
        const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || colon == std::string::npos) {
            throw std::invalid_argument("--angles expects primitive=start:end (degrees), got '" +
                                        spec + "'");
        }
        const auto kind = jmm::primitive_kind_from_string(spec.substr(0, eq));
        const double start = std::stod(spec.substr(eq + 1, colon - eq - 1));
        const double end = std::stod(spec.substr(colon + 1));
        endpoints[kind] = {start, end};
    }
}

nlohmann::json metrics_json(const jmm::MetricsReport& m) {
    auto vec = [](const Eigen::VectorXd& v, bool to_deg) {
        std::vector<double> out(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out[static_cast<std::size_t>(i)] = to_deg ? jmm::rad2deg(v[i]) : v[i];
        }
        return out;
    };
    nlohmann::json j;
    j["mean_squared_jerk_rad2_s6"] = vec(m.mean_squared_jerk, false);
    j["ee_path_length_m"] = m.ee_path_length;
    j["max_angular_velocity_deg_s"] = vec(m.max_angular_velocity, true);
    j["endpoint_error_deg"] = vec(m.endpoint_error, true);
    return j;
}

void print_metrics(const jmm::Trajectory& traj, const jmm::MetricsReport& m) {
    std::printf("%-16s %14s %14s %14s\n", "joint", "max vel [deg/s]", "ms jerk", "end err [deg]");
    for (std::size_t i = 0; i < traj.joint_names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::printf("%-16s %14.3f %14.3e %14.6f\n", traj.joint_names[i].c_str(),
                    jmm::rad2deg(m.max_angular_velocity[k]), m.mean_squared_jerk[k],
                    jmm::rad2deg(m.endpoint_error[k]));
    }
    std::printf("end-effector path length: %.4f m\n", m.ee_path_length);
}

int cmd_generate(const Config& cfg, const std::string& model,
                 const std::vector<std::string>& angle_overrides, const std::string& out_path) {
    auto [robot, mapping] = resolve_robot(cfg.robot);

    auto endpoints = default_endpoints_deg(robot.name);
    apply_angle_overrides(endpoints, angle_overrides);

    jmm::HandoverSpec spec;
    spec.duration = cfg.duration;
    spec.mode = cfg.mode;
    spec.elbow_variant = cfg.variant;
    spec.forearm_direction = cfg.direction;
    spec.profiles = cfg.profiles;
    for (const auto& [kind, se] : endpoints) {
        if (!mapping.entries.count(kind)) continue; // robot cannot express it
        spec.start[kind] = jmm::deg2rad(se.first);
        spec.end[kind] = jmm::deg2rad(se.second);
    }

    const jmm::Trajectory traj = model == "jmm"
                                     ? jmm::generate_jmm(spec, robot, mapping, cfg.rate)
                                     : jmm::generate_ljst(spec, robot, mapping, cfg.rate);
    jmm::write_trajectory_csv(traj, out_path);

    std::printf("%s: %zu frames at %.1f Hz -> %s\n", model.c_str(), traj.frames.size(),
                traj.rate, out_path.c_str());
    print_metrics(traj, jmm::metrics(traj));
    return kExitOk;
}

int cmd_analyze(const std::string& input, const std::string& primitive_name,
                const std::string& select, double track_radius, int window, int order,
                const std::string& out_prefix) {
    const auto primitive = jmm::primitive_kind_from_string(primitive_name);
    const jmm::KeypointRecording rec = jmm::load_keypoints_json(input);

    jmm::PipelineOptions opts;
    if (select == "leftmost") {
        opts.seed.kind = jmm::TrackSeed::Kind::Leftmost;
    } else if (select == "rightmost") {
        opts.seed.kind = jmm::TrackSeed::Kind::Rightmost;
    } else {
        double x = 0.0, y = 0.0;
        if (std::sscanf(select.c_str(), "%lf,%lf", &x, &y) != 2) {
            throw std::invalid_argument("--select expects leftmost, rightmost or x,y");
        }
        opts.seed = {jmm::TrackSeed::Kind::Region, x, y};
    }
    opts.track.max_jump = track_radius;
    if (window > 0) {
        opts.sg_window = window;
        opts.sg_order = order;
    } else if (rec.fps > 0.0 && rec.fps < 60.0) {
        // low-rate recordings get a narrower filter
        opts.sg_window = 5;
        opts.sg_order = 2;
    }

    const jmm::PipelineResult res = jmm::analyze_recording(rec.frames, primitive, opts);

    jmm::write_angle_csv(res.raw, out_prefix + ".angles.csv");
    jmm::write_angle_csv(res.smoothed, out_prefix + ".smoothed.csv");
    jmm::write_normalized_csv(res.normalized, out_prefix + ".normalized.csv");

    nlohmann::json summary;
    summary["primitive"] = primitive_name;
    summary["frames"] = rec.frames.size();
    summary["segment"] = {{"t_start", res.segment.t_start}, {"t_end", res.segment.t_end}};
    if (res.variant) {
        summary["variant"] = {
            {"label", res.variant->label == jmm::ElbowVariant::V1 ? "V1" : "V2"},
            {"u_min", res.variant->u_min},
            {"rebound", res.variant->rebound}};
    }
    std::ofstream(out_prefix + ".summary.json") << summary.dump(2) << '\n';

    std::printf("analyzed %zu frames; motion [%.3f, %.3f] s", rec.frames.size(),
                res.segment.t_start, res.segment.t_end);
    if (res.variant) {
        std::printf("; variant %s (u_min=%.2f, rebound=%.3f)",
                    res.variant->label == jmm::ElbowVariant::V1 ? "V1" : "V2",
                    res.variant->u_min, res.variant->rebound);
    }
    std::printf("\n");
    return kExitOk;
}

int cmd_fit(const std::string& input, const std::string& profile,
            std::optional<double> fix_intercept, const std::vector<double>& init,
            const std::string& out_path) {
    const jmm::NormalizedSeries data = jmm::read_normalized_csv(input);

    std::string json;
    bool converged = true;
    if (profile == "sigmoid") {
        jmm::SigmoidCoefficients coef{1.0, 1.0, 10.0};
        if (!init.empty()) {
            if (init.size() != 3) {
                throw std::invalid_argument("--init expects three values: a,b,c");
            }
            coef = {init[0], init[1], init[2]};
        }
        const auto rep = jmm::fit_sigmoid(data, coef);
        json = jmm::fit_report_json(rep);
        converged = rep.converged;
        std::printf("sigmoid fit: a=%.6g b=%.6g c=%.6g sse=%.4g r2=%.6f (%d iterations%s)\n",
                    rep.coefficients.a, rep.coefficients.b, rep.coefficients.c, rep.sse,
                    rep.r_squared, rep.iterations, rep.converged ? "" : ", NOT converged");
    } else {
        const auto rep = jmm::fit_poly7(data, fix_intercept);
        json = jmm::fit_report_json(rep);
        std::printf("poly7 fit: sse=%.4g r2=%.6f\n", rep.sse, rep.r_squared);
    }

    if (out_path.empty()) {
        std::printf("%s\n", json.c_str());
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open for writing: " + out_path);
        out << json << '\n';
    }
    return converged ? kExitOk : kExitRuntime;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_path) {
    const jmm::Trajectory a = jmm::read_trajectory_csv(path_a);
    const jmm::Trajectory b = jmm::read_trajectory_csv(path_b);
    if (a.joint_count() != b.joint_count()) {
        throw std::invalid_argument("trajectories have different joint counts (" +
                                    std::to_string(a.joint_count()) + " vs " +
                                    std::to_string(b.joint_count()) + ")");
    }
    const jmm::TrajectoryComparison cmp = jmm::compare(a, b);

    std::printf("%-16s %18s %18s\n", "joint", "max |diff| [deg]", "end |diff| [deg]");
    for (std::size_t i = 0; i < a.joint_names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::printf("%-16s %18.6f %18.6f\n", a.joint_names[i].c_str(),
                    jmm::rad2deg(cmp.max_abs_diff[k]), jmm::rad2deg(cmp.endpoint_abs_diff[k]));
    }

    nlohmann::json j;
    j["joints"] = a.joint_names;
    std::vector<double> maxdiff, enddiff;
    for (Eigen::Index k = 0; k < cmp.max_abs_diff.size(); ++k) {
        maxdiff.push_back(jmm::rad2deg(cmp.max_abs_diff[k]));
        enddiff.push_back(jmm::rad2deg(cmp.endpoint_abs_diff[k]));
    }
    j["max_abs_diff_deg"] = maxdiff;
    j["endpoint_abs_diff_deg"] = enddiff;
    j["a"] = metrics_json(cmp.metrics_a);
    j["b"] = metrics_json(cmp.metrics_b);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open for writing: " + out_path);
        out << j.dump(2) << '\n';
    } else {
        std::printf("%s\n", j.dump(2).c_str());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint-profile handover motion generator and analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config (robot, defaults, profile overrides)");

    // generate
    auto* gen = app.add_subcommand("generate", "Sample a handover trajectory to CSV");
    std::string gen_robot, gen_model = "jmm", gen_mode, gen_variant, gen_direction, gen_out;
    double gen_duration = -1.0, gen_rate = -1.0;
    std::vector<std::string> gen_angles;
    gen->add_option("--robot", gen_robot, "builtin name (humanoid-arm, arm-5dof) or robot JSON");
    gen->add_option("--model", gen_model, "trajectory model")
        ->check(CLI::IsMember({"jmm", "ljst"}));
    gen->add_option("--variant", gen_variant, "elbow profile variant")
        ->check(CLI::IsMember({"v1", "v2"}));
    gen->add_option("--mode", gen_mode, "profile evaluation mode")
        ->check(CLI::IsMember({"anchored", "literal"}));
    gen->add_option("--direction", gen_direction, "forearm rotation direction")
        ->check(CLI::IsMember({"pronation", "supination"}));
    gen->add_option("--duration", gen_duration, "handover duration, seconds");
    gen->add_option("--rate", gen_rate, "sampling rate, Hz (>= 10)");
    gen->add_option("--angles", gen_angles,
                    "endpoint override primitive=start:end in degrees (repeatable)");
    gen->add_option("--out", gen_out, "output trajectory CSV")->required();

    // analyze
    auto* ana = app.add_subcommand("analyze", "Run the keypoint-to-profile analysis pipeline");
    std::string ana_input, ana_primitive = "elbow_flexion", ana_select = "rightmost", ana_prefix;
    double ana_radius = 150.0;
    int ana_window = 0, ana_order = 3;
    ana->add_option("--input", ana_input, "keypoint JSON file")->required();
    ana->add_option("--primitive", ana_primitive, "primitive to extract")
        ->check(CLI::IsMember({"shoulder_flexion", "shoulder_adduction", "elbow_flexion"}));
    ana->add_option("--select", ana_select, "person seed: leftmost, rightmost or x,y");
    ana->add_option("--track-radius", ana_radius, "centroid association radius (input units)");
    ana->add_option("--window", ana_window, "Savitzky-Golay window (odd; default by fps)");
    ana->add_option("--order", ana_order, "Savitzky-Golay polynomial order");
    ana->add_option("--out-prefix", ana_prefix, "prefix for output artifacts")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a profile function to a normalized series");
    std::string fit_input, fit_profile = "sigmoid", fit_out;
    double fit_intercept = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> fit_init;
    fit->add_option("--input", fit_input, "normalized series CSV (u,v)")->required();
    fit->add_option("--profile", fit_profile, "model family")
        ->check(CLI::IsMember({"sigmoid", "poly7"}));
    fit->add_option("--fix-intercept", fit_intercept, "pin the poly7 constant term");
    fit->add_option("--init", fit_init, "sigmoid initial guess a b c")->expected(3);
    fit->add_option("--out", fit_out, "fit report JSON (default: stdout)");

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare two trajectory CSVs");
    std::string cmp_a, cmp_b, cmp_out;
    cmp->add_option("--a", cmp_a, "first trajectory CSV")->required();
    cmp->add_option("--b", cmp_b, "second trajectory CSV")->required();
    cmp->add_option("--out", cmp_out, "comparison JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!gen_robot.empty()) cfg.robot = gen_robot;
        if (gen_duration > 0.0) cfg.duration = gen_duration;
        if (gen_rate > 0.0) cfg.rate = gen_rate;
        if (!gen_mode.empty()) cfg.mode = parse_mode(gen_mode);
        if (!gen_variant.empty()) cfg.variant = parse_variant(gen_variant);
        if (!gen_direction.empty()) cfg.direction = parse_direction(gen_direction);

        if (gen->parsed()) return cmd_generate(cfg, gen_model, gen_angles, gen_out);
        if (ana->parsed()) {
            return cmd_analyze(ana_input, ana_primitive, ana_select, ana_radius, ana_window,
                               ana_order, ana_prefix);
        }
        if (fit->parsed()) {
            std::optional<double> intercept;
            if (!std::isnan(fit_intercept)) intercept = fit_intercept;
            return cmd_fit(fit_input, fit_profile, intercept, fit_init, fit_out);
        }
        if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
