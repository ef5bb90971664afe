#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "jmm/profiles.hpp"
#include "jmm/units.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(JMM_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path workdir() {
    const auto dir = fs::temp_directory_path() / "jmm_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

// Synthetic sagittal recording of a V1 handover seen from the side:
// fixed hip and shoulder, two-link arm driven by the profile curves.
void write_synthetic_keypoints(const fs::path& path, bool with_depth) {
    using namespace jmm;
    const double te = 1.2;
    const int frames = 121;
    const ProfileParams shoulder{deg2rad(5.0), deg2rad(55.0), te, 1.0, EvalMode::Anchored};
    const ProfileParams elbow{deg2rad(180.0), deg2rad(160.0), te, 1.0, EvalMode::Anchored};

    nlohmann::json doc;
    doc["fps"] = 100;
    auto& arr = doc["frames"] = nlohmann::json::array();
    const double L1 = 0.30, L2 = 0.28;
    for (int i = 0; i < frames; ++i) {
        const double t = te * i / (frames - 1);
        const double qs = shoulder_flexion_angle(shoulder, t);
        const double qe = elbow_angle(elbow, ElbowVariant::V1, t);

        // torso down is -y; positive flexion swings the arm toward +x
        const double ex = L1 * std::sin(qs);
        const double ey = -L1 * std::cos(qs);
        // forearm direction: upper-arm direction rotated by pi - interior angle
        const double phi = std::atan2(ey, ex) + (std::numbers::pi - qe);
        const double wx = ex + L2 * std::cos(phi);
        const double wy = ey + L2 * std::sin(phi);

        auto point = [&](double x, double y) {
            if (with_depth) return nlohmann::json::array({x, y, 0.0, 1.0});
            return nlohmann::json::array({x, y, 1.0});
        };
        nlohmann::json frame;
        frame["t"] = t;
        frame["skeletons"] = {{{"points",
                                {{"r_hip", point(0.0, -0.5)},
                                 {"r_shoulder", point(0.0, 0.0)},
                                 {"r_elbow", point(ex, ey)},
                                 {"r_wrist", point(wx, wy)}}}}};
        arr.push_back(frame);
    }
    std::ofstream(path) << doc.dump();
}

} // namespace

TEST_CASE("generate writes the contracted number of rows") {
    const auto dir = workdir();
    const auto out = dir / "gen.csv";
    const auto res = run("generate --robot arm-5dof --model jmm --variant v1 --duration 1.2 "
                         "--rate 100 --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(line_count(out) == 122); // header + round(1.2 * 100) + 1 frames

    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,joint_1,joint_2,joint_3,joint_4,joint_5,ee_x,ee_y,ee_z");
}

TEST_CASE("generate rejects unknown variants and robots with exit 2") {
    const auto dir = workdir();
    auto res = run("generate --robot arm-5dof --variant v3 --out " + (dir / "x.csv").string());
    CHECK(res.exit_code == 2);
    res = run("generate --robot not-a-robot --out " + (dir / "x.csv").string());
    CHECK(res.exit_code == 2);
}

TEST_CASE("ljst columns are linear in time") {
    const auto dir = workdir();
    const auto out = dir / "ljst.csv";
    REQUIRE(run("generate --robot humanoid-arm --model ljst --duration 1.0 --rate 50 --out " +
                out.string()).exit_code == 0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) row.push_back(std::stod(f));
        rows.push_back(row);
    }
    REQUIRE(rows.size() == 51);
    // midpoint of each joint column is the endpoint average
    for (std::size_t c = 1; c <= 4; ++c) {
        CHECK(rows[25][c] ==
              doctest::Approx(0.5 * (rows[0][c] + rows[50][c])).epsilon(1e-6));
    }
}

TEST_CASE("compare of a file with itself is all zeros") {
    const auto dir = workdir();
    const auto out = dir / "self.csv";
    REQUIRE(run("generate --robot humanoid-arm --out " + out.string()).exit_code == 0);
    const auto cmp = dir / "cmp.json";
    const auto res = run("compare --a " + out.string() + " --b " + out.string() + " --out " +
                         cmp.string());
    CHECK(res.exit_code == 0);
    nlohmann::json j;
    std::ifstream(cmp) >> j;
    for (double v : j.at("max_abs_diff_deg")) CHECK(v == 0.0);
    for (double v : j.at("endpoint_abs_diff_deg")) CHECK(v == 0.0);
}

TEST_CASE("compare reports interior elbow difference between models") {
    const auto dir = workdir();
    const auto a = dir / "m_jmm.csv";
    const auto b = dir / "m_ljst.csv";
    REQUIRE(run("generate --robot arm-5dof --model jmm --out " + a.string()).exit_code == 0);
    REQUIRE(run("generate --robot arm-5dof --model ljst --out " + b.string()).exit_code == 0);
    const auto cmp = dir / "models.json";
    REQUIRE(run("compare --a " + a.string() + " --b " + b.string() + " --out " + cmp.string())
                .exit_code == 0);
    nlohmann::json j;
    std::ifstream(cmp) >> j;
    CHECK(j.at("max_abs_diff_deg")[3].get<double>() > 1.0); // elbow joint
    for (double v : j.at("endpoint_abs_diff_deg")) CHECK(v <= 1e-6);
}

TEST_CASE("compare rejects mismatched joint counts with exit 2") {
    const auto dir = workdir();
    const auto a = dir / "r4.csv";
    const auto b = dir / "r5.csv";
    REQUIRE(run("generate --robot humanoid-arm --out " + a.string()).exit_code == 0);
    REQUIRE(run("generate --robot arm-5dof --out " + b.string()).exit_code == 0);
    CHECK(run("compare --a " + a.string() + " --b " + b.string()).exit_code == 2);
}

TEST_CASE("analyze labels a synthetic V1 recording") {
    const auto dir = workdir();
    const auto kp = dir / "v1.json";
    write_synthetic_keypoints(kp, false);
    const auto prefix = (dir / "v1").string();
    const auto res = run("analyze --input " + kp.string() +
                         " --primitive elbow_flexion --out-prefix " + prefix);
    CHECK(res.exit_code == 0);

    nlohmann::json summary;
    std::ifstream(prefix + ".summary.json") >> summary;
    CHECK(summary.at("variant").at("label") == "V1");
    CHECK(fs::exists(prefix + ".angles.csv"));
    CHECK(fs::exists(prefix + ".smoothed.csv"));
    CHECK(fs::exists(prefix + ".normalized.csv"));
}

TEST_CASE("analyze without depth fails on adduction with exit 1") {
    const auto dir = workdir();
    const auto kp = dir / "flat.json";
    write_synthetic_keypoints(kp, false);
    const auto res = run("analyze --input " + kp.string() +
                         " --primitive shoulder_adduction --out-prefix " +
                         (dir / "add").string());
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("depth") != std::string::npos);
}

TEST_CASE("analyze of an empty recording exits 2") {
    const auto dir = workdir();
    const auto kp = dir / "empty.json";
    std::ofstream(kp) << R"({"fps": 100, "frames": []})";
    CHECK(run("analyze --input " + kp.string() + " --out-prefix " +
              (dir / "e").string()).exit_code == 2);
}

TEST_CASE("fit pipeline over the analyze artifacts") {
    const auto dir = workdir();
    const auto kp = dir / "v1b.json";
    write_synthetic_keypoints(kp, false);
    const auto prefix = (dir / "v1b").string();
    REQUIRE(run("analyze --input " + kp.string() +
                " --primitive elbow_flexion --out-prefix " + prefix).exit_code == 0);

    const auto report = dir / "fit.json";
    const auto res = run("fit --profile poly7 --fix-intercept 1.0 --input " + prefix +
                         ".normalized.csv --out " + report.string());
    CHECK(res.exit_code == 0);
    nlohmann::json j;
    std::ifstream(report) >> j;
    CHECK(j.at("model") == "poly7");
    CHECK(j.at("converged") == true);
    CHECK(j.at("r2").get<double>() >= 0.99);
    CHECK(j.at("coefficients").size() == 8);
}

TEST_CASE("fit with a missing input exits 2") {
    CHECK(run("fit --profile sigmoid --input /nonexistent/norm.csv").exit_code == 2);
}

TEST_CASE("generate is deterministic") {
    const auto dir = workdir();
    const auto a = dir / "det_a.csv";
    const auto b = dir / "det_b.csv";
    REQUIRE(run("generate --robot arm-5dof --out " + a.string()).exit_code == 0);
    REQUIRE(run("generate --robot arm-5dof --out " + b.string()).exit_code == 0);
    std::ifstream fa(a), fb(b);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("config file supplies defaults and overrides") {
    const auto dir = workdir();
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "robot": "arm-5dof",
        "defaults": {"duration_s": 0.5, "rate_hz": 20, "variant": "v2"}
    })";
    const auto out = dir / "cfg_out.csv";
    const auto res = run("--config " + cfg.string() + " generate --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(line_count(out) == 12); // header + round(0.5 * 20) + 1
}
