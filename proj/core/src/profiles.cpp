#include "jmm/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmm {

namespace {

// Tolerance for sampling jitter at interval ends. Anything further out is
// treated as a caller bug, not clamped away.
constexpr double kEdgeTol = 1e-9;

double checked_unit_time(double u, const char* what) {
    if (!std::isfinite(u) || u < -kEdgeTol || u > 1.0 + kEdgeTol) {
        throw std::domain_error(std::string(what) +
                                ": normalized time outside [0, 1]: " + std::to_string(u));
    }
    return std::clamp(u, 0.0, 1.0);
}

double local_time(const ProfileParams& p, double t, const char* what) {
    p.validate();
    const double tol = kEdgeTol * std::max(1.0, p.duration);
    if (!std::isfinite(t) || t < -tol || t > p.duration + tol) {
        throw std::domain_error(std::string(what) + ": time " + std::to_string(t) +
                                " outside [0, " + std::to_string(p.duration) + "]");
    }
    return std::clamp(t / p.duration, 0.0, 1.0);
}

double sigmoid_raw(const SigmoidCoefficients& coef, double u) {
    return coef.a / (coef.b + std::exp(-coef.c * u));
}

double poly_raw(const PolyCoefficients& coef, double u) {
    double acc = coef.c[7];
    for (int k = 6; k >= 0; --k) acc = acc * u + coef.c[static_cast<std::size_t>(k)];
    return acc;
}

// Start-anchored evaluation: g(u) = (f(u) - f(0)) / (f(1) - f(0)),
// J = j0 + (je - j0) * rc * g(u). Exact endpoints for rc = 1.
template <typename F>
double anchored_from_start(const ProfileParams& p, F&& f, double u) {
    const double f0 = f(0.0);
    const double f1 = f(1.0);
    if (std::abs(f1 - f0) < 1e-12) {
        throw std::invalid_argument("profile has no net change over [0, 1]; cannot anchor");
    }
    const double g = (f(u) - f0) / (f1 - f0);
    return p.start_angle + (p.end_angle - p.start_angle) * p.robot_constant * g;
}

} // namespace

void SigmoidCoefficients::validate() const {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) ||
        a <= 0.0 || b <= 0.0 || c <= 0.0) {
        throw std::invalid_argument("sigmoid coefficients must be positive and finite");
    }
}

void PolyCoefficients::validate() const {
    for (double v : c) {
        if (!std::isfinite(v)) throw std::invalid_argument("polynomial coefficient not finite");
    }
}

void ProfileParams::validate() const {
    if (!(std::isfinite(start_angle) && std::isfinite(end_angle))) {
        throw std::invalid_argument("profile start/end angles must be finite");
    }
    if (!std::isfinite(duration) || duration <= 0.0) {
        throw std::invalid_argument("profile duration must be positive");
    }
    if (!std::isfinite(robot_constant) || robot_constant <= 0.0) {
        throw std::invalid_argument("robot constant must be positive");
    }
}

SigmoidCoefficients shoulder_sigmoid_coefficients() {
    return {0.000905, 0.0008908, 12.87};
}

PolyCoefficients elbow_poly_coefficients(ElbowVariant variant) {
    // c[0]..c[7]; c[0] = 1.0 for both variants.
    if (variant == ElbowVariant::V1) {
        return {{{1.0, -1.7, 27.2, -157.3, 314.6, -240.9, 34.2, 23.2}}};
    }
    return {{{1.0, 0.5, -6.7, 53.1, -240.1, 454.1, -376.9, 115.1}}};
}

PolyCoefficients quintic_smoothstep_coefficients() {
    // 6u^5 - 15u^4 + 10u^3
    return {{{0.0, 0.0, 0.0, 10.0, -15.0, 6.0, 0.0, 0.0}}};
}

MotionPrimitive MotionPrimitive::shoulder_flexion() {
    return {PrimitiveKind::ShoulderFlexion, std::nullopt, std::nullopt};
}
MotionPrimitive MotionPrimitive::shoulder_adduction() {
    return {PrimitiveKind::ShoulderAdduction, std::nullopt, std::nullopt};
}
MotionPrimitive MotionPrimitive::elbow_flexion(ElbowVariant v) {
    return {PrimitiveKind::ElbowFlexion, v, std::nullopt};
}
MotionPrimitive MotionPrimitive::forearm_rotation(ForearmDirection d) {
    return {PrimitiveKind::ForearmRotation, std::nullopt, d};
}

std::string to_string(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::ShoulderFlexion: return "shoulder_flexion";
        case PrimitiveKind::ShoulderAdduction: return "shoulder_adduction";
        case PrimitiveKind::ElbowFlexion: return "elbow_flexion";
        case PrimitiveKind::ForearmRotation: return "forearm_rotation";
    }
    throw std::invalid_argument("unknown primitive kind");
}

PrimitiveKind primitive_kind_from_string(const std::string& name) {
    if (name == "shoulder_flexion") return PrimitiveKind::ShoulderFlexion;
    if (name == "shoulder_adduction") return PrimitiveKind::ShoulderAdduction;
    if (name == "elbow_flexion") return PrimitiveKind::ElbowFlexion;
    if (name == "forearm_rotation") return PrimitiveKind::ForearmRotation;
    throw std::invalid_argument("unknown primitive name: " + name);
}

double eval_sigmoid(const SigmoidCoefficients& coef, double u) {
    coef.validate();
    return sigmoid_raw(coef, checked_unit_time(u, "eval_sigmoid"));
}

double eval_poly7(const PolyCoefficients& coef, double u) {
    coef.validate();
    return poly_raw(coef, checked_unit_time(u, "eval_poly7"));
}

double shoulder_flexion_angle(const ProfileParams& p, double t) {
    return adduction_angle(p, shoulder_sigmoid_coefficients(), t);
}

double adduction_angle(const ProfileParams& p, const SigmoidCoefficients& coef, double t) {
    coef.validate();
    const double u = local_time(p, t, "sigmoid profile");
    auto f = [&](double x) { return sigmoid_raw(coef, x); };
    if (p.mode == EvalMode::PaperLiteral) {
        return p.start_angle +
               (p.end_angle - p.start_angle) * p.robot_constant * f(u);
    }
    return anchored_from_start(p, f, u);
}

double elbow_angle(const ProfileParams& p, ElbowVariant variant, double t) {
    return elbow_angle_with(p, elbow_poly_coefficients(variant), t);
}

double elbow_angle_with(const ProfileParams& p, const PolyCoefficients& coef, double t) {
    coef.validate();
    const double u = local_time(p, t, "elbow profile");
    const double f = poly_raw(coef, u);
    if (p.mode == EvalMode::PaperLiteral) {
        // Published form: note the (j0 - je) sign, opposite to the sigmoid.
        return p.start_angle + (p.start_angle - p.end_angle) * p.robot_constant * f;
    }
    // End-anchored: w(u) = (f(u) - f(1)) / (f(0) - f(1)) runs 1 -> 0, so the
    // V1 dip below f(1) maps to angles beyond the end angle.
    const double f0 = poly_raw(coef, 0.0);
    const double f1 = poly_raw(coef, 1.0);
    if (std::abs(f0 - f1) < 1e-12) {
        throw std::invalid_argument("profile has no net change over [0, 1]; cannot anchor");
    }
    const double w = (f - f1) / (f0 - f1);
    return p.end_angle + (p.start_angle - p.end_angle) * p.robot_constant * w;
}

double forearm_angle(const ProfileParams& p, const PolyCoefficients& coef,
                     ForearmDirection /*direction*/, double t) {
    coef.validate();
    const double u = local_time(p, t, "forearm profile");
    return anchored_from_start(p, [&](double x) { return poly_raw(coef, x); }, u);
}

} // namespace jmm
