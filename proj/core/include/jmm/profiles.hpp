#pragma once

#include <array>
#include <optional>
#include <string>

namespace jmm {

/// Coefficients of the sigmoid motion profile f(u) = a / (b + e^(-c*u)),
/// valid on the normalized time interval u in [0, 1].
struct SigmoidCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0; // steepness

    void validate() const; // all three must be positive and finite
};

/// Coefficients of the degree-7 polynomial motion profile,
/// f(u) = sum_k c[k] * u^k with c[0] the constant term.
struct PolyCoefficients {
    std::array<double, 8> c{};

    void validate() const; // entries must be finite
};

/// Shoulder-flexion sigmoid fitted to standardized human handover data.
SigmoidCoefficients shoulder_sigmoid_coefficients();

/// Elbow-flexion polynomials for the two observed motion variants.
/// V1 has a pronounced mid-motion dip (arm pulled in, then re-extended);
/// V2 descends into a flat tail.
enum class ElbowVariant { V1, V2 };
PolyCoefficients elbow_poly_coefficients(ElbowVariant variant);

/// Default forearm-rotation profile: quintic smoothstep
/// (zero endpoint velocity and acceleration). Not derived from recorded
/// data; callers may substitute their own coefficients.
PolyCoefficients quintic_smoothstep_coefficients();

enum class ForearmDirection { Pronation, Supination };

/// How a profile is turned into a joint-angle function.
/// PaperLiteral evaluates the published closed forms verbatim, which over-
/// or undershoot the commanded endpoints by a small margin (the sigmoid
/// reaches ~1.013 at u=1, the elbow polynomial starts at 1 rather than 0).
/// Anchored renormalizes affinely so that J(0) = j0 and J(te) = je exactly
/// when rc = 1, preserving the interior shape.
enum class EvalMode { Anchored, PaperLiteral };

/// Boundary data shared by all per-joint motion profiles.
struct ProfileParams {
    double start_angle = 0.0;   // j0, radians
    double end_angle = 0.0;     // je, radians
    double duration = 1.0;      // te, seconds, > 0
    double robot_constant = 1.0; // rc, amplitude damping, > 0
    EvalMode mode = EvalMode::Anchored;

    void validate() const;
};

enum class PrimitiveKind {
    ShoulderFlexion,
    ShoulderAdduction,
    ElbowFlexion,
    ForearmRotation,
};

/// One elementary joint motion of the handover. The elbow carries a
/// variant and the forearm a rotation direction; the other primitives
/// carry neither.
struct MotionPrimitive {
    PrimitiveKind kind;
    std::optional<ElbowVariant> variant;
    std::optional<ForearmDirection> direction;

    static MotionPrimitive shoulder_flexion();
    static MotionPrimitive shoulder_adduction();
    static MotionPrimitive elbow_flexion(ElbowVariant v);
    static MotionPrimitive forearm_rotation(ForearmDirection d);
};

std::string to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& name);

/// Sigmoid profile value at normalized time u in [0, 1].
/// Throws std::domain_error outside the interval.
double eval_sigmoid(const SigmoidCoefficients& coef, double u);

/// Degree-7 polynomial profile value at normalized time u in [0, 1],
/// evaluated with Horner's scheme. Throws std::domain_error outside.
double eval_poly7(const PolyCoefficients& coef, double u);

/// Shoulder flexion angle at time t in [0, duration], radians.
/// Uses the fitted shoulder sigmoid.
double shoulder_flexion_angle(const ProfileParams& p, double t);

/// Shoulder adduction angle with caller-supplied sigmoid coefficients.
/// The recorded adduction profile resembled flexion, so the flexion
/// coefficients are the customary default.
double adduction_angle(const ProfileParams& p, const SigmoidCoefficients& coef, double t);

/// Elbow angle at time t. The profile descends from the start angle and,
/// for V1, dips below the end angle near 60% of the motion before
/// re-extending.
double elbow_angle(const ProfileParams& p, ElbowVariant variant, double t);

/// Elbow-style angle evaluation with explicit polynomial coefficients.
double elbow_angle_with(const ProfileParams& p, const PolyCoefficients& coef, double t);

/// Forearm rotation angle. No published closed form exists, so this is
/// always the endpoint-anchored evaluation of the supplied polynomial;
/// pronation vs. supination only affects the caller's choice of start and
/// end angles.
double forearm_angle(const ProfileParams& p, const PolyCoefficients& coef,
                     ForearmDirection direction, double t);

/// Profile coefficients used by trajectory generation, with the fitted /
/// default curves preloaded. Any entry may be overridden.
struct ProfileSet {
    SigmoidCoefficients shoulder = shoulder_sigmoid_coefficients();
    SigmoidCoefficients adduction = shoulder_sigmoid_coefficients();
    PolyCoefficients elbow_v1 = elbow_poly_coefficients(ElbowVariant::V1);
    PolyCoefficients elbow_v2 = elbow_poly_coefficients(ElbowVariant::V2);
    PolyCoefficients forearm = quintic_smoothstep_coefficients();
};

} // namespace jmm
