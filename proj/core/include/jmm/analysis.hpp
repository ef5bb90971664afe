#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmm/profiles.hpp"

namespace jmm {

// Keypoint coordinate convention (documented, not enforced): x along the
// handover direction, y vertical, z lateral toward the giver's body
// midline. 2D recordings are sagittal-plane views (x, y only). Pixels and
// meters are both fine; all extracted angles are scale-invariant.

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    std::optional<double> z;
    double confidence = 1.0;
};

struct Skeleton {
    std::map<std::string, Keypoint> points;
};

struct KeypointFrame {
    double t = 0.0; // seconds
    std::vector<Skeleton> skeletons;
};

struct KeypointRecording {
    double fps = 0.0;
    std::vector<KeypointFrame> frames;
};

/// Joint-angle time series for one motion primitive.
struct AngleSeries {
    std::vector<double> t;     // seconds, strictly increasing
    std::vector<double> theta; // radians
    PrimitiveKind primitive = PrimitiveKind::ElbowFlexion;

    std::size_t size() const { return t.size(); }
    void validate() const;
};

/// Time- and amplitude-standardized series on a 101-point uniform grid.
struct NormalizedSeries {
    std::vector<double> u; // 0, 0.01, ..., 1 when produced by normalize()
    std::vector<double> v;

    std::size_t size() const { return u.size(); }
};

enum class NormConvention {
    ShoulderStart0, // v = (theta - theta_start) / (theta_end - theta_start)
    ElbowMin0,      // v = (theta - theta_min) / (theta_start - theta_min)
};

struct VariantLabel {
    ElbowVariant label = ElbowVariant::V2;
    double u_min = 0.0;  // location of the global minimum
    double rebound = 0.0; // v_end - v_min
};

/// An elbow curve counts as V1 when its minimum comes early enough and the
/// re-extension after it is pronounced. The boundary between the variants
/// is fuzzy in recorded data, so both thresholds are adjustable.
struct VariantThresholds {
    double u_min_max = 0.75;
    double rebound_min = 0.10;
};

struct TrackSeed {
    enum class Kind { Leftmost, Rightmost, Region } kind = Kind::Rightmost;
    double x = 0.0; // Region only: pick the skeleton nearest this point
    double y = 0.0;
};

struct TrackOptions {
    double max_jump = 150.0; // centroid association radius (input units)
    int max_gap = 3;         // frames bridged by holding the last centroid
};

struct MotionSegment {
    std::size_t first = 0; // inclusive sample indices
    std::size_t last = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct SegmentOptions {
    double threshold_frac = 0.05; // of peak speed
    double min_peak_speed = 1e-3; // rad/s
    // Expansion from the threshold interval toward the enclosing speed
    // minima; the tolerance lets the walk pass small noise upticks and the
    // floor stops it once the speed is genuinely low.
    double tol_frac = 0.02;
    double floor_frac = 0.01;
};

struct LostTrackError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingDepthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoMotionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroAmplitudeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reduce multi-person frames to the followed person: seed selection on
/// frame 0, then nearest-centroid association. Gaps of up to
/// `opts.max_gap` frames are bridged by repeating the last selection;
/// longer gaps raise LostTrackError.
std::vector<KeypointFrame> track_person(const std::vector<KeypointFrame>& frames,
                                        const TrackSeed& seed,
                                        const TrackOptions& opts = {});

/// Interior angle at the elbow between (shoulder - elbow) and
/// (wrist - elbow), in [0, pi]. Works for 2D and 3D points.
double elbow_angle_from_points(const Keypoint& shoulder, const Keypoint& elbow,
                               const Keypoint& wrist);

/// Angle between the downward torso vector (hip - shoulder) and
/// (elbow - shoulder); 0 = arm hanging. 3D inputs are first projected onto
/// the sagittal plane (the lateral z component is dropped).
double shoulder_flexion_from_points(const Keypoint& hip, const Keypoint& shoulder,
                                    const Keypoint& elbow);

/// Angle of (elbow - shoulder) projected onto the transverse plane,
/// positive toward the body midline (+z). Requires depth; 2D input raises
/// MissingDepthError.
double adduction_from_points(const Keypoint& hip, const Keypoint& shoulder,
                             const Keypoint& elbow);

/// Extract the angle series for one primitive from single-skeleton frames.
/// Requires points r_shoulder, r_elbow, r_wrist, r_hip as applicable.
AngleSeries extract_angle_series(const std::vector<KeypointFrame>& tracked,
                                 PrimitiveKind primitive);

/// Savitzky-Golay least-squares polynomial smoothing. Edge samples are
/// produced by evaluating the boundary-window fit at their positions, so
/// polynomials up to `order` pass through unchanged everywhere.
AngleSeries smooth_sg(const AngleSeries& series, int window, int order);

/// Locate the motion interval: samples whose speed exceeds 5% of the peak,
/// expanded outward to the enclosing local minima of speed.
MotionSegment segment_motion(const AngleSeries& series, const SegmentOptions& opts = {});

AngleSeries slice(const AngleSeries& series, const MotionSegment& seg);

/// Resample to 101 uniform points and standardize the amplitude per the
/// chosen convention. Raises ZeroAmplitudeError for flat input.
NormalizedSeries normalize(const AngleSeries& series, NormConvention convention);

/// Classify an elbow-convention normalized series (v[0]=1, min=0).
VariantLabel classify_variant(const NormalizedSeries& n, const VariantThresholds& th = {});

/// Keypoint JSON:
///   {"fps": 100, "frames": [{"t": 0.0, "skeletons": [{"points":
///     {"r_shoulder": [x, y, conf] or [x, y, z, conf], ...}}]}]}
KeypointRecording load_keypoints_json(const std::string& path);

/// Angle-series CSV: header `t,theta_deg`.
void write_angle_csv(const AngleSeries& series, const std::string& path);
AngleSeries read_angle_csv(const std::string& path, PrimitiveKind primitive);

/// Normalized-series CSV: header `u,v`.
void write_normalized_csv(const NormalizedSeries& series, const std::string& path);
NormalizedSeries read_normalized_csv(const std::string& path);

/// Full pipeline: track -> angles -> smooth -> segment -> normalize
/// (-> classify for the elbow). Stage failures carry the stage name in the
/// exception message.
struct PipelineOptions {
    TrackSeed seed;
    TrackOptions track;
    int sg_window = 11;
    int sg_order = 3;
    SegmentOptions segment;
    VariantThresholds thresholds;
};

struct PipelineResult {
    AngleSeries raw;
    AngleSeries smoothed;
    MotionSegment segment;
    NormalizedSeries normalized;
    std::optional<VariantLabel> variant; // elbow only
};

PipelineResult analyze_recording(const std::vector<KeypointFrame>& frames,
                                 PrimitiveKind primitive, const PipelineOptions& opts = {});

} // namespace jmm
