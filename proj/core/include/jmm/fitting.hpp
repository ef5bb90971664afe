#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmm/analysis.hpp"
#include "jmm/profiles.hpp"

namespace jmm {

struct SingularJacobianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankDeficientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SigmoidFitReport {
    SigmoidCoefficients coefficients;
    double sse = 0.0;
    double r_squared = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;     // infinity norm of J^T r at the solution
    std::vector<double> sse_trace;  // SSE after each accepted step
};

struct PolyFitReport {
    PolyCoefficients coefficients;
    double sse = 0.0;
    double r_squared = 0.0;
    int iterations = 1;
    bool converged = true;
};

/// Levenberg-Marquardt fit of v ~ a / (b + e^(-c u)). Parameters are fitted
/// in log space so a, b, c stay positive. Damping starts at 1e-3, grows 10x
/// on a rejected step and shrinks 10x on an accepted one; iteration stops
/// when the relative SSE change drops below 1e-12 or after 200 iterations.
/// Non-convergence is reported through `converged`, not thrown; a solve
/// that stays singular through damping escalation throws
/// SingularJacobianError. Needs at least 10 samples and positive init.
SigmoidFitReport fit_sigmoid(const NormalizedSeries& data,
                             const SigmoidCoefficients& init = {1.0, 1.0, 10.0});

/// Linear least squares for the degree-7 polynomial on a QR-decomposed
/// Vandermonde system. `fix_intercept` pins c0 instead of fitting it.
/// Needs >= 9 samples (>= 8 with fixed intercept); degenerate grids throw
/// RankDeficientError.
PolyFitReport fit_poly7(const NormalizedSeries& data,
                        std::optional<double> fix_intercept = std::nullopt);

/// Coefficient of determination, 1 - SSE / SStot. Throws
/// std::invalid_argument when the data has zero variance.
double r_squared(const std::vector<double>& data, const std::vector<double>& model);

/// Pointwise arithmetic mean of normalized series sharing one u grid;
/// used to average recordings of one variant before fitting.
NormalizedSeries mean_normalized(const std::vector<NormalizedSeries>& series);

/// FitReport JSON:
///   {"model": "sigmoid"|"poly7", "coefficients": [...], "sse": s,
///    "r2": r, "iterations": n, "converged": b}
std::string fit_report_json(const SigmoidFitReport& report);
std::string fit_report_json(const PolyFitReport& report);

} // namespace jmm
