#include "jmm/fitting.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

namespace jmm {

namespace {

void check_grid(const NormalizedSeries& data, std::size_t min_points, const char* what) {
    if (data.u.size() != data.v.size()) {
        throw std::invalid_argument(std::string(what) + ": u and v lengths differ");
    }
    if (data.size() < min_points) {
        throw std::invalid_argument(std::string(what) + ": needs at least " +
                                    std::to_string(min_points) + " samples, got " +
                                    std::to_string(data.size()));
    }
    for (double x : data.u) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": u not finite");
    }
    for (double x : data.v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": v not finite");
    }
}

struct SigmoidEval {
    Eigen::VectorXd model;
    Eigen::MatrixXd jac; // w.r.t. (log a, log b, log c)
};

SigmoidEval eval_log_sigmoid(const Eigen::Vector3d& theta, const Eigen::VectorXd& u,
                             bool with_jacobian) {
    const double a = std::exp(theta[0]);
    const double b = std::exp(theta[1]);
    const double c = std::exp(theta[2]);
    SigmoidEval ev;
    ev.model.resize(u.size());
    if (with_jacobian) ev.jac.resize(u.size(), 3);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double E = std::exp(-c * u[i]);
        const double D = b + E;
        ev.model[i] = a / D;
        if (with_jacobian) {
            ev.jac(i, 0) = a / D;                    // d model / d log a
            ev.jac(i, 1) = -a * b / (D * D);         // d model / d log b
            ev.jac(i, 2) = a * c * u[i] * E / (D * D); // d model / d log c
        }
    }
    return ev;
}

} // namespace

SigmoidFitReport fit_sigmoid(const NormalizedSeries& data, const SigmoidCoefficients& init) {
    check_grid(data, 10, "fit_sigmoid");
    init.validate();

    const Eigen::Map<const Eigen::VectorXd> u(data.u.data(), static_cast<Eigen::Index>(data.u.size()));
    const Eigen::Map<const Eigen::VectorXd> v(data.v.data(), static_cast<Eigen::Index>(data.v.size()));

    Eigen::Vector3d theta{std::log(init.a), std::log(init.b), std::log(init.c)};

    auto sse_of = [&](const Eigen::Vector3d& th) {
        return (v - eval_log_sigmoid(th, u, false).model).squaredNorm();
    };

    SigmoidFitReport rep;
    double sse = sse_of(theta);
    rep.sse_trace.push_back(sse);
    double lambda = 1e-3;

    constexpr int kMaxIter = 200;
    constexpr double kRelTol = 1e-12;
    constexpr double kLambdaMax = 1e15;

    int iter = 0;
    bool stalled = false;
    while (iter < kMaxIter && !stalled && !rep.converged) {
        ++iter;
        const SigmoidEval ev = eval_log_sigmoid(theta, u, true);
        const Eigen::VectorXd residual = v - ev.model;
        const Eigen::Vector3d grad = ev.jac.transpose() * residual;
        const Eigen::Matrix3d normal = ev.jac.transpose() * ev.jac;

        bool accepted = false;
        while (!accepted && !stalled) {
            Eigen::Matrix3d damped = normal;
            for (int k = 0; k < 3; ++k) {
                damped(k, k) += lambda * std::max(normal(k, k), 1e-12);
            }
            const Eigen::Vector3d step = damped.ldlt().solve(grad);
            if (!step.allFinite() || (damped * step - grad).norm() > 1e-6 * (grad.norm() + 1.0)) {
                lambda *= 10.0;
                if (lambda > kLambdaMax) {
                    throw SingularJacobianError(
                        "normal-equation solve failed despite damping escalation");
                }
                continue;
            }
            const Eigen::Vector3d candidate = theta + step;
            const double candidate_sse = sse_of(candidate);
            if (std::isfinite(candidate_sse) && candidate_sse <= sse) {
                const double rel = std::abs(sse - candidate_sse) / std::max(sse, 1e-300);
                theta = candidate;
                sse = candidate_sse;
                rep.sse_trace.push_back(sse);
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (rel < kRelTol) rep.converged = true;
            } else {
                lambda *= 10.0;
                if (lambda > kLambdaMax) stalled = true; // no downhill step exists
            }
        }
    }

    const SigmoidEval final_ev = eval_log_sigmoid(theta, u, true);
    rep.coefficients = {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
    rep.sse = sse;
    rep.iterations = iter;
    rep.gradient_norm =
        (final_ev.jac.transpose() * (v - final_ev.model)).lpNorm<Eigen::Infinity>();
    if (rep.converged && rep.gradient_norm > 1e-6 * (1.0 + sse)) {
        // SSE stalled but the gradient is still large: do not claim convergence
        rep.converged = false;
    }

    std::vector<double> model(data.v.size());
    Eigen::Map<Eigen::VectorXd>(model.data(), final_ev.model.size()) = final_ev.model;
    rep.r_squared = r_squared(data.v, model);
    return rep;
}

PolyFitReport fit_poly7(const NormalizedSeries& data, std::optional<double> fix_intercept) {
    const std::size_t min_points = fix_intercept ? 8 : 9;
    check_grid(data, min_points, "fit_poly7");

    const auto n = static_cast<Eigen::Index>(data.size());
    const int first_power = fix_intercept ? 1 : 0;
    const int cols = 8 - first_power;

    Eigen::MatrixXd vand(n, cols);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int k = 0; k < first_power; ++k) p *= data.u[static_cast<std::size_t>(i)];
        for (int k = 0; k < cols; ++k) {
            vand(i, k) = p;
            p *= data.u[static_cast<std::size_t>(i)];
        }
        rhs[i] = data.v[static_cast<std::size_t>(i)] - (fix_intercept ? *fix_intercept : 0.0);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
        throw RankDeficientError("sample grid is degenerate: Vandermonde rank " +
                                 std::to_string(qr.rank()) + " < " + std::to_string(cols));
    }
    const Eigen::VectorXd sol = qr.solve(rhs);

    PolyFitReport rep;
    if (fix_intercept) rep.coefficients.c[0] = *fix_intercept;
    for (int k = 0; k < cols; ++k) {
        rep.coefficients.c[static_cast<std::size_t>(first_power + k)] = sol[k];
    }

    std::vector<double> model(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        model[i] = eval_poly7(rep.coefficients, std::clamp(data.u[i], 0.0, 1.0));
        const double r = data.v[i] - model[i];
        rep.sse += r * r;
    }
    rep.r_squared = r_squared(data.v, model);
    return rep;
}

double r_squared(const std::vector<double>& data, const std::vector<double>& model) {
    if (data.size() != model.size() || data.size() < 2) {
        throw std::invalid_argument("r_squared: need equal-length series of >= 2 points");
    }
    double mean = 0.0;
    for (double d : data) mean += d;
    mean /= static_cast<double>(data.size());

    double ss_tot = 0.0, ss_err = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ss_tot += (data[i] - mean) * (data[i] - mean);
        ss_err += (data[i] - model[i]) * (data[i] - model[i]);
    }
    if (ss_tot <= 0.0) {
        throw std::invalid_argument("r_squared: data has zero variance");
    }
    return 1.0 - ss_err / ss_tot;
}

NormalizedSeries mean_normalized(const std::vector<NormalizedSeries>& series) {
    if (series.empty()) throw std::invalid_argument("mean_normalized: no series");
    const std::size_t n = series.front().size();
    NormalizedSeries out = series.front();
    for (std::size_t s = 1; s < series.size(); ++s) {
        if (series[s].size() != n) {
            throw std::invalid_argument("mean_normalized: series lengths differ");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(series[s].u[i] - out.u[i]) > 1e-9) {
                throw std::invalid_argument("mean_normalized: series use different u grids");
            }
            out.v[i] += series[s].v[i];
        }
    }
    for (double& v : out.v) v /= static_cast<double>(series.size());
    return out;
}

namespace {

nlohmann::json report_json(const std::string& model, const std::vector<double>& coefficients,
                           double sse, double r2, int iterations, bool converged) {
    nlohmann::json j;
    j["model"] = model;
    j["coefficients"] = coefficients;
    j["sse"] = sse;
    j["r2"] = r2;
    j["iterations"] = iterations;
    j["converged"] = converged;
    return j;
}

} // namespace

std::string fit_report_json(const SigmoidFitReport& report) {
    return report_json("sigmoid",
                       {report.coefficients.a, report.coefficients.b, report.coefficients.c},
                       report.sse, report.r_squared, report.iterations, report.converged)
        .dump(2);
}

std::string fit_report_json(const PolyFitReport& report) {
    return report_json("poly7",
                       std::vector<double>(report.coefficients.c.begin(),
                                           report.coefficients.c.end()),
                       report.sse, report.r_squared, report.iterations, report.converged)
        .dump(2);
}

} // namespace jmm
