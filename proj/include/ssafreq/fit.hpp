#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "ssafreq/errors.hpp"
#include "ssafreq/model.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/spectral.hpp"

namespace ssafreq::fit {

// Free parameters of the least-squares model A * g(theta): tau1, tau2, the
// total beat damping gamma, the combined wandering Sigma, v, delta_nu, A.
// Only the sums gamma and Sigma are identifiable, so the per-emitter split is
// not fitted.
struct FitResult {
    EmitterPairParams params_hat; // gamma/sigma split evenly between emitters
    double amplitude = 0;         // normalization factor A
    bool converged = false;
    double rss = 0;
    int iterations = 0;
    double wall_time = 0; // seconds
};

namespace detail {

using Theta = Eigen::Matrix<double, 7, 1>;

// characteristic magnitudes used for relative-step tests and FD step sizing;
// only relevant where a parameter sits near zero
inline const Theta kFloors = (Theta() << 1e-10, 1e-10, 1e6, 1e6, 1e-3, 1e6, 1e-3).finished();

inline Theta project(Theta th, double nyquist) {
    th[0] = std::max(th[0], 1e-12);
    th[1] = std::max(th[1], 1e-12);
    th[2] = std::max(th[2], 0.5 / th[0] + 0.5 / th[1]);
    th[3] = std::max(th[3], 0.0);
    th[4] = std::clamp(th[4], 0.0, 1.0);
    th[5] = std::clamp(th[5], 0.0, 2.0 * nyquist);
    return th;
}

inline EmitterPairParams to_params(const Theta& th) {
    EmitterPairParams p;
    p.tau1 = th[0];
    p.tau2 = th[1];
    const double dephasing = std::max(th[2] - 0.5 / th[0] - 0.5 / th[1], 0.0);
    p.gamma1 = p.gamma2 = 0.5 * dephasing;
    p.sigma1 = p.sigma2 = th[3] / std::numbers::sqrt2;
    p.v = th[4];
    p.delta_nu = th[5];
    return p;
}

inline Eigen::VectorXd model_counts(const Theta& th, const Eigen::VectorXd& t_centers, double t_bin) {
    return th[6] * model::binned_weights(to_params(th), t_centers, t_bin);
}

} // namespace detail

// Levenberg-damped Gauss-Newton on the unweighted squared residuals, raw SI
// parameters, Marquardt diagonal damping, forward-difference Jacobian, box
// constraints by projection. Convergence requires both the component-wise
// relative step and the relative rss decrease of an accepted step to fall
// under 1e-8; exhausting the budget reports converged=false, never a throw.
inline FitResult fit_model(const CoincidenceHistogram& hist, const EmitterPairParams& init,
                           std::optional<double> init_amplitude = std::nullopt, int budget = 100) {
    const auto t_start = std::chrono::steady_clock::now();
    hist.validate();
    init.validate();
    const double t_bin = hist.bin_width();
    const double nyquist = 0.5 / t_bin;

    detail::Theta th;
    th << init.tau1, init.tau2, init.gamma_total(), std::sqrt(init.sigma_sq_total()), init.v,
        init.delta_nu, init_amplitude.value_or(hist.counts.sum());
    if (th[6] <= 0) th[6] = 1.0;
    th = detail::project(th, nyquist);

    constexpr double kTol = 1e-8;
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    Eigen::VectorXd resid = hist.counts - detail::model_counts(th, hist.t_centers, t_bin);
    double rss = resid.squaredNorm();

    FitResult out;
    out.rss = rss;
    double lambda = 1e-3;
    int it = 0;
    bool converged = false;

    while (it < budget && !converged) {
        ++it;
        const Eigen::VectorXd m0 = detail::model_counts(th, hist.t_centers, t_bin);
        Eigen::MatrixXd J(hist.counts.size(), 7);
        for (int p = 0; p < 7; ++p) {
            double h = sqrt_eps * std::max(std::abs(th[p]), detail::kFloors[p]);
            detail::Theta tp = th;
            tp[p] += h;
            // difference inward when the forward point leaves the feasible
            // box (e.g. v at its upper bound), where the model cannot be
            // evaluated
            if ((detail::project(tp, nyquist) - tp).cwiseAbs().maxCoeff() != 0.0) {
                h = -h;
                tp = th;
                tp[p] += h;
            }
            J.col(p) = (detail::model_counts(tp, hist.t_centers, t_bin) - m0) / h;
        }
        const Eigen::VectorXd g = J.transpose() * (hist.counts - m0);
        const Eigen::MatrixXd JtJ = J.transpose() * J;

        while (true) {
            Eigen::MatrixXd damped = JtJ;
            for (int p = 0; p < 7; ++p)
                damped(p, p) += lambda * std::max(JtJ(p, p), 1e-30);
            const detail::Theta step = damped.ldlt().solve(g);
            const detail::Theta proposed = detail::project(th + step, nyquist);
            double step_rel = 0;
            for (int p = 0; p < 7; ++p)
                step_rel = std::max(step_rel, std::abs(proposed[p] - th[p]) /
                                                  std::max(std::abs(th[p]), detail::kFloors[p]));
            const Eigen::VectorXd r_new =
                hist.counts - detail::model_counts(proposed, hist.t_centers, t_bin);
            const double rss_new = r_new.squaredNorm();
            // a vanishing step that cannot lower rss means the iterate is
            // already stationary (e.g. a residual-free start); accept and stop
            const bool stationary = rss_new == rss && step_rel < kTol;
            if (rss_new < rss || stationary) {
                const double rss_rel = (rss - rss_new) / std::max(rss, 1e-300);
                th = proposed;
                rss = rss_new;
                lambda = std::max(lambda / 10.0, 1e-15);
                if (step_rel < kTol && rss_rel < kTol) converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e30) break; // no acceptable step at this iterate
        }
    }

    out.params_hat = detail::to_params(th);
    out.amplitude = th[6];
    out.converged = converged;
    out.rss = rss;
    out.iterations = it;
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

// Wall-clock one SSA estimate and one full fit on the same histogram.
struct SpeedComparison {
    double ssa_time = 0; // seconds
    double fit_time = 0; // seconds
};

inline SpeedComparison compare_speed(const CoincidenceHistogram& hist, const EmitterPairParams& init,
                                     int budget = 100) {
    SpeedComparison out;
    const auto t0 = std::chrono::steady_clock::now();
    volatile double sink = spectral::estimate_delta_nu(hist).delta_nu_hat;
    (void)sink;
    const auto t1 = std::chrono::steady_clock::now();
    const FitResult fr = fit_model(hist, init, std::nullopt, budget);
    const auto t2 = std::chrono::steady_clock::now();
    out.ssa_time = std::chrono::duration<double>(t1 - t0).count();
    out.fit_time = std::chrono::duration<double>(t2 - t1).count();
    (void)fr;
    return out;
}

} // namespace ssafreq::fit
