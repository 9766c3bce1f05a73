#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "ssafreq/errors.hpp"
#include "ssafreq/model.hpp"
#include "ssafreq/params.hpp"

namespace ssafreq::fisher {

struct FisherPoint {
    double fisher = 0;        // per-event information, 1/Hz^2
    int dropped_bins = 0;     // bins excluded for g_i < 1e-15 (v = 1 interference null)
};

// Per-event Fisher information of the multinomial bin distribution with
// respect to delta_nu: sum_i (dg_i/d delta_nu)^2 / g_i, with the derivative
// taken as a central finite difference of the normalized binned profile.
inline FisherPoint fisher_info(const EmitterPairParams& params, const MeasurementConfig& cfg,
                               double delta_nu, double step = 1e6) {
    if (!(step > 0)) throw InvalidInputError("finite-difference step must be positive");
    params.validate();
    cfg.validate();

    const Eigen::VectorXd t = model::bin_centers(cfg);
    EmitterPairParams p0 = params;
    p0.delta_nu = delta_nu;
    EmitterPairParams pp = params;
    pp.delta_nu = delta_nu + step;
    EmitterPairParams pm = params;
    pm.delta_nu = std::abs(delta_nu - step); // g is even in delta_nu

    const Eigen::VectorXd g0 = model::binned_weights(p0, t, cfg.t_bin);
    const Eigen::VectorXd gp = model::binned_weights(pp, t, cfg.t_bin);
    const Eigen::VectorXd gm = model::binned_weights(pm, t, cfg.t_bin);

    FisherPoint out;
    constexpr double kFloor = 1e-15;
    for (Eigen::Index i = 0; i < g0.size(); ++i) {
        if (g0[i] < kFloor) {
            ++out.dropped_bins;
            continue;
        }
        const double d = (gp[i] - gm[i]) / (2.0 * step);
        out.fisher += d * d / g0[i];
    }
    return out;
}

struct FisherResult {
    Eigen::VectorXd delta_nu_grid; // Hz
    Eigen::VectorXd fisher;        // per event, 1/Hz^2
    Eigen::VectorXd crb_sigma;     // 1/sqrt(n_tot * F), Hz; inf where F = 0
    Eigen::VectorXi dropped_bins;
};

// Fisher curve over a delta_nu grid with the single-parameter Cramer-Rao
// bound at the configured n_tot.
inline FisherResult crb_curve(const EmitterPairParams& params, const MeasurementConfig& cfg,
                              const Eigen::VectorXd& grid, double step = 1e6) {
    cfg.validate();
    const double nyquist = 0.5 / cfg.t_bin;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (!(grid[i] > 0 && grid[i] < nyquist))
            throw InvalidInputError("delta_nu grid must lie inside (0, Nyquist)");

    FisherResult out;
    out.delta_nu_grid = grid;
    out.fisher.resize(grid.size());
    out.crb_sigma.resize(grid.size());
    out.dropped_bins.resize(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const FisherPoint pt = fisher_info(params, cfg, grid[i], step);
        out.fisher[i] = pt.fisher;
        out.dropped_bins[i] = pt.dropped_bins;
        out.crb_sigma[i] = pt.fisher > 0
                               ? 1.0 / std::sqrt(cfg.n_tot * pt.fisher)
                               : std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace ssafreq::fisher
