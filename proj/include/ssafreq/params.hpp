#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>

#include "ssafreq/errors.hpp"

namespace ssafreq {

// Physical parameters of the two emitters. SI units throughout (seconds, Hz);
// the CLI layer converts from/to ns and MHz.
struct EmitterPairParams {
    double tau1 = 0;     // lifetime of emitter 1, s
    double tau2 = 0;     // lifetime of emitter 2, s
    double gamma1 = 0;   // pure-dephasing rate of emitter 1, Hz
    double gamma2 = 0;   // pure-dephasing rate of emitter 2, Hz
    double sigma1 = 0;   // spectral-wandering std of emitter 1, Hz
    double sigma2 = 0;   // spectral-wandering std of emitter 2, Hz
    double delta_nu = 0; // central-frequency separation, Hz
    double v = 1.0;      // interference visibility factor, in [0, 1]

    // total exponential damping rate of the beat term
    double gamma_total() const { return 0.5 / tau1 + 0.5 / tau2 + gamma1 + gamma2; }
    // combined wandering variance
    double sigma_sq_total() const { return sigma1 * sigma1 + sigma2 * sigma2; }

    void validate() const {
        if (!(tau1 > 0) || !(tau2 > 0)) throw InvalidInputError("lifetimes must be positive");
        if (gamma1 < 0 || gamma2 < 0) throw InvalidInputError("dephasing rates must be nonnegative");
        if (sigma1 < 0 || sigma2 < 0) throw InvalidInputError("wandering sigmas must be nonnegative");
        if (!(v >= 0 && v <= 1)) throw InvalidInputError("visibility v must lie in [0, 1]");
        if (delta_nu < 0) throw InvalidInputError("delta_nu must be nonnegative");
        if (!std::isfinite(tau1) || !std::isfinite(tau2) || !std::isfinite(gamma1) ||
            !std::isfinite(gamma2) || !std::isfinite(sigma1) || !std::isfinite(sigma2) ||
            !std::isfinite(delta_nu) || !std::isfinite(v))
            throw InvalidInputError("parameters must be finite");
    }
};

// Time-binning and statistics of one coincidence measurement. The histogram
// covers [-t_meas, +t_meas) with L = round(2 t_meas / t_bin) bins.
struct MeasurementConfig {
    double t_bin = 0;  // bin width, s
    double t_meas = 0; // half-span of the delay axis, s
    double n_tot = 0;  // expected total number of coincidence events

    std::size_t bins() const { return static_cast<std::size_t>(std::llround(2.0 * t_meas / t_bin)); }

    void validate() const {
        if (!(t_bin > 0)) throw InvalidInputError("t_bin must be positive");
        if (!(t_meas > t_bin)) throw InvalidInputError("t_meas must exceed t_bin");
        if (bins() < 4) throw InvalidInputError("need at least 4 bins");
        if (!(n_tot >= 0) || !std::isfinite(n_tot)) throw InvalidInputError("n_tot must be a nonnegative finite count");
    }
};

// Time-binned coincidence counts: the series X analyzed by the estimator.
// counts may hold expectations (real) or sampled events (integer-valued).
struct CoincidenceHistogram {
    Eigen::VectorXd t_centers; // bin-center delays, s, strictly increasing
    Eigen::VectorXd counts;    // nonnegative, same length

    std::size_t size() const { return static_cast<std::size_t>(counts.size()); }

    double bin_width() const {
        if (t_centers.size() < 2) throw InvalidInputError("histogram needs at least 2 bins");
        return t_centers[1] - t_centers[0];
    }

    void validate() const {
        if (t_centers.size() != counts.size()) throw InvalidInputError("t_centers/counts length mismatch");
        if (t_centers.size() < 2) throw InvalidInputError("histogram needs at least 2 bins");
        const double dt = bin_width();
        if (!(dt > 0)) throw InvalidInputError("t_centers must be strictly increasing");
        for (Eigen::Index i = 1; i < t_centers.size(); ++i) {
            const double step = t_centers[i] - t_centers[i - 1];
            if (std::abs(step - dt) > 1e-9 * dt)
                throw InvalidInputError("t_centers must be uniformly spaced");
        }
        for (Eigen::Index i = 0; i < counts.size(); ++i) {
            if (!(counts[i] >= 0) || !std::isfinite(counts[i]))
                throw InvalidInputError("counts must be nonnegative and finite");
        }
    }
};

} // namespace ssafreq
