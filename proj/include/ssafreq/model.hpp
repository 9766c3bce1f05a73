#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "ssafreq/errors.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/rng.hpp"

namespace ssafreq::model {

namespace detail {

// 16-node Gauss-Legendre rule on [-1, 1]; exact through degree 31, which is
// far beyond what the smooth per-bin integrand needs for 1e-6 accuracy.
inline constexpr std::array<double, 16> kGlNodes = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};

inline constexpr std::array<double, 16> kGlWeights = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

} // namespace detail

// Coincidence density at delay t: wave-packet envelope minus the v-weighted
// interference beat, damped exponentially (lifetimes + dephasing) and by the
// Gaussian spectral-wandering factor. Even in t. Templated on scalar so tests
// can cross-check the double path against long double.
template <typename Scalar = double>
Scalar eval_g2(const EmitterPairParams& p, Scalar t) {
    p.validate();
    const auto tau1 = static_cast<Scalar>(p.tau1);
    const auto tau2 = static_cast<Scalar>(p.tau2);
    const Scalar at = std::abs(t);
    const Scalar inv_sum = Scalar(1) / (tau1 + tau2);
    const Scalar envelope = Scalar(0.25) * inv_sum * (std::exp(-at / tau1) + std::exp(-at / tau2));
    const auto gamma = static_cast<Scalar>(p.gamma_total());
    const auto sig_sq = static_cast<Scalar>(p.sigma_sq_total());
    const Scalar two_pi_sq = Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar>;
    const Scalar beat = static_cast<Scalar>(p.v) * Scalar(0.5) * inv_sum *
                        std::exp(-gamma * at - two_pi_sq * sig_sq * t * t) *
                        std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * static_cast<Scalar>(p.delta_nu) * t);
    return envelope - beat;
}

inline Eigen::VectorXd bin_centers(const MeasurementConfig& cfg) {
    cfg.validate();
    const auto L = static_cast<Eigen::Index>(cfg.bins());
    Eigen::VectorXd t(L);
    for (Eigen::Index i = 0; i < L; ++i)
        t[i] = -cfg.t_meas + (static_cast<double>(i) + 0.5) * cfg.t_bin;
    return t;
}

// Per-bin integrals of eval_g2, normalized to sum 1. Shared by the simulator,
// the fit model, and the Fisher derivatives.
inline Eigen::VectorXd binned_weights(const EmitterPairParams& p, const Eigen::VectorXd& t_centers,
                                      double t_bin) {
    p.validate();
    Eigen::VectorXd w(t_centers.size());
    for (Eigen::Index i = 0; i < t_centers.size(); ++i) {
        double acc = 0;
        for (std::size_t q = 0; q < detail::kGlNodes.size(); ++q) {
            const double t = t_centers[i] + 0.5 * t_bin * detail::kGlNodes[q];
            acc += detail::kGlWeights[q] * eval_g2(p, t);
        }
        w[i] = 0.5 * t_bin * acc;
    }
    const double total = w.sum();
    if (!(total > 0)) throw EstimationError("degenerate profile: bin integrals sum to zero");
    return w / total;
}

// Expected counts n_i = n_tot * g_i on the full delay axis.
inline CoincidenceHistogram bin_profile(const EmitterPairParams& p, const MeasurementConfig& cfg) {
    cfg.validate();
    CoincidenceHistogram h;
    h.t_centers = bin_centers(cfg);
    h.counts = cfg.n_tot * binned_weights(p, h.t_centers, cfg.t_bin);
    return h;
}

// Independent Poisson draw per bin; bit-reproducible for a fixed seed.
inline CoincidenceHistogram sample_histogram(const CoincidenceHistogram& expected, std::uint64_t seed) {
    expected.validate();
    std::mt19937_64 gen(seed);
    CoincidenceHistogram out;
    out.t_centers = expected.t_centers;
    out.counts.resize(expected.counts.size());
    for (Eigen::Index i = 0; i < expected.counts.size(); ++i)
        out.counts[i] = static_cast<double>(rng::poisson(expected.counts[i], gen));
    return out;
}

// Statistical mixture of two profiles that differ only in delta_nu: the
// expected histogram when the separation jumps between two values during the
// acquisition, spending a fraction w at params_a.
inline CoincidenceHistogram mix_jump(const EmitterPairParams& a, const EmitterPairParams& b, double w,
                                     const MeasurementConfig& cfg) {
    if (!(w >= 0 && w <= 1)) throw InvalidInputError("mixture weight w must lie in [0, 1]");
    const bool same = a.tau1 == b.tau1 && a.tau2 == b.tau2 && a.gamma1 == b.gamma1 &&
                      a.gamma2 == b.gamma2 && a.sigma1 == b.sigma1 && a.sigma2 == b.sigma2 &&
                      a.v == b.v;
    if (!same) throw InvalidInputError("mix_jump requires parameters that differ only in delta_nu");
    CoincidenceHistogram ha = bin_profile(a, cfg);
    const CoincidenceHistogram hb = bin_profile(b, cfg);
    ha.counts = w * ha.counts + (1.0 - w) * hb.counts;
    return ha;
}

} // namespace ssafreq::model
