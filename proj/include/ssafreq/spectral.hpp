#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "ssafreq/errors.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/ssa.hpp"

namespace ssafreq::spectral {

// Reconstructed-component indices (1-based, matching the R_i naming) summed
// before Fourier analysis. Component 1 carries the envelope and is never
// eligible.
struct ComponentSelection {
    std::vector<Eigen::Index> indices;

    void validate(Eigen::Index n_c) const {
        if (indices.empty()) throw InvalidInputError("component selection must be nonempty");
        for (Eigen::Index i : indices) {
            if (i == 1) throw InvalidInputError("component 1 (envelope) cannot be selected");
            if (i < 2 || i > n_c) throw InvalidInputError("component index out of range");
        }
    }
};

struct SpectralEstimate {
    double delta_nu_hat = 0;  // Hz
    double peak_power = 0;    // parabola vertex ordinate (on-grid value if not interpolated)
    Eigen::VectorXd frequencies; // Hz, k/(L t_bin) for k = 0 .. L/2
    Eigen::VectorXd powers;      // |DFT|^2, no window
    std::vector<Eigen::Index> components_used;
    bool interpolated = false;   // false when the peak sat at the band edge
    bool low_confidence = false; // peak power under the noise-floor heuristic
};

// One-sided magnitude-squared DFT on the grid f_k = k/(L t_bin),
// k = 0 .. floor(L/2). Direct O(L^2) evaluation; L is ~100 here.
template <typename Derived>
std::pair<Eigen::VectorXd, Eigen::VectorXd> periodogram(const Eigen::MatrixBase<Derived>& signal,
                                                        double t_bin) {
    const Eigen::Index L = signal.size();
    if (L < 8) throw InvalidInputError("periodogram needs at least 8 samples");
    if (!(t_bin > 0)) throw InvalidInputError("t_bin must be positive");
    const Eigen::Index K = L / 2;
    Eigen::VectorXd freqs(K + 1), powers(K + 1);
    for (Eigen::Index k = 0; k <= K; ++k) {
        double re = 0, im = 0;
        for (Eigen::Index t = 0; t < L; ++t) {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) *
                                 static_cast<double>(t) / static_cast<double>(L);
            const double x = static_cast<double>(signal[t]);
            re += x * std::cos(phase);
            im += x * std::sin(phase);
        }
        freqs[k] = static_cast<double>(k) / (static_cast<double>(L) * t_bin);
        powers[k] = re * re + im * im;
    }
    return {std::move(freqs), std::move(powers)};
}

struct PeakInterpolation {
    double frequency = 0; // Hz
    double power = 0;     // vertex ordinate
    bool interpolated = false;
};

// Three-point parabolic refinement of an on-grid periodogram maximum. The
// vertex is clamped to one grid step; at the band edge no refinement is
// possible and the on-grid values are returned flagged.
inline PeakInterpolation interpolate_peak(const Eigen::VectorXd& frequencies,
                                          const Eigen::VectorXd& powers, Eigen::Index k_max) {
    if (k_max < 0 || k_max >= powers.size()) throw InvalidInputError("peak index out of range");
    PeakInterpolation out;
    if (k_max == 0 || k_max == powers.size() - 1) {
        out.frequency = frequencies[k_max];
        out.power = powers[k_max];
        out.interpolated = false;
        return out;
    }
    const double a = powers[k_max - 1], b = powers[k_max], c = powers[k_max + 1];
    const double den = a - 2.0 * b + c;
    double delta = den == 0 ? 0.0 : 0.5 * (a - c) / den;
    delta = std::clamp(delta, -1.0, 1.0);
    const double df = frequencies[1] - frequencies[0];
    out.frequency = frequencies[k_max] + delta * df;
    out.power = b - 0.5 * delta * delta * den;
    out.interpolated = true;
    return out;
}

// {2,3} by default; {2} when R_3 oscillates near the sampling rate, which
// marks it as a finite-statistics artifact rather than beat content.
inline ComponentSelection select_components(const ssa::SsaDecomposition& d, double t_bin,
                                            double fast_threshold = 0.8) {
    if (d.n_c < 3) throw InvalidInputError("component selection needs n_c >= 3");
    const auto [freqs, powers] = periodogram(d.reconstructed.row(2).transpose(), t_bin);
    Eigen::Index k_best = 1;
    powers.tail(powers.size() - 1).maxCoeff(&k_best);
    k_best += 1;
    const double nyquist = 0.5 / t_bin;
    if (freqs[k_best] > fast_threshold * nyquist) return ComponentSelection{{2}};
    return ComponentSelection{{2, 3}};
}

// Full estimator: SSA decomposition, beat-component summation, periodogram
// peak search (DC and its neighbor excluded), parabolic refinement.
inline SpectralEstimate estimate_delta_nu(const CoincidenceHistogram& hist,
                                          const ssa::EmbeddingConfig& cfg = {},
                                          std::optional<ComponentSelection> selection = std::nullopt,
                                          double fast_threshold = 0.8) {
    hist.validate();
    const Eigen::Index n_c = cfg.n_c;
    const Eigen::Index L = hist.counts.size();
    if (L <= 2 * n_c) throw InvalidInputError("histogram too short for the embedding dimension");
    if ((hist.counts.array() == hist.counts[0]).all())
        throw EstimationError("no oscillatory content");

    const ssa::SsaDecomposition d = ssa::decompose(hist.counts, n_c);
    const double t_bin = hist.bin_width();

    ComponentSelection sel = selection ? *selection : select_components(d, t_bin, fast_threshold);
    sel.validate(n_c);

    Eigen::VectorXd signal = Eigen::VectorXd::Zero(L);
    for (Eigen::Index i : sel.indices) signal += d.reconstructed.row(i - 1).transpose();

    SpectralEstimate est;
    std::tie(est.frequencies, est.powers) = periodogram(signal, t_bin);
    est.components_used = sel.indices;

    // global maximum over the search band: DC and its neighbor excluded
    constexpr Eigen::Index kSearchLo = 2;
    Eigen::Index k_best = kSearchLo;
    for (Eigen::Index k = kSearchLo; k < est.powers.size(); ++k)
        if (est.powers[k] > est.powers[k_best]) k_best = k;

    const PeakInterpolation peak = interpolate_peak(est.frequencies, est.powers, k_best);
    est.delta_nu_hat = peak.frequency;
    est.peak_power = peak.power;
    est.interpolated = peak.interpolated;

    // noise-floor heuristic: for Poisson counts the expected white-noise power
    // per periodogram bin is the total count, so a peak below that level is
    // indistinguishable from shot noise (and pure-envelope eigenfilter leakage
    // also lands there); callers may ignore this and threshold peak_power
    est.low_confidence = est.peak_power < hist.counts.sum();
    return est;
}

inline SpectralEstimate estimate_delta_nu(const CoincidenceHistogram& hist, Eigen::Index n_c,
                                          std::optional<ComponentSelection> selection = std::nullopt,
                                          double fast_threshold = 0.8) {
    return estimate_delta_nu(hist, ssa::EmbeddingConfig{n_c}, std::move(selection), fast_threshold);
}

} // namespace ssafreq::spectral
