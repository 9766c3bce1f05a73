#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ssafreq/errors.hpp"
#include "ssafreq/model.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/rng.hpp"
#include "ssafreq/spectral.hpp"
#include "ssafreq/ssa.hpp"

namespace ssafreq::studies {

// Sample spread and accuracy of a batch of estimates: eps_v is the population
// standard deviation, eps_rms the root-mean-square departure from the target.
// They satisfy eps_rms^2 = eps_v^2 + bias^2 with bias = mean - target.
struct MetrologyErrors {
    double eps_v = 0;
    double eps_rms = 0;
};

inline MetrologyErrors metrology_errors(const std::vector<double>& estimates, double target) {
    if (estimates.size() < 2) throw InvalidInputError("metrology errors need at least 2 estimates");
    const double n = static_cast<double>(estimates.size());
    double mean = 0;
    for (double e : estimates) mean += e;
    mean /= n;
    double var = 0, msq = 0;
    for (double e : estimates) {
        var += (e - mean) * (e - mean);
        msq += (e - target) * (e - target);
    }
    return {std::sqrt(var / n), std::sqrt(msq / n)};
}

enum class SweepParameter { NTot, V, Sigma, Gamma, NC, JumpW, DeltaNu, TBin };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::NTot: return "n_tot";
        case SweepParameter::V: return "v";
        case SweepParameter::Sigma: return "sigma";
        case SweepParameter::Gamma: return "gamma";
        case SweepParameter::NC: return "n_c";
        case SweepParameter::JumpW: return "jump_w";
        case SweepParameter::DeltaNu: return "delta_nu";
        case SweepParameter::TBin: return "t_bin";
    }
    throw InvalidInputError("unknown sweep parameter");
}

inline SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "n_tot") return SweepParameter::NTot;
    if (name == "v") return SweepParameter::V;
    if (name == "sigma") return SweepParameter::Sigma;
    if (name == "gamma") return SweepParameter::Gamma;
    if (name == "n_c") return SweepParameter::NC;
    if (name == "jump_w") return SweepParameter::JumpW;
    if (name == "delta_nu") return SweepParameter::DeltaNu;
    if (name == "t_bin") return SweepParameter::TBin;
    throw InvalidInputError("unknown sweep parameter: " + name);
}

// One Monte Carlo sweep: hold the base configuration fixed, vary one knob
// across `values`, and at every point simulate and re-estimate runs_per_point
// independent Poisson realizations.
//
// Unit conventions for the swept value: sigma and gamma sweep the *combined*
// quantities (total wandering width Sigma and total dephasing Gamma1+Gamma2),
// split evenly between the two emitters; t_bin and delta_nu are in seconds
// and Hz; n_tot and n_c are counts; jump_w is the fraction of the acquisition
// spent at the base separation, the remainder at jump_delta_nu_b.
struct SweepSpec {
    SweepParameter swept_parameter = SweepParameter::NTot;
    std::vector<double> values;
    EmitterPairParams base_params;
    MeasurementConfig base_config;
    ssa::EmbeddingConfig embedding;
    double jump_delta_nu_b = 300e6; // Hz; the second separation for jump_w sweeps
    int runs_per_point = 1000;
    std::uint64_t seed = 0;

    void validate() const {
        if (values.empty()) throw InvalidInputError("sweep needs at least one value");
        if (runs_per_point < 2) throw InvalidInputError("runs_per_point must be at least 2");
        base_params.validate();
        base_config.validate();
        if (swept_parameter == SweepParameter::JumpW &&
            (!(jump_delta_nu_b >= 0) || !std::isfinite(jump_delta_nu_b)))
            throw InvalidInputError("jump_delta_nu_b must be a nonnegative frequency");
    }
};

// Accuracy against one target frequency. eps_v lives on the point (it does
// not depend on the target); a jump_w point carries one entry per pure value.
struct TargetError {
    double target = 0;   // Hz
    double eps_rms = 0;  // Hz
    double bias = 0;     // mean - target, Hz
};

struct PointReport {
    double swept_value = 0;
    std::vector<double> estimates; // one per run, NaN where the run failed
    int failures = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();  // over successful runs
    double eps_v = std::numeric_limits<double>::quiet_NaN(); // population std over successes
    std::vector<TargetError> targets;
};

struct StudyReport {
    SweepSpec spec; // provenance: the exact configuration that produced the numbers
    std::vector<PointReport> per_point;
};

namespace detail {

struct SweepPoint {
    CoincidenceHistogram expected;
    ssa::EmbeddingConfig embedding;
    std::vector<double> targets;
};

inline SweepPoint materialize_point(const SweepSpec& spec, double value) {
    EmitterPairParams p = spec.base_params;
    MeasurementConfig cfg = spec.base_config;
    ssa::EmbeddingConfig emb = spec.embedding;
    SweepPoint out;
    out.targets = {p.delta_nu};
    switch (spec.swept_parameter) {
        case SweepParameter::NTot:
            cfg.n_tot = value;
            break;
        case SweepParameter::V:
            p.v = value;
            break;
        case SweepParameter::Sigma: // combined width, split evenly
            p.sigma1 = p.sigma2 = value / std::sqrt(2.0);
            break;
        case SweepParameter::Gamma: // combined dephasing, split evenly
            p.gamma1 = p.gamma2 = value / 2.0;
            break;
        case SweepParameter::NC:
            emb.n_c = static_cast<Eigen::Index>(std::llround(value));
            break;
        case SweepParameter::DeltaNu:
            p.delta_nu = value;
            out.targets = {value};
            break;
        case SweepParameter::TBin:
            cfg.t_bin = value;
            break;
        case SweepParameter::JumpW: {
            EmitterPairParams pb = p;
            pb.delta_nu = spec.jump_delta_nu_b;
            out.expected = model::mix_jump(p, pb, value, cfg);
            out.targets = {p.delta_nu, spec.jump_delta_nu_b};
            out.embedding = emb;
            return out;
        }
    }
    out.expected = model::bin_profile(p, cfg);
    out.embedding = emb;
    return out;
}

inline void summarize_point(PointReport& pr, const std::vector<double>& targets) {
    std::vector<double> ok;
    ok.reserve(pr.estimates.size());
    for (double e : pr.estimates)
        if (!std::isnan(e)) ok.push_back(e);
    pr.failures = static_cast<int>(pr.estimates.size() - ok.size());
    if (!ok.empty()) {
        double mean = 0;
        for (double e : ok) mean += e;
        pr.mean = mean / static_cast<double>(ok.size());
    }
    for (double target : targets) {
        TargetError te;
        te.target = target;
        te.bias = pr.mean - target;
        if (ok.size() >= 2) {
            const MetrologyErrors me = metrology_errors(ok, target);
            pr.eps_v = me.eps_v;
            te.eps_rms = me.eps_rms;
        } else {
            te.eps_rms = std::numeric_limits<double>::quiet_NaN();
        }
        pr.targets.push_back(te);
    }
}

} // namespace detail

// Runs the full sweep. Every (point, run) pair gets its own RNG seed derived
// from the master seed, so the report is bit-identical for a fixed spec no
// matter how many worker threads execute it or in which order runs finish.
// A run fails (NaN estimate) when the estimator throws or its peak sits at
// the band edge; failed runs are excluded from mean/eps but counted.
inline StudyReport run_sweep(const SweepSpec& spec, unsigned n_threads = 0) {
    spec.validate();
    StudyReport report;
    report.spec = spec;
    report.per_point.resize(spec.values.size());

    std::vector<detail::SweepPoint> points;
    points.reserve(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        points.push_back(detail::materialize_point(spec, spec.values[i]));
        report.per_point[i].swept_value = spec.values[i];
        report.per_point[i].estimates.assign(static_cast<std::size_t>(spec.runs_per_point),
                                             std::numeric_limits<double>::quiet_NaN());
    }

    const std::size_t runs = static_cast<std::size_t>(spec.runs_per_point);
    const std::size_t total = spec.values.size() * runs;
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, total));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1, std::memory_order_relaxed);
            if (job >= total) return;
            const std::size_t point = job / runs;
            const std::size_t run = job % runs;
            try {
                const std::uint64_t run_seed =
                    rng::derive_seed(spec.seed, static_cast<std::uint64_t>(point),
                                     static_cast<std::uint64_t>(run));
                const CoincidenceHistogram sample =
                    model::sample_histogram(points[point].expected, run_seed);
                try {
                    const spectral::SpectralEstimate est =
                        spectral::estimate_delta_nu(sample, points[point].embedding);
                    if (est.interpolated)
                        report.per_point[point].estimates[run] = est.delta_nu_hat;
                } catch (const std::exception&) {
                    // estimator failure: slot stays NaN
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < points.size(); ++i)
        detail::summarize_point(report.per_point[i], points[i].targets);
    return report;
}

struct BootstrapResult {
    double delta_nu_hat = 0; // estimate on the observed histogram, Hz
    double sigma_hat = std::numeric_limits<double>::quiet_NaN(); // resample spread, Hz
    int failures = 0;        // resamples where estimation failed
    bool unreliable = false; // more than half of the resamples failed
};

// Poisson-bootstrap uncertainty for one observed histogram: re-estimate on
// n_resamples histograms drawn with per-bin means equal to the observed
// counts; sigma_hat is the population standard deviation of the successful
// re-estimates. An estimation failure on the original histogram propagates.
inline BootstrapResult bootstrap_uncertainty(const CoincidenceHistogram& hist, int n_resamples,
                                             std::uint64_t seed,
                                             const ssa::EmbeddingConfig& embedding = {}) {
    if (n_resamples < 100) throw InvalidInputError("bootstrap needs at least 100 resamples");
    hist.validate();

    BootstrapResult out;
    out.delta_nu_hat = spectral::estimate_delta_nu(hist, embedding).delta_nu_hat;

    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(n_resamples));
    for (int r = 0; r < n_resamples; ++r) {
        const std::uint64_t run_seed = rng::derive_seed(seed, 0, static_cast<std::uint64_t>(r));
        const CoincidenceHistogram resample = model::sample_histogram(hist, run_seed);
        try {
            const spectral::SpectralEstimate est = spectral::estimate_delta_nu(resample, embedding);
            if (!est.interpolated) throw EstimationError("peak at band edge");
            estimates.push_back(est.delta_nu_hat);
        } catch (const std::exception&) {
            ++out.failures;
        }
    }

    out.unreliable = out.failures * 2 > n_resamples;
    if (estimates.size() >= 2)
        out.sigma_hat = metrology_errors(estimates, 0.0).eps_v;
    else
        out.unreliable = true;
    return out;
}

} // namespace ssafreq::studies
