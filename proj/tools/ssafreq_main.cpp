// Command-line front end: simulate coincidence histograms, estimate the
// frequency separation, run the least-squares baseline, Fisher/CRB curves,
// Monte Carlo sweeps, and Poisson-bootstrap uncertainties.
//
// Exit codes: 0 success, 2 invalid input, 3 estimation failure, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssafreq/ssafreq.hpp"

namespace {

using ssafreq::CoincidenceHistogram;
using ssafreq::EmitterPairParams;
using ssafreq::InvalidInputError;
using ssafreq::MeasurementConfig;

// Options shared by every subcommand.
struct CommandConfig {
    std::string subcommand;
    std::string in_path;
    std::string out_path = "-";
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

// Unit-suffixed overrides applied on top of a parameter file.
struct ParamOverrides {
    std::optional<double> tau1_ns, tau2_ns, gamma1_MHz, gamma2_MHz, sigma1_MHz, sigma2_MHz,
        delta_nu_MHz, v, t_bin_ns, t_meas_ns, n_tot;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--tau1-ns", tau1_ns, "Override lifetime of emitter 1 [ns]");
        cmd->add_option("--tau2-ns", tau2_ns, "Override lifetime of emitter 2 [ns]");
        cmd->add_option("--gamma1-MHz", gamma1_MHz, "Override dephasing rate of emitter 1 [MHz]");
        cmd->add_option("--gamma2-MHz", gamma2_MHz, "Override dephasing rate of emitter 2 [MHz]");
        cmd->add_option("--sigma1-MHz", sigma1_MHz, "Override wandering width of emitter 1 [MHz]");
        cmd->add_option("--sigma2-MHz", sigma2_MHz, "Override wandering width of emitter 2 [MHz]");
        cmd->add_option("--delta-nu-MHz", delta_nu_MHz, "Override frequency separation [MHz]");
        cmd->add_option("--v", v, "Override interference visibility factor");
        cmd->add_option("--t-bin-ns", t_bin_ns, "Override bin width [ns]");
        cmd->add_option("--t-meas-ns", t_meas_ns, "Override delay half-span [ns]");
        cmd->add_option("--n-tot", n_tot, "Override expected total coincidence count");
    }

    void apply(ssafreq::io::SimulationInput& in) const {
        if (tau1_ns) in.params.tau1 = *tau1_ns * 1e-9;
        if (tau2_ns) in.params.tau2 = *tau2_ns * 1e-9;
        if (gamma1_MHz) in.params.gamma1 = *gamma1_MHz * 1e6;
        if (gamma2_MHz) in.params.gamma2 = *gamma2_MHz * 1e6;
        if (sigma1_MHz) in.params.sigma1 = *sigma1_MHz * 1e6;
        if (sigma2_MHz) in.params.sigma2 = *sigma2_MHz * 1e6;
        if (delta_nu_MHz) in.params.delta_nu = *delta_nu_MHz * 1e6;
        if (v) in.params.v = *v;
        if (t_bin_ns) in.config.t_bin = *t_bin_ns * 1e-9;
        if (t_meas_ns) in.config.t_meas = *t_meas_ns * 1e-9;
        if (n_tot) in.config.n_tot = *n_tot;
        in.params.validate();
        in.config.validate();
    }
};

void emit(const std::string& path, const std::string& content) {
    if (path == "-")
        std::cout << content;
    else
        ssafreq::io::write_text_file(path, content);
}

void emit(const std::string& path, const ssafreq::io::json& j) {
    if (path == "-")
        std::cout << j.dump(2) << "\n";
    else
        ssafreq::io::write_json_file(path, j);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
    if (given) return *given;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

std::optional<ssafreq::spectral::ComponentSelection> parse_components(const std::string& text) {
    if (text == "auto") return std::nullopt;
    ssafreq::spectral::ComponentSelection sel;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string field = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            sel.indices.push_back(std::stoll(field, &used));
            if (used != field.size()) throw InvalidInputError("");
        } catch (const std::exception&) {
            throw InvalidInputError("--components must be 'auto' or a comma-separated index list, got '" +
                                    text + "'");
        }
        pos = comma + 1;
    }
    return sel;
}

int run_simulate(const CommandConfig& cc, const ParamOverrides& ov, bool sample) {
    ssafreq::io::SimulationInput in = ssafreq::io::read_params_json(cc.in_path);
    ov.apply(in);
    CoincidenceHistogram hist = ssafreq::model::bin_profile(in.params, in.config);
    if (sample) hist = ssafreq::model::sample_histogram(hist, resolve_seed(cc.seed));
    emit(cc.out_path, ssafreq::io::histogram_to_csv(hist));
    if (cc.verbose)
        std::cerr << "simulated " << hist.size() << " bins, total expected counts "
                  << in.config.n_tot << "\n";
    return 0;
}

int run_analyze(const CommandConfig& cc, long long n_c, const std::string& components,
                const std::string& dump_path) {
    const CoincidenceHistogram hist = ssafreq::io::read_histogram_csv(cc.in_path);
    const ssafreq::ssa::EmbeddingConfig emb{static_cast<Eigen::Index>(n_c)};
    const auto selection = parse_components(components);
    const ssafreq::spectral::SpectralEstimate est =
        ssafreq::spectral::estimate_delta_nu(hist, emb, selection);
    if (!est.interpolated)
        std::cerr << "warning: periodogram peak at the band edge; estimate is on-grid\n";
    if (est.low_confidence)
        std::cerr << "warning: peak power close to the noise floor; low-confidence estimate\n";
    emit(cc.out_path, ssafreq::io::estimate_to_json(est));
    if (!dump_path.empty())
        emit(dump_path, ssafreq::io::decomposition_to_json(ssafreq::ssa::decompose(hist.counts, emb)));
    return 0;
}

int run_fit(const CommandConfig& cc, const std::string& init_path, const ParamOverrides& ov,
            int budget) {
    const CoincidenceHistogram hist = ssafreq::io::read_histogram_csv(cc.in_path);
    ssafreq::io::SimulationInput init = ssafreq::io::read_params_json(init_path);
    ov.apply(init);
    const ssafreq::fit::FitResult fr = ssafreq::fit::fit_model(hist, init.params, std::nullopt, budget);
    if (!fr.converged)
        std::cerr << "warning: fit did not converge within " << budget << " iterations\n";
    emit(cc.out_path, ssafreq::io::fit_result_to_json(fr));
    if (cc.verbose) std::cerr << "fit wall time " << fr.wall_time << " s\n";
    return 0;
}

int run_fisher(const CommandConfig& cc, const ParamOverrides& ov, double min_mhz, double max_mhz,
               long long points, double step_mhz) {
    ssafreq::io::SimulationInput in = ssafreq::io::read_params_json(cc.in_path);
    ov.apply(in);
    if (points < 1) throw InvalidInputError("--points must be at least 1");
    if (points > 1 && !(max_mhz > min_mhz))
        throw InvalidInputError("--max-MHz must exceed --min-MHz");
    Eigen::VectorXd grid(points);
    for (long long i = 0; i < points; ++i)
        grid[i] = (points == 1 ? min_mhz
                               : min_mhz + (max_mhz - min_mhz) * static_cast<double>(i) /
                                               static_cast<double>(points - 1)) *
                  1e6;
    const ssafreq::fisher::FisherResult r =
        ssafreq::fisher::crb_curve(in.params, in.config, grid, step_mhz * 1e6);
    emit(cc.out_path, ssafreq::io::fisher_to_csv(r));
    return 0;
}

int run_sweep(const CommandConfig& cc, const std::string& csv_path, unsigned threads) {
    ssafreq::studies::SweepSpec spec =
        ssafreq::io::sweep_spec_from_json(ssafreq::io::read_json_file(cc.in_path), cc.in_path);
    if (cc.seed) spec.seed = *cc.seed;
    const ssafreq::studies::StudyReport report = ssafreq::studies::run_sweep(spec, threads);
    emit(cc.out_path, ssafreq::io::study_report_to_json(report));

    std::string csv = csv_path;
    if (csv.empty() && cc.out_path != "-") {
        csv = cc.out_path;
        const std::size_t dot = csv.rfind(".json");
        if (dot != std::string::npos && dot == csv.size() - 5)
            csv.replace(dot, 5, ".csv");
        else
            csv += ".csv";
    }
    if (!csv.empty()) emit(csv, ssafreq::io::study_report_to_csv(report));
    return 0;
}

int run_bootstrap(const CommandConfig& cc, int resamples, long long n_c) {
    const CoincidenceHistogram hist = ssafreq::io::read_histogram_csv(cc.in_path);
    const std::uint64_t seed = resolve_seed(cc.seed);
    const ssafreq::studies::BootstrapResult r = ssafreq::studies::bootstrap_uncertainty(
        hist, resamples, seed, ssafreq::ssa::EmbeddingConfig{static_cast<Eigen::Index>(n_c)});
    if (r.unreliable)
        std::cerr << "warning: more than half of the resamples failed; sigma is unreliable\n";
    emit(cc.out_path, ssafreq::io::bootstrap_to_json(r, resamples, seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-separation estimation for two-photon coincidence histograms"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommandConfig cc;
    app.add_flag("-V,--verbose", cc.verbose, "Chatty progress messages on stderr");

    ParamOverrides sim_ov, fit_ov, fisher_ov;
    bool sample = false;
    std::string components = "auto";
    std::string dump_path, init_path, csv_path;
    long long n_c = 5, fisher_points = 90;
    int budget = 100, resamples = 1000;
    double fisher_min = 10.0, fisher_max = 900.0, fisher_step = 1.0;
    unsigned threads = 0;

    CLI::App* sim = app.add_subcommand("simulate", "Expected (or Poisson-sampled) histogram from parameters");
    sim->add_option("-p,--params", cc.in_path, "Parameter JSON file")->required();
    sim->add_option("-o,--out", cc.out_path, "Histogram CSV path ('-' = stdout)");
    sim->add_flag("--sample", sample, "Draw Poisson counts instead of the noiseless profile");
    sim->add_option("--seed", cc.seed, "RNG seed for --sample (generated and echoed when absent)");
    sim_ov.add_options(sim);

    CLI::App* ana = app.add_subcommand("analyze", "Estimate the frequency separation from a histogram");
    ana->add_option("-i,--hist", cc.in_path, "Histogram CSV file")->required();
    ana->add_option("-o,--out", cc.out_path, "Estimate JSON path ('-' = stdout)");
    ana->add_option("--nc", n_c, "Embedding dimension")->capture_default_str();
    ana->add_option("--components", components, "Reconstructed components to sum: 'auto', '2', or '2,3'")
        ->capture_default_str();
    ana->add_option("--dump-components", dump_path, "Also write the decomposition JSON here");

    CLI::App* fit = app.add_subcommand("fit", "Least-squares baseline fit of the full model");
    fit->add_option("-i,--hist", cc.in_path, "Histogram CSV file")->required();
    fit->add_option("--init", init_path, "Initial-guess parameter JSON")->required();
    fit->add_option("-o,--out", cc.out_path, "Fit result JSON path ('-' = stdout)");
    fit->add_option("--budget", budget, "Maximum iterations")->capture_default_str();
    fit_ov.add_options(fit);

    CLI::App* fis = app.add_subcommand("fisher", "Fisher information and Cramer-Rao bound over a grid");
    fis->add_option("-p,--params", cc.in_path, "Parameter JSON file")->required();
    fis->add_option("-o,--out", cc.out_path, "CSV path ('-' = stdout)");
    fis->add_option("--min-MHz", fisher_min, "Grid start")->capture_default_str();
    fis->add_option("--max-MHz", fisher_max, "Grid end")->capture_default_str();
    fis->add_option("--points", fisher_points, "Grid size")->capture_default_str();
    fis->add_option("--step-MHz", fisher_step, "Finite-difference step")->capture_default_str();
    fisher_ov.add_options(fis);

    CLI::App* swp = app.add_subcommand("sweep", "Monte Carlo sweep of one parameter");
    swp->add_option("-s,--spec", cc.in_path, "Sweep specification JSON")->required();
    swp->add_option("-o,--out", cc.out_path, "Report JSON path ('-' = stdout)");
    swp->add_option("--csv", csv_path, "Flat per-point CSV path (default: out path with .csv)");
    swp->add_option("--seed", cc.seed, "Master seed (overrides the spec's seed)");
    swp->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

    CLI::App* boo = app.add_subcommand("bootstrap", "Poisson-bootstrap uncertainty for one histogram");
    boo->add_option("-i,--hist", cc.in_path, "Histogram CSV file")->required();
    boo->add_option("-o,--out", cc.out_path, "Result JSON path ('-' = stdout)");
    boo->add_option("--resamples", resamples, "Number of Poisson resamples")->capture_default_str();
    boo->add_option("--nc", n_c, "Embedding dimension")->capture_default_str();
    boo->add_option("--seed", cc.seed, "RNG seed (generated and echoed when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return run_simulate(cc, sim_ov, sample);
        if (ana->parsed()) return run_analyze(cc, n_c, components, dump_path);
        if (fit->parsed()) return run_fit(cc, init_path, fit_ov, budget);
        if (fis->parsed()) return run_fisher(cc, fisher_ov, fisher_min, fisher_max, fisher_points, fisher_step);
        if (swp->parsed()) return run_sweep(cc, csv_path, threads);
        if (boo->parsed()) return run_bootstrap(cc, resamples, n_c);
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ssafreq::EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ssafreq::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
