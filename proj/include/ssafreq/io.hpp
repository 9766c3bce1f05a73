#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssafreq/errors.hpp"
#include "ssafreq/fisher.hpp"
#include "ssafreq/fit.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/spectral.hpp"
#include "ssafreq/ssa.hpp"
#include "ssafreq/studies.hpp"

namespace ssafreq::io {

using json = nlohmann::ordered_json;

namespace detail {

// 12 significant digits: clean for exact binary values, far below any
// tolerance the estimators care about.
inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

inline void spill(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

inline double parse_number(const std::string& field, const std::string& what) {
    try {
        std::size_t used = 0;
        const double x = std::stod(field, &used);
        while (used < field.size() && (field[used] == ' ' || field[used] == '\t')) ++used;
        if (used != field.size()) throw InvalidInputError("");
        return x;
    } catch (const std::exception&) {
        throw InvalidInputError("not a number in " + what + ": '" + field + "'");
    }
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInputError("malformed JSON in " + what + ": " + e.what());
    }
}

inline double get_number(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) throw InvalidInputError(what + " is missing key '" + key + "'");
    if (!j[key].is_number()) throw InvalidInputError(what + " key '" + key + "' must be a number");
    return j[key].get<double>();
}

} // namespace detail

// ---- histogram CSV: header `time_ns,counts`, one row per bin, LF endings ----

inline std::string histogram_to_csv(const CoincidenceHistogram& h) {
    h.validate();
    std::string out = "time_ns,counts\n";
    for (Eigen::Index i = 0; i < h.counts.size(); ++i) {
        out += detail::fmt(h.t_centers[i] * 1e9);
        out += ',';
        out += detail::fmt(h.counts[i]);
        out += '\n';
    }
    return out;
}

inline CoincidenceHistogram histogram_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInputError("empty histogram file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_ns,counts")
        throw InvalidInputError("histogram header must be 'time_ns,counts', got '" + line + "'");

    std::vector<double> t, c;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw InvalidInputError("histogram row " + std::to_string(row) + " has no comma");
        const std::string where = "histogram row " + std::to_string(row);
        t.push_back(detail::parse_number(line.substr(0, comma), where) * 1e-9);
        c.push_back(detail::parse_number(line.substr(comma + 1), where));
    }

    CoincidenceHistogram h;
    h.t_centers = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    h.counts = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    h.validate();
    return h;
}

inline void write_histogram_csv(const std::string& path, const CoincidenceHistogram& h) {
    detail::spill(path, histogram_to_csv(h));
}

inline CoincidenceHistogram read_histogram_csv(const std::string& path) {
    return histogram_from_csv(detail::slurp(path));
}

// ---- parameter JSON: physical values in ns/MHz, counts dimensionless ----

struct SimulationInput {
    EmitterPairParams params;
    MeasurementConfig config;
};

inline json params_to_json(const EmitterPairParams& p, const MeasurementConfig& cfg) {
    json j;
    j["tau1_ns"] = p.tau1 * 1e9;
    j["tau2_ns"] = p.tau2 * 1e9;
    j["gamma1_MHz"] = p.gamma1 / 1e6;
    j["gamma2_MHz"] = p.gamma2 / 1e6;
    j["sigma1_MHz"] = p.sigma1 / 1e6;
    j["sigma2_MHz"] = p.sigma2 / 1e6;
    j["delta_nu_MHz"] = p.delta_nu / 1e6;
    j["v"] = p.v;
    j["t_bin_ns"] = cfg.t_bin * 1e9;
    j["t_meas_ns"] = cfg.t_meas * 1e9;
    j["n_tot"] = cfg.n_tot;
    return j;
}

inline SimulationInput params_from_json(const json& j, const std::string& what = "parameter file") {
    if (!j.is_object()) throw InvalidInputError(what + " must be a JSON object");
    SimulationInput in;
    in.params.tau1 = detail::get_number(j, "tau1_ns", what) * 1e-9;
    in.params.tau2 = detail::get_number(j, "tau2_ns", what) * 1e-9;
    in.params.gamma1 = detail::get_number(j, "gamma1_MHz", what) * 1e6;
    in.params.gamma2 = detail::get_number(j, "gamma2_MHz", what) * 1e6;
    in.params.sigma1 = detail::get_number(j, "sigma1_MHz", what) * 1e6;
    in.params.sigma2 = detail::get_number(j, "sigma2_MHz", what) * 1e6;
    in.params.delta_nu = detail::get_number(j, "delta_nu_MHz", what) * 1e6;
    in.params.v = detail::get_number(j, "v", what);
    in.config.t_bin = detail::get_number(j, "t_bin_ns", what) * 1e-9;
    in.config.t_meas = detail::get_number(j, "t_meas_ns", what) * 1e-9;
    in.config.n_tot = detail::get_number(j, "n_tot", what);
    in.params.validate();
    in.config.validate();
    return in;
}

inline SimulationInput read_params_json(const std::string& path) {
    return params_from_json(detail::parse_json(detail::slurp(path), path), path);
}

// ---- estimator output JSON ----

inline json estimate_to_json(const spectral::SpectralEstimate& est) {
    json j;
    j["delta_nu_MHz"] = est.delta_nu_hat / 1e6;
    j["components_used"] = est.components_used;
    j["peak_power"] = est.peak_power;
    json grid = json::array();
    for (Eigen::Index k = 0; k < est.frequencies.size(); ++k) {
        json pt;
        pt["f_MHz"] = est.frequencies[k] / 1e6;
        pt["power"] = est.powers[k];
        grid.push_back(std::move(pt));
    }
    j["periodogram"] = std::move(grid);
    return j;
}

inline json decomposition_to_json(const ssa::SsaDecomposition& d) {
    json j;
    j["eigenvalues"] = std::vector<double>(d.eigenvalues.data(), d.eigenvalues.data() + d.eigenvalues.size());
    json rows = json::array();
    for (Eigen::Index i = 0; i < d.reconstructed.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(d.reconstructed.cols()));
        for (Eigen::Index t = 0; t < d.reconstructed.cols(); ++t)
            row[static_cast<std::size_t>(t)] = d.reconstructed(i, t);
        rows.push_back(std::move(row));
    }
    j["reconstructed"] = std::move(rows);
    j["n_c"] = d.n_c;
    return j;
}

inline json fit_result_to_json(const fit::FitResult& fr) {
    json j;
    j["converged"] = fr.converged;
    j["iterations"] = fr.iterations;
    j["rss"] = fr.rss;
    j["wall_time_s"] = fr.wall_time;
    j["amplitude"] = fr.amplitude;
    j["tau1_ns"] = fr.params_hat.tau1 * 1e9;
    j["tau2_ns"] = fr.params_hat.tau2 * 1e9;
    j["gamma1_MHz"] = fr.params_hat.gamma1 / 1e6;
    j["gamma2_MHz"] = fr.params_hat.gamma2 / 1e6;
    j["sigma1_MHz"] = fr.params_hat.sigma1 / 1e6;
    j["sigma2_MHz"] = fr.params_hat.sigma2 / 1e6;
    j["delta_nu_MHz"] = fr.params_hat.delta_nu / 1e6;
    j["v"] = fr.params_hat.v;
    return j;
}

// ---- Fisher curve CSV: `delta_nu_MHz,fisher,crb_sigma_MHz` ----
// fisher is per event in 1/MHz^2 so the three columns share the MHz scale.

inline std::string fisher_to_csv(const fisher::FisherResult& r) {
    std::string out = "delta_nu_MHz,fisher,crb_sigma_MHz\n";
    for (Eigen::Index i = 0; i < r.delta_nu_grid.size(); ++i) {
        out += detail::fmt(r.delta_nu_grid[i] / 1e6);
        out += ',';
        out += detail::fmt(r.fisher[i] * 1e12);
        out += ',';
        out += detail::fmt(r.crb_sigma[i] / 1e6);
        out += '\n';
    }
    return out;
}

// ---- sweep spec JSON / study report JSON + CSV ----
//
// Swept values are given in display units matching the parameter file
// convention: MHz for sigma/gamma/delta_nu, ns for t_bin, raw counts and
// fractions otherwise.

inline double swept_value_to_si(studies::SweepParameter p, double display) {
    switch (p) {
        case studies::SweepParameter::Sigma:
        case studies::SweepParameter::Gamma:
        case studies::SweepParameter::DeltaNu: return display * 1e6;
        case studies::SweepParameter::TBin: return display * 1e-9;
        default: return display;
    }
}

inline double swept_value_to_display(studies::SweepParameter p, double si) {
    switch (p) {
        case studies::SweepParameter::Sigma:
        case studies::SweepParameter::Gamma:
        case studies::SweepParameter::DeltaNu: return si / 1e6;
        case studies::SweepParameter::TBin: return si * 1e9;
        default: return si;
    }
}

inline studies::SweepSpec sweep_spec_from_json(const json& j, const std::string& what = "sweep spec") {
    if (!j.is_object()) throw InvalidInputError(what + " must be a JSON object");
    studies::SweepSpec spec;
    if (!j.contains("swept_parameter") || !j["swept_parameter"].is_string())
        throw InvalidInputError(what + " needs a string key 'swept_parameter'");
    spec.swept_parameter = studies::sweep_parameter_from_string(j["swept_parameter"].get<std::string>());
    if (!j.contains("values") || !j["values"].is_array() || j["values"].empty())
        throw InvalidInputError(what + " needs a nonempty array 'values'");
    for (const auto& v : j["values"]) {
        if (!v.is_number()) throw InvalidInputError(what + " values must be numbers");
        spec.values.push_back(swept_value_to_si(spec.swept_parameter, v.get<double>()));
    }
    if (!j.contains("base")) throw InvalidInputError(what + " is missing key 'base'");
    const SimulationInput base = params_from_json(j["base"], what + " base");
    spec.base_params = base.params;
    spec.base_config = base.config;
    if (j.contains("n_c")) spec.embedding.n_c = static_cast<Eigen::Index>(j["n_c"].get<long long>());
    if (j.contains("runs_per_point")) spec.runs_per_point = j["runs_per_point"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jump_delta_nu_b_MHz"))
        spec.jump_delta_nu_b = detail::get_number(j, "jump_delta_nu_b_MHz", what) * 1e6;
    spec.validate();
    return spec;
}

inline json sweep_spec_to_json(const studies::SweepSpec& spec) {
    json j;
    j["swept_parameter"] = studies::to_string(spec.swept_parameter);
    std::vector<double> display;
    display.reserve(spec.values.size());
    for (double v : spec.values) display.push_back(swept_value_to_display(spec.swept_parameter, v));
    j["values"] = display;
    j["base"] = params_to_json(spec.base_params, spec.base_config);
    j["n_c"] = static_cast<long long>(spec.embedding.n_c);
    j["runs_per_point"] = spec.runs_per_point;
    j["seed"] = spec.seed;
    j["jump_delta_nu_b_MHz"] = spec.jump_delta_nu_b / 1e6;
    return j;
}

inline json study_report_to_json(const studies::StudyReport& report) {
    json j;
    j["spec"] = sweep_spec_to_json(report.spec);
    json points = json::array();
    for (const auto& pr : report.per_point) {
        json p;
        p["swept_value"] = swept_value_to_display(report.spec.swept_parameter, pr.swept_value);
        p["mean_MHz"] = pr.mean / 1e6;
        p["eps_v_MHz"] = pr.eps_v / 1e6;
        p["failures"] = pr.failures;
        json targets = json::array();
        for (const auto& te : pr.targets) {
            json t;
            t["target_MHz"] = te.target / 1e6;
            t["eps_rms_MHz"] = te.eps_rms / 1e6;
            t["bias_MHz"] = te.bias / 1e6;
            targets.push_back(std::move(t));
        }
        p["targets"] = std::move(targets);
        std::vector<double> est_mhz;
        est_mhz.reserve(pr.estimates.size());
        for (double e : pr.estimates) est_mhz.push_back(e / 1e6);
        p["estimates_MHz"] = est_mhz;
        points.push_back(std::move(p));
    }
    j["per_point"] = std::move(points);
    return j;
}

inline std::string study_report_to_csv(const studies::StudyReport& report) {
    std::string out = "swept_value,mean_MHz,eps_v_MHz,eps_rms_MHz,failures\n";
    for (const auto& pr : report.per_point) {
        out += detail::fmt(swept_value_to_display(report.spec.swept_parameter, pr.swept_value));
        out += ',';
        out += detail::fmt(pr.mean / 1e6);
        out += ',';
        out += detail::fmt(pr.eps_v / 1e6);
        out += ',';
        out += detail::fmt(pr.targets.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : pr.targets.front().eps_rms / 1e6);
        out += ',';
        out += std::to_string(pr.failures);
        out += '\n';
    }
    return out;
}

inline json bootstrap_to_json(const studies::BootstrapResult& r, int n_resamples, std::uint64_t seed) {
    json j;
    j["delta_nu_MHz"] = r.delta_nu_hat / 1e6;
    j["sigma_MHz"] = r.sigma_hat / 1e6;
    j["n_resamples"] = n_resamples;
    j["failures"] = r.failures;
    j["unreliable"] = r.unreliable;
    j["seed"] = seed;
    return j;
}

inline json read_json_file(const std::string& path) {
    return detail::parse_json(detail::slurp(path), path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    detail::spill(path, content);
}

inline void write_json_file(const std::string& path, const json& j) {
    detail::spill(path, j.dump(2) + "\n");
}

} // namespace ssafreq::io
