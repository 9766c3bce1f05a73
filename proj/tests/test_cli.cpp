// End-to-end checks of the ssafreq binary: every subcommand is exercised
// through std::system with real files, checking outputs and exit codes.
// argv[1] must be the path to the built binary.
#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "ssafreq/io.hpp"

namespace {

std::string g_cli;
std::filesystem::path g_dir;

int run(const std::string& args) {
    const int status = std::system(("'" + g_cli + "' " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (g_dir / name).string(); }

std::string slurp(const std::string& p) { return ssafreq::io::detail::slurp(p); }

void spill(const std::string& p, const std::string& content) {
    ssafreq::io::detail::spill(p, content);
}

constexpr const char* kParamsJson = R"({
  "tau1_ns": 4.5, "tau2_ns": 4.5,
  "gamma1_MHz": 50, "gamma2_MHz": 50,
  "sigma1_MHz": 14.142135623730951, "sigma2_MHz": 14.142135623730951,
  "delta_nu_MHz": 600, "v": 1.0,
  "t_bin_ns": 0.5, "t_meas_ns": 25, "n_tot": 500
}
)";

} // namespace

TEST_CASE("simulate writes the expected histogram and is byte-stable") {
    spill(path("params.json"), kParamsJson);
    CHECK(run("simulate -p " + path("params.json") + " -o " + path("hist.csv")) == 0);

    const std::string csv = slurp(path("hist.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 101); // header + 100 bins
    const ssafreq::CoincidenceHistogram h = ssafreq::io::read_histogram_csv(path("hist.csv"));
    REQUIRE(h.counts.size() == 100);
    CHECK(h.counts.sum() == doctest::Approx(500.0).epsilon(1e-6));
    CHECK(h.t_centers[0] == doctest::Approx(-24.75e-9).epsilon(1e-9));

    CHECK(run("simulate -p " + path("params.json") + " -o " + path("hist_again.csv")) == 0);
    CHECK(slurp(path("hist_again.csv")) == csv);
}

TEST_CASE("analyze recovers the separation from the simulated histogram") {
    CHECK(run("analyze -i " + path("hist.csv") + " -o " + path("est.json")) == 0);
    const auto j = ssafreq::io::read_json_file(path("est.json"));
    CHECK(std::abs(j["delta_nu_MHz"].get<double>() - 600.0) < 20.0);
    CHECK(j["components_used"].get<std::vector<int>>() == std::vector<int>{2, 3});
    CHECK(j["periodogram"].size() == 51);
}

TEST_CASE("sampling is seed-deterministic and integer-valued") {
    const std::string base = "simulate -p " + path("params.json") + " --sample ";
    CHECK(run(base + "--seed 5 -o " + path("s5a.csv")) == 0);
    CHECK(run(base + "--seed 5 -o " + path("s5b.csv")) == 0);
    CHECK(run(base + "--seed 6 -o " + path("s6.csv")) == 0);
    CHECK(slurp(path("s5a.csv")) == slurp(path("s5b.csv")));
    CHECK(slurp(path("s5a.csv")) != slurp(path("s6.csv")));

    const ssafreq::CoincidenceHistogram s = ssafreq::io::read_histogram_csv(path("s5a.csv"));
    for (Eigen::Index i = 0; i < s.counts.size(); ++i)
        CHECK(s.counts[i] == static_cast<double>(std::llround(s.counts[i])));
}

TEST_CASE("a generated seed is echoed on stderr") {
    CHECK(run("simulate -p " + path("params.json") + " --sample -o " + path("sx.csv") +
              " 2> " + path("seed_err.txt")) == 0);
    CHECK(slurp(path("seed_err.txt")).find("seed:") != std::string::npos);
}

TEST_CASE("failure modes map to distinct exit codes") {
    CHECK(run("analyze -i " + path("no_such_file.csv") + " 2> /dev/null") == 4);

    spill(path("bad_header.csv"), "delay_ns,counts\n0,1\n0.5,2\n");
    CHECK(run("analyze -i " + path("bad_header.csv") + " 2> /dev/null") == 2);

    std::string flat = "time_ns,counts\n";
    for (int i = 0; i < 20; ++i) flat += std::to_string(0.5 * i) + ",4\n";
    spill(path("flat.csv"), flat);
    CHECK(run("analyze -i " + path("flat.csv") + " -o /dev/null 2> /dev/null") == 3);

    CHECK(run("frobnicate 2> " + path("usage_err.txt") + " > /dev/null") == 2);
    CHECK(slurp(path("usage_err.txt")).find("simulate") != std::string::npos);
    CHECK(run("2> /dev/null > /dev/null") == 2);
    CHECK(run("--help > /dev/null 2> /dev/null") == 0);
}

TEST_CASE("fit from a truthful start converges on the noiseless histogram") {
    CHECK(run("fit -i " + path("hist.csv") + " --init " + path("params.json") + " -o " +
              path("fit.json")) == 0);
    const auto j = ssafreq::io::read_json_file(path("fit.json"));
    CHECK(j["converged"].get<bool>());
    CHECK(std::abs(j["delta_nu_MHz"].get<double>() - 600.0) < 1.0);
    CHECK(j["rss"].get<double>() < 1e-10);
}

TEST_CASE("fisher emits the CRB curve over the requested grid") {
    CHECK(run("fisher -p " + path("params.json") +
              " --min-MHz 100 --max-MHz 200 --points 3 -o " + path("fisher.csv")) == 0);
    const std::string csv = slurp(path("fisher.csv"));
    CHECK(csv.rfind("delta_nu_MHz,fisher,crb_sigma_MHz\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    double expected[] = {100.0, 150.0, 200.0};
    for (double want : expected) {
        REQUIRE(std::getline(in, line));
        CHECK(std::stod(line.substr(0, line.find(','))) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("sweep writes a JSON report plus a flat CSV next to it") {
    std::string spec = R"({
  "swept_parameter": "n_tot",
  "values": [200, 500],
  "base": )" + std::string(kParamsJson) +
                       R"(, "runs_per_point": 4, "seed": 3 }
)";
    spill(path("spec.json"), spec);

    CHECK(run("sweep -s " + path("spec.json") + " -o " + path("report.json")) == 0);
    const auto j = ssafreq::io::read_json_file(path("report.json"));
    REQUIRE(j["per_point"].size() == 2);
    CHECK(j["per_point"][0]["swept_value"].get<double>() == 200.0);
    CHECK(j["per_point"][0]["estimates_MHz"].size() == 4);

    // the companion CSV appears with the .json suffix swapped out
    const std::string csv = slurp(path("report.csv"));
    CHECK(csv.rfind("swept_value,mean_MHz,eps_v_MHz,eps_rms_MHz,failures\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    // same spec, same seed: byte-identical report
    CHECK(run("sweep -s " + path("spec.json") + " -o " + path("report_rerun.json")) == 0);
    CHECK(slurp(path("report_rerun.json")) == slurp(path("report.json")));

    // a different master seed changes the estimates
    CHECK(run("sweep -s " + path("spec.json") + " --seed 99 -o " + path("report99.json")) == 0);
    CHECK(ssafreq::io::read_json_file(path("report99.json"))["per_point"][0]["estimates_MHz"] !=
          j["per_point"][0]["estimates_MHz"]);
}

TEST_CASE("sweep to stdout emits JSON and only writes CSV when asked") {
    CHECK(run("sweep -s " + path("spec.json") + " > " + path("stdout.json")) == 0);
    const auto j = ssafreq::io::detail::parse_json(slurp(path("stdout.json")), "stdout capture");
    CHECK(j["per_point"].size() == 2);
    CHECK_FALSE(std::filesystem::exists("-.csv"));

    CHECK(run("sweep -s " + path("spec.json") + " --csv " + path("flat_only.csv") +
              " > /dev/null") == 0);
    CHECK(slurp(path("flat_only.csv"))
              .rfind("swept_value,mean_MHz,eps_v_MHz,eps_rms_MHz,failures\n", 0) == 0);
}

TEST_CASE("bootstrap is reproducible for a fixed seed") {
    const std::string base = "bootstrap -i " + path("hist.csv") + " --resamples 100 --seed 9 -o ";
    CHECK(run(base + path("b1.json")) == 0);
    CHECK(run(base + path("b2.json")) == 0);
    CHECK(slurp(path("b1.json")) == slurp(path("b2.json")));
    const auto j = ssafreq::io::read_json_file(path("b1.json"));
    CHECK(j["sigma_MHz"].get<double>() > 1.0);
    CHECK(j["sigma_MHz"].get<double>() < 50.0);
    CHECK(j["seed"].get<std::uint64_t>() == 9);
    CHECK_FALSE(j["unreliable"].get<bool>());
}

TEST_CASE("parameter overrides reach the model") {
    CHECK(run("simulate -p " + path("params.json") + " --delta-nu-MHz 350 -o " +
              path("h350.csv")) == 0);
    CHECK(run("analyze -i " + path("h350.csv") + " -o " + path("e350.json")) == 0);
    const auto j = ssafreq::io::read_json_file(path("e350.json"));
    CHECK(std::abs(j["delta_nu_MHz"].get<double>() - 350.0) < 20.0);
}

TEST_CASE("analyze honors explicit component selections and embedding size") {
    CHECK(run("analyze -i " + path("hist.csv") + " --components 2 -o " + path("c2.json")) == 0);
    CHECK(ssafreq::io::read_json_file(path("c2.json"))["components_used"].get<std::vector<int>>() ==
          std::vector<int>{2});

    CHECK(run("analyze -i " + path("hist.csv") + " --components 2,3 -o " + path("c23.json")) == 0);
    CHECK(ssafreq::io::read_json_file(path("c23.json"))["components_used"].get<std::vector<int>>() ==
          std::vector<int>{2, 3});

    CHECK(run("analyze -i " + path("hist.csv") + " --components seven 2> /dev/null") == 2);

    CHECK(run("analyze -i " + path("hist.csv") + " --nc 7 --dump-components " + path("dump.json") +
              " -o /dev/null") == 0);
    const auto d = ssafreq::io::read_json_file(path("dump.json"));
    CHECK(d["n_c"].get<int>() == 7);
    CHECK(d["eigenvalues"].size() == 7);
    CHECK(d["reconstructed"].size() == 7);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-ssafreq-binary>\n", argv[0]);
        return 1;
    }
    g_cli = argv[1];

    std::string tmpl = (std::filesystem::temp_directory_path() / "ssafreq_cli_XXXXXX").string();
    char* dir = mkdtemp(tmpl.data());
    if (dir == nullptr) {
        std::fprintf(stderr, "cannot create temp dir\n");
        return 1;
    }
    g_dir = dir;

    doctest::Context context;
    context.applyCommandLine(1, argv); // keep the binary path away from doctest
    const int rc = context.run();
    std::filesystem::remove_all(g_dir);
    return rc;
}
