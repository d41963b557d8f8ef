#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef DSQKD_CLI_PATH
#error "DSQKD_CLI_PATH must point at the dsqkd binary"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(DSQKD_CLI_PATH) + " " + args + " > cli_stdout.txt 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(bool(out));
    out << content;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate + estimate round trip, byte-identical reruns") {
    write_text("cli_rt.cfg",
               "[run]\n"
               "protocol = three-intensity-coherent\n"
               "engine = expectation\n"
               "pulses = 1000000\n"
               "[source]\n"
               "delta = 0.03\n"
               "eps_decoy = 0.01\n"
               "eps_signal = 0.01\n");
    CHECK(run_cli("simulate --config cli_rt.cfg --out cli_rt_a") == 0);
    CHECK(run_cli("simulate --config cli_rt.cfg --out cli_rt_b") == 0);
    const std::string a = read_text("cli_rt_a.observed.txt");
    CHECK(a == read_text("cli_rt_b.observed.txt"));
    CHECK(a.find("format = dsqkd-observed-v1") != std::string::npos);

    CHECK(run_cli("estimate --config cli_rt.cfg --out cli_rt_a "
                  "cli_rt_a.observed.txt") == 0);
    const std::string report = read_text("cli_rt_a.report.txt");
    CHECK(report.find("[economic]") != std::string::npos);
    CHECK(report.find("[normal]") != std::string::npos);
    CHECK(report.find("key_rate = ") != std::string::npos);
    CHECK(report.find("n1s_lb") != std::string::npos);

    const std::string csv = read_text("cli_rt_a.report.csv");
    CHECK(csv.rfind("variant,key_rate,", 0) == 0);
}

TEST_CASE("monte-carlo runs are reproducible under a fixed seed") {
    write_text("cli_mc.cfg",
               "[run]\n"
               "engine = monte-carlo\n"
               "pulses = 200000\n"
               "seed = 42\n"
               "[source]\n"
               "delta = 0.05\n");
    CHECK(run_cli("simulate --config cli_mc.cfg --out cli_mc_a") == 0);
    CHECK(run_cli("simulate --config cli_mc.cfg --out cli_mc_b") == 0);
    CHECK(read_text("cli_mc_a.observed.txt") ==
          read_text("cli_mc_b.observed.txt"));

    // A different seed must change the counts.
    CHECK(run_cli("simulate --config cli_mc.cfg --seed 43 --out cli_mc_c") ==
          0);
    CHECK(read_text("cli_mc_a.observed.txt") !=
          read_text("cli_mc_c.observed.txt"));
}

TEST_CASE("bad config exits with the config code") {
    write_text("cli_bad.cfg", "[run]\nprotocol = carrier-pigeon\n");
    CHECK(run_cli("simulate --config cli_bad.cfg --out cli_bad") == 2);

    write_text("cli_bad2.cfg", "[run]\nno equals sign here\n");
    CHECK(run_cli("simulate --config cli_bad2.cfg --out cli_bad2") == 2);

    CHECK(run_cli("estimate --config cli_rt.cfg no_such_file.txt") == 2);
}

TEST_CASE("intensity-ordering violation exits with the condition code") {
    // mu(1+eps_d) = 0.5 exceeds mu'(1-eps_s) = 0.42.
    write_text("cli_cond.cfg",
               "[run]\n"
               "engine = expectation\n"
               "[source]\n"
               "mu_decoy = 0.5\n"
               "mu_signal = 0.6\n"
               "eps_signal = 0.3\n");
    CHECK(run_cli("simulate --config cli_cond.cfg --out cli_cond") == 0);
    CHECK(run_cli("estimate --config cli_cond.cfg --out cli_cond "
                  "cli_cond.observed.txt") == 3);
}

TEST_CASE("sweep writes the rate-vs-fluctuation table") {
    write_text("cli_sweep.cfg",
               "[run]\n"
               "pulses = 1000000\n"
               "[sweep]\n"
               "axis = delta\n"
               "grid = 0, 0.03, 0.06\n");
    CHECK(run_cli("sweep --config cli_sweep.cfg --out cli_sw") == 0);
    const std::string csv = read_text("cli_sw.sweep.csv");
    CHECK(csv.rfind("delta,epsilon,variant,key_rate,relative_rate", 0) == 0);
    size_t rows = 0;
    for (char c : csv) rows += (c == '\n');
    CHECK(rows == 1 + 3 * 2);  // header + 3 grid points x 2 variants
    // The zero-fluctuation rows are the normalization baseline.
    CHECK(csv.find(",1\n") != std::string::npos);
}

TEST_CASE("oracle-check passes on a small batch") {
    CHECK(run_cli("oracle-check --count 50 --seed 11") == 0);
}

TEST_CASE("ayki protocol end to end") {
    write_text("cli_ayki.cfg",
               "[run]\n"
               "protocol = ayki\n"
               "engine = expectation\n"
               "pulses = 1000000\n"
               "[ayki]\n"
               "mu = 1.0\n"
               "mu_fluct = 0.2\n"
               "eta_alice = 0.5\n"
               "dark_alice = 1e-6\n");
    CHECK(run_cli("simulate --config cli_ayki.cfg --out cli_ayki") == 0);
    CHECK(run_cli("estimate --config cli_ayki.cfg --out cli_ayki "
                  "cli_ayki.observed.txt") == 0);
    const std::string report = read_text("cli_ayki.report.txt");
    CHECK(report.find("delta1s_lb") != std::string::npos);
}
