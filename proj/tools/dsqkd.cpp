// dsqkd: decoy-state QKD simulator and bound-estimation front end.
//
// Subcommands:
//   simulate      run a protocol (Monte-Carlo or exact expectation) and
//                 write observed stats (and optionally ground truth)
//   estimate      compute the bound report from an observed-stats file
//   sweep         fluctuation sweep, key rates per variant, CSV output
//   oracle-check  randomized verification of the bound derivation

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsqkd/config.hpp"
#include "dsqkd/errors.hpp"
#include "dsqkd/oracle.hpp"
#include "dsqkd/pipeline.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCondition = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    double seed = -1.0;
    double pulses = -1.0;
    std::string engine;
    std::string variant;
};

dsqkd::RunConfig load_config(const CommonArgs& args) {
    dsqkd::RunConfig config =
        args.config_path.empty()
            ? dsqkd::load_run_config(dsqkd::KeyValueFile::parse_text(""))
            : dsqkd::load_run_config(
                  dsqkd::KeyValueFile::parse_file(args.config_path));
    if (args.seed >= 0.0)
        config.seed = static_cast<std::uint64_t>(args.seed);
    if (args.pulses >= 0.0)
        config.pulses = static_cast<std::uint64_t>(args.pulses);
    if (!args.engine.empty()) {
        if (args.engine == "mc" || args.engine == "monte-carlo")
            config.engine = dsqkd::Engine::kMonteCarlo;
        else if (args.engine == "exp" || args.engine == "expectation")
            config.engine = dsqkd::Engine::kExpectation;
        else
            throw dsqkd::ConfigError("unknown engine '" + args.engine + "'");
    }
    if (!args.variant.empty()) {
        if (args.variant == "economic")
            config.variant = dsqkd::EstimatorVariant::kEconomic;
        else if (args.variant == "normal")
            config.variant = dsqkd::EstimatorVariant::kNormal;
        else if (args.variant == "both")
            config.variant = dsqkd::EstimatorVariant::kBoth;
        else
            throw dsqkd::ConfigError("unknown variant '" + args.variant +
                                     "'");
    }
    if (!args.out_path.empty()) config.out_path = args.out_path;
    if (config.out_path.empty()) config.out_path = "dsqkd-out";
    return config;
}

int cmd_simulate(const CommonArgs& args, bool ground_truth) {
    dsqkd::RunConfig config = load_config(args);
    if (config.engine == dsqkd::Engine::kExpectation && args.seed >= 0.0)
        std::cerr << "note: expectation engine ignores --seed\n";
    const dsqkd::SimulationRun run = dsqkd::simulate_run(config);
    write_file(config.out_path + ".observed.txt",
               dsqkd::observed_to_text(run.observed, config.protocol));
    if (ground_truth)
        write_file(config.out_path + ".tally.txt",
                   dsqkd::tally_to_text(run.tally));
    std::cout << "wrote " << config.out_path << ".observed.txt\n";
    return 0;
}

int cmd_estimate(const CommonArgs& args, const std::string& observed_path) {
    dsqkd::RunConfig config = load_config(args);
    dsqkd::Protocol protocol;
    const dsqkd::ObservedStats obs =
        dsqkd::observed_from_file(observed_path, &protocol);
    config.protocol = protocol;

    std::vector<dsqkd::EstimatorVariant> variants;
    if (config.variant == dsqkd::EstimatorVariant::kEconomic ||
        config.variant == dsqkd::EstimatorVariant::kBoth)
        variants.push_back(dsqkd::EstimatorVariant::kEconomic);
    if (config.variant == dsqkd::EstimatorVariant::kNormal ||
        config.variant == dsqkd::EstimatorVariant::kBoth)
        variants.push_back(dsqkd::EstimatorVariant::kNormal);

    std::string text;
    std::string csv = "variant,key_rate," + dsqkd::BoundReport::csv_header();
    csv += "\n";
    for (dsqkd::EstimatorVariant variant : variants) {
        const dsqkd::BoundReport report =
            dsqkd::estimate_bounds(config, obs, variant);
        const double rate = dsqkd::pipeline_key_rate(config, obs, report);
        const char* name =
            variant == dsqkd::EstimatorVariant::kEconomic ? "economic"
                                                          : "normal";
        text += std::string("[") + name + "]\n";
        text += "key_rate = " + dsqkd::format_double(rate) + "\n";
        text += report.to_kv_text();
        csv += std::string(name) + "," + dsqkd::format_double(rate) + "," +
               report.to_csv_row() + "\n";
    }
    write_file(config.out_path + ".report.txt", text);
    write_file(config.out_path + ".report.csv", csv);
    std::cout << text;
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    dsqkd::RunConfig config = load_config(args);
    if (config.sweep_grid.empty())
        config.sweep_grid = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
    const std::vector<dsqkd::SweepRow> rows = dsqkd::run_sweep(config);
    const std::string csv = dsqkd::sweep_csv(rows);
    write_file(config.out_path + ".sweep.csv", csv);
    std::cout << csv;
    return 0;
}

int cmd_oracle_check(std::uint64_t count, std::uint64_t seed) {
    size_t chain_pass = 0, error_pass = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const dsqkd::MicroInstance inst =
            dsqkd::random_valid_instance(seed + i);
        const dsqkd::AuditRecord rec = dsqkd::verify_chain(inst);
        if (rec.all_pass)
            ++chain_pass;
        else
            std::cout << rec.pretty();
        if (dsqkd::error_bound_check(inst)) ++error_pass;
    }

    const dsqkd::MicroInstance ten = dsqkd::ten_pulse_instance();
    const dsqkd::MicroCounts counts = dsqkd::exact_counts(ten);
    const bool ten_ok = counts.click_set_sizes[0] == 3 &&
                        counts.click_set_sizes[1] == 3 &&
                        dsqkd::verify_chain(ten).all_pass;

    const dsqkd::MicroInstance adv = dsqkd::adversarial_instance(seed);
    const bool adv_ok = dsqkd::verify_chain(adv).all_pass;

    const dsqkd::MicroInstance hwang = dsqkd::hwang_violation_instance();
    const bool hwang_ok = !dsqkd::hwang_proposition_holds(hwang) &&
                          dsqkd::verify_chain(hwang).all_pass;

    std::printf("chain:        %zu/%llu pass\n", chain_pass,
                static_cast<unsigned long long>(count));
    std::printf("error bounds: %zu/%llu pass\n", error_pass,
                static_cast<unsigned long long>(count));
    std::printf("10-pulse example:     %s\n", ten_ok ? "pass" : "FAIL");
    std::printf("adversarial instance: %s\n", adv_ok ? "pass" : "FAIL");
    std::printf("hwang-violation witness: %s\n", hwang_ok ? "pass" : "FAIL");

    const bool all = chain_pass == count && error_pass == count && ten_ok &&
                     adv_ok && hwang_ok;
    std::printf("oracle-check: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoy-state QKD simulator and bound estimator"};
    app.require_subcommand(1);

    CommonArgs args;
    bool ground_truth = false;
    std::string observed_path;
    double oracle_count = 1000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "config file path");
        cmd->add_option("--out", args.out_path, "output path prefix");
        cmd->add_option("--seed", args.seed, "master RNG seed");
        cmd->add_option("--pulses", args.pulses, "pulse count M");
        cmd->add_option("--engine", args.engine, "mc | expectation");
        cmd->add_option("--variant", args.variant,
                        "economic | normal | both");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run a protocol");
    add_common(simulate);
    simulate->add_flag("--ground-truth", ground_truth,
                       "also write the full tally");

    CLI::App* estimate =
        app.add_subcommand("estimate", "bounds from observed stats");
    add_common(estimate);
    estimate->add_option("observed", observed_path, "observed-stats file")
        ->required();

    CLI::App* sweep = app.add_subcommand("sweep", "fluctuation sweep CSV");
    add_common(sweep);

    CLI::App* oracle =
        app.add_subcommand("oracle-check", "verify the bound derivation");
    oracle->add_option("--count", oracle_count, "random instances");
    oracle->add_option("--seed", args.seed, "master RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(args, ground_truth);
        if (estimate->parsed()) return cmd_estimate(args, observed_path);
        if (sweep->parsed()) return cmd_sweep(args);
        if (oracle->parsed())
            return cmd_oracle_check(
                static_cast<std::uint64_t>(oracle_count),
                args.seed >= 0.0 ? static_cast<std::uint64_t>(args.seed)
                                 : 7);
    } catch (const dsqkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dsqkd::ConditionViolated& e) {
        std::cerr << "condition violated: " << e.what() << "\n";
        return kExitCondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
