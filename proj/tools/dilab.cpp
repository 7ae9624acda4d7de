// Command-line front end: verify | dichotomy | gaussian-check | cyl-convergence | train | compare.
// Exit codes: 0 success, 1 property failure (or numerical failure), 2 configuration error.

#include "dilab/experiments.hpp"
#include "dilab/parallel.hpp"
#include "dilab/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

void add_common(CLI::App& cmd, CommonFlags& flags, bool with_config)
{
    if (with_config) {
        cmd.add_option("--config", flags.config, "JSON experiment config (defaults apply when omitted)")
            ->check(CLI::ExistingFile);
    }
    cmd.add_option("--out", flags.out, "Output directory (overrides the config's \"output\")");
    cmd.add_option("--seed", flags.seed, "Root seed (overrides the config's \"seed\")");
    cmd.add_option("--workers", flags.workers, "Worker threads for estimators (0 = logical cores)");
}

dilab::io::Json load_config(const std::string& path)
{
    if (path.empty()) {
        return dilab::io::Json::object();
    }
    std::ifstream in(path);
    if (!in) {
        throw dilab::ConfigError("cannot read config " + path);
    }
    try {
        return dilab::io::Json::parse(in);
    } catch (const dilab::io::Json::parse_error& e) {
        throw dilab::ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
}

dilab::RunOptions options_from(const CLI::App& cmd, const CommonFlags& flags)
{
    dilab::RunOptions options;
    if (!flags.out.empty()) {
        options.out_dir = flags.out;
    }
    if (cmd.count("--seed") > 0) {
        options.seed = flags.seed;
    }
    return options;
}

int report(const dilab::ExperimentOutcome& outcome)
{
    for (const auto& c : outcome.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  [" << c.detail << "]\n";
    }
    std::cout << outcome.experiment << ": " << (outcome.passed() ? "passed" : "FAILED") << " -> "
              << (outcome.out_dir / "summary.json").string() << '\n';
    return outcome.passed() ? 0 : kExitFailure;
}

int run_verify(const CommonFlags& flags, const CLI::App& cmd, const std::string& fault)
{
    if (!fault.empty()) {
        if (fault != "jets") {
            throw dilab::ConfigError("--inject-fault: only \"jets\" is available");
        }
        dilab::jets_testing::set_derivative_fault(1e-3);
    }
    const std::uint64_t seed = cmd.count("--seed") > 0 ? flags.seed : 1;
    const auto results = dilab::run_verify(seed);
    dilab::write_verify_table(std::cout, results);
    const std::filesystem::path out = flags.out.empty() ? "dilab_out" : flags.out;
    std::filesystem::create_directories(out);
    std::ofstream csv(out / "verify.csv");
    if (!csv) {
        throw dilab::Error("cannot write " + (out / "verify.csv").string());
    }
    dilab::write_verify_csv(csv, results);
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.passed();
    }
    std::cout << "verify: " << (ok ? "all suites passed" : "FAILED") << '\n';
    return ok ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Derivative-informed operator learning lab"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string fault;
    CLI::App* verify = app.add_subcommand("verify", "Run the invariant suites of every module");
    add_common(*verify, flags, false);
    verify->add_option("--inject-fault", fault)->group("");

    struct Experiment {
        const char* name;
        const char* help;
        dilab::ExperimentOutcome (*run)(const dilab::io::Json&, const dilab::RunOptions&);
    };
    const Experiment experiments[] = {
        {"dichotomy", "Operator-norm vs compact-open errors of projection models", dilab::run_dichotomy},
        {"gaussian-check", "Monte-Carlo vs exact Gaussian Hilbert-Schmidt norms", dilab::run_gaussian_check},
        {"cyl-convergence", "Sobolev error of cylindrical approximations", dilab::run_cyl_convergence},
        {"train", "Sobolev-loss training of an encoder-decoder model", dilab::run_train},
        {"compare", "k_loss = 0 vs k_loss = 1 training at equal budget", dilab::run_compare},
    };
    std::vector<std::pair<CLI::App*, const Experiment*>> commands;
    for (const auto& e : experiments) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common(*cmd, flags, true);
        commands.emplace_back(cmd, &e);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        dilab::set_worker_count(flags.workers);
        if (*verify) {
            return run_verify(flags, *verify, fault);
        }
        for (const auto& [cmd, e] : commands) {
            if (*cmd) {
                return report(e->run(load_config(flags.config), options_from(*cmd, flags)));
            }
        }
    } catch (const dilab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitConfig;
}
