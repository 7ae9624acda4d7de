#pragma once

// Config-driven experiments behind the command-line subcommands. Each writes CSV tables and a
// summary.json (config hash, root seed, build id, property checks) into the output directory.

#include "dilab/io.hpp"

#include <filesystem>
#include <optional>

namespace dilab {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir; ///< overrides the config's "output"
    std::optional<std::uint64_t> seed;            ///< overrides the config's "seed"
};

struct PropertyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentOutcome {
    std::string experiment;
    std::filesystem::path out_dir;
    std::vector<PropertyCheck> checks;
    io::Json summary;

    bool passed() const;
};

/// Throw ConfigError for schema violations (unknown keys, wrong types, inconsistent settings).
ExperimentOutcome run_dichotomy(const io::Json& config, const RunOptions& options);
ExperimentOutcome run_gaussian_check(const io::Json& config, const RunOptions& options);
ExperimentOutcome run_cyl_convergence(const io::Json& config, const RunOptions& options);
ExperimentOutcome run_train(const io::Json& config, const RunOptions& options);
ExperimentOutcome run_compare(const io::Json& config, const RunOptions& options);

/// Random L = A B^T with Gaussian factors of the given rank, scaled by 1/sqrt(rank).
Matrix random_low_rank(int rows, int cols, int rank, std::uint64_t seed);

/// Teacher-student pair: the teacher's parameters theta* and a student initialized at
/// theta* + perturbation * N(0, 1) per entry.
EdaModel perturbed_copy(const EdaModel& teacher, double perturbation, std::uint64_t seed);

} // namespace dilab
