#pragma once

// Invariant suites run by the `verify` subcommand: one quick property battery per module.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dilab {

struct SuiteResult {
    std::string suite;
    int checks = 0;
    int failures = 0;
    std::string first_failure;
    double seconds = 0.0;

    bool passed() const noexcept { return failures == 0; }
};

const std::vector<std::string>& verify_suite_names();

/// Throws DomainError for an unknown suite name. Exceptions inside a suite count as failures.
SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed);

std::vector<SuiteResult> run_verify(std::uint64_t seed);

/// Human-readable pass/fail table.
void write_verify_table(std::ostream& out, const std::vector<SuiteResult>& results);

/// suite,passed,checks,failures,seconds,first_failure (one row per suite).
void write_verify_csv(std::ostream& out, const std::vector<SuiteResult>& results);

} // namespace dilab
