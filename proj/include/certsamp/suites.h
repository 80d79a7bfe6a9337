#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "certsamp/dist.h"
#include "certsamp/rng.h"
#include "certsamp/statevec.h"

namespace certsamp::suites {

/// One property check: the measured value and the bound it was held to.
struct Check {
    std::string name;
    bool passed;
    double measured;
    double bound;
    /// "<=", ">=" or "==", read as `measured relation bound`.
    std::string relation;
};

struct SuiteOptions {
    std::uint64_t seed = 20260101;
    /// Multiplies instance and round counts. 1 is the full size.
    double scale = 1.0;
};

/// Names accepted by run_suite, in display order.
const std::vector<std::string> &suite_names();
/// Throws std::invalid_argument for an unknown name.
std::vector<Check> run_suite(const std::string &name, const SuiteOptions &options = {});

std::vector<Check> swap_suite(const SuiteOptions &options);
std::vector<Check> metric_checks(const SuiteOptions &options);
std::vector<Check> reduction_suite(const SuiteOptions &options);
std::vector<Check> mixture_suite(const SuiteOptions &options);
std::vector<Check> estimator_suite(const SuiteOptions &options);
std::vector<Check> clawfree_suite(const SuiteOptions &options);

/// `PASS name measured=… bound<=…` per check.
std::string format_check(const Check &c);

// Fixture helpers shared with the test binaries.

/// Random distribution on n bits; roughly a third of draws are sparse.
Distribution random_distribution(int n, RngStream &rng);
/// Point on the segment (1−t)·base + t·other at Hellinger distance d from
/// base, found by bisection. Falls back to toward_distance when `other` is
/// too close to reach d.
Distribution at_distance(const Distribution &base, const Distribution &other, double d);
/// Circuit on n ≤ 2 qubits whose output state is Σ_x √D(x)|x⟩.
Circuit preparation_circuit(const Distribution &d);

}  // namespace certsamp::suites
