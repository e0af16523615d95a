#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fowler_lab {

struct CriterionReport {
    int id = 0;
    std::string suite;
    std::string title;
    bool passed = true;
    double seconds = 0.0;  // wall clock
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, double>> timings;  // wall-clock seconds, kept out of reports
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void record(const std::string& name, double value) { values.emplace_back(name, value); }
    /// Fails the report with message unless ok.
    void expect(bool ok, const std::string& message);
};

struct VerifyOptions {
    std::vector<int> dims;  // overrides the default dimension sweep where a suite has one
    std::uint64_t seed = 20240611;
};

CriterionReport check_constant_floquet(const VerifyOptions& options = {});
CriterionReport check_kernel_exponents(const VerifyOptions& options = {});
CriterionReport check_lower_bound(const VerifyOptions& options = {});
CriterionReport check_hamiltonian(const VerifyOptions& options = {});
CriterionReport check_xi2(const VerifyOptions& options = {});
CriterionReport check_translate(const VerifyOptions& options = {});
CriterionReport check_index_set(const VerifyOptions& options = {});
CriterionReport check_contraction(const VerifyOptions& options = {});
CriterionReport check_first_order(const VerifyOptions& options = {});
CriterionReport check_remark(const VerifyOptions& options = {});
CriterionReport check_ckn(const VerifyOptions& options = {});

struct Suite {
    int id;
    const char* name;
    CriterionReport (*run)(const VerifyOptions&);
};

/// All suites in criterion order.
std::span<const Suite> suites();

/// Runs the named suites ("all" selects every one). Throws invalid_argument for an unknown name.
std::vector<CriterionReport> run_suites(const std::vector<std::string>& names, const VerifyOptions& options = {});

struct BruteIndexValue {
    double value = 0.0;
    bool single = false;
    bool multi = false;
};

/// Every sum n_1 rho_1 + ... + n_m rho_m up to the cutoff by exhaustive counting, merged within tol.
std::vector<BruteIndexValue> brute_force_index_values(std::span<const double> rho, double cutoff, double tol = 1e-8);

}  // namespace fowler_lab
