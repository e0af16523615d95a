#pragma once

#include <span>
#include <string>
#include <vector>

namespace fowler_lab {

/// counts[j] copies of the j-th distinct exponent.
struct Combination {
    std::vector<int> counts;
    int total = 0;
    double value = 0.0;
};

struct IndexValue {
    double value = 0.0;
    std::vector<Combination> provenance;
    bool single = false;  // some combination uses one exponent
    bool multi = false;   // some combination uses two or more
    bool resonant() const { return single && multi; }
};

/// Finite sums sum n_j rho_j (n_j >= 0, not all zero) up to a cutoff.
struct IndexSet {
    double cutoff = 0.0;
    double tol = 1e-8;
    std::vector<double> distinct;                // distinct exponents, ascending
    std::vector<std::vector<int>> degrees;       // harmonic degrees carrying each distinct exponent
    std::vector<IndexValue> values;              // ascending
    std::vector<std::string> warnings;
};

/// rho lists every exponent with multiplicity; degrees (optional) gives the harmonic degree of each.
IndexSet generate(std::span<const double> rho, double cutoff, double tol = 1e-8, std::span<const int> degrees = {});

struct IndexSplit {
    std::vector<double> singles;     // S1
    std::vector<double> multiples;   // S2
    std::vector<double> resonances;  // S1 and S2
};

IndexSplit split(const IndexSet& set);

/// Second smallest value of the set, +inf if the cutoff admits only one.
double second_index(const IndexSet& set);

struct DegreeCaps {
    int k_tilde = 0;        // largest total degree over combinations of two or more exponents hitting the target
    long long m_tilde = 0;  // last flattened eigenfunction index (0-based) of degree <= k_tilde
};

/// target must be a multi-exponent sum in the set; needs the degrees supplied to generate().
DegreeCaps degree_caps(const IndexSet& set, double target, int n);

}  // namespace fowler_lab
