#include "fowler_lab/index_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fowler_lab/sphere_harmonics.hpp"

namespace fowler_lab {

namespace {

constexpr std::size_t kMaxCombinations = 5'000'000;

void enumerate(const std::vector<double>& rho, double limit, std::size_t j, std::vector<int>& counts, double sum,
               int total, std::vector<Combination>& out) {
    if (j == rho.size()) {
        if (total > 0) out.push_back({counts, total, sum});
        if (out.size() > kMaxCombinations)
            throw std::length_error("index set enumeration exceeded 5e6 combinations; lower the cutoff");
        return;
    }
    for (int c = 0; sum + c * rho[j] <= limit; ++c) {
        counts[j] = c;
        enumerate(rho, limit, j + 1, counts, sum + c * rho[j], total + c, out);
    }
    counts[j] = 0;
}

}  // namespace

IndexSet generate(std::span<const double> rho, double cutoff, double tol, std::span<const int> degrees) {
    if (rho.empty()) throw std::domain_error("exponent list is empty");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!std::isfinite(cutoff) || cutoff < 0.0) throw std::invalid_argument("cutoff must be finite and >= 0");
    if (!degrees.empty() && degrees.size() != rho.size())
        throw std::invalid_argument("degrees must match the exponent list");
    std::vector<std::size_t> order(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] > 0.0) || !std::isfinite(rho[i])) throw std::invalid_argument("exponents must be positive and finite");
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rho[a] < rho[b]; });
    if (!(cutoff > rho[order.front()])) throw std::invalid_argument("cutoff must exceed the smallest exponent");

    IndexSet set;
    set.cutoff = cutoff;
    set.tol = tol;
    std::vector<std::set<int>> deg_sets;
    for (std::size_t i : order) {
        if (set.distinct.empty() || rho[i] - set.distinct.back() > tol) {
            set.distinct.push_back(rho[i]);
            deg_sets.emplace_back();
        }
        if (!degrees.empty()) deg_sets.back().insert(degrees[i]);
    }
    for (const auto& s : deg_sets) set.degrees.emplace_back(s.begin(), s.end());

    std::vector<Combination> combos;
    std::vector<int> counts(set.distinct.size(), 0);
    enumerate(set.distinct, cutoff + tol, 0, counts, 0.0, 0, combos);
    std::sort(combos.begin(), combos.end(), [](const Combination& a, const Combination& b) { return a.value < b.value; });

    for (auto& c : combos) {
        if (set.values.empty() || c.value - set.values.back().provenance.front().value > tol) {
            set.values.push_back(IndexValue{c.value, {}, false, false});
        }
        IndexValue& v = set.values.back();
        (c.total == 1 ? v.single : v.multi) = true;
        v.provenance.push_back(std::move(c));
    }
    for (auto& v : set.values) {
        double s = 0.0;
        for (const auto& c : v.provenance) s += c.value;
        v.value = s / v.provenance.size();
    }
    for (std::size_t i = 1; i < set.values.size(); ++i) {
        const double gap = set.values[i].value - set.values[i - 1].value;
        if (gap <= 100.0 * tol) {
            std::ostringstream os;
            os.precision(17);
            os << "near resonance: " << set.values[i - 1].value << " and " << set.values[i].value << " differ by "
               << gap;
            set.warnings.push_back(os.str());
        }
    }
    return set;
}

IndexSplit split(const IndexSet& set) {
    IndexSplit s;
    for (const auto& v : set.values) {
        if (v.single) s.singles.push_back(v.value);
        if (v.multi) s.multiples.push_back(v.value);
        if (v.resonant()) s.resonances.push_back(v.value);
    }
    return s;
}

double second_index(const IndexSet& set) {
    return set.values.size() >= 2 ? set.values[1].value : std::numeric_limits<double>::infinity();
}

DegreeCaps degree_caps(const IndexSet& set, double target, int n) {
    if (set.degrees.size() != set.distinct.size() ||
        std::any_of(set.degrees.begin(), set.degrees.end(), [](const auto& d) { return d.empty(); }))
        throw std::invalid_argument("degree caps need the harmonic degree of every exponent");
    auto it = std::find_if(set.values.begin(), set.values.end(),
                           [&](const IndexValue& v) { return v.multi && std::abs(v.value - target) <= set.tol; });
    if (it == set.values.end()) throw std::domain_error("target is not a multi-exponent sum in the index set");
    DegreeCaps caps;
    for (const auto& c : it->provenance) {
        if (c.total < 2) continue;
        int k = 0;
        for (std::size_t j = 0; j < c.counts.size(); ++j) k += c.counts[j] * set.degrees[j].back();
        caps.k_tilde = std::max(caps.k_tilde, k);
    }
    caps.m_tilde = count_up_to_degree(caps.k_tilde, n) - 1;
    return caps;
}

}  // namespace fowler_lab
