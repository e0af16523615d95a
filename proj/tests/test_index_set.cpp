#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fowler_lab/index_set.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

using namespace fowler_lab;

namespace {

struct BruteValue {
    double value;
    bool single;
    bool multi;
};

// Odometer over every entry of the original list, n_i in [0, ceil(cutoff / rho_min)].
std::vector<BruteValue> brute_force(const std::vector<double>& rho, double cutoff, double tol) {
    const double rmin = *std::min_element(rho.begin(), rho.end());
    const int cap = static_cast<int>(std::ceil(cutoff / rmin));
    std::vector<int> n(rho.size(), 0);
    std::vector<std::pair<double, int>> sums;
    while (true) {
        std::size_t i = 0;
        while (i < n.size() && n[i] == cap) n[i++] = 0;
        if (i == n.size()) break;
        ++n[i];
        double s = 0.0;
        int total = 0;
        for (std::size_t j = 0; j < n.size(); ++j) {
            s += n[j] * rho[j];
            total += n[j];
        }
        if (s <= cutoff + tol) sums.push_back({s, total});
    }
    std::sort(sums.begin(), sums.end());
    std::vector<BruteValue> out;
    double anchor = -1.0;
    for (auto [s, total] : sums) {
        if (out.empty() || s - anchor > tol) {
            out.push_back({s, false, false});
            anchor = s;
        }
        (total == 1 ? out.back().single : out.back().multi) = true;
    }
    return out;
}

}  // namespace

TEST_CASE("constant orbit example in five dimensions") {
    const double r6 = std::sqrt(7.0);
    std::vector<double> rho{1, 1, 1, 1, 1, r6};
    std::vector<int> deg{1, 1, 1, 1, 1, 2};
    auto set = generate(rho, 3.0, 1e-8, deg);
    REQUIRE(set.values.size() == 4);
    CHECK(set.values[0].value == doctest::Approx(1.0));
    CHECK(set.values[1].value == doctest::Approx(2.0));
    CHECK(set.values[2].value == doctest::Approx(r6));
    CHECK(set.values[3].value == doctest::Approx(3.0));
    CHECK(set.distinct.size() == 2);
    CHECK(second_index(set) == doctest::Approx(std::min(2.0, r6)));
    auto caps = degree_caps(set, 3.0, 5);
    CHECK(caps.k_tilde == 3);
    CHECK(caps.m_tilde == count_up_to_degree(3, 5) - 1);
    auto wide = generate(rho, 4.0, 1e-8, deg);
    CHECK(degree_caps(wide, r6 + 1.0, 5).k_tilde == 3);
    CHECK_THROWS_AS(degree_caps(set, r6, 5), std::domain_error);
}

TEST_CASE("split into singles and multiples") {
    std::vector<double> a{1, 1, 1, 2.6458};
    auto s = split(generate(a, 5.0));
    CHECK(s.multiples.front() == doctest::Approx(2.0));
    std::vector<double> b{1, 2};
    auto sb = split(generate(b, 4.0));
    REQUIRE_FALSE(sb.resonances.empty());
    CHECK(sb.resonances.front() == doctest::Approx(2.0));
    std::vector<double> c{1, std::sqrt(2.0)};
    CHECK(split(generate(c, 4.0, 1e-9)).resonances.empty());
}

TEST_CASE("degree caps for two degree-one modes") {
    std::vector<double> rho{1, 1, 1};
    std::vector<int> deg{1, 1, 1};
    auto set = generate(rho, 2.5, 1e-8, deg);
    CHECK(degree_caps(set, 2.0, 3).k_tilde == 2);
    CHECK(degree_caps(set, 2.0, 3).m_tilde == 8);
}

TEST_CASE("generate matches brute force on random lists") {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> u(0.7, 3.0);
    std::uniform_int_distribution<int> len(1, 5);
    std::uniform_real_distribution<double> cut(1.0, 6.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> rho;
        const int m = len(rng);
        for (int i = 0; i < m; ++i) rho.push_back(u(rng));
        if (trial % 3 == 0) rho.push_back(rho.front());          // repeated exponent
        if (trial % 4 == 0) rho.push_back(2.0 * rho.front());     // forced resonance
        double cutoff = std::max(cut(rng), *std::min_element(rho.begin(), rho.end()) + 0.1);
        auto set = generate(rho, cutoff);
        auto ref = brute_force(rho, cutoff, 1e-8);
        REQUIRE(set.values.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(set.values[i].value == doctest::Approx(ref[i].value).epsilon(1e-12));
            CHECK(set.values[i].single == ref[i].single);
            CHECK(set.values[i].multi == ref[i].multi);
        }
        if (trial % 4 == 0 && cutoff >= 2.0 * rho.front()) CHECK_FALSE(split(set).resonances.empty());
    }
}

TEST_CASE("index set invariants") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.5, 2.5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> rho{u(rng), u(rng), u(rng)};
        auto set = generate(rho, 5.0);
        const double mu1 = set.values.front().value;
        CHECK(mu1 == doctest::Approx(*std::min_element(rho.begin(), rho.end())));
        for (std::size_t i = 1; i < set.values.size(); ++i) CHECK(set.values[i].value - set.values[i - 1].value > set.tol);
        for (const auto& v : set.values) {
            for (const auto& c : v.provenance) {
                CHECK(std::abs(c.value - v.value) <= set.tol);
                if (c.total >= 2) CHECK(v.value >= 2.0 * mu1 - set.tol);
            }
        }
        // closure under sums
        for (const auto& a : set.values)
            for (const auto& b : set.values) {
                if (a.value + b.value > set.cutoff) continue;
                const double s = a.value + b.value;
                CHECK(std::any_of(set.values.begin(), set.values.end(),
                                  [&](const IndexValue& v) { return std::abs(v.value - s) <= 2 * set.tol; }));
            }
        // resonance flags agree with the split
        auto sp = split(set);
        for (const auto& v : set.values) {
            bool in_s1 = std::find(sp.singles.begin(), sp.singles.end(), v.value) != sp.singles.end();
            bool in_s2 = std::find(sp.multiples.begin(), sp.multiples.end(), v.value) != sp.multiples.end();
            CHECK(v.resonant() == (in_s1 && in_s2));
        }
    }
}

TEST_CASE("near resonances are reported") {
    std::vector<double> rho{1.0, 2.0 + 5e-8};
    auto set = generate(rho, 3.0);
    CHECK_FALSE(set.warnings.empty());
    CHECK(split(set).resonances.empty());
}

TEST_CASE("invalid inputs") {
    std::vector<double> empty;
    CHECK_THROWS_AS(generate(empty, 2.0), std::domain_error);
    std::vector<double> neg{-1.0};
    CHECK_THROWS_AS(generate(neg, 2.0), std::invalid_argument);
    std::vector<double> ok{1.0};
    CHECK_THROWS_AS(generate(ok, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(degree_caps(generate(ok, 3.0), 2.0, 3), std::invalid_argument);
}
