#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fowler_lab/io.hpp"
#include "fowler_lab/verify.hpp"

using namespace fowler_lab;

TEST_CASE("17 significant digits round-trip doubles") {
    for (double x : {0.1, 1.0 / 3.0, std::exp(-30.0), 6.02214076e23, -2.5e-310}) {
        const auto s = io::number(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(io::number(0.1) == "0.10000000000000001");
}

TEST_CASE("orbit CSV reproduces the samples exactly") {
    auto p = FowlerParams::conformal(5);
    auto orbit = periodic_orbit(0.4, p, {64});
    const auto file = (std::filesystem::temp_directory_path() / "fowler_lab_orbit_test.csv").string();
    io::write_orbit_csv(orbit, file);
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,xi,xi_prime");
    int i = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string t, x, xp;
        std::getline(ss, t, ',');
        std::getline(ss, x, ',');
        std::getline(ss, xp, ',');
        CHECK(std::stod(t) == orbit.time(i));
        CHECK(std::stod(x) == orbit.xi_samples()[i]);
        CHECK(std::stod(xp) == orbit.xi_prime_samples()[i]);
        ++i;
    }
    CHECK(i == orbit.samples() + 1);
    std::filesystem::remove(file);
}

TEST_CASE("reports serialize without wall-clock data") {
    CriterionReport r;
    r.id = 3;
    r.suite = "x";
    r.seconds = 1.25;
    r.record("value", 0.5);
    r.record("missing", std::nan(""));
    r.expect(false, "broken");
    const auto j = io::to_json(r);
    CHECK_FALSE(j["passed"].get<bool>());
    CHECK(j["values"]["value"].get<double>() == 0.5);
    CHECK(j["values"]["missing"].is_null());
    CHECK_FALSE(j.contains("seconds"));
    CHECK(j["failures"].size() == 1);
}

TEST_CASE("brute-force index values on a hand-checked list") {
    const std::vector<double> rho{1.0, 1.5};
    const auto v = brute_force_index_values(rho, 3.0);
    // 1, 1.5, 2, 2.5, 3 (= 1+1+1 and 1.5+1.5)
    REQUIRE(v.size() == 5);
    CHECK(v[0].single);
    CHECK_FALSE(v[0].multi);
    CHECK(v[1].single);
    CHECK(v[2].multi);
    CHECK(v[4].value == doctest::Approx(3.0));
    CHECK_FALSE(v[4].single);
    CHECK_THROWS_AS(brute_force_index_values(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("suite lookup") {
    CHECK(suites().size() == 11);
    CHECK_THROWS_AS(run_suites({"no-such-suite"}), std::invalid_argument);
    const auto r = run_suites({"remark"});
    REQUIRE(r.size() == 1);
    CHECK(r[0].id == 10);
    CHECK(r[0].passed);
}
