#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fowler_lab/periodic.hpp"

using namespace fowler_lab;

namespace {
constexpr double pi = std::numbers::pi;
double f(double t) { return std::exp(std::sin(2.0 * pi * t / 3.0)); }
double fp(double t) { return (2.0 * pi / 3.0) * std::cos(2.0 * pi * t / 3.0) * f(t); }
}  // namespace

TEST_CASE("trigonometric interpolation is spectrally accurate") {
    auto p = PeriodicFunction::from_callable(3.0, 64, f);
    for (double t : {0.1, 1.234, 2.9, -0.7, 7.3}) CHECK(p(t) == doctest::Approx(f(t)).epsilon(1e-13));
}

TEST_CASE("spectral derivatives") {
    auto p = PeriodicFunction::from_callable(3.0, 64, f);
    auto d = p.derivative();
    auto dd = p.derivative(2);
    for (int i = 0; i < 64; ++i) {
        CHECK(d.samples()(i) == doctest::Approx(fp(d.node(i))).epsilon(1e-11).scale(1.0));
    }
    auto dd_ref = PeriodicFunction::from_callable(3.0, 64, fp).derivative();
    CHECK((dd.samples() - dd_ref.samples()).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::MatrixXd D1 = fourier_differentiation_matrix(64, 3.0, 1);
    Eigen::MatrixXd D2 = fourier_differentiation_matrix(64, 3.0, 2);
    CHECK((D1 * p.samples() - d.samples()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((D2 * p.samples() - dd.samples()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("resampling preserves the function") {
    auto p = PeriodicFunction::from_callable(3.0, 48, f);
    auto up = p.resampled(128);
    auto down = up.resampled(48);
    for (int i = 0; i < 128; ++i) CHECK(up.samples()(i) == doctest::Approx(f(up.node(i))).epsilon(1e-12));
    CHECK((down.samples() - p.samples()).cwiseAbs().maxCoeff() < 1e-13);
    auto c = PeriodicFunction::from_callable(2.0, 8, [](double t) { return std::cos(2.0 * pi * t); });
    CHECK(c.resampled(16)(0.25) == doctest::Approx(std::cos(pi * 0.25 * 2.0)).scale(1.0));
}

TEST_CASE("arithmetic and inner products") {
    auto a = PeriodicFunction::from_callable(2.0, 32, [](double t) { return std::sin(pi * t); });
    auto b = PeriodicFunction::from_callable(2.0, 32, [](double t) { return std::sin(pi * t); });
    CHECK(a.mean_product(b) == doctest::Approx(0.5));
    CHECK((a - b).sup_norm() == 0.0);
    CHECK((a * 2.0 + b).sup_norm() == doctest::Approx(3.0));
    auto c = PeriodicFunction::from_callable(1.0, 32, [](double) { return 1.0; });
    CHECK_THROWS_AS(a + c, std::invalid_argument);
    CHECK_THROWS_AS(PeriodicFunction(0.0, Eigen::VectorXd::Ones(4)), std::invalid_argument);
}
