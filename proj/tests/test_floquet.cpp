#include <doctest.h>

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "fowler_lab/floquet.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

using namespace fowler_lab;

namespace {

std::shared_ptr<const FowlerOrbit> orbit_for(int n, double frac) {
    auto p = FowlerParams::conformal(n);
    return std::make_shared<const FowlerOrbit>(periodic_orbit(frac * constant_solution(p), p));
}

// Slope of log|h(kT)| over k = 2..periods for a generic solution of h'' = V h.
double fitted_growth(const ModeOperator& op, int periods) {
    namespace odeint = boost::numeric::odeint;
    using S = std::array<double, 2>;
    auto sys = [&](const S& x, S& dx, double t) {
        dx[0] = x[1];
        dx[1] = op.potential(t) * x[0];
    };
    S x{0.3, 1.0};
    double sx = 0, sy = 0, sxx = 0, sxy = 0, t = 0.0, log_scale = 0.0;
    for (int k = 1; k <= periods; ++k) {
        odeint::integrate_adaptive(odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<S>()), sys, x, t,
                                   t + op.period(), 1e-3);
        t += op.period();
        const double r = std::hypot(x[0], x[1]);
        log_scale += std::log(r);
        x[0] /= r;
        x[1] /= r;
        if (k == 1) continue;  // let the decaying component die out
        sx += t;
        sy += log_scale;
        sxx += t * t;
        sxy += t * log_scale;
    }
    const double m = periods - 1;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("classification of synthetic monodromy matrices") {
    Monodromy m;
    m.matrix << std::cosh(2.0), std::sinh(2.0), std::sinh(2.0), std::cosh(2.0);
    auto d = classify(m, 1.0);
    CHECK(d.type == FloquetType::III);
    CHECK(d.exponent == doctest::Approx(2.0));
    m.matrix << std::cos(0.7), std::sin(0.7), -std::sin(0.7), std::cos(0.7);
    d = classify(m, 2.0);
    CHECK(d.type == FloquetType::IV);
    CHECK(d.rotation == doctest::Approx(0.35));
    m.matrix.setIdentity();
    CHECK(classify(m, 1.0).type == FloquetType::I);
    m.matrix << 1.0, 0.5, 0.0, 1.0;
    d = classify(m, 1.0);
    CHECK(d.type == FloquetType::II);
    CHECK_FALSE(d.warnings.empty());
    m.matrix << -std::cosh(1.0), 0.0, 0.0, -1.0 / std::cosh(1.0);
    d = classify(m, 1.0);
    CHECK(d.type == FloquetType::III);
    CHECK(d.multiplier < 0.0);
}

TEST_CASE("constant orbit exponents") {
    for (int n = 3; n <= 8; ++n) {
        auto p = FowlerParams::conformal(n);
        auto orbit = std::make_shared<const FowlerOrbit>(constant_orbit(p));
        auto seq = exponent_sequence(orbit, 12);
        for (const auto& e : seq) {
            CHECK(e.sigma == doctest::Approx(std::sqrt(e.lambda - n + 2.0)).epsilon(1e-10));
            CHECK(e.sigma == doctest::Approx(constant_orbit_exponent(e.lambda, p)).epsilon(1e-10));
        }
        CHECK(lower_bound_check(seq, *orbit).passed);
    }
}

TEST_CASE("degree one exponent is one on nonconstant orbits") {
    for (int n : {3, 4, 5, 7}) {
        auto orbit = orbit_for(n, 0.3);
        auto ms = analyze_mode(orbit, 1);
        REQUIRE(ms.datum.type == FloquetType::III);
        CHECK(ms.datum.exponent == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(ms.mono.determinant - 1.0) < 1e-9);
        REQUIRE(ms.kernel);
        // q^+ is proportional to (n-2)/2 xi - xi'
        const auto& q = ms.kernel->q_plus;
        const double scale = 0.5 * (n - 2.0) * orbit->epsilon();
        double err = 0.0;
        for (int i = 0; i < q.size(); ++i) {
            const double ref = (0.5 * (n - 2.0) * orbit->xi_samples()[i] - orbit->xi_prime_samples()[i]) / scale;
            err = std::max(err, std::abs(q.samples()(i) - ref));
        }
        CHECK(err < 1e-7);
        CHECK(ms.kernel->periodicity_defect < 1e-7);
    }
}

TEST_CASE("e^{-t}((n-2)/2 xi - xi') solves the degree one equation") {
    const int n = 6;
    auto orbit = orbit_for(n, 0.4);
    auto op = ModeOperator::make(orbit, 1);
    auto w = PeriodicFunction::from_callable(orbit->period(), 512, [&](double t) {
        return 0.5 * (n - 2.0) * orbit->value(t) - orbit->derivative(t);
    });
    auto wp = w.derivative(), wpp = w.derivative(2);
    double res = 0.0;
    for (int i = 0; i < w.size(); ++i) {
        // h = e^{-t} w gives -h'' + V h = e^{-t}(-w'' + 2w' - w + V w)
        const double t = w.node(i);
        res = std::max(res, std::abs(-wpp.samples()(i) + 2.0 * wp.samples()(i) - w.samples()(i) + op.potential(t) * w.samples()(i)));
    }
    CHECK(res < 1e-7);
}

TEST_CASE("degree zero is parabolic on nonconstant orbits") {
    auto orbit = orbit_for(5, 0.5);
    auto ms = analyze_mode(orbit, 0);
    CHECK(ms.datum.type == FloquetType::II);
    CHECK(std::abs(ms.datum.trace - 2.0) < 1e-8);
    CHECK_FALSE(ms.kernel);
    CHECK(translation_kernel_residual(*orbit) < 1e-6);
}

TEST_CASE("exponents match a direct growth-rate fit") {
    auto orbit = orbit_for(5, 0.5);
    for (int k = 1; k <= 3; ++k) {
        auto op = ModeOperator::make(orbit, k);
        auto d = classify(monodromy(op), orbit->period());
        CHECK(fitted_growth(op, 6) == doctest::Approx(d.exponent).epsilon(1e-6));
    }
}

TEST_CASE("kernel factors are periodic solutions") {
    auto orbit = orbit_for(4, 0.25);
    auto ms = analyze_mode(orbit, 2);
    REQUIRE(ms.kernel);
    const auto& kb = *ms.kernel;
    CHECK(kb.q_plus.samples().minCoeff() > 0.0);
    CHECK(kb.q_minus.samples().minCoeff() > 0.0);
    CHECK(kb.q_plus(0.0) == doctest::Approx(1.0));
    // -q'' + 2 sigma q' + (V - sigma^2) q = 0 for q^+
    auto qpp = kb.q_plus_prime.derivative();
    double res = 0.0;
    for (int i = 0; i < kb.q_plus.size(); ++i) {
        const double t = kb.q_plus.node(i);
        res = std::max(res, std::abs(-qpp.samples()(i) + 2.0 * kb.sigma * kb.q_plus_prime.samples()(i) +
                                     (ms.op.potential(t) - kb.sigma * kb.sigma) * kb.q_plus.samples()(i)));
    }
    CHECK(res < 1e-6);
}

TEST_CASE("lower bound and the second index gap") {
    for (int n = 3; n <= 8; ++n) {
        auto orbit = orbit_for(n, 0.3);
        auto seq = exponent_sequence(orbit, n + 1 + static_cast<int>(multiplicity(2, n)));
        auto report = lower_bound_check(seq, *orbit);
        CHECK(report.passed);
        for (const auto& b : report.entries) CHECK(b.margin > 0.0);
        for (int i = 0; i < n; ++i) CHECK(seq[i].sigma == doctest::Approx(1.0).epsilon(1e-8));
        if (n >= 6) CHECK(seq[n].sigma > 2.0);
        for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i].sigma >= seq[i - 1].sigma - 1e-12);
    }
}
