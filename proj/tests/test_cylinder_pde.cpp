#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fowler_lab/cylinder_pde.hpp"

using namespace fowler_lab;

namespace {

std::shared_ptr<const FowlerOrbit> conformal_orbit(int n, double frac) {
    auto p = FowlerParams::conformal(n);
    if (frac == 1.0) return std::make_shared<const FowlerOrbit>(constant_orbit(p));
    return std::make_shared<const FowlerOrbit>(periodic_orbit(frac * constant_solution(p), p));
}

std::shared_ptr<const FowlerOrbit> ckn_orbit(double frac) {
    auto p = FowlerParams::ckn(5, 0.5, 0.7);
    return std::make_shared<const FowlerOrbit>(periodic_orbit(frac * constant_solution(p), p));
}

double interior(const CylinderField& f) { return f.sup_norm(residual_boundary_points); }

// max_t e^{beta t} |phi - g - c d| with c fitted by least squares
double error_modulo(const Eigen::VectorXd& phi, const Eigen::VectorXd& g, const Eigen::VectorXd& d,
                    const TimeGrid& grid, double beta) {
    const Eigen::VectorXd diff = phi - g;
    const double c = d.squaredNorm() > 0 ? diff.dot(d) / d.squaredNorm() : 0.0;
    double worst = 0.0;
    for (int j = 0; j < grid.points; ++j) worst = std::max(worst, std::exp(beta * grid.t(j)) * std::abs(diff(j) - c * d(j)));
    return worst;
}

}  // namespace

TEST_CASE("fields project zonal polynomials exactly") {
    auto p = FowlerParams::conformal(5);
    const auto grid = TimeGrid::window(1.0, 2.0, 1.0 / 8);
    auto f = CylinderField::from_function(p, grid, 4, [&](double t, double s) {
        return t + 2.0 * eval_zonal(1, 5, s) - 0.5 * t * eval_zonal(3, 5, s);
    });
    for (int j = 0; j < grid.points; ++j) {
        const double t = grid.t(j);
        CHECK(f.coeff(0)(j) == doctest::Approx(t).epsilon(1e-13));
        CHECK(f.coeff(1)(j) == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(std::abs(f.coeff(2)(j)) < 1e-13);
        CHECK(f.coeff(3)(j) == doctest::Approx(-0.5 * t).epsilon(1e-13));
        CHECK(f.value(j, 0.3) == doctest::Approx(t + 0.6 - 0.5 * t * eval_zonal(3, 5, 0.3)).epsilon(1e-13));
    }
    const std::vector<double> pole{1, 0, 0, 0, 0};
    CHECK(f.value(0, pole) == doctest::Approx(1.0 + 2.0 - 0.5).epsilon(1e-13));
    CHECK((f - f).sup_norm() == 0.0);
    CHECK((f + f).coeff(1)(3) == doctest::Approx(4.0));
    CHECK_THROWS_AS(f - CylinderField(p, grid, 3), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::window(0.0, 0.5, 0.25), std::invalid_argument);
}

TEST_CASE("orbit and exact translate have residuals converging at fourth order") {
    auto orbit = conformal_orbit(5, 0.5);
    const auto flat = ForcingProfile::flat(1.0);
    const double a = std::exp(1.0);
    std::vector<double> xi_res, xa_res;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        const auto grid = TimeGrid::window(2.0, 8.0, h);
        xi_res.push_back(interior(residual_M(CylinderField::lift(*orbit, grid, 3), flat)));
        auto xa = CylinderField::from_function(orbit->params(), grid, 24, [&](double t, double s) {
            return exact_translate_zonal(*orbit, a, t, s);
        });
        xa_res.push_back(interior(residual_M(xa, flat)));
    }
    CHECK(xi_res[1] < 1e-6);
    CHECK(xi_res[0] / xi_res[1] >= 14.0);
    CHECK(xi_res[0] / xi_res[1] <= 18.0);
    CHECK(xa_res[0] / xa_res[1] >= 14.0);
    CHECK(xa_res[0] / xa_res[1] <= 18.0);

    auto constant = conformal_orbit(5, 1.0);
    const auto grid = TimeGrid::window(0.0, 4.0, 1.0 / 64);
    CHECK(residual_M(CylinderField::lift(*constant, grid, 2), flat).sup_norm() < 1e-10);
}

TEST_CASE("the first-order term removes the e^{-t} part of the residual") {
    auto orbit = conformal_orbit(4, 0.5);
    const auto& p = orbit->params();
    const auto grid = TimeGrid::window(1.0, 10.0, 1.0 / 64);
    auto with_first = CylinderField::from_function(p, grid, 3, [&](double t, double s) {
        return orbit->value(t) + std::exp(-t) * (0.5 * (p.n - 2) * orbit->value(t) - orbit->derivative(t)) * s;
    });
    const auto r = residual_M(with_first, ForcingProfile::flat(1.0));
    std::vector<double> t, y;
    for (int j = 2; j < grid.points - 2; ++j) {
        t.push_back(grid.t(j));
        y.push_back(r.sup_theta(j));
    }
    DecayFitOptions opts;
    opts.period = orbit->period();
    const auto fit = fit_decay(t, y, false, opts);
    CHECK(fit.rate == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("CKN residual: orbit, constant solution and the kernel direction") {
    auto orbit = ckn_orbit(0.4);
    const auto& p = orbit->params();
    std::vector<double> res;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        const auto grid = TimeGrid::window(0.5, 8.0, h);
        res.push_back(interior(residual_N(CylinderField::lift(*orbit, grid, 2))));
    }
    CHECK(res[0] / res[1] >= 14.0);
    CHECK(res[0] / res[1] <= 18.0);

    const auto grid = TimeGrid::window(0.5, 8.0, 1.0 / 64);
    auto zstar = std::make_shared<const FowlerOrbit>(constant_orbit(p));
    CHECK(residual_N(CylinderField::lift(*zstar, grid, 2)).sup_norm() < 1e-10);

    const auto spec = analyze_mode(orbit, 1);
    REQUIRE(spec.kernel.has_value());
    const double sigma = spec.kernel->sigma;
    auto perturbed = [&](double delta) {
        CylinderField f = CylinderField::lift(*orbit, grid, 3);
        for (int j = 0; j < grid.points; ++j)
            f.coeff(1)(j) = delta * std::exp(-sigma * grid.t(j)) * spec.kernel->q_plus(grid.t(j));
        return interior(residual_N(f));
    };
    const double base = res[1];
    const double r1 = perturbed(1e-3) - base, r2 = perturbed(5e-4) - base;
    CHECK(r1 < 1e-5);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("residual rejects nonpositive fields and the wrong problem") {
    auto p = FowlerParams::conformal(4);
    const auto grid = TimeGrid::window(0.0, 1.0, 1.0 / 16);
    auto f = CylinderField::from_function(p, grid, 2, [](double, double s) { return 0.5 + s; });
    CHECK_THROWS_AS(residual_M(f, ForcingProfile::flat(1.0)), std::domain_error);
    CHECK_THROWS_AS(residual_N(f), std::invalid_argument);
}

TEST_CASE("inverse round trip recovers a decaying function up to the kernel gauge") {
    auto orbit = conformal_orbit(5, 0.5);
    const auto grid = TimeGrid::window(2.0, 12.0, 1.0 / 64);
    const double w = 2 * std::numbers::pi / orbit->period();
    for (int degree = 0; degree < 4; ++degree) {
        const auto spec = analyze_mode(orbit, degree);
        for (double beta : {1.5, 2.5}) {
            auto g = [&](double t) { return std::exp(-beta * t) * (1 + 0.3 * std::cos(w * t)); };
            auto g2 = [&](double t) {
                const double e = std::exp(-beta * t), c = std::cos(w * t), s = std::sin(w * t);
                return e * (beta * beta * (1 + 0.3 * c) + 2 * beta * 0.3 * w * s - 0.3 * w * w * c);
            };
            Eigen::VectorXd rhs(grid.points), gv(grid.points), d = Eigen::VectorXd::Zero(grid.points);
            for (int j = 0; j < grid.points; ++j) {
                const double t = grid.t(j);
                rhs(j) = -g2(t) + spec.op.potential(t) * g(t);
                gv(j) = g(t);
                if (spec.kernel && spec.kernel->sigma > beta)
                    d(j) = std::exp(-spec.kernel->sigma * t) * spec.kernel->q_plus(t);
            }
            INFO("degree=" << degree << " beta=" << beta);
            ModeInverse inv(spec, grid, beta);
            InverseInfo info;
            const auto phi = inv.solve(rhs, &info);
            CHECK(info.asymptotic);
            CHECK(info.fast == (d.norm() > 0));
            CHECK(error_modulo(phi, gv, d, grid, beta) < 1e-7);
        }
    }
}

TEST_CASE("constant orbit inverse is e^{-beta t}/(lambda + q(1-e) - beta^2)") {
    auto orbit = conformal_orbit(6, 1.0);
    const auto& p = orbit->params();
    const auto grid = TimeGrid::window(2.0, 12.0, 1.0 / 64);
    for (int degree : {0, 1, 2, 3}) {
        const auto spec = analyze_mode(orbit, degree);
        const double beta = 2.3;
        Eigen::VectorXd rhs(grid.points), expected(grid.points), d = Eigen::VectorXd::Zero(grid.points);
        for (int j = 0; j < grid.points; ++j) {
            const double t = grid.t(j);
            rhs(j) = std::exp(-beta * t);
            expected(j) = rhs(j) / (eigenvalue(degree, p.n) + p.q * (1 - p.e) - beta * beta);
            if (spec.kernel && spec.kernel->sigma > beta) d(j) = std::exp(-spec.kernel->sigma * t);
        }
        INFO("degree=" << degree);
        CHECK(error_modulo(inverse_L(spec, rhs, grid, beta), expected, d, grid, beta) < 1e-8);
    }
}

TEST_CASE("inverse is linear for a fixed terminal rate") {
    auto orbit = conformal_orbit(4, 0.5);
    const auto grid = TimeGrid::window(2.0, 12.0, 1.0 / 64);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double w = 2 * std::numbers::pi / orbit->period(), beta = 1.7;
    InverseOptions opts;
    opts.terminal_rate = beta;
    for (int degree : {0, 1, 2}) {
        ModeInverse inv(analyze_mode(orbit, degree), grid, beta, opts);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd f1(grid.points), f2(grid.points);
            const double a[4] = {coef(rng), coef(rng), coef(rng), coef(rng)};
            for (int j = 0; j < grid.points; ++j) {
                const double t = grid.t(j), e = std::exp(-beta * t);
                f1(j) = e * (1 + a[0] * std::cos(w * t) + a[1] * std::sin(2 * w * t));
                f2(j) = e * (a[2] + a[3] * std::cos(3 * w * t));
            }
            const double c1 = coef(rng), c2 = coef(rng);
            const Eigen::VectorXd lhs = inv.solve(c1 * f1 + c2 * f2);
            const Eigen::VectorXd rhs = c1 * inv.solve(f1) + c2 * inv.solve(f2);
            double worst = 0.0;
            for (int j = 0; j < grid.points; ++j) worst = std::max(worst, std::exp(beta * grid.t(j)) * std::abs(lhs(j) - rhs(j)));
            CHECK(worst < 1e-10);
        }
    }
}

TEST_CASE("inverse refuses a resonant rate unless asked") {
    auto orbit = conformal_orbit(4, 0.5);
    const auto grid = TimeGrid::window(2.0, 12.0, 1.0 / 64);
    const auto spec = analyze_mode(orbit, 1);
    CHECK_THROWS_AS(ModeInverse(spec, grid, 1.0), std::domain_error);
    InverseOptions opts;
    opts.allow_resonant = true;
    ModeInverse inv(spec, grid, 1.0, opts);
    CHECK_FALSE(inv.fast());
}

TEST_CASE("flat K: the fixed point is the orbit itself") {
    auto orbit = conformal_orbit(5, 0.5);
    const auto res = contraction_construct(orbit, ForcingProfile::flat(1.0), {});
    REQUIRE(res.converged);
    CHECK(res.trace.size() == 1);
    CHECK(res.phi.sup_norm() == 0.0);
}

TEST_CASE("constructed solutions decay at the flatness rate off resonance") {
    auto orbit = conformal_orbit(5, 0.5);
    DecayFitOptions fit;
    fit.period = orbit->period();
    for (double beta : {1.5, 2.5}) {
        ForcingProfile k{1.0, {{1, 0.05, beta}}};
        const auto res = contraction_construct(orbit, k, {});
        INFO("beta=" << beta);
        REQUIRE(res.converged);
        CHECK(res.doublings == 0);
        CHECK(res.v.min_value() > 0.0);
        for (std::size_t i = 2; i < res.trace.size(); ++i) CHECK(res.trace[i].factor < 1.0);
        const auto m = decay_rate_fit(res.v - CylinderField::lift(*orbit, res.v.grid(), res.v.modes()),
                                      res.t0 + 0.5, res.t0 + 11.5, fit);
        CHECK(m.plain.rate == doctest::Approx(beta).epsilon(0.05));

        // check the residual of the constructed field directly
        const auto r = residual_M(res.v, k);
        CHECK(interior(r) < 1e-6);
    }
}

TEST_CASE("resonant flatness produces a t e^{-t} profile") {
    auto orbit = conformal_orbit(5, 0.5);
    ForcingProfile k{1.0, {{1, 0.05, 1.0}}};
    const auto res = contraction_construct(orbit, k, {});
    REQUIRE(res.converged);
    DecayFitOptions fit;
    fit.period = orbit->period();
    const auto m = decay_rate_fit(res.phi, res.t0 + 0.5, res.t0 + 11.5, fit);
    CHECK(m.prefers_log);
    CHECK(m.with_log.rate == doctest::Approx(1.0).epsilon(0.05));
    CHECK(m.plain.rate < 1.0);
}

TEST_CASE("fixed point is stable under more iterations and more modes") {
    auto orbit = conformal_orbit(5, 0.5);
    ForcingProfile k{1.0, {{1, 0.05, 2.5}}};
    ContractionOptions base;
    const auto a = contraction_construct(orbit, k, {}, base);
    ContractionOptions tighter = base;
    tighter.tol = 1e-14;
    const auto b = contraction_construct(orbit, k, {}, tighter);
    ContractionOptions wider = base;
    wider.modes = 8;
    const auto c = contraction_construct(orbit, k, {}, wider);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    REQUIRE(c.converged);
    CHECK((a.phi - b.phi).weighted_norm(a.weight) < base.tol);
    CylinderField c4(a.phi.params(), a.phi.grid(), 4);
    for (int m = 0; m < 4; ++m) c4.coeff(m) = c.phi.coeff(m);
    CHECK((a.phi - c4).weighted_norm(a.weight) < 10 * base.tol);
}

TEST_CASE("first-order ansatz leaves a remainder with rate in (1, 2)") {
    auto orbit = conformal_orbit(5, 0.5);
    ForcingProfile k{1.0, {{1, 0.05, 1.5}}};
    const auto res = contraction_construct(orbit, k, {Ansatz::Kind::OrbitPlusKernel, 0.5, 1.0});
    REQUIRE(res.converged);
    DecayFitOptions fit;
    fit.period = orbit->period();
    const auto m = decay_rate_fit(res.phi, res.t0 + 0.5, res.t0 + 11.5, fit);
    CHECK(m.plain.rate > 1.0);
    CHECK(m.plain.rate < 2.0);
    CHECK(m.plain.rate == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("CKN construction decays at the ansatz rate") {
    auto orbit = ckn_orbit(0.3);
    const double s1 = analyze_mode(orbit, 1).kernel->sigma;
    const double nu = 1.3 * s1;
    const auto res = contraction_construct(orbit, ForcingProfile::flat(1.0), {Ansatz::Kind::CknKernel, 0.05, nu});
    REQUIRE(res.converged);
    DecayFitOptions fit;
    fit.period = orbit->period();
    const auto m = decay_rate_fit(res.phi, res.t0 + 0.5, res.t0 + 11.5, fit);
    CHECK(m.plain.rate == doctest::Approx(nu).epsilon(0.05));
    CHECK(interior(residual_N(res.v)) < 1e-6);
}

TEST_CASE("contraction input checks") {
    auto orbit = conformal_orbit(5, 0.5);
    CHECK_THROWS_AS(contraction_construct(orbit, ForcingProfile::flat(2.0), {}), std::invalid_argument);
    CHECK_THROWS_AS(contraction_construct(orbit, {1.0, {{5, 0.1, 2.0}}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(contraction_construct(orbit, {1.0, {{1, 0.1, 0.5}}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(contraction_construct(orbit, {1.0, {{1, 0.1, 1.5}}}, {Ansatz::Kind::CknKernel, 0.1, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(contraction_construct(orbit, {1.0, {{1, 2.0e4, 1.5}}}, {}), std::domain_error);
}

TEST_CASE("decay fit of synthetic fields") {
    auto p = FowlerParams::conformal(4);
    const auto grid = TimeGrid::window(1.0, 10.0, 1.0 / 32);
    auto pure = CylinderField::from_function(p, grid, 2, [](double t, double s) { return std::exp(-2 * t) * (1 + 0.5 * s); });
    const auto m1 = decay_rate_fit(pure, 1.0, 11.0);
    CHECK(m1.plain.rate == doctest::Approx(2.0).epsilon(1e-4));
    CHECK_FALSE(m1.prefers_log);
    auto power = CylinderField::from_function(p, grid, 2, [](double t, double) { return t * std::exp(-t); });
    const auto m2 = decay_rate_fit(power, 2.0, 11.0);
    CHECK(m2.prefers_log);
    CHECK(m2.chosen().rate == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("n = 4 example: fourth-order residual and the gradient of K at 0") {
    const auto samples = remark_samples(64);
    const auto check = remark_example_check(samples, 0.02);
    CHECK(check.rejected == 0);
    CHECK(check.residual_half < check.residual_h);
    CHECK(check.ratio >= 14.0);
    CHECK(check.ratio <= 18.0);
    for (double g : check.grad_k0) CHECK(g == doctest::Approx(0.125).epsilon(1e-4 / 0.125));
    CHECK(check.grad_error < 1e-4);

    // u0 = 1/|x| with analytic derivatives: sum_i d_ii (1/r) = -4/r^3 + 3/r^3
    for (const auto& x : samples) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3], r = std::sqrt(r2);
        double lap = 0.0;
        for (double xi : x) lap += -1.0 / (r * r2) + 3.0 * xi * xi / (r2 * r2 * r);
        CHECK(std::abs(-lap - 1.0 / (r * r2)) < 1e-12 / (r * r2));
    }

    std::vector<std::array<double, 4>> close{{0.05, 0.0, 0.0, 0.0}, {0.3, 0.1, 0.0, 0.0}};
    int rejected = 0;
    remark_residual(close, 0.02, &rejected);
    CHECK(rejected == 1);
    CHECK_THROWS_AS(remark_residual({{0.01, 0, 0, 0}}, 0.02), std::domain_error);
    CHECK(remark_k({0, 0, 0, 0}) == 1.0);
}
