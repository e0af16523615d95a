#include "fowler_lab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fowler_lab/cylinder_pde.hpp"
#include "fowler_lab/expansion.hpp"
#include "fowler_lab/floquet.hpp"
#include "fowler_lab/fowler.hpp"
#include "fowler_lab/index_set.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

namespace fowler_lab {

void CriterionReport::expect(bool ok, const std::string& message) {
    if (ok) return;
    passed = false;
    failures.push_back(message);
}

namespace {

template <class... A>
std::string cat(const A&... a) {
    std::ostringstream os;
    os.precision(6);
    (os << ... << a);
    return os.str();
}

std::shared_ptr<const FowlerOrbit> make_orbit(const FowlerParams& p, double frac) {
    if (frac == 1.0) return std::make_shared<const FowlerOrbit>(constant_orbit(p));
    return std::make_shared<const FowlerOrbit>(periodic_orbit(frac * constant_solution(p), p));
}

std::vector<int> dims_or(const VerifyOptions& o, std::vector<int> fallback) { return o.dims.empty() ? fallback : o.dims; }

std::string label(int n, double frac) { return cat("n=", n, " frac=", frac); }

std::string label(const FowlerParams& p) {
    return p.problem == Problem::Conformal ? cat("conformal n=", p.n) : cat("ckn n=", p.n, " a=", p.a, " b=", p.b);
}

template <class F>
CriterionReport timed(int id, const char* suite, const char* title, double limit_seconds, F&& body) {
    CriterionReport r;
    r.id = id;
    r.suite = suite;
    r.title = title;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.expect(false, cat("error: ", e.what()));
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0.0) r.expect(r.seconds < limit_seconds, cat("runtime ", r.seconds, " s exceeds ", limit_seconds, " s"));
    return r;
}

std::vector<double> sigmas(const std::vector<ExponentEntry>& seq) {
    std::vector<double> out;
    for (const auto& e : seq) out.push_back(e.sigma);
    return out;
}

DecayModels phi_fit(const ContractionResult& res, const FowlerOrbit& orbit, const CylinderField& diff) {
    DecayFitOptions fit;
    fit.period = orbit.is_constant() ? 0.0 : orbit.period();
    return decay_rate_fit(diff, res.t0 + 0.5, res.phi.grid().end() - 0.5, fit);
}

}  // namespace

CriterionReport check_constant_floquet(const VerifyOptions& options) {
    return timed(1, "floquet-constant", "constant-solution exponents", 1.0, [&](CriterionReport& r) {
        double worst = 0.0;
        for (int n : dims_or(options, {3, 4, 5, 6, 7, 8})) {
            const auto p = FowlerParams::conformal(n);
            const auto seq = exponent_sequence(make_orbit(p, 1.0), 12);
            double err = 0.0;
            for (const auto& e : seq) err = std::max(err, std::abs(e.sigma - std::sqrt(e.lambda - n + 2.0)));
            r.record(cat("max_error n=", n), err);
            worst = std::max(worst, err);
        }
        r.record("max_error", worst);
        r.expect(worst < 1e-9, cat("exponent error ", worst, " >= 1e-9"));
    });
}

CriterionReport check_kernel_exponents(const VerifyOptions& options) {
    return timed(2, "floquet-kernel", "translation exponents and kernel factor", 30.0, [&](CriterionReport& r) {
        double sigma_err = 0.0, kernel_err = 0.0;
        for (int n : dims_or(options, {4, 5, 6})) {
            const auto p = FowlerParams::conformal(n);
            for (double frac : {0.2, 0.5, 0.8}) {
                const auto orbit = make_orbit(p, frac);
                const auto seq = exponent_sequence(orbit, n);
                for (const auto& e : seq) sigma_err = std::max(sigma_err, std::abs(e.sigma - 1.0));
                const auto ms = analyze_mode(orbit, 1);
                if (!ms.kernel) {
                    r.expect(false, cat(label(n, frac), ": degree one has no exponential kernel"));
                    continue;
                }
                const auto& q = ms.kernel->q_plus;
                const double scale = 0.5 * (n - 2.0) * orbit->epsilon();
                double err = 0.0;
                for (int i = 0; i < q.size(); ++i) {
                    const double t = q.node(i);
                    const double ref = (0.5 * (n - 2.0) * orbit->value(t) - orbit->derivative(t)) / scale;
                    err = std::max(err, std::abs(q.samples()(i) - ref));
                }
                r.record(cat("kernel_error ", label(n, frac)), err);
                kernel_err = std::max(kernel_err, err);
            }
        }
        r.record("max_sigma_error", sigma_err);
        r.record("max_kernel_error", kernel_err);
        r.expect(sigma_err < 1e-6, cat("sigma_1..sigma_n deviate from 1 by ", sigma_err));
        r.expect(kernel_err < 1e-6, cat("kernel factor error ", kernel_err));
    });
}

CriterionReport check_lower_bound(const VerifyOptions& options) {
    return timed(3, "lower-bound", "exponent lower bound and mu_2 = 2 for n >= 6", 0.0, [&](CriterionReport& r) {
        double min_margin = std::numeric_limits<double>::infinity();
        double mu2_err = 0.0;
        for (int n : dims_or(options, {3, 4, 5, 6, 7, 8})) {
            const auto p = FowlerParams::conformal(n);
            for (double frac : {1.0, 0.2, 0.5, 0.8}) {
                const auto orbit = make_orbit(p, frac);
                const auto seq = exponent_sequence(orbit, static_cast<int>(count_up_to_degree(3, n) - 1));
                const auto report = lower_bound_check(seq, *orbit);
                for (const auto& f : report.failures) r.expect(false, cat(label(n, frac), ": ", f));
                for (const auto& e : seq)
                    min_margin = std::min(min_margin, e.sigma * e.sigma - (e.lambda - (3.0 * n - 2.0) / 2.0));
                if (n >= 6) {
                    const auto set = generate(sigmas(seq), 2.25);
                    const double mu2 = second_index(set);
                    r.record(cat("mu2 ", label(n, frac)), mu2);
                    mu2_err = std::max(mu2_err, std::abs(mu2 - 2.0));
                }
            }
        }
        r.record("min_margin", min_margin);
        r.record("max_mu2_error", mu2_err);
        r.expect(min_margin > 0.0, cat("nonpositive bound margin ", min_margin));
        r.expect(mu2_err < 1e-6, cat("mu_2 differs from 2 by ", mu2_err));
    });
}

CriterionReport check_hamiltonian(const VerifyOptions& options) {
    return timed(4, "hamiltonian", "energy drift, period quadrature and log growth", 0.0, [&](CriterionReport& r) {
        std::vector<FowlerParams> sweep;
        for (int n : dims_or(options, {3, 4, 5, 6, 7, 8})) sweep.push_back(FowlerParams::conformal(n));
        sweep.push_back(FowlerParams::ckn(5, 0.5, 0.7));
        sweep.push_back(FowlerParams::ckn(4, 0.2, 0.5));
        double drift = 0.0, period_err = 0.0;
        for (const auto& p : sweep) {
            for (double frac : {0.1, 0.5, 0.9}) {
                const double eps = frac * constant_solution(p);
                const auto orbit = periodic_orbit(eps, p);
                drift = std::max(drift, orbit.max_energy_drift());
                period_err = std::max(period_err, std::abs(period_quadrature(eps, p) / orbit.period() - 1.0));
            }
        }
        r.record("max_energy_drift", drift);
        r.record("max_period_mismatch", period_err);
        r.expect(drift < 1e-9, cat("energy drift ", drift));
        r.expect(period_err < 1e-6, cat("quadrature and shooting periods differ by ", period_err));

        // T/(-ln eps) settles when its increments shrink and T + (2/sqrt q) ln eps stops moving.
        for (const auto& p : {FowlerParams::conformal(5), FowlerParams::ckn(5, 0.5, 0.7)}) {
            std::vector<double> ratio, shifted;
            for (int j = 1; j <= 4; ++j) {
                const double eps = std::pow(10.0, -j);
                const double period = period_quadrature(eps, p);
                ratio.push_back(period / -std::log(eps));
                shifted.push_back(period + 2.0 / std::sqrt(p.q) * std::log(eps));
                r.record(cat("ratio ", label(p), " eps=1e-", j), ratio.back());
            }
            for (std::size_t j = 2; j < ratio.size(); ++j) {
                r.expect(std::abs(ratio[j] - ratio[j - 1]) < std::abs(ratio[j - 1] - ratio[j - 2]),
                         cat(label(p), ": ratio increments do not shrink"));
                r.expect(std::abs(shifted[j] - shifted[j - 1]) < std::abs(shifted[j - 1] - shifted[j - 2]) + 1e-12,
                         cat(label(p), ": T + (2/sqrt q) ln eps does not settle"));
            }
            const double last = std::abs(shifted[3] - shifted[2]);
            r.record(cat("offset_change ", label(p)), last);
            r.expect(last < 1e-3, cat(label(p), ": offset still moves by ", last));
        }
    });
}

CriterionReport check_xi2(const VerifyOptions& options) {
    return timed(5, "xi2", "second-order term identity", 10.0, [&](CriterionReport& r) {
        double worst = 0.0;
        for (int n : dims_or(options, {6, 7, 8})) {
            if (n < 6) r.notes.push_back(cat("n=", n, " is below 6; the second-order term is not the next order there"));
            const auto p = FowlerParams::conformal(n);
            for (double frac : {1.0, 0.2, 0.7}) {
                const auto orbit = make_orbit(p, frac);
                std::vector<double> y(n, 0.0);
                y[0] = 0.8;
                y[1] = -0.6;
                const double res = verify_xi2_identity(*orbit, y).max_residual();
                r.record(cat("residual ", label(n, frac)), res);
                worst = std::max(worst, res);
            }
        }
        r.record("max_residual", worst);
        r.expect(worst < 1e-6, cat("identity residual ", worst));
    });
}

CriterionReport check_translate(const VerifyOptions& options) {
    return timed(6, "translate", "translate expansion remainder rates", 0.0, [&](CriterionReport& r) {
        const double a_norm = std::exp(2.5);
        for (int n : dims_or(options, {4, 5, 6})) {
            const auto p = FowlerParams::conformal(n);
            for (double frac : {0.3, 0.7}) {
                const auto orbit = make_orbit(p, frac);
                for (int order : {1, 2}) {
                    const double rate = translate_remainder_fit(*orbit, a_norm, order).fit.rate;
                    const double target = order + 1.0;
                    r.record(cat("rate order=", order, " ", label(n, frac)), rate);
                    r.expect(std::abs(rate - target) < 0.1 * target,
                             cat(label(n, frac), " order ", order, ": rate ", rate, " vs ", target));
                }
            }
        }
    });
}

std::vector<BruteIndexValue> brute_force_index_values(std::span<const double> rho, double cutoff, double tol) {
    if (rho.empty()) throw std::invalid_argument("brute_force_index_values: empty exponent list");
    const double rmin = *std::min_element(rho.begin(), rho.end());
    if (!(rmin > 0.0)) throw std::invalid_argument("brute_force_index_values: exponents must be positive");
    const int cap = static_cast<int>(std::ceil((cutoff + tol) / rmin));
    std::vector<int> counts(rho.size(), 0);
    std::vector<std::pair<double, int>> sums;
    while (true) {
        std::size_t i = 0;
        while (i < counts.size() && counts[i] == cap) counts[i++] = 0;
        if (i == counts.size()) break;
        ++counts[i];
        double s = 0.0;
        int total = 0;
        for (std::size_t j = 0; j < counts.size(); ++j) {
            s += counts[j] * rho[j];
            total += counts[j];
        }
        if (s <= cutoff + tol) sums.emplace_back(s, total);
    }
    std::sort(sums.begin(), sums.end());
    std::vector<BruteIndexValue> out;
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

CriterionReport check_index_set(const VerifyOptions& options) {
    return timed(7, "index-set", "index set against brute force, mu_2 = min{2, rho_(n+1)}", 0.0, [&](CriterionReport& r) {
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> u(0.7, 3.0), cut(1.0, 6.0);
        std::uniform_int_distribution<int> len(1, 5);
        int matched = 0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> rho;
            const int m = len(rng);
            for (int i = 0; i < m; ++i) rho.push_back(u(rng));
            if (trial % 3 == 0) rho.push_back(rho.front());
            if (trial % 4 == 0) rho.push_back(2.0 * rho.front());
            const double cutoff = std::max(cut(rng), *std::min_element(rho.begin(), rho.end()) + 0.1);
            const auto set = generate(rho, cutoff);
            const auto ref = brute_force_index_values(rho, cutoff);
            bool same = set.values.size() == ref.size();
            for (std::size_t i = 0; same && i < ref.size(); ++i) {
                same = std::abs(set.values[i].value - ref[i].value) <= 1e-12 * std::max(1.0, ref[i].value) &&
                       set.values[i].single == ref[i].single && set.values[i].multi == ref[i].multi;
            }
            if (same) ++matched;
            r.expect(same, cat("trial ", trial, ": generated set differs from brute force (", set.values.size(),
                               " vs ", ref.size(), " values)"));
        }
        r.record("brute_force_matches", matched);

        double mu2_err = 0.0;
        for (int n : dims_or(options, {3, 4, 5, 6, 7, 8})) {
            const auto p = FowlerParams::conformal(n);
            for (double frac : {1.0, 0.2, 0.5, 0.8}) {
                const auto seq = exponent_sequence(make_orbit(p, frac), static_cast<int>(count_up_to_degree(2, n) - 1));
                const double mu2 = second_index(generate(sigmas(seq), 2.25));
                const double expected = std::min(2.0, seq[n].sigma);
                r.record(cat("mu2 ", label(n, frac)), mu2);
                mu2_err = std::max(mu2_err, std::abs(mu2 - expected));
            }
        }
        r.record("max_mu2_error", mu2_err);
        r.expect(mu2_err < 1e-6, cat("mu_2 differs from min{2, rho_(n+1)} by ", mu2_err));
    });
}

CriterionReport check_contraction(const VerifyOptions&) {
    return timed(8, "contraction", "constructed solutions decay at rate beta", 0.0, [&](CriterionReport& r) {
        const auto p = FowlerParams::conformal(5);
        const auto orbit = make_orbit(p, 0.5);
        const double sigma1 = analyze_mode(orbit, 1).kernel->sigma;
        for (double beta : {1.5, 2.5, sigma1}) {
            const auto start = std::chrono::steady_clock::now();
            const ForcingProfile k{1.0, {{1, 0.05, beta}}};
            const auto res = contraction_construct(orbit, k, {});
            r.expect(res.converged, cat("beta=", beta, ": iteration did not converge"));
            const auto models = phi_fit(res, *orbit, res.v - CylinderField::lift(*orbit, res.v.grid(), res.v.modes()));
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            r.timings.emplace_back(cat("beta=", beta), seconds);
            r.expect(seconds < 120.0, cat("beta=", beta, ": ", seconds, " s exceeds 120 s"));
            if (beta == sigma1) {
                r.record("log_rate resonant", models.with_log.rate);
                r.record("log_coefficient resonant", models.with_log.log_coefficient);
                r.record("plain_rate resonant", models.plain.rate);
                r.expect(models.prefers_log, cat("beta=sigma_1: log-corrected model not preferred"));
            } else {
                r.record(cat("rate beta=", beta), models.plain.rate);
                r.expect(std::abs(models.plain.rate - beta) < 0.05 * beta,
                         cat("beta=", beta, ": fitted rate ", models.plain.rate));
            }
        }
    });
}

CriterionReport check_first_order(const VerifyOptions&) {
    return timed(9, "first-order", "remainder after the first-order term", 0.0, [&](CriterionReport& r) {
        const auto p = FowlerParams::conformal(5);
        const auto orbit = make_orbit(p, 0.5);
        const double beta = 1.5;
        const ForcingProfile k{1.0, {{1, 0.05, beta}}};
        const auto res = contraction_construct(orbit, k, {Ansatz::Kind::OrbitPlusKernel, 0.5, 1.0});
        r.expect(res.converged, "iteration did not converge");
        const auto models = phi_fit(res, *orbit, res.phi);
        const double gamma = models.plain.rate;
        const auto seq = exponent_sequence(orbit, 6);
        r.record("gamma", gamma);
        r.record("predicted", std::min({2.0, beta, seq[5].sigma}));
        r.expect(gamma > 1.0 && gamma < 2.0, cat("gamma ", gamma, " outside (1, 2)"));
    });
}

CriterionReport check_remark(const VerifyOptions&) {
    return timed(10, "remark", "n = 4 explicit example", 0.0, [&](CriterionReport& r) {
        const auto check = remark_example_check(remark_samples(64), 0.02);
        r.record("residual_h", check.residual_h);
        r.record("residual_h_half", check.residual_half);
        r.record("ratio", check.ratio);
        r.record("grad_error", check.grad_error);
        for (int i = 0; i < 4; ++i) r.record(cat("grad_k0_", i + 1), check.grad_k0[i]);
        r.expect(check.ratio >= 14.0 && check.ratio <= 18.0, cat("refinement ratio ", check.ratio));
        r.expect(check.grad_error < 1e-4, cat("gradient error ", check.grad_error));
    });
}

CriterionReport check_ckn(const VerifyOptions&) {
    return timed(11, "ckn", "CKN exponents and construction", 0.0, [&](CriterionReport& r) {
        const int n = 5;
        const double a = 0.5;
        const auto p = FowlerParams::ckn(n, a, 0.7);
        const double pp = p.p();
        const double half = 0.5 * (n - 2.0 * a - 2.0);

        const auto constant = make_orbit(p, 1.0);
        double err = 0.0;
        for (const auto& e : exponent_sequence(constant, 12))
            err = std::max(err, std::abs(e.sigma - std::sqrt(e.lambda - (pp - 2.0) * half * half)));
        const auto zero = analyze_mode(constant, 0);
        const double omega_err = std::abs(zero.datum.rotation - half * std::sqrt(pp - 2.0));
        r.record("constant_sigma_error", err);
        r.record("constant_omega_error", omega_err);
        r.expect(err < 1e-9, cat("constant-solution exponent error ", err));
        r.expect(zero.datum.type == FloquetType::IV && omega_err < 1e-9, cat("degree zero rotation error ", omega_err));

        for (double frac : {0.3, 0.6, 0.9}) {
            const auto orbit = make_orbit(p, frac);
            const auto seq = exponent_sequence(orbit, static_cast<int>(count_up_to_degree(2, n) - 1));
            double spread = 0.0;
            for (int i = 1; i < n; ++i) spread = std::max(spread, std::abs(seq[i].sigma - seq[0].sigma));
            const double gap = seq[n].sigma - seq[n - 1].sigma;
            r.record(cat("sigma_1 frac=", frac), seq[0].sigma);
            r.record(cat("gap frac=", frac), gap);
            r.expect(spread < 1e-6, cat("frac=", frac, ": sigma_1..sigma_n spread ", spread));
            r.expect(gap > 1e-6, cat("frac=", frac, ": sigma_(n+1) - sigma_n = ", gap));
            for (int degree = 2; degree <= 4; ++degree) {
                const auto ms = analyze_mode(orbit, degree);
                const bool positive = ms.kernel && !ms.kernel->antiperiodic && ms.kernel->q_plus.samples().minCoeff() > 0.0;
                r.expect(positive, cat("frac=", frac, " degree ", degree, ": q+ is not positive"));
            }
        }

        const auto orbit = make_orbit(p, 0.3);
        const auto seq = exponent_sequence(orbit, static_cast<int>(count_up_to_degree(3, n) - 1));
        const double nu = 1.3 * seq[0].sigma;
        const auto set = generate(sigmas(seq), nu + 0.5);
        double distance = std::numeric_limits<double>::infinity();
        for (const auto& v : set.values) distance = std::min(distance, std::abs(v.value - nu));
        r.record("nu", nu);
        r.record("nu_distance_to_index_set", distance);
        r.expect(distance > 1e-6, "nu lies in the index set");
        const auto res = contraction_construct(orbit, ForcingProfile::flat(1.0), {Ansatz::Kind::CknKernel, 0.05, nu});
        r.expect(res.converged, "CKN iteration did not converge");
        const auto models = phi_fit(res, *orbit, res.phi);
        r.record("rate", models.plain.rate);
        r.expect(std::abs(models.plain.rate - nu) < 0.05 * nu, cat("rate ", models.plain.rate, " vs nu ", nu));
    });
}

std::span<const Suite> suites() {
    static const Suite all[] = {
        {1, "floquet-constant", check_constant_floquet},
        {2, "floquet-kernel", check_kernel_exponents},
        {3, "lower-bound", check_lower_bound},
        {4, "hamiltonian", check_hamiltonian},
        {5, "xi2", check_xi2},
        {6, "translate", check_translate},
        {7, "index-set", check_index_set},
        {8, "contraction", check_contraction},
        {9, "first-order", check_first_order},
        {10, "remark", check_remark},
        {11, "ckn", check_ckn},
    };
    return all;
}

std::vector<CriterionReport> run_suites(const std::vector<std::string>& names, const VerifyOptions& options) {
    std::vector<const Suite*> chosen;
    for (const auto& name : names) {
        if (name == "all") {
            for (const auto& s : suites()) chosen.push_back(&s);
            continue;
        }
        auto it = std::find_if(suites().begin(), suites().end(), [&](const Suite& s) { return name == s.name; });
        if (it == suites().end()) throw std::invalid_argument("unknown suite: " + name);
        chosen.push_back(&*it);
    }
    std::vector<CriterionReport> out;
    for (const Suite* s : chosen) out.push_back(s->run(options));
    return out;
}

}  // namespace fowler_lab
