#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fowler_lab/cylinder_pde.hpp"
#include "fowler_lab/expansion.hpp"
#include "fowler_lab/floquet.hpp"
#include "fowler_lab/fowler.hpp"
#include "fowler_lab/index_set.hpp"
#include "fowler_lab/io.hpp"
#include "fowler_lab/sphere_harmonics.hpp"
#include "fowler_lab/verify.hpp"

using namespace fowler_lab;
using io::json;

namespace {

struct RunConfig {
    bool ckn = false;
    int n = 5;
    double k0 = 1.0;
    double a = 0.0;
    double b = 0.0;
    double epsilon = 0.0;  // absolute; 0 falls back to frac
    double frac = 0.5;     // epsilon as a fraction of the constant solution
    bool constant = false;

    int count = 12;
    double cutoff = 3.0;
    double resonance_tol = 1e-8;
    int order = 2;
    double log_shift = 2.5;

    double t0 = 2.0;
    double window = 12.0;
    double h = 1.0 / 64.0;
    int modes = 4;
    double tol = 1e-10;
    int max_iterations = 60;
    double beta = 0.0;
    double kappa = 0.05;
    int k_degree = 1;
    std::string ansatz = "orbit";
    double delta = 0.0;  // 0 takes 0.5 for the kernel ansatz, 0.05 for CKN
    double nu = 0.0;     // 0 takes 1.3 sigma_1

    std::vector<std::string> suites{"all"};
    bool n_given = false;
    std::uint64_t seed = 20240611;
    std::string out = "fowler_lab_out";
};

struct Outcome {
    json report;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& message) {
        if (!ok) failures.push_back(message);
    }
};

std::string fmt(double x) { return io::number(x); }

FowlerParams make_params(const RunConfig& c) {
    return c.ckn ? FowlerParams::ckn(c.n, c.a, c.b) : FowlerParams::conformal(c.n, c.k0);
}

std::shared_ptr<const FowlerOrbit> make_orbit(const RunConfig& c) {
    const auto p = make_params(c);
    if (c.constant) return std::make_shared<const FowlerOrbit>(constant_orbit(p));
    const double eps = c.epsilon > 0.0 ? c.epsilon : c.frac * constant_solution(p);
    return std::make_shared<const FowlerOrbit>(periodic_orbit(eps, p));
}

std::string path(const RunConfig& c, const std::string& name) { return (std::filesystem::path(c.out) / name).string(); }

Outcome cmd_fowler(const RunConfig& c) {
    Outcome o;
    const auto orbit = make_orbit(c);
    io::write_orbit_csv(*orbit, path(c, "orbit.csv"));
    o.report = io::to_json(*orbit, true);
    const auto& p = orbit->params();
    if (orbit->is_constant()) {
        std::printf("%s  constant xi*=%s  T undefined  omega_0=%s\n", p.describe().c_str(), fmt(orbit->max_value()).c_str(),
                    fmt(std::sqrt(p.q * (p.e - 1.0))).c_str());
    } else {
        std::printf("%s  eps=%s  T=%s  H=%s  max xi=%s  drift=%s\n", p.describe().c_str(), fmt(orbit->epsilon()).c_str(),
                    fmt(orbit->period()).c_str(), fmt(orbit->energy()).c_str(), fmt(orbit->max_value()).c_str(),
                    fmt(orbit->max_energy_drift()).c_str());
        o.check(orbit->max_energy_drift() < 1e-9, "energy drift above 1e-9");
    }
    return o;
}

Outcome cmd_floquet(const RunConfig& c) {
    Outcome o;
    const auto orbit = make_orbit(c);
    const auto& p = orbit->params();
    const auto seq = exponent_sequence(orbit, c.count);
    const auto bound = lower_bound_check(seq, *orbit);
    const auto zero = analyze_mode(orbit, 0);
    for (const auto& f : bound.failures) o.check(false, f);

    json table = json::array();
    std::printf("%5s %6s %12s %5s %20s %14s\n", "i", "degree", "lambda", "type", "sigma", "bound margin");
    for (const auto& e : seq) {
        const double margin = p.problem == Problem::Conformal
                                  ? e.sigma * e.sigma - (e.lambda - (3.0 * p.n - 2.0) / 2.0)
                                  : std::numeric_limits<double>::quiet_NaN();
        auto row = io::to_json(e);
        row["bound_margin"] = std::isfinite(margin) ? json(margin) : json(nullptr);
        table.push_back(row);
        std::printf("%5d %6d %12.6g %5s %20.17g %14.6g\n", e.index, e.degree, e.lambda, to_string(e.type).c_str(), e.sigma, margin);
    }

    if (orbit->is_constant()) {
        double err = 0.0;
        for (const auto& e : seq) err = std::max(err, std::abs(e.sigma - constant_orbit_exponent(e.lambda, p)));
        o.check(err < 1e-9, "constant-solution exponents deviate by " + fmt(err));
        o.report["closed_form_error"] = err;
    } else {
        const int first = std::min<int>(p.n, static_cast<int>(seq.size()));
        double spread = 0.0;
        for (int i = 0; i < first; ++i) {
            const double ref = p.problem == Problem::Conformal ? 1.0 : seq[0].sigma;
            spread = std::max(spread, std::abs(seq[i].sigma - ref));
        }
        o.report["first_n_spread"] = spread;
        o.check(spread < 1e-6, "first n exponents spread " + fmt(spread));
        if (static_cast<int>(seq.size()) > p.n) o.check(seq[p.n].sigma > seq[p.n - 1].sigma, "sigma_(n+1) does not exceed sigma_n");
    }
    o.report["params"] = io::to_json(p);
    o.report["epsilon"] = orbit->epsilon();
    o.report["exponents"] = table;
    o.report["degree0"] = {{"type", to_string(zero.datum.type)}, {"trace", zero.datum.trace}, {"rotation", zero.datum.rotation}};
    std::printf("degree 0: type %s, trace %s\n", to_string(zero.datum.type).c_str(), fmt(zero.datum.trace).c_str());
    return o;
}

Outcome cmd_index_set(const RunConfig& c) {
    Outcome o;
    const auto orbit = make_orbit(c);
    const auto& p = orbit->params();
    std::vector<double> rho, distinct;
    std::vector<int> degrees;
    for (int degree = 1;; ++degree) {
        if (degree > 64) throw std::domain_error("cutoff too large: exponents below it beyond degree 64");
        const auto ms = analyze_mode(orbit, degree);
        if (!ms.kernel) throw std::domain_error("degree " + std::to_string(degree) + " is not hyperbolic");
        const double sigma = ms.kernel->sigma;
        if (sigma > c.cutoff + c.resonance_tol) break;
        distinct.push_back(sigma);
        for (std::int64_t m = 0; m < multiplicity(degree, p.n); ++m) {
            rho.push_back(sigma);
            degrees.push_back(degree);
        }
    }
    if (rho.empty()) throw std::invalid_argument("cutoff is below the first exponent");
    const auto set = generate(rho, c.cutoff, c.resonance_tol, degrees);
    o.report = io::to_json(set);
    o.report["params"] = io::to_json(p);
    o.report["epsilon"] = orbit->epsilon();

    const double cap = std::ceil((c.cutoff + c.resonance_tol) / distinct.front()) + 1.0;
    if (std::pow(cap, static_cast<double>(distinct.size())) < 1e8) {
        const auto ref = brute_force_index_values(distinct, c.cutoff, c.resonance_tol);
        bool same = ref.size() == set.values.size();
        for (std::size_t i = 0; same && i < ref.size(); ++i)
            same = std::abs(ref[i].value - set.values[i].value) <= 1e-12 * std::max(1.0, ref[i].value) &&
                   ref[i].single == set.values[i].single && ref[i].multi == set.values[i].multi;
        o.report["brute_force_match"] = same;
        o.check(same, "index set differs from brute-force enumeration");
    } else {
        o.report["brute_force_match"] = nullptr;
    }
    if (p.problem == Problem::Conformal && set.values.size() >= 2) {
        const double next = rho.size() > static_cast<std::size_t>(p.n) ? rho[p.n] : std::numeric_limits<double>::infinity();
        const double expected = std::min(2.0, next);
        const double mu2 = second_index(set);
        o.check(expected > c.cutoff || std::abs(mu2 - expected) < 1e-6, "mu_2 = " + fmt(mu2) + " but min{2, rho_(n+1)} = " + fmt(expected));
    }
    std::printf("index set up to %s:\n", fmt(c.cutoff).c_str());
    for (const auto& v : set.values)
        std::printf("  %20.17g %s%s\n", v.value, v.single ? "S1" : "  ", v.multi ? " S2" : "");
    for (const auto& w : set.warnings) std::printf("warning: %s\n", w.c_str());
    return o;
}

Outcome cmd_expand(const RunConfig& c) {
    Outcome o;
    const auto orbit = make_orbit(c);
    const auto& p = orbit->params();
    const double a_norm = std::exp(c.log_shift);
    std::vector<double> axis(p.n, 0.0);
    axis[0] = a_norm;
    const auto terms = translate_expansion(*orbit, axis, c.order);
    json jt = json::array();
    for (const auto& t : terms) jt.push_back(io::to_json(t, 64));
    o.report["params"] = io::to_json(p);
    o.report["epsilon"] = orbit->epsilon();
    o.report["a_norm"] = a_norm;
    o.report["terms"] = jt;
    json fits = json::array();
    for (int order = 1; order <= c.order; ++order) {
        const auto fit = translate_remainder_fit(*orbit, a_norm, order);
        fits.push_back({{"order", order}, {"fit", io::to_json(fit.fit)}});
        const double target = order + 1.0;
        std::printf("remainder after order %d: rate %s (expected %g)\n", order, fmt(fit.fit.rate).c_str(), target);
        o.check(std::abs(fit.fit.rate - target) < 0.1 * target, "order " + std::to_string(order) + " remainder rate " + fmt(fit.fit.rate));
    }
    o.report["remainder_fits"] = fits;
    if (p.n >= 6) {
        std::vector<double> y(p.n, 0.0);
        y[0] = 1.0;
        const auto xi2 = xi2_term(*orbit, y);
        const double res = verify_xi2_identity(*orbit, y).max_residual();
        o.report["xi2"] = {{"degree0", io::to_json(xi2.degree0, 64)}, {"degree2", io::to_json(xi2.degree2, 64)}, {"identity_residual", res}};
        std::printf("second-order identity residual %s\n", fmt(res).c_str());
        o.check(res < 1e-6, "second-order identity residual " + fmt(res));
    }
    return o;
}

Outcome cmd_verify(const RunConfig& c) {
    Outcome o;
    VerifyOptions options;
    options.seed = c.seed;
    if (c.n_given) options.dims = {c.n};
    const auto reports = run_suites(c.suites, options);
    json all = json::array();
    for (const auto& r : reports) {
        std::printf("%s %-16s %s\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(), r.title.c_str());
        for (const auto& [name, value] : r.values) std::printf("    %-40s %s\n", name.c_str(), fmt(value).c_str());
        for (const auto& f : r.failures) {
            std::printf("    failure: %s\n", f.c_str());
            o.check(false, r.suite + ": " + f);
        }
        all.push_back(io::to_json(r));
    }
    o.report["suites"] = all;
    return o;
}

Outcome cmd_construct(const RunConfig& c) {
    Outcome o;
    const auto orbit = make_orbit(c);
    const auto& p = orbit->params();
    ForcingProfile k = ForcingProfile::flat(p.k0);
    Ansatz ansatz;
    if (p.problem == Problem::Ckn || c.ansatz == "ckn") {
        ansatz.kind = Ansatz::Kind::CknKernel;
        ansatz.amplitude = c.delta > 0.0 ? c.delta : 0.05;
        ansatz.rate = c.nu > 0.0 ? c.nu : 1.3 * analyze_mode(orbit, 1).kernel->sigma;
    } else {
        if (c.beta > 0.0) k.components.push_back({c.k_degree, c.kappa, c.beta});
        if (c.ansatz == "kernel") {
            ansatz.kind = Ansatz::Kind::OrbitPlusKernel;
            ansatz.amplitude = c.delta > 0.0 ? c.delta : 0.5;
        } else if (c.ansatz != "orbit") {
            throw std::invalid_argument("unknown ansatz: " + c.ansatz);
        }
    }
    ContractionOptions opts;
    opts.t0 = c.t0;
    opts.window = c.window;
    opts.h = c.h;
    opts.modes = c.modes;
    opts.tol = c.tol;
    opts.max_iterations = c.max_iterations;
    const auto res = contraction_construct(orbit, k, ansatz, opts);
    o.check(res.converged, "iteration did not converge");

    DecayFitOptions fit;
    fit.period = orbit->is_constant() ? 0.0 : orbit->period();
    const double t_begin = res.t0 + 0.5, t_end = res.v.grid().end() - 0.5;
    const auto lifted = CylinderField::lift(*orbit, res.v.grid(), res.v.modes());
    const auto v_fit = decay_rate_fit(res.v - lifted, t_begin, t_end, fit);
    const auto phi_fit = decay_rate_fit(res.phi, t_begin, t_end, fit);
    const auto residual = p.problem == Problem::Ckn ? residual_N(res.v) : residual_M(res.v, k);

    io::write_field_csv(res.v, path(c, "v.csv"));
    io::write_field_csv(res.phi, path(c, "phi.csv"));
    o.report = io::to_json(res);
    o.report["params"] = io::to_json(p);
    o.report["epsilon"] = orbit->epsilon();
    o.report["ansatz"] = ansatz.kind == Ansatz::Kind::Orbit ? "orbit" : ansatz.kind == Ansatz::Kind::OrbitPlusKernel ? "kernel" : "ckn";
    o.report["residual"] = residual.sup_norm(residual_boundary_points);
    o.report["fit_v_minus_xi"] = io::to_json(v_fit);
    o.report["fit_phi"] = io::to_json(phi_fit);

    if (ansatz.kind == Ansatz::Kind::CknKernel) {
        std::printf("fitted slope %s, nu %s\n", fmt(phi_fit.plain.rate).c_str(), fmt(ansatz.rate).c_str());
        o.check(std::abs(phi_fit.plain.rate - ansatz.rate) < 0.05 * ansatz.rate, "slope not within 5% of nu");
    } else if (ansatz.kind == Ansatz::Kind::OrbitPlusKernel) {
        std::printf("remainder rate gamma %s\n", fmt(phi_fit.plain.rate).c_str());
        o.check(phi_fit.plain.rate > 1.0 && phi_fit.plain.rate < 2.0, "gamma outside (1, 2)");
    } else if (c.beta > 0.0) {
        const double sigma = analyze_mode(orbit, c.k_degree).kernel ? analyze_mode(orbit, c.k_degree).kernel->sigma : -1.0;
        if (std::abs(sigma - c.beta) < 1e-6) {
            std::printf("resonant: log model rate %s, t-power %s, preferred %s\n", fmt(v_fit.with_log.rate).c_str(),
                        fmt(v_fit.with_log.log_coefficient).c_str(), v_fit.prefers_log ? "yes" : "no");
            o.check(v_fit.prefers_log, "log-corrected model not preferred at resonance");
        } else {
            std::printf("fitted slope %s, beta %s\n", fmt(v_fit.plain.rate).c_str(), fmt(c.beta).c_str());
            o.check(std::abs(v_fit.plain.rate - c.beta) < 0.05 * c.beta, "slope not within 5% of beta");
        }
    }
    std::printf("converged %s after %zu iterations, t0 %s, residual %s\n", res.converged ? "yes" : "no", res.trace.size(),
                fmt(res.t0).c_str(), fmt(o.report["residual"].get<double>()).c_str());
    return o;
}

void fail(const RunConfig& c, const std::string& command, const json& record) {
    json r = record;
    r["command"] = command;
    r["status"] = "failed";
    std::cerr << r.dump() << '\n';
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (!ec) {
        try {
            io::write_json(r, path(c, "failure.json"));
        } catch (const std::exception&) {
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Fowler orbits, Floquet spectra, index sets, expansions and cylinder constructions"};
    app.set_config("--config", "", "flat key = value file; command-line flags override it");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.fallthrough();
    app.require_subcommand(1);

    app.add_flag("--ckn", c.ckn, "CKN problem instead of the conformal one");
    auto* n_opt = app.add_option("--n", c.n, "dimension")->check(CLI::Range(3, 64));
    app.add_option("--k0", c.k0, "K(0)")->check(CLI::PositiveNumber);
    app.add_option("--a", c.a, "CKN weight a");
    app.add_option("--b", c.b, "CKN weight b");
    app.add_option("--epsilon", c.epsilon, "orbit minimum (absolute)");
    app.add_option("--frac", c.frac, "orbit minimum as a fraction of the constant solution");
    app.add_flag("--constant", c.constant, "use the constant solution");
    app.add_option("--count", c.count, "number of exponents")->check(CLI::PositiveNumber);
    app.add_option("--cutoff", c.cutoff, "index-set cutoff")->check(CLI::PositiveNumber);
    app.add_option("--resonance-tol", c.resonance_tol, "index-set resonance tolerance")->check(CLI::PositiveNumber);
    app.add_option("--order", c.order, "translate expansion order")->check(CLI::Range(1, 2));
    app.add_option("--log-shift", c.log_shift, "log |a| of the translate");
    app.add_option("--t0", c.t0, "window start");
    app.add_option("--window", c.window, "window length")->check(CLI::PositiveNumber);
    app.add_option("--dt", c.h, "time step")->check(CLI::PositiveNumber);
    app.add_option("--modes", c.modes, "retained zonal modes")->check(CLI::Range(1, 64));
    app.add_option("--tol", c.tol, "contraction tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iterations", c.max_iterations, "contraction iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--beta", c.beta, "decay rate of K - K(0); 0 means flat K");
    app.add_option("--kappa", c.kappa, "amplitude of the K perturbation");
    app.add_option("--k-degree", c.k_degree, "harmonic degree of the K perturbation")->check(CLI::NonNegativeNumber);
    app.add_option("--ansatz", c.ansatz, "orbit, kernel or ckn")->check(CLI::IsMember({"orbit", "kernel", "ckn"}));
    app.add_option("--delta", c.delta, "ansatz amplitude");
    app.add_option("--nu", c.nu, "CKN ansatz rate");
    app.add_option("--suite", c.suites, "verification suites, or all");
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--out", c.out, "output directory");

    struct Command {
        const char* name;
        const char* help;
        Outcome (*run)(const RunConfig&);
    };
    const Command commands[] = {
        {"fowler", "periodic orbit: CSV samples and JSON summary", cmd_fowler},
        {"floquet", "exponent table with closed-form and bound checks", cmd_floquet},
        {"index-set", "index set up to a cutoff, checked against brute force", cmd_index_set},
        {"expand", "translate expansion terms and remainder rates", cmd_expand},
        {"verify", "acceptance suites", cmd_verify},
        {"construct", "contraction construction and decay fits", cmd_construct},
    };
    for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    c.n_given = n_opt->count() > 0;

    const auto* chosen = &commands[0];
    for (const auto& cmd : commands)
        if (app.got_subcommand(cmd.name)) chosen = &cmd;

    try {
        std::filesystem::create_directories(c.out);
        auto outcome = chosen->run(c);
        outcome.report["command"] = chosen->name;
        outcome.report["failures"] = outcome.failures;
        outcome.report["passed"] = outcome.failures.empty();
        io::write_json(outcome.report, path(c, std::string(chosen->name) + ".json"));
        if (!outcome.failures.empty()) {
            fail(c, chosen->name, {{"failures", outcome.failures}});
            return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        fail(c, chosen->name, {{"error", e.what()}});
        return 2;
    }
    return 0;
}
