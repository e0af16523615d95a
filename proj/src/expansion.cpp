#include "fowler_lab/expansion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fowler_lab {

namespace {

void require_conformal(const FowlerOrbit& orbit) {
    if (orbit.params().problem != Problem::Conformal)
        throw std::invalid_argument("translate and second-order terms need a conformal orbit");
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

template <class F>
PeriodicFunction orbit_coefficient(const FowlerOrbit& orbit, F&& f) {
    const int n = orbit.samples();
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = f(orbit.xi_samples()[i], orbit.xi_prime_samples()[i]);
    return PeriodicFunction(orbit.period(), std::move(v));
}

std::vector<double> unit_axis(std::span<const double> a) {
    const double r = norm(a);
    std::vector<double> axis(a.begin(), a.end());
    for (double& x : axis) x /= r;
    return axis;
}

// Degree 0 and degree 2 pieces of e^{-2t}[-K0/2 xi^e Y^2 + (-(n-2)/8 xi + xi'/4) Delta(Y^2)], |Y| = y_norm
std::pair<ExpansionTerm, ExpansionTerm> second_order(const FowlerOrbit& orbit, std::span<const double> y) {
    const auto& p = orbit.params();
    const int n = p.n;
    const double y2 = norm(y) * norm(y);
    const std::vector<double> axis = unit_axis(y);
    auto c0 = orbit_coefficient(orbit, [&](double xi, double) { return -0.5 * p.k0 * std::pow(xi, p.e) * y2 / n; });
    auto c2 = orbit_coefficient(orbit, [&](double xi, double xp) {
        return -0.5 * p.k0 * std::pow(xi, p.e) * y2 * (n - 1.0) / n +
               (-(n - 2.0) / 8.0 * xi + 0.25 * xp) * (-2.0 * (n - 1.0) * y2);
    });
    ExpansionTerm t0{2.0, 0, c0, HarmonicMode::zonal(0, n, axis), "order 2, degree 0"};
    ExpansionTerm t2{2.0, 0, c2, HarmonicMode::zonal(2, n, axis), "order 2, degree 2"};
    return {t0, t2};
}

}  // namespace

double ExpansionTerm::evaluate_zonal(double t, double s) const {
    return coeff(t) * std::pow(t, t_power) * std::exp(-exponent * t) * eval_zonal(mode, s);
}

double ExpansionTerm::evaluate(double t, std::span<const double> theta) const {
    return coeff(t) * std::pow(t, t_power) * std::exp(-exponent * t) * eval_mode(mode, theta);
}

double exact_translate_zonal(const FowlerOrbit& orbit, double a_norm, double t, double s) {
    require_conformal(orbit);
    if (a_norm > 0.0 && t <= std::log(a_norm)) throw std::domain_error("translate is defined only for t > ln|a|");
    if (std::abs(s) > 1.0 + 1e-12) throw std::invalid_argument("s must lie in [-1, 1]");
    const double u = std::exp(-t) * a_norm;
    const double shift = 0.5 * std::log1p(-2.0 * u * s + u * u);
    const int n = orbit.params().n;
    return std::exp(-0.5 * (n - 2.0) * shift) * orbit.value(t + shift);
}

double exact_translate(const FowlerOrbit& orbit, std::span<const double> a, double t, std::span<const double> theta) {
    const int n = orbit.params().n;
    if (static_cast<int>(a.size()) != n || static_cast<int>(theta.size()) != n)
        throw std::invalid_argument("a and theta must have length n");
    if (std::abs(norm(theta) - 1.0) > 1e-12) throw std::invalid_argument("theta must be a unit vector");
    const double r = norm(a);
    if (r == 0.0) return orbit.value(t);
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += a[i] * theta[i];
    return exact_translate_zonal(orbit, r, t, std::clamp(dot / r, -1.0, 1.0));
}

std::vector<ExpansionTerm> translate_expansion(const FowlerOrbit& orbit, std::span<const double> a, int order) {
    require_conformal(orbit);
    if (order < 1 || order > 2) throw std::invalid_argument("translate expansion supports orders 1 and 2");
    const auto& p = orbit.params();
    if (static_cast<int>(a.size()) != p.n) throw std::invalid_argument("a must have length n");
    const double r = norm(a);
    std::vector<ExpansionTerm> terms;
    if (r == 0.0) return terms;
    auto c1 = orbit_coefficient(orbit, [&](double xi, double xp) { return r * (0.5 * (p.n - 2.0) * xi - xp); });
    terms.push_back({1.0, 0, c1, HarmonicMode::zonal(1, p.n, unit_axis(a)), "order 1, degree 1"});
    if (order == 2) {
        auto [t0, t2] = second_order(orbit, a);
        terms.push_back(t0);
        terms.push_back(t2);
    }
    return terms;
}

Xi2Terms xi2_term(const FowlerOrbit& orbit, std::span<const double> y) {
    require_conformal(orbit);
    if (static_cast<int>(y.size()) != orbit.params().n) throw std::invalid_argument("Y must have length n");
    if (norm(y) == 0.0) throw std::invalid_argument("Y must be nonzero");
    auto [t0, t2] = second_order(orbit, y);
    Xi2Terms out{t0, t2, {}};
    if (orbit.params().n < 6) out.warnings.push_back("second-order term is stated for n >= 6");
    return out;
}

Xi2Check verify_xi2_identity(const FowlerOrbit& orbit, std::span<const double> y) {
    auto terms = xi2_term(orbit, y);
    const auto& p = orbit.params();
    const int n = p.n;
    const double y2 = norm(y) * norm(y);
    const double lead = 2.0 * (n + 2.0) / ((n - 2.0) * (n - 2.0)) * p.k0;
    auto residual = [&](const ExpansionTerm& term, double share) {
        PeriodicFunction c = term.coeff.compressed();
        PeriodicFunction cp = c.derivative(), cpp = c.derivative(2);
        double worst = 0.0;
        for (int i = 0; i < c.size(); ++i) {
            const double t = c.node(i);
            const double xi = orbit.value(t), xp = orbit.derivative(t);
            const double v = term.mode.eigenvalue + p.q - p.e * p.c * std::pow(xi, p.e - 1.0);
            // L(e^{-2t} c) = e^{-2t}(-c'' + 4c' + (V - 4)c)
            const double lhs = -cpp.samples()(i) + 4.0 * cp.samples()(i) + (v - 4.0) * c.samples()(i);
            const double w = 0.5 * (n - 2.0) * xi - xp;
            const double rhs = lead * std::pow(xi, (6.0 - n) / (n - 2.0)) * w * w * share;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        return worst;
    };
    return {residual(terms.degree0, y2 / n), residual(terms.degree2, y2 * (n - 1.0) / n)};
}

double ResonantSolution::evaluate(double t) const {
    double s = 0.0, tp = 1.0;
    for (std::size_t j = 0; j < r.size(); ++j, tp *= t) s += tp * r[j](t);
    return std::exp(-mu * t) * s;
}

double ResonantSolution::evaluate_derivative(double t) const {
    double s = 0.0, tp = 1.0;
    for (std::size_t j = 0; j < r.size(); ++j, tp *= t) {
        const double rj = r[j](t);
        s += tp * (r_prime[j](t) - mu * rj);
        if (j > 0) s += j * (tp / t) * rj;
    }
    return std::exp(-mu * t) * s;
}

ResonantSolution solve_resonant_mode(const PeriodicFunction& forcing, double mu, int m, const ModeSpectrum& spectrum,
                                     const ResonantOptions& options) {
    const ModeOperator& op = spectrum.op;
    const double period = op.period();
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (m < 0) throw std::invalid_argument("t power must be >= 0");
    if (std::abs(forcing.period() - period) > 1e-9 * period)
        throw std::invalid_argument("forcing period differs from the orbit period");
    const int count = options.collocation;
    if (count < 8 || count % 2) throw std::invalid_argument("collocation size must be even and >= 8");

    ResonantSolution sol;
    sol.mu = mu;
    const bool hyperbolic = spectrum.datum.type == FloquetType::III && spectrum.kernel && !spectrum.kernel->antiperiodic;
    const double gap = hyperbolic ? std::abs(mu - spectrum.kernel->sigma) : INFINITY;
    sol.resonant = gap <= options.resonance_tol;
    if (!sol.resonant && gap <= 100.0 * options.resonance_tol) {
        std::ostringstream os;
        os << "mu within " << gap << " of the mode exponent; the particular solution is ill conditioned";
        sol.warnings.push_back(os.str());
    }
    if (spectrum.datum.type == FloquetType::IV) sol.warnings.push_back("oscillatory mode; no exponential dichotomy");
    sol.max_power = sol.resonant ? m + 1 : m;

    const Eigen::MatrixXd d1 = fourier_differentiation_matrix(count, period, 1);
    const Eigen::MatrixXd d2 = fourier_differentiation_matrix(count, period, 2);
    Eigen::MatrixXd dmat = -d2 + 2.0 * mu * d1;
    for (int i = 0; i < count; ++i) dmat(i, i) += op.potential(period * i / count) - mu * mu;
    const Eigen::VectorXd a = forcing.resampled(count).samples();
    auto bop = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return 2.0 * mu * r - 2.0 * d1 * r; };
    auto inner = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) { return f.dot(g) / count; };

    std::vector<Eigen::VectorXd> r(sol.max_power + 1, Eigen::VectorXd::Zero(count));
    auto rhs_for = [&](int k) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(count);
        if (k == m) f += a;
        if (k + 1 <= sol.max_power) f -= (k + 1.0) * bop(r[k + 1]);
        if (k + 2 <= sol.max_power) f += (k + 2.0) * (k + 1.0) * r[k + 2];
        return f;
    };

    if (!sol.resonant) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(dmat);
        for (int k = m; k >= 0; --k) r[k] = lu.solve(rhs_for(k));
    } else {
        const Eigen::VectorXd qp = spectrum.kernel->q_plus.resampled(count).samples();
        const Eigen::VectorXd qm = spectrum.kernel->q_minus.resampled(count).samples();
        Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(count + 1, count + 1);
        bordered.topLeftCorner(count, count) = dmat;
        bordered.block(0, count, count, 1) = qm;
        bordered.block(count, 0, 1, count) = qp.transpose();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered);
        auto solve_gauged = [&](const Eigen::VectorXd& f) {
            Eigen::VectorXd rhs(count + 1);
            rhs << f, 0.0;
            return Eigen::VectorXd(lu.solve(rhs).head(count));
        };
        const double bq = inner(bop(qp), qm);
        if (std::abs(bq) < 1e-12) throw std::runtime_error("degenerate resonance: <B q+, q-> vanishes");
        r[m + 1] = inner(a, qm) / ((m + 1.0) * bq) * qp;
        for (int k = m; k >= 0; --k) {
            Eigen::VectorXd p = solve_gauged(rhs_for(k));
            if (k > 0) {
                // kernel share of r_k makes the next equation down solvable
                Eigen::VectorXd g = -k * bop(p);
                if (k + 1 <= sol.max_power) g += (k + 1.0) * k * r[k + 1];
                p -= inner(g, qm) / (-k * bq) * qp;
            }
            r[k] = p;
        }
    }

    for (auto& v : r) {
        sol.r.emplace_back(period, v);
        sol.r_prime.push_back(sol.r.back().derivative());
    }

    // residual of every coefficient equation on a grid twice as fine
    const int fine = 2 * count;
    std::vector<PeriodicFunction> rf, rfp, rfpp;
    for (const auto& f : sol.r) {
        rf.push_back(f.resampled(fine));
        rfp.push_back(rf.back().derivative());
        rfpp.push_back(rf.back().derivative(2));
    }
    const Eigen::VectorXd af = forcing.resampled(fine).samples();
    double worst = 0.0;
    for (int k = 0; k <= sol.max_power; ++k) {
        for (int i = 0; i < fine; ++i) {
            const double t = period * i / fine;
            double e = -rfpp[k].samples()(i) + 2.0 * mu * rfp[k].samples()(i) + (op.potential(t) - mu * mu) * rf[k].samples()(i);
            if (k + 1 <= sol.max_power)
                e += (k + 1.0) * (2.0 * mu * rf[k + 1].samples()(i) - 2.0 * rfp[k + 1].samples()(i));
            if (k + 2 <= sol.max_power) e -= (k + 2.0) * (k + 1.0) * rf[k + 2].samples()(i);
            if (k == m) e -= af(i);
            worst = std::max(worst, std::abs(e));
        }
    }
    sol.residual = worst / std::max(af.cwiseAbs().maxCoeff(), 1e-300);
    return sol;
}

RemainderFit translate_remainder_fit(const FowlerOrbit& orbit, double a_norm, int order, double t_begin, double t_end,
                                     int samples) {
    require_conformal(orbit);
    if (!(a_norm > 0.0)) throw std::invalid_argument("|a| must be positive");
    if (t_begin <= std::log(a_norm)) throw std::domain_error("fit window starts before ln|a|");
    if (samples < 8 || !(t_end > t_begin)) throw std::invalid_argument("bad fit window");
    const int n = orbit.params().n;
    std::vector<double> a(n, 0.0);
    a[0] = a_norm;
    const auto terms = translate_expansion(orbit, a, order);
    RemainderFit out;
    const int s_count = 41;
    for (int i = 0; i < samples; ++i) {
        const double t = t_begin + (t_end - t_begin) * i / (samples - 1);
        const double xi = orbit.value(t);
        double worst = 0.0;
        for (int j = 0; j < s_count; ++j) {
            const double s = -1.0 + 2.0 * j / (s_count - 1);
            double v = exact_translate_zonal(orbit, a_norm, t, s) - xi;
            for (const auto& term : terms) v -= term.evaluate_zonal(t, s);
            worst = std::max(worst, std::abs(v));
        }
        out.t.push_back(t);
        out.remainder.push_back(worst);
    }
    DecayFitOptions fo;
    fo.period = orbit.is_constant() ? 0.0 : orbit.period();
    out.fit = fit_decay(out.t, out.remainder, false, fo);
    return out;
}

}  // namespace fowler_lab
