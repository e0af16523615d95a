#include "fowler_lab/floquet.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fowler_lab/parallel.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

namespace fowler_lab {

namespace odeint = boost::numeric::odeint;

namespace {

// (xi, xi', y, y') with y'' = V y; the orbit is carried along so V is exact.
using Augmented = std::array<double, 4>;
// (xi, xi', y1, y1', y2, y2')
using Fundamental = std::array<double, 6>;

struct VariationalSystem {
    FowlerParams p;
    double lambda;
    double v(double xi) const { return lambda + p.q - p.e * p.c * std::pow(xi, p.e - 1.0); }
    void operator()(const Fundamental& x, Fundamental& dx, double) const {
        const double vv = v(x[0]);
        dx[0] = x[1];
        dx[1] = p.q * x[0] - p.c * std::pow(x[0], p.e);
        dx[2] = x[3];
        dx[3] = vv * x[2];
        dx[4] = x[5];
        dx[5] = vv * x[4];
    }
    void operator()(const Augmented& x, Augmented& dx, double) const {
        const double vv = v(x[0]);
        dx[0] = x[1];
        dx[1] = p.q * x[0] - p.c * std::pow(x[0], p.e);
        dx[2] = x[3];
        dx[3] = vv * x[2];
    }
};

template <class State>
auto make_stepper(const FloquetSettings& s) {
    return odeint::make_controlled(s.abs_tol, s.rel_tol, odeint::runge_kutta_fehlberg78<State>());
}

// Eigenvector of a 2x2 matrix for eigenvalue mu, from the better conditioned row.
Eigen::Vector2d eigenvector(const Eigen::Matrix2d& m, double mu) {
    Eigen::Vector2d a(m(0, 1), mu - m(0, 0));
    Eigen::Vector2d b(mu - m(1, 1), m(1, 0));
    Eigen::Vector2d v = a.norm() >= b.norm() ? a : b;
    if (v.norm() == 0.0) v = Eigen::Vector2d(1.0, 0.0);
    return v / v.norm();
}

struct Sampled {
    Eigen::VectorXd h;
    Eigen::VectorXd hp;
};

// Integrates y'' = V y along the orbit from t_from to t_to, recording at the given times.
Sampled integrate_solution(const ModeOperator& op, const FloquetSettings& settings, const std::vector<double>& times,
                           Augmented x) {
    VariationalSystem sys{op.orbit->params(), op.lambda};
    Sampled out{Eigen::VectorXd(times.size()), Eigen::VectorXd(times.size())};
    std::size_t k = 0;
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    odeint::integrate_times(make_stepper<Augmented>(settings), sys, x, times.begin(), times.end(), dt,
                            [&](const Augmented& s, double) {
                                out.h(k) = s[2];
                                out.hp(k) = s[3];
                                ++k;
                            });
    return out;
}

}  // namespace

ModeOperator ModeOperator::make(std::shared_ptr<const FowlerOrbit> orbit, int degree) {
    if (!orbit) throw std::invalid_argument("mode operator needs an orbit");
    return ModeOperator{orbit, degree, eigenvalue(degree, orbit->params().n)};
}

double ModeOperator::potential(double t) const {
    const auto& p = orbit->params();
    return lambda + p.q - p.e * p.c * std::pow(orbit->value(t), p.e - 1.0);
}

Monodromy monodromy(const ModeOperator& op, const FloquetSettings& settings) {
    const FowlerOrbit& orbit = *op.orbit;
    const double period = orbit.period();
    double vmax = 0.0;
    for (int i = 0; i <= orbit.samples(); ++i) {
        const auto& p = orbit.params();
        vmax = std::max(vmax, std::abs(op.lambda + p.q - p.e * p.c * std::pow(orbit.xi_samples()[i], p.e - 1.0)));
    }
    const int segments = std::max(1, static_cast<int>(std::ceil(period * std::sqrt(vmax) / settings.max_segment_growth)));
    VariationalSystem sys{orbit.params(), op.lambda};
    Monodromy out;
    out.matrix.setIdentity();
    out.determinant = 1.0;
    out.segments = segments;
    double xi = orbit.xi_samples().front(), xp = orbit.xi_prime_samples().front();
    for (int s = 0; s < segments; ++s) {
        const double t0 = period * s / segments, t1 = period * (s + 1) / segments;
        Fundamental x{xi, xp, 1.0, 0.0, 0.0, 1.0};
        if (orbit.is_constant()) {
            x[0] = constant_solution(orbit.params());
            x[1] = 0.0;
        }
        odeint::integrate_adaptive(make_stepper<Fundamental>(settings), sys, x, t0, t1, (t1 - t0) / 64.0);
        Eigen::Matrix2d phi;
        phi << x[2], x[4], x[3], x[5];
        out.matrix = phi * out.matrix;
        out.determinant *= phi.determinant();
        xi = x[0];
        xp = x[1];
    }
    if (!out.matrix.allFinite()) throw std::overflow_error("monodromy matrix overflowed; reduce the mode index");
    return out;
}

std::string to_string(FloquetType type) {
    switch (type) {
        case FloquetType::I: return "I";
        case FloquetType::II: return "II";
        case FloquetType::III: return "III";
        case FloquetType::IV: return "IV";
        case FloquetType::V: return "V";
    }
    return "?";
}

FloquetDatum classify(const Monodromy& m, double period, double tol) {
    FloquetDatum d;
    d.trace = m.matrix.trace();
    const double tr = d.trace;
    if (std::abs(m.determinant - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "monodromy determinant " << m.determinant << " differs from 1";
        d.warnings.push_back(os.str());
    }
    if (std::abs(tr) > 2.0 + tol) {
        d.type = FloquetType::III;
        const double mu = 0.5 * (std::abs(tr) + std::sqrt(tr * tr - 4.0 * m.determinant));
        d.multiplier = tr > 0 ? mu : -mu;
        d.exponent = std::log(mu) / period;
        if (tr < 0) d.warnings.push_back("negative Floquet multiplier; the periodic factors are antiperiodic");
        if (std::abs(tr) < 2.0 + 100.0 * tol) d.warnings.push_back("trace within 100 tol of the degenerate value");
    } else if (std::abs(tr) < 2.0 - tol) {
        d.type = FloquetType::IV;
        d.rotation = std::acos(tr / 2.0) / period;
        d.multiplier = tr / 2.0;
        if (std::abs(tr) > 2.0 - 100.0 * tol) d.warnings.push_back("trace within 100 tol of the degenerate value");
    } else {
        const double sign = tr > 0 ? 1.0 : -1.0;
        const Eigen::Matrix2d diff = m.matrix - sign * Eigen::Matrix2d::Identity();
        d.type = diff.norm() < tol * std::max(1.0, m.matrix.norm()) ? FloquetType::I : FloquetType::II;
        d.multiplier = sign;
        d.warnings.push_back("trace within tol of +-2; classification is tolerance dependent");
    }
    return d;
}

KernelBasis kernel_basis(const ModeOperator& op, const Monodromy& m, const FloquetDatum& datum,
                         const FloquetSettings& settings) {
    if (datum.type != FloquetType::III) throw std::domain_error("kernel basis needs a hyperbolic mode");
    const FowlerOrbit& orbit = *op.orbit;
    KernelBasis kb;
    kb.sigma = datum.exponent;
    kb.antiperiodic = datum.multiplier < 0.0;
    const int laps = kb.antiperiodic ? 2 : 1;
    const double span = laps * orbit.period();
    const int count = laps * orbit.samples();

    const double mu_large = datum.multiplier;
    const double mu_small = m.determinant / mu_large;
    const Eigen::Vector2d v_small = eigenvector(m.matrix, mu_small);
    const Eigen::Vector2d v_large = eigenvector(m.matrix, mu_large);
    const double xi0 = orbit.is_constant() ? constant_solution(orbit.params()) : orbit.xi_samples().front();
    const double xp0 = orbit.is_constant() ? 0.0 : orbit.xi_prime_samples().front();

    std::vector<double> forward(count + 1), backward(count + 1);
    for (int i = 0; i <= count; ++i) {
        forward[i] = span * i / count;
        backward[i] = span * (count - i) / count;
    }
    // decaying solution, integrated backward from the end where it is smallest
    const double end_scale = std::pow(mu_small, laps);
    Sampled dec = integrate_solution(op, settings, backward,
                                     Augmented{xi0, xp0, end_scale * v_small(0), end_scale * v_small(1)});
    Sampled gro = integrate_solution(op, settings, forward, Augmented{xi0, xp0, v_large(0), v_large(1)});

    Eigen::VectorXd qp(count), qpp(count), qm(count), qmp(count);
    for (int i = 0; i < count; ++i) {
        const double t = forward[i];
        const int j = count - i;  // backward samples run from the end
        const double up = std::exp(kb.sigma * t), down = std::exp(-kb.sigma * t);
        qp(i) = up * dec.h(j);
        qpp(i) = up * (dec.hp(j) + kb.sigma * dec.h(j));
        qm(i) = down * gro.h(i);
        qmp(i) = down * (gro.hp(i) - kb.sigma * gro.h(i));
    }
    const Eigen::Vector2d h_small0(dec.h(count), dec.hp(count));
    const Eigen::Vector2d h_large_end(gro.h(count), gro.hp(count));
    kb.periodicity_defect = std::max((h_small0 - v_small).norm() / v_small.norm(),
                                     (h_large_end / std::pow(mu_large, laps) - v_large).norm() / v_large.norm());

    auto normalize = [](Eigen::VectorXd& q, Eigen::VectorXd& qd) {
        double s = q(0);
        if (std::abs(s) < 1e-8 * q.cwiseAbs().maxCoeff()) s = q.cwiseAbs().maxCoeff();
        q /= s;
        qd /= s;
    };
    normalize(qp, qpp);
    normalize(qm, qmp);
    kb.q_plus = PeriodicFunction(span, qp);
    kb.q_plus_prime = PeriodicFunction(span, qpp);
    kb.q_minus = PeriodicFunction(span, qm);
    kb.q_minus_prime = PeriodicFunction(span, qmp);
    return kb;
}

ModeSpectrum analyze_mode(std::shared_ptr<const FowlerOrbit> orbit, int degree, const FloquetSettings& settings) {
    ModeSpectrum ms{ModeOperator::make(std::move(orbit), degree), {}, {}, std::nullopt};
    ms.mono = monodromy(ms.op, settings);
    ms.datum = classify(ms.mono, ms.op.period(), settings.classify_tol);
    if (ms.datum.type == FloquetType::III) ms.kernel = kernel_basis(ms.op, ms.mono, ms.datum, settings);
    return ms;
}

double constant_orbit_exponent(double lambda, const FowlerParams& p) {
    return std::sqrt(lambda + p.q * (1.0 - p.e));
}

std::vector<ExponentEntry> exponent_sequence(std::shared_ptr<const FowlerOrbit> orbit, int count,
                                             const FloquetSettings& settings) {
    if (count < 1) throw std::invalid_argument("exponent count must be >= 1");
    const int n = orbit->params().n;
    const int top = degree_of_index(count, n);
    std::vector<FloquetDatum> data(top + 1);
    parallel_for(static_cast<std::size_t>(top), [&](std::size_t i) {
        ModeOperator op = ModeOperator::make(orbit, static_cast<int>(i) + 1);
        data[i + 1] = classify(monodromy(op, settings), orbit->period(), settings.classify_tol);
    });
    std::vector<ExponentEntry> out;
    for (int i = 1; i <= count; ++i) {
        const int k = degree_of_index(i, n);
        const FloquetDatum& d = data[k];
        if (d.type != FloquetType::III) {
            std::ostringstream os;
            os << "degree " << k << " is type " << to_string(d.type) << " (trace " << d.trace
               << "); the exponent sequence is undefined";
            throw std::domain_error(os.str());
        }
        out.push_back({i, k, eigenvalue(k, n), d.exponent, d.type});
    }
    return out;
}

BoundReport lower_bound_check(const std::vector<ExponentEntry>& sequence, const FowlerOrbit& orbit, double tol) {
    BoundReport r;
    const auto& p = orbit.params();
    for (const auto& e : sequence) {
        BoundEntry b{e.index, e.lambda, e.sigma * e.sigma, 0.0, 0.0};
        std::ostringstream os;
        if (orbit.is_constant()) {
            b.bound = e.lambda + p.q * (1.0 - p.e);
            b.margin = b.rho_squared - b.bound;
            if (std::abs(b.margin) > tol * std::max(1.0, b.bound)) {
                os << "index " << e.index << ": rho^2 = " << b.rho_squared << " but the constant orbit gives " << b.bound;
                r.failures.push_back(os.str());
            }
        } else {
            b.bound = e.lambda - (3.0 * p.n - 2.0) / 2.0;
            b.margin = b.rho_squared - b.bound;
            if (p.problem == Problem::Conformal && !(b.margin > 0.0)) {
                os << "index " << e.index << ": rho^2 = " << b.rho_squared << " is not above " << b.bound;
                r.failures.push_back(os.str());
            }
        }
        r.entries.push_back(b);
    }
    r.passed = r.failures.empty();
    return r;
}

double translation_kernel_residual(const FowlerOrbit& orbit) {
    if (orbit.is_constant()) return 0.0;
    const auto& p = orbit.params();
    PeriodicFunction xp = orbit.xi_prime_function();
    PeriodicFunction xppp = xp.derivative(2);
    double res = 0.0, scale = 0.0;
    for (int i = 0; i < xp.size(); ++i) {
        const double v = p.q - p.e * p.c * std::pow(orbit.xi_samples()[i], p.e - 1.0);
        res = std::max(res, std::abs(-xppp.samples()(i) + v * xp.samples()(i)));
        scale = std::max(scale, std::abs(v * xp.samples()(i)));
    }
    return res / std::max(1e-300, scale);
}

}  // namespace fowler_lab
