#include "fowler_lab/fowler.hpp"

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fowler_lab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

struct FowlerSystem {
    FowlerParams p;
    void operator()(const State& x, State& dx, double) const {
        dx[0] = x[1];
        dx[1] = p.q * x[0] - p.c * std::pow(x[0], p.e);
    }
};

// U(eps) - U(eps + d) without cancellation for small d.
double drop_above(double eps, double d, const FowlerParams& p) {
    return 0.5 * p.q * d * (2.0 * eps + d) -
           p.c / (p.e + 1.0) * std::pow(eps, p.e + 1.0) * std::expm1((p.e + 1.0) * std::log1p(d / eps));
}

// U(m) - U(m - d) for small d.
double drop_below(double m, double d, const FowlerParams& p) {
    return -0.5 * p.q * d * (2.0 * m - d) -
           p.c / (p.e + 1.0) * std::pow(m, p.e + 1.0) * std::expm1((p.e + 1.0) * std::log1p(-d / m));
}

void require_amplitude(double eps, const FowlerParams& p) {
    const double star = constant_solution(p);
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::domain_error("epsilon must be positive");
    if (eps >= star) throw std::domain_error("epsilon must lie below the constant solution");
    if (star - eps < 1e-6 * star)
        throw std::domain_error("epsilon within 1e-6 of the constant solution; use the constant orbit");
}

}  // namespace

FowlerParams FowlerParams::conformal(int n, double k0) {
    if (n < 3) throw std::invalid_argument("dimension n must be >= 3");
    if (!(k0 > 0.0)) throw std::invalid_argument("K0 must be positive");
    FowlerParams p;
    p.problem = Problem::Conformal;
    p.n = n;
    p.q = 0.25 * (n - 2.0) * (n - 2.0);
    p.e = (n + 2.0) / (n - 2.0);
    p.c = k0;
    p.k0 = k0;
    return p;
}

FowlerParams FowlerParams::ckn(int n, double a, double b) {
    if (n < 3) throw std::invalid_argument("dimension n must be >= 3");
    if (!(a >= 0.0 && a < 0.5 * (n - 2.0))) throw std::invalid_argument("CKN weight a must satisfy 0 <= a < (n-2)/2");
    if (!(b >= a && b < a + 1.0)) throw std::invalid_argument("CKN weight b must satisfy a <= b < a+1");
    FowlerParams p;
    p.problem = Problem::Ckn;
    p.n = n;
    p.a = a;
    p.b = b;
    p.q = 0.25 * (n - 2.0 * a - 2.0) * (n - 2.0 * a - 2.0);
    p.e = 2.0 * n / (n - 2.0 + 2.0 * (b - a)) - 1.0;
    p.c = 1.0;
    p.k0 = 1.0;
    return p;
}

double FowlerParams::p() const { return e + 1.0; }

std::string FowlerParams::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (problem == Problem::Conformal)
        os << "conformal n=" << n << " K0=" << k0;
    else
        os << "ckn n=" << n << " a=" << a << " b=" << b << " p=" << p();
    return os.str();
}

double constant_solution(const FowlerParams& p) { return std::pow(p.q / p.c, 1.0 / (p.e - 1.0)); }

double potential(double xi, const FowlerParams& p) {
    return -0.5 * p.q * xi * xi + p.c / (p.e + 1.0) * std::pow(xi, p.e + 1.0);
}

double hamiltonian(double xi, double xi_prime, const FowlerParams& p) {
    return 0.5 * xi_prime * xi_prime + potential(xi, p);
}

double rhs_second_derivative(double xi, const FowlerParams& p) { return p.q * xi - p.c * std::pow(xi, p.e); }

double max_value(double eps, const FowlerParams& p) {
    const double star = constant_solution(p);
    if (std::abs(eps - star) <= 1e-14 * star) return star;
    require_amplitude(eps, p);
    const double upper = std::pow((p.e + 1.0) * p.q / (2.0 * p.c), 1.0 / (p.e - 1.0));
    const double level = potential(eps, p);
    auto f = [&](double s) { return potential(s, p) - level; };
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, star, upper, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

double period_quadrature(double eps, const FowlerParams& p) {
    require_amplitude(eps, p);
    const double top = max_value(eps, p);
    const double mid = 0.5 * (eps + top);
    using boost::math::quadrature::gauss_kronrod;
    // s = eps + u^2 on the lower half, s = top - u^2 on the upper half
    auto lower = [&](double u) {
        if (u == 0.0) return 2.0 / std::sqrt(-2.0 * (-p.q * eps + p.c * std::pow(eps, p.e)));
        return 2.0 * u / std::sqrt(2.0 * drop_above(eps, u * u, p));
    };
    auto upper = [&](double u) {
        if (u == 0.0) return 2.0 / std::sqrt(2.0 * (p.c * std::pow(top, p.e) - p.q * top));
        return 2.0 * u / std::sqrt(2.0 * drop_below(top, u * u, p));
    };
    double err = 0.0;
    double a = gauss_kronrod<double, 61>::integrate(lower, 0.0, std::sqrt(mid - eps), 15, 1e-12, &err);
    double b = gauss_kronrod<double, 61>::integrate(upper, 0.0, std::sqrt(top - mid), 15, 1e-12, &err);
    return 2.0 * (a + b);
}

FowlerOrbit::FowlerOrbit(FowlerParams params, double epsilon, double period, bool constant, std::vector<double> xi,
                         std::vector<double> xi_prime)
    : params_(params), epsilon_(epsilon), period_(period), constant_(constant), xi_(std::move(xi)),
      xi_prime_(std::move(xi_prime)) {
    if (xi_.size() != xi_prime_.size() || xi_.size() < 3) throw std::invalid_argument("orbit samples mismatch");
}

double FowlerOrbit::energy() const { return hamiltonian(xi_[0], xi_prime_[0], params_); }

double FowlerOrbit::max_energy_drift() const {
    const double h0 = energy();
    double drift = 0.0;
    for (std::size_t i = 0; i < xi_.size(); ++i)
        drift = std::max(drift, std::abs(hamiltonian(xi_[i], xi_prime_[i], params_) - h0));
    return drift;
}

double FowlerOrbit::max_value() const {
    double m = 0.0;
    for (double x : xi_) m = std::max(m, x);
    return m;
}

double FowlerOrbit::closure_defect() const {
    return std::abs(xi_.back() - xi_.front()) + std::abs(xi_prime_.back() - xi_prime_.front());
}

double FowlerOrbit::symmetry_defect() const {
    double d = 0.0;
    const int n = samples();
    for (int i = 0; i <= n; ++i) d = std::max(d, std::abs(xi_[i] - xi_[n - i]));
    return d;
}

FowlerOrbit::Local FowlerOrbit::locate(double t) const {
    const int n = samples();
    const double h = period_ / n;
    double tau = std::fmod(t, period_);
    if (tau < 0.0) tau += period_;
    int i = std::min(static_cast<int>(tau / h), n - 1);
    return {i, h, (tau - i * h) / h};
}

double FowlerOrbit::value(double t) const {
    if (constant_) return xi_[0];
    auto [i, h, s] = locate(t);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double y0 = xi_[i], y1 = xi_[i + 1];
    const double d0 = xi_prime_[i] * h, d1 = xi_prime_[i + 1] * h;
    const double c0 = rhs_second_derivative(y0, params_) * h * h;
    const double c1 = rhs_second_derivative(y1, params_) * h * h;
    return y0 * (1 - 10 * s3 + 15 * s4 - 6 * s5) + d0 * (s - 6 * s3 + 8 * s4 - 3 * s5) +
           c0 * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) + y1 * (10 * s3 - 15 * s4 + 6 * s5) +
           d1 * (-4 * s3 + 7 * s4 - 3 * s5) + c1 * (0.5 * s3 - s4 + 0.5 * s5);
}

double FowlerOrbit::derivative(double t) const {
    if (constant_) return 0.0;
    auto [i, h, s] = locate(t);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const double y0 = xi_[i], y1 = xi_[i + 1];
    const double d0 = xi_prime_[i] * h, d1 = xi_prime_[i + 1] * h;
    const double c0 = rhs_second_derivative(y0, params_) * h * h;
    const double c1 = rhs_second_derivative(y1, params_) * h * h;
    const double ds = y0 * (-30 * s2 + 60 * s3 - 30 * s4) + d0 * (1 - 18 * s2 + 32 * s3 - 15 * s4) +
                      c0 * (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) + y1 * (30 * s2 - 60 * s3 + 30 * s4) +
                      d1 * (-12 * s2 + 28 * s3 - 15 * s4) + c1 * (1.5 * s2 - 4 * s3 + 2.5 * s4);
    return ds / h;
}

double FowlerOrbit::second_derivative(double t) const { return rhs_second_derivative(value(t), params_); }

PeriodicFunction FowlerOrbit::xi_function() const {
    Eigen::VectorXd v(samples());
    for (int i = 0; i < samples(); ++i) v(i) = xi_[i];
    return PeriodicFunction(period_, std::move(v));
}

PeriodicFunction FowlerOrbit::xi_prime_function() const {
    Eigen::VectorXd v(samples());
    for (int i = 0; i < samples(); ++i) v(i) = xi_prime_[i];
    return PeriodicFunction(period_, std::move(v));
}

FowlerOrbit constant_orbit(const FowlerParams& p, const OrbitOptions& opt) {
    if (opt.samples < 2) throw std::invalid_argument("orbit needs at least two samples");
    if (!(opt.constant_period > 0.0)) throw std::invalid_argument("constant orbit period must be positive");
    const double star = constant_solution(p);
    return FowlerOrbit(p, star, opt.constant_period, true, std::vector<double>(opt.samples + 1, star),
                       std::vector<double>(opt.samples + 1, 0.0));
}

FowlerOrbit periodic_orbit(double eps, const FowlerParams& p, const OrbitOptions& opt) {
    const double star = constant_solution(p);
    if (std::abs(eps - star) <= 1e-14 * star) return constant_orbit(p, opt);
    require_amplitude(eps, p);
    if (opt.samples < 8) throw std::invalid_argument("orbit needs at least eight samples");

    FowlerSystem sys{p};
    using Stepper = odeint::runge_kutta_fehlberg78<State>;
    auto controlled = odeint::make_controlled(opt.abs_tol, opt.rel_tol, Stepper());

    // march to the first maximum, where xi' turns negative
    State x{eps, 0.0};
    double t = 0.0, dt = 1e-3;
    State x_prev = x;
    double t_prev = t;
    const long max_steps = 10'000'000;
    long steps = 0;
    while (true) {
        x_prev = x;
        t_prev = t;
        while (controlled.try_step(sys, x, t, dt) == odeint::fail) {
            if (dt < 1e-14) throw std::runtime_error("orbit integration failed: step size underflow at t=" + std::to_string(t));
        }
        if (!std::isfinite(x[0]) || x[0] <= 0.0)
            throw std::runtime_error("orbit integration left the positive region at t=" + std::to_string(t));
        if (++steps > max_steps) throw std::runtime_error("orbit integration exceeded the step budget");
        if (x[1] < 0.0) break;
    }
    Stepper fixed;
    double lo = 0.0, hi = t - t_prev;
    while (hi - lo > opt.event_tol) {
        double mid = 0.5 * (lo + hi);
        State y = x_prev;
        fixed.do_step(sys, y, t_prev, mid);
        (y[1] > 0.0 ? lo : hi) = mid;
    }
    const double period = 2.0 * (t_prev + 0.5 * (lo + hi));

    std::vector<double> times(opt.samples + 1);
    for (int i = 0; i <= opt.samples; ++i) times[i] = period * i / opt.samples;
    std::vector<double> xi, xp;
    xi.reserve(times.size());
    xp.reserve(times.size());
    State y{eps, 0.0};
    auto observer = [&](const State& s, double) {
        xi.push_back(s[0]);
        xp.push_back(s[1]);
    };
    odeint::integrate_times(odeint::make_controlled(opt.abs_tol, opt.rel_tol, Stepper()), sys, y, times.begin(),
                            times.end(), period / opt.samples, observer);
    return FowlerOrbit(p, eps, period, false, std::move(xi), std::move(xp));
}

}  // namespace fowler_lab
