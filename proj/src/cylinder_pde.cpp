#include "fowler_lab/cylinder_pde.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fowler_lab/parallel.hpp"

namespace fowler_lab {

namespace {

constexpr int sup_grid_points = 65;

// Z_k at a set of s values, with quadrature weights when the set is a Gauss rule.
struct ZonalTable {
    std::vector<double> s;
    std::vector<double> w;
    Eigen::MatrixXd z;  // z(k, i)
    Eigen::VectorXd norm;  // sum_i w_i Z_k(s_i)^2

    static ZonalTable uniform(int n, int modes) {
        ZonalTable t;
        for (int i = 0; i < sup_grid_points; ++i) t.s.push_back(-1.0 + 2.0 * i / (sup_grid_points - 1));
        t.fill(n, modes);
        return t;
    }
    static ZonalTable gauss(int n, int modes) {
        ZonalTable t;
        QuadratureRule rule = gauss_gegenbauer(n, std::max(16, 4 * modes));
        t.s = rule.nodes;
        t.w = rule.weights;
        t.fill(n, modes);
        t.norm = Eigen::VectorXd::Zero(modes);
        for (int k = 0; k < modes; ++k)
            for (std::size_t i = 0; i < t.s.size(); ++i) t.norm(k) += t.w[i] * t.z(k, i) * t.z(k, i);
        return t;
    }
    void fill(int n, int modes) {
        z.resize(modes, static_cast<Eigen::Index>(s.size()));
        for (int k = 0; k < modes; ++k)
            for (std::size_t i = 0; i < s.size(); ++i) z(k, i) = eval_zonal(k, n, s[i]);
    }
    int size() const { return static_cast<int>(s.size()); }
    // coefficient of Z_k in the function with node values f
    double project(int k, const Eigen::VectorXd& f) const {
        double acc = 0.0;
        for (int i = 0; i < size(); ++i) acc += w[i] * z(k, i) * f(i);
        return acc / norm(k);
    }
};

Eigen::VectorXd second_derivative_fd4(const Eigen::VectorXd& f, double h) {
    const int m = static_cast<int>(f.size());
    if (m < 6) throw std::invalid_argument("fourth-order differences need at least 6 nodes");
    Eigen::VectorXd d(m);
    const double s = 1.0 / (12.0 * h * h);
    for (int j = 2; j < m - 2; ++j) d(j) = s * (-f(j - 2) + 16 * f(j - 1) - 30 * f(j) + 16 * f(j + 1) - f(j + 2));
    auto one_sided = [&](int j0, int dir) {
        return s * (45 * f(j0) - 154 * f(j0 + dir) + 214 * f(j0 + 2 * dir) - 156 * f(j0 + 3 * dir) +
                    61 * f(j0 + 4 * dir) - 10 * f(j0 + 5 * dir));
    };
    d(0) = one_sided(0, 1);
    d(m - 1) = one_sided(m - 1, -1);
    // second node from each end: shift the one-sided stencil by one
    d(1) = s * (10 * f(0) - 15 * f(1) - 4 * f(2) + 14 * f(3) - 6 * f(4) + f(5));
    d(m - 2) = s * (10 * f(m - 1) - 15 * f(m - 2) - 4 * f(m - 3) + 14 * f(m - 4) - 6 * f(m - 5) + f(m - 6));
    return d;
}

// -f_tt + (lambda_k + q) f_k - P_k[coef(t, s) f^e]
CylinderField residual_impl(const CylinderField& field, const std::function<double(double, double)>& coef) {
    const FowlerParams& p = field.params();
    const TimeGrid& g = field.grid();
    const int modes = field.modes();
    const ZonalTable quad = ZonalTable::gauss(p.n, modes);
    CylinderField out(p, g, modes);
    for (int k = 0; k < modes; ++k)
        out.coeff(k) = -second_derivative_fd4(field.coeff(k), g.h) + (eigenvalue(k, p.n) + p.q) * field.coeff(k);
    Eigen::VectorXd f(quad.size());
    for (int j = 0; j < g.points; ++j) {
        for (int i = 0; i < quad.size(); ++i) {
            double v = 0.0;
            for (int k = 0; k < modes; ++k) v += field.coeff(k)(j) * quad.z(k, i);
            if (!(v > 0.0)) throw std::domain_error("field must be positive for the fractional power");
            f(i) = coef(g.t(j), quad.s[i]) * std::pow(v, p.e);
        }
        for (int k = 0; k < modes; ++k) out.coeff(k)(j) -= quad.project(k, f);
    }
    return out;
}

// 6-point Lagrange interpolation of grid data
double grid_interpolate(const Eigen::VectorXd& v, const TimeGrid& g, double t) {
    const int m = g.points;
    int i = static_cast<int>(std::floor((t - g.t0) / g.h)) - 2;
    i = std::clamp(i, 0, m - 6);
    double acc = 0.0;
    for (int a = 0; a < 6; ++a) {
        double l = 1.0;
        for (int b = 0; b < 6; ++b)
            if (b != a) l *= (t - g.t(i + b)) / (g.t(i + a) - g.t(i + b));
        acc += l * v(i + a);
    }
    return acc;
}

}  // namespace

TimeGrid TimeGrid::window(double t0, double length, double h) {
    if (!(h > 0.0) || !(length > 0.0)) throw std::invalid_argument("grid needs positive step and length");
    const int steps = static_cast<int>(std::lround(length / h));
    if (steps < 8) throw std::invalid_argument("grid needs at least 8 steps");
    return {t0, h, steps + 1};
}

CylinderField::CylinderField(FowlerParams params, TimeGrid grid, int modes)
    : params_(std::move(params)), grid_(grid), coeffs_(modes, Eigen::VectorXd::Zero(grid.points)) {
    if (modes < 1) throw std::invalid_argument("field needs at least one mode");
}

CylinderField CylinderField::from_function(const FowlerParams& params, const TimeGrid& grid, int modes,
                                           const std::function<double(double, double)>& f) {
    CylinderField out(params, grid, modes);
    const ZonalTable quad = ZonalTable::gauss(params.n, modes);
    Eigen::VectorXd vals(quad.size());
    for (int j = 0; j < grid.points; ++j) {
        for (int i = 0; i < quad.size(); ++i) vals(i) = f(grid.t(j), quad.s[i]);
        for (int k = 0; k < modes; ++k) out.coeff(k)(j) = quad.project(k, vals);
    }
    return out;
}

CylinderField CylinderField::lift(const FowlerOrbit& orbit, const TimeGrid& grid, int modes) {
    CylinderField out(orbit.params(), grid, modes);
    for (int j = 0; j < grid.points; ++j) out.coeff(0)(j) = orbit.value(grid.t(j));
    return out;
}

HarmonicMode CylinderField::mode(int k) const { return HarmonicMode::zonal(k, params_.n); }

double CylinderField::value(int j, double s) const {
    double v = 0.0;
    for (int k = 0; k < modes(); ++k) v += coeffs_[k](j) * eval_zonal(k, params_.n, s);
    return v;
}

double CylinderField::value(int j, std::span<const double> theta) const {
    if (static_cast<int>(theta.size()) != params_.n) throw std::invalid_argument("theta must have length n");
    return value(j, theta[0]);
}

double CylinderField::sup_theta(int j) const {
    static thread_local std::vector<std::pair<std::pair<int, int>, ZonalTable>> cache;
    const ZonalTable* table = nullptr;
    for (const auto& [key, t] : cache)
        if (key.first == params_.n && key.second == modes()) table = &t;
    if (!table) {
        cache.push_back({{params_.n, modes()}, ZonalTable::uniform(params_.n, modes())});
        table = &cache.back().second;
    }
    double best = 0.0;
    for (int i = 0; i < table->size(); ++i) {
        double v = 0.0;
        for (int k = 0; k < modes(); ++k) v += coeffs_[k](j) * table->z(k, i);
        best = std::max(best, std::abs(v));
    }
    return best;
}

double CylinderField::sup_norm(int skip) const {
    double best = 0.0;
    for (int j = skip; j < points() - skip; ++j) best = std::max(best, sup_theta(j));
    return best;
}

double CylinderField::weighted_norm(double beta) const {
    double best = 0.0;
    for (int j = 0; j < points(); ++j) best = std::max(best, std::exp(beta * grid_.t(j)) * sup_theta(j));
    return best;
}

double CylinderField::min_value() const {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < points(); ++j)
        for (int i = 0; i < sup_grid_points; ++i) best = std::min(best, value(j, -1.0 + 2.0 * i / (sup_grid_points - 1)));
    return best;
}

void CylinderField::require_compatible(const CylinderField& o) const {
    if (o.modes() != modes() || o.points() != points() || o.grid_.t0 != grid_.t0 || o.grid_.h != grid_.h)
        throw std::invalid_argument("fields live on different grids");
}

CylinderField CylinderField::operator+(const CylinderField& o) const {
    require_compatible(o);
    CylinderField out = *this;
    for (int k = 0; k < modes(); ++k) out.coeffs_[k] += o.coeffs_[k];
    return out;
}

CylinderField CylinderField::operator-(const CylinderField& o) const {
    require_compatible(o);
    CylinderField out = *this;
    for (int k = 0; k < modes(); ++k) out.coeffs_[k] -= o.coeffs_[k];
    return out;
}

double ForcingProfile::value(double t, double s, int n) const {
    double v = 1.0;
    for (const auto& c : components) v += c.amplitude * std::exp(-c.rate * t) * eval_zonal(c.degree, n, s);
    return k0 * v;
}

double ForcingProfile::relative(double t, double s, int n) const {
    double v = 0.0;
    for (const auto& c : components) v += c.amplitude * std::exp(-c.rate * t) * eval_zonal(c.degree, n, s);
    return v;
}

double ForcingProfile::flatness() const {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& c : components) b = std::min(b, c.rate);
    return b;
}

void ForcingProfile::require_positive(const TimeGrid& grid, int n) const {
    if (!(k0 > 0.0)) throw std::domain_error("K(0) must be positive");
    for (const auto& c : components)
        if (c.degree < 0 || !(c.rate > 0.0)) throw std::invalid_argument("K components need degree >= 0 and rate > 0");
    for (int j = 0; j < grid.points; ++j)
        for (int i = 0; i < sup_grid_points; ++i)
            if (!(value(grid.t(j), -1.0 + 2.0 * i / (sup_grid_points - 1), n) > 0.0))
                throw std::domain_error("K is not positive on the grid");
}

CylinderField residual_M(const CylinderField& field, const ForcingProfile& k) {
    const FowlerParams& p = field.params();
    if (p.problem != Problem::Conformal) throw std::invalid_argument("residual_M needs the conformal problem");
    return residual_impl(field, [&](double t, double s) { return k.value(t, s, p.n); });
}

CylinderField residual_N(const CylinderField& field) {
    if (field.params().problem != Problem::Ckn) throw std::invalid_argument("residual_N needs the CKN problem");
    return residual_impl(field, [](double, double) { return 1.0; });
}

struct ModeInverse::Factor {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double gauge_value = 0.0, gauge_slope = 0.0;  // growing solution at t0 and t0 + h
    double end_value = 0.0, end_slope = 0.0;  // decaying solution at T and T - h
};

ModeInverse::ModeInverse(ModeSpectrum spectrum, TimeGrid grid, double beta, InverseOptions options)
    : spectrum_(std::move(spectrum)), grid_(grid), beta_(beta), options_(options) {
    if (grid_.points < 16) throw std::invalid_argument("inverse needs at least 16 nodes");
    const auto& kernel = spectrum_.kernel;
    const bool resonant = kernel && std::abs(kernel->sigma - beta) <= options_.resonance_gap;
    if (resonant && !options_.allow_resonant) {
        std::ostringstream os;
        os << "beta = " << beta << " is resonant with the mode exponent " << kernel->sigma
           << "; use the t-power particular solution";
        throw std::domain_error(os.str());
    }
    const int m = grid_.points;
    potential_.resize(m);
    for (int j = 0; j < m; ++j) potential_(j) = spectrum_.op.potential(grid_.t(j));
    fast_ = kernel && !resonant && kernel->sigma > beta;
    if (!fast_) return;

    factor_ = std::make_shared<Factor>();
    const double h = grid_.h, c = h * h / 12.0, sigma = kernel->sigma;
    const double t0 = grid_.t0, tend = grid_.end();
    // growing solution at t0, t0 + h and decaying solution at T, T - h, each up to a common scale
    factor_->gauge_value = kernel->q_minus(t0);
    factor_->gauge_slope = std::exp(sigma * h) * kernel->q_minus(t0 + h);
    factor_->end_value = kernel->q_plus(tend);
    factor_->end_slope = std::exp(sigma * h) * kernel->q_plus(tend - h);

    std::vector<Eigen::Triplet<double>> trip;
    // discrete W(phi, growing)(t0) = 0
    trip.emplace_back(0, 0, factor_->gauge_slope);
    trip.emplace_back(0, 1, -factor_->gauge_value);
    for (int j = 1; j < m - 1; ++j) {
        trip.emplace_back(j, j - 1, 1.0 - c * potential_(j - 1));
        trip.emplace_back(j, j, -2.0 - 10.0 * c * potential_(j));
        trip.emplace_back(j, j + 1, 1.0 - c * potential_(j + 1));
    }
    // discrete W(phi - phi_a, decaying)(T) = 0
    trip.emplace_back(m - 1, m - 1, factor_->end_slope);
    trip.emplace_back(m - 1, m - 2, -factor_->end_value);
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(trip.begin(), trip.end());
    factor_->lu.compute(a);
    if (factor_->lu.info() != Eigen::Success) throw std::runtime_error("boundary value matrix is singular");
}

ModeInverse::Asymptotic ModeInverse::asymptotic(const Eigen::VectorXd& rhs, std::vector<std::string>& warnings) const {
    Asymptotic out;
    const double period = spectrum_.op.period();
    const double tend = grid_.end();
    double gamma = options_.terminal_rate;
    if (gamma <= 0.0) {
        if (2.0 * period > tend - grid_.t0 - 6 * grid_.h) {
            warnings.push_back("window shorter than two periods; zero terminal data");
            return out;
        }
        double num = 0.0, den = 0.0, ff = 0.0;
        const int m = grid_.points;
        for (int j = m - 1; grid_.t(j) >= tend - period; --j) {
            const double a = rhs(j), b = grid_interpolate(rhs, grid_, grid_.t(j) - period);
            num += a * b;
            den += b * b;
            ff += a * a;
        }
        if (den == 0.0 || ff == 0.0) return out;
        const double ratio = num / den;
        const double misfit = std::sqrt(std::max(0.0, 1.0 - num * num / (den * ff)));
        if (!(ratio > 0.0)) {
            warnings.push_back("forcing does not decay near the end; zero terminal data");
            return out;
        }
        gamma = -std::log(ratio) / period;
        out.gamma = gamma;
        if (gamma < 0.25 * beta_ || gamma > 8.0 * beta_ || misfit > 0.1) {
            std::ostringstream os;
            os << "forcing rate estimate " << gamma << " (misfit " << misfit << ") rejected; zero terminal data";
            warnings.push_back(os.str());
            return out;
        }
    }
    const double start = tend - period;
    auto forcing = PeriodicFunction::from_callable(period, options_.collocation, [&](double tau) {
        const double t = tau + period * std::ceil((start - tau) / period);
        return grid_interpolate(rhs, grid_, std::min(t, tend)) * std::exp(gamma * t);
    });
    double mu = gamma;
    const auto& kernel = spectrum_.kernel;
    if (kernel && std::abs(kernel->sigma - gamma) < 1e-2) mu = kernel->sigma;
    out.sol = solve_resonant_mode(forcing, mu, 0, spectrum_, {options_.collocation, 1e-8});
    out.gamma = mu;
    out.ok = true;
    return out;
}

Eigen::VectorXd ModeInverse::solve(const Eigen::VectorXd& rhs, InverseInfo* info) const {
    const int m = grid_.points;
    if (rhs.size() != m) throw std::invalid_argument("rhs length differs from the grid");
    InverseInfo local;
    local.fast = fast_;
    const Asymptotic asym = asymptotic(rhs, local.warnings);
    local.asymptotic = asym.ok;
    local.gamma_hat = asym.gamma;
    const double h = grid_.h, c = h * h / 12.0, tend = grid_.end();
    Eigen::VectorXd phi(m);
    if (fast_) {
        Eigen::VectorXd b(m);
        b(0) = 0.0;
        for (int j = 1; j < m - 1; ++j) b(j) = -c * (rhs(j - 1) + 10.0 * rhs(j) + rhs(j + 1));
        b(m - 1) = asym.ok ? asym.sol.evaluate(tend) * factor_->end_slope - asym.sol.evaluate(tend - h) * factor_->end_value
                           : 0.0;
        phi = factor_->lu.solve(b);
    } else {
        phi(m - 1) = asym.ok ? asym.sol.evaluate(tend) : 0.0;
        phi(m - 2) = asym.ok ? asym.sol.evaluate(tend - h) : 0.0;
        for (int j = m - 2; j >= 1; --j) {
            const double s = -c * (rhs(j - 1) + 10.0 * rhs(j) + rhs(j + 1));
            phi(j - 1) = (s + (2.0 + 10.0 * c * potential_(j)) * phi(j) - (1.0 - c * potential_(j + 1)) * phi(j + 1)) /
                         (1.0 - c * potential_(j - 1));
        }
    }
    if (info) *info = std::move(local);
    return phi;
}

Eigen::VectorXd inverse_L(const ModeSpectrum& spectrum, const Eigen::VectorXd& rhs, const TimeGrid& grid, double beta,
                          const InverseOptions& options) {
    return ModeInverse(spectrum, grid, beta, options).solve(rhs);
}

double nonlinear_remainder(double x, double e) {
    if (std::abs(x) < 1e-3) {
        // binomial series from the quadratic term on
        double term = e * (e - 1.0) / 2.0 * x * x, acc = term;
        for (int k = 3; k <= 9; ++k) {
            term *= (e - k + 1.0) / k * x;
            acc += term;
        }
        return acc;
    }
    return std::expm1(e * std::log1p(x)) - e * x;
}

ApproximateSolution build_ansatz(const FowlerOrbit& orbit, const Ansatz& ansatz, const TimeGrid& grid, int modes) {
    const FowlerParams& p = orbit.params();
    ApproximateSolution out{CylinderField::lift(orbit, grid, modes), CylinderField(p, grid, modes),
                            CylinderField(p, grid, modes)};
    if (ansatz.kind == Ansatz::Kind::Orbit) return out;
    if (modes < 2) throw std::invalid_argument("kernel ansatz needs mode 1");
    if (ansatz.kind == Ansatz::Kind::OrbitPlusKernel) {
        if (p.problem != Problem::Conformal) throw std::invalid_argument("translation kernel ansatz is conformal only");
        // delta e^{-t} ((n-2)/2 xi - xi') Z_1, annihilated by L_1, so the defect is zero
        for (int j = 0; j < grid.points; ++j) {
            const double t = grid.t(j);
            out.perturbation.coeff(1)(j) =
                ansatz.amplitude * std::exp(-t) * (0.5 * (p.n - 2.0) * orbit.value(t) - orbit.derivative(t));
        }
    } else {
        const double nu = ansatz.rate;
        for (int j = 0; j < grid.points; ++j) {
            const double t = grid.t(j);
            const double d = ansatz.amplitude * std::exp(-nu * t);
            out.perturbation.coeff(1)(j) = d;
            out.defect.coeff(1)(j) =
                d * (-nu * nu + eigenvalue(1, p.n) + p.q - p.e * p.c * std::pow(orbit.value(t), p.e - 1.0));
        }
    }
    out.value = out.value + out.perturbation;
    return out;
}

ContractionResult contraction_construct(std::shared_ptr<const FowlerOrbit> orbit, const ForcingProfile& k,
                                        const Ansatz& ansatz, const ContractionOptions& options) {
    const FowlerParams& p = orbit->params();
    const bool ckn = p.problem == Problem::Ckn;
    if (ckn != (ansatz.kind == Ansatz::Kind::CknKernel))
        throw std::invalid_argument("CKN runs take the CKN ansatz and conformal runs do not");
    if (ckn && !k.components.empty()) throw std::invalid_argument("the CKN equation has no K factor");
    if (!ckn && std::abs(k.k0 - p.k0) > 1e-14 * p.k0) throw std::invalid_argument("K(0) differs from the orbit's K0");
    if (options.modes < 1 || options.modes > 64) throw std::invalid_argument("mode count must be in [1, 64]");
    for (const auto& c : k.components)
        if (c.degree >= options.modes) throw std::invalid_argument("K has a component above the retained modes");

    ContractionResult res;
    std::vector<ModeSpectrum> spectra(options.modes);
    parallel_for(options.modes, [&](std::size_t i) { spectra[i] = analyze_mode(orbit, static_cast<int>(i)); });
    const double sigma1 = options.modes > 1 && spectra[1].kernel ? spectra[1].kernel->sigma : 1.0;

    double beta = options.beta > 0.0 ? options.beta : (ckn ? ansatz.rate : k.flatness());
    if (!std::isfinite(beta)) beta = 2.0;
    res.beta = beta;
    res.weight = beta;
    if (beta < sigma1 - 1e-6) throw std::invalid_argument("decay rate must be at least the first mode exponent");
    InverseOptions inverse = options.inverse;
    for (const auto& s : spectra) {
        if (s.kernel && std::abs(s.kernel->sigma - beta) <= inverse.resonance_gap) {
            // resonant rate: solutions carry a power of t, so weigh with a slightly smaller rate
            res.weight = beta - 0.1;
            inverse.allow_resonant = true;
            res.warnings.push_back("resonant decay rate; weighted norm uses beta - 0.1");
            break;
        }
    }

    double t0 = options.t0;
    for (int attempt = 0; attempt <= options.max_doublings; ++attempt, t0 *= 2.0) {
        res.t0 = t0;
        res.doublings = attempt;
        res.trace.clear();
        res.converged = false;
        const TimeGrid grid = TimeGrid::window(t0, options.window, options.h);
        if (!ckn) k.require_positive(grid, p.n);
        const ApproximateSolution approx = build_ansatz(*orbit, ansatz, grid, options.modes);
        std::vector<std::unique_ptr<ModeInverse>> inv(options.modes);
        parallel_for(options.modes, [&](std::size_t i) {
            inv[i] = std::make_unique<ModeInverse>(spectra[i], grid, beta, inverse);
        });
        const ZonalTable quad = ZonalTable::gauss(p.n, options.modes);
        Eigen::MatrixXd kappa = Eigen::MatrixXd::Zero(grid.points, quad.size());
        Eigen::VectorXd xi(grid.points), xi_e(grid.points);
        for (int j = 0; j < grid.points; ++j) {
            if (!ckn)
                for (int i = 0; i < quad.size(); ++i) kappa(j, i) = k.relative(grid.t(j), quad.s[i], p.n);
            xi(j) = approx.value.coeff(0)(j);
            xi_e(j) = p.c * std::pow(xi(j), p.e);
        }

        CylinderField phi(p, grid, options.modes);
        bool failed = false;
        double last_diff = 0.0;
        for (int it = 1; it <= options.max_iterations; ++it) {
            // K w^e - A(v^) - e c xi^{e-1} phi with w = xi (1 + x)
            // = c xi^e [(1+x)^e - 1 - e x] + c kappa w^e - defect
            std::vector<Eigen::VectorXd> rhs(options.modes, Eigen::VectorXd(grid.points));
            Eigen::VectorXd f(quad.size());
            for (int j = 0; j < grid.points && !failed; ++j) {
                for (int i = 0; i < quad.size(); ++i) {
                    double pert = 0.0;
                    for (int m = 0; m < options.modes; ++m)
                        pert += (approx.perturbation.coeff(m)(j) + phi.coeff(m)(j)) * quad.z(m, i);
                    const double x = pert / xi(j);
                    if (!(x > -1.0)) {
                        failed = true;
                        break;
                    }
                    f(i) = xi_e(j) * nonlinear_remainder(x, p.e);
                    if (kappa(j, i) != 0.0) f(i) += kappa(j, i) * xi_e(j) * std::pow(1.0 + x, p.e);
                }
                if (failed) break;
                for (int m = 0; m < options.modes; ++m) rhs[m](j) = quad.project(m, f) - approx.defect.coeff(m)(j);
            }
            if (failed) {
                res.warnings.push_back("iterate lost positivity at t0 = " + std::to_string(t0));
                break;
            }
            CylinderField next(p, grid, options.modes);
            parallel_for(options.modes, [&](std::size_t m) { next.coeff(static_cast<int>(m)) = inv[m]->solve(rhs[m]); });
            IterationRecord rec;
            rec.iteration = it;
            rec.t0 = t0;
            rec.difference = (next - phi).weighted_norm(res.weight);
            rec.norm = next.weighted_norm(res.weight);
            rec.factor = it > 1 && last_diff > 0.0 ? rec.difference / last_diff : 0.0;
            res.trace.push_back(rec);
            phi = std::move(next);
            last_diff = rec.difference;
            if (rec.difference < options.tol) {
                res.converged = true;
                break;
            }
            if (it > 2 && rec.factor >= 1.0) {
                failed = true;
                break;
            }
        }
        if (res.converged) {
            res.phi = phi;
            res.approx = approx.value;
            res.v = approx.value + phi;
            res.final_factor = res.trace.size() > 1 ? res.trace.back().factor : 0.0;
            if (!(res.v.min_value() > 0.0)) {
                res.converged = false;
                res.warnings.push_back("constructed field is not positive");
            }
            return res;
        }
        if (!failed) {
            res.warnings.push_back("no convergence within the iteration cap at t0 = " + std::to_string(t0));
            res.phi = phi;
            res.approx = approx.value;
            res.v = approx.value + phi;
            res.final_factor = res.trace.empty() ? 0.0 : res.trace.back().factor;
            return res;
        }
        res.final_factor = res.trace.empty() ? 0.0 : res.trace.back().factor;
    }
    std::ostringstream os;
    os << "contraction failed after " << options.max_doublings << " doublings of t0; last factor " << res.final_factor;
    res.warnings.push_back(os.str());
    return res;
}

DecayModels decay_rate_fit(const CylinderField& diff, double t_begin, double t_end, const DecayFitOptions& options) {
    const TimeGrid& g = diff.grid();
    std::vector<double> t, y;
    for (int j = 0; j < g.points; ++j) {
        const double tj = g.t(j);
        if (tj < t_begin - 1e-12 || tj > t_end + 1e-12) continue;
        t.push_back(tj);
        y.push_back(diff.sup_theta(j));
    }
    if (t.size() < 8) throw std::invalid_argument("fit window holds fewer than 8 nodes");
    if (y.front() == 0.0) throw std::domain_error("difference vanishes on the fit window");
    return fit_decay_models(t, y, options);
}

double remark_u(const std::array<double, 4>& x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
    const double s = x[0] + x[1] + x[2] + x[3];
    return (1.0 + s * (1.0 - std::log(r)) / 16.0) / r;
}

double remark_k(const std::array<double, 4>& x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
    if (r == 0.0) return 1.0;
    const double s = x[0] + x[1] + x[2] + x[3];
    const double a = s * (1.0 - std::log(r)) / 16.0;
    return (1.0 + 3.0 * a + s / 8.0) / std::pow(1.0 + a, 3);
}

double remark_residual(const std::vector<std::array<double, 4>>& samples, double h, int* rejected) {
    double worst = 0.0;
    int skipped = 0;
    for (const auto& x : samples) {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
        if (r < 10.0 * h || r + 2.0 * h >= 1.0) {
            ++skipped;
            continue;
        }
        const double u = remark_u(x);
        double lap = 0.0;
        for (int i = 0; i < 4; ++i) {
            auto at = [&](double d) {
                auto y = x;
                y[i] += d;
                return remark_u(y);
            };
            lap += (-at(2 * h) + 16.0 * at(h) - 30.0 * u + 16.0 * at(-h) - at(-2 * h)) / (12.0 * h * h);
        }
        worst = std::max(worst, std::abs(-lap - remark_k(x) * u * u * u));
    }
    if (rejected) *rejected = skipped;
    if (skipped == static_cast<int>(samples.size())) throw std::domain_error("every sample was rejected");
    return worst;
}

RemarkCheck remark_example_check(const std::vector<std::array<double, 4>>& samples, double h) {
    RemarkCheck out;
    out.residual_h = remark_residual(samples, h, &out.rejected);
    out.residual_half = remark_residual(samples, 0.5 * h);
    out.accepted = static_cast<int>(samples.size()) - out.rejected;
    out.ratio = out.residual_h / out.residual_half;
    // one-sided difference quotients from the origin, Richardson-extrapolated
    const double d = 1e-5;
    for (int i = 0; i < 4; ++i) {
        auto quotient = [&](double step) {
            std::array<double, 4> x{};
            x[i] = step;
            return (remark_k(x) - 1.0) / step;
        };
        out.grad_k0[i] = 2.0 * quotient(0.5 * d) - quotient(d);
        out.grad_error = std::max(out.grad_error, std::abs(out.grad_k0[i] - 0.125));
    }
    return out;
}

std::vector<std::array<double, 4>> remark_samples(int count, double r_min, double r_max) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius(r_min, r_max);
    std::vector<std::array<double, 4>> out;
    for (int i = 0; i < count; ++i) {
        std::array<double, 4> x;
        double nn = 0.0;
        for (double& v : x) {
            v = normal(rng);
            nn += v * v;
        }
        const double r = radius(rng) / std::sqrt(nn);
        for (double& v : x) v *= r;
        out.push_back(x);
    }
    return out;
}

}  // namespace fowler_lab
