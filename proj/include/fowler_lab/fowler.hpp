#pragma once

#include <string>
#include <vector>

#include "fowler_lab/periodic.hpp"

namespace fowler_lab {

enum class Problem { Conformal, Ckn };

/// Autonomous Fowler equation xi'' = q xi - c xi^e on the cylinder R x S^{n-1}.
struct FowlerParams {
    Problem problem = Problem::Conformal;
    int n = 3;
    double q = 0.25;   // first-order coefficient
    double c = 1.0;    // nonlinear coefficient
    double e = 5.0;    // nonlinear exponent
    double k0 = 1.0;   // conformal: K0
    double a = 0.0;    // CKN weights
    double b = 0.0;

    static FowlerParams conformal(int n, double k0 = 1.0);
    static FowlerParams ckn(int n, double a, double b);

    /// CKN critical exponent p = 2n / (n - 2 + 2(b - a)); conformal returns e + 1.
    double p() const;
    std::string describe() const;
};

double constant_solution(const FowlerParams& params);
double potential(double xi, const FowlerParams& params);
double hamiltonian(double xi, double xi_prime, const FowlerParams& params);
double rhs_second_derivative(double xi, const FowlerParams& params);

/// Largest xi on the level set through (eps, 0).
double max_value(double eps, const FowlerParams& params);

/// Period of the orbit through (eps, 0) by quadrature of the energy integral.
double period_quadrature(double eps, const FowlerParams& params);

struct OrbitOptions {
    int samples = 2048;          // per period
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double event_tol = 1e-12;    // half-period location
    double constant_period = 1.0;  // reference period for the constant orbit
};

/// Sampled positive periodic solution. Off-grid values use quintic Hermite
/// interpolation with xi'' taken from the equation.
class FowlerOrbit {
public:
    FowlerOrbit() = default;
    FowlerOrbit(FowlerParams params, double epsilon, double period, bool constant, std::vector<double> xi,
                std::vector<double> xi_prime);

    const FowlerParams& params() const { return params_; }
    double epsilon() const { return epsilon_; }
    double period() const { return period_; }
    bool is_constant() const { return constant_; }
    int samples() const { return static_cast<int>(xi_.size()) - 1; }

    double energy() const;
    double max_energy_drift() const;
    double max_value() const;
    /// |xi(T) - xi(0)| + |xi'(T) - xi'(0)|
    double closure_defect() const;
    /// max |xi(t) - xi(T - t)| over the grid
    double symmetry_defect() const;

    double time(int i) const { return period_ * i / samples(); }
    const std::vector<double>& xi_samples() const { return xi_; }
    const std::vector<double>& xi_prime_samples() const { return xi_prime_; }

    double value(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;

    PeriodicFunction xi_function() const;
    PeriodicFunction xi_prime_function() const;

private:
    struct Local {
        int i;
        double h;
        double s;
    };
    Local locate(double t) const;

    FowlerParams params_;
    double epsilon_ = 0.0;
    double period_ = 1.0;
    bool constant_ = false;
    std::vector<double> xi_;
    std::vector<double> xi_prime_;
};

/// Positive periodic solution with min xi = eps. eps equal to the constant solution
/// (within 1e-14 relative) returns the constant orbit.
FowlerOrbit periodic_orbit(double eps, const FowlerParams& params, const OrbitOptions& options = {});
FowlerOrbit constant_orbit(const FowlerParams& params, const OrbitOptions& options = {});

}  // namespace fowler_lab
