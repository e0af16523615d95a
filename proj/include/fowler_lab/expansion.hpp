#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fowler_lab/decay_fit.hpp"
#include "fowler_lab/floquet.hpp"
#include "fowler_lab/fowler.hpp"
#include "fowler_lab/periodic.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

namespace fowler_lab {

/// c(t) t^j e^{-mu t} X(theta) with c periodic.
struct ExpansionTerm {
    double exponent = 0.0;
    int t_power = 0;
    PeriodicFunction coeff;
    HarmonicMode mode;
    std::string label;

    double evaluate(double t, std::span<const double> theta) const;
    /// Value at s = <axis, theta>.
    double evaluate_zonal(double t, double s) const;
};

/// |theta - e^{-t} a|^{-(n-2)/2} xi(t + ln|theta - e^{-t} a|), defined for t > ln|a|.
double exact_translate(const FowlerOrbit& orbit, std::span<const double> a, double t, std::span<const double> theta);

/// Same with theta = s a/|a| + sqrt(1-s^2) e for a unit e orthogonal to a.
double exact_translate_zonal(const FowlerOrbit& orbit, double a_norm, double t, double s);

/// Terms of the e^{-t} expansion of the translate through the given order (1 or 2).
std::vector<ExpansionTerm> translate_expansion(const FowlerOrbit& orbit, std::span<const double> a, int order);

struct Xi2Terms {
    ExpansionTerm degree0;
    ExpansionTerm degree2;
    std::vector<std::string> warnings;
};

/// Second-order term for the degree-one harmonic Y(theta) = <y, theta>.
Xi2Terms xi2_term(const FowlerOrbit& orbit, std::span<const double> y);

struct Xi2Check {
    double residual_degree0 = 0.0;
    double residual_degree2 = 0.0;
    double max_residual() const { return std::max(residual_degree0, residual_degree2); }
};

/// Mode-wise sup of L(xi_2) minus its closed-form right side, using spectral derivatives.
Xi2Check verify_xi2_identity(const FowlerOrbit& orbit, std::span<const double> y);

struct ResonantOptions {
    int collocation = 256;
    double resonance_tol = 1e-8;
};

struct ResonantSolution {
    std::vector<PeriodicFunction> r;  // r[j] multiplies t^j
    std::vector<PeriodicFunction> r_prime;
    int max_power = 0;
    bool resonant = false;
    double mu = 0.0;
    double residual = 0.0;  // relative, on a grid twice as fine
    std::vector<std::string> warnings;

    /// e^{-mu t} sum_j t^j r_j(t)
    double evaluate(double t) const;
    double evaluate_derivative(double t) const;
};

/// Particular solution of L_i phi = a(t) t^m e^{-mu t} of the form e^{-mu t} sum_j t^j r_j(t).
ResonantSolution solve_resonant_mode(const PeriodicFunction& forcing, double mu, int m, const ModeSpectrum& spectrum,
                                     const ResonantOptions& options = {});

struct RemainderFit {
    DecayFit fit;
    std::vector<double> t;
    std::vector<double> remainder;  // sup over theta
};

/// Fitted decay of |xi_a - xi - terms through order| on [t_begin, t_end].
RemainderFit translate_remainder_fit(const FowlerOrbit& orbit, double a_norm, int order, double t_begin = 5.0,
                                     double t_end = 12.0, int samples = 281);

}  // namespace fowler_lab
