#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fowler_lab/fowler.hpp"
#include "fowler_lab/periodic.hpp"

namespace fowler_lab {

/// L_i = -d^2/dt^2 + V_i(t) with V_i = lambda_i + q - e c xi^{e-1}.
struct ModeOperator {
    std::shared_ptr<const FowlerOrbit> orbit;
    int degree = 0;
    double lambda = 0.0;

    static ModeOperator make(std::shared_ptr<const FowlerOrbit> orbit, int degree);
    double potential(double t) const;
    double period() const { return orbit->period(); }
};

struct Monodromy {
    Eigen::Matrix2d matrix;
    double determinant = 1.0;  // product of per-segment determinants
    int segments = 1;
};

struct FloquetSettings {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double classify_tol = 1e-7;
    double max_segment_growth = 8.0;  // bound on sqrt(max|V|) * segment length
};

Monodromy monodromy(const ModeOperator& op, const FloquetSettings& settings = {});

enum class FloquetType { I, II, III, IV, V };

std::string to_string(FloquetType type);

struct FloquetDatum {
    FloquetType type = FloquetType::III;
    double trace = 2.0;
    double exponent = 0.0;  // sigma for type III
    double rotation = 0.0;  // omega for type IV
    double multiplier = 1.0;  // larger eigenvalue for type III, signed
    std::vector<std::string> warnings;
};

FloquetDatum classify(const Monodromy& m, double period, double tol = 1e-7);

/// q^+ (decaying, h = e^{-sigma t} q^+) and q^- (growing, h = e^{sigma t} q^-)
/// normalized to q(0) = 1, with first derivatives.
struct KernelBasis {
    PeriodicFunction q_plus;
    PeriodicFunction q_plus_prime;
    PeriodicFunction q_minus;
    PeriodicFunction q_minus_prime;
    double sigma = 0.0;
    double periodicity_defect = 0.0;
    bool antiperiodic = false;  // negative multiplier, factors flip sign over one period
};

KernelBasis kernel_basis(const ModeOperator& op, const Monodromy& m, const FloquetDatum& datum,
                         const FloquetSettings& settings = {});

/// One degree's operator together with its Floquet data and, for type III, its kernel.
struct ModeSpectrum {
    ModeOperator op;
    Monodromy mono;
    FloquetDatum datum;
    std::optional<KernelBasis> kernel;
};

ModeSpectrum analyze_mode(std::shared_ptr<const FowlerOrbit> orbit, int degree, const FloquetSettings& settings = {});

struct ExponentEntry {
    int index = 1;  // flattened eigenfunction index, starting at 1
    int degree = 1;
    double lambda = 0.0;
    double sigma = 0.0;
    FloquetType type = FloquetType::III;
};

/// rho_1 <= rho_2 <= ... for eigenfunction indices 1..count, one Floquet solve per degree.
/// Throws std::domain_error if some retained degree is not hyperbolic.
std::vector<ExponentEntry> exponent_sequence(std::shared_ptr<const FowlerOrbit> orbit, int count,
                                             const FloquetSettings& settings = {});

/// sqrt(lambda + q(1 - e)), the exponent of a mode about the constant solution.
double constant_orbit_exponent(double lambda, const FowlerParams& params);

struct BoundEntry {
    int index = 0;
    double lambda = 0.0;
    double rho_squared = 0.0;
    double bound = 0.0;
    double margin = 0.0;
};

struct BoundReport {
    std::vector<BoundEntry> entries;
    bool passed = true;
    std::vector<std::string> failures;
};

/// rho_i^2 > lambda_i - (3n-2)/2 for nonconstant orbits; equality with the explicit
/// formula for the constant orbit.
BoundReport lower_bound_check(const std::vector<ExponentEntry>& sequence, const FowlerOrbit& orbit,
                              double tol = 1e-9);

/// L_0 xi' computed by spectral differentiation; vanishes when xi solves the equation.
double translation_kernel_residual(const FowlerOrbit& orbit);

}  // namespace fowler_lab
