#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fowler_lab {

// Pole normalization gives Z_k(1) = 1. L2 normalization gives unit norm on S^{n-1}.
enum class Normalization { Pole, L2 };

struct HarmonicMode {
    int degree = 0;
    int dimension = 3;
    double eigenvalue = 0.0;
    std::vector<double> axis;  // unit vector in R^n, empty means e_1
    Normalization normalization = Normalization::Pole;

    static HarmonicMode zonal(int degree, int dimension, std::vector<double> axis = {},
                              Normalization norm = Normalization::Pole);
};

/// k(k+n-2), the Laplace-Beltrami eigenvalue on S^{n-1}.
double eigenvalue(int k, int n);

/// Dimension of the degree-k eigenspace on S^{n-1}.
std::int64_t multiplicity(int k, int n);

/// Degree of the flattened eigenfunction index i (0-based, multiplicities expanded).
int degree_of_index(std::int64_t index, int n);

/// Number of flattened eigenfunctions with degree <= k.
std::int64_t count_up_to_degree(int k, int n);

double sphere_area(int n);  // |S^{n-1}|

/// Zonal harmonic of degree k on S^{n-1} as a function of s = <axis, theta>, Z_k(1) = 1.
double eval_zonal(int k, int n, double s);
double eval_zonal_derivative(int k, int n, double s);
double eval_zonal(const HarmonicMode& mode, double s);
double eval_mode(const HarmonicMode& mode, std::span<const double> theta);

/// Integral of Z_k^2 over S^{n-1} in the pole normalization.
double zonal_norm_squared(int k, int n);

/// Multiplier turning a pole normalized zonal into the requested normalization.
double normalization_factor(int k, int n, Normalization norm);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // weight (1-s^2)^{(n-3)/2} on [-1,1]
};

QuadratureRule gauss_gegenbauer(int n, int count = 64);

/// Integral over S^{n-1} of a zonal function f(<e_1,theta>).
double integrate_zonal(const std::function<double(double)>& f, int n, const QuadratureRule& rule);

/// Coefficients c_k with f(s) ~ sum_k c_k Z_k(s), pole normalization.
std::vector<double> project_zonal(const std::function<double(double)>& f, int n, int max_degree,
                                  const QuadratureRule& rule);

/// (1-s^2) f'' - (n-1) s f', the spherical Laplacian of a zonal function.
double zonal_laplacian(const std::function<double(double)>& f, int n, double s, double h = 1e-4);

struct QuadraticDecomposition {
    double lhs = 0.0;        // <a,theta>^2
    double degree0 = 0.0;    // |a|^2 / n
    double degree2 = 0.0;    // coefficient multiplying Z_2(<a/|a|,theta>)
    double z2 = 0.0;
    double rhs = 0.0;
    double laplacian = 0.0;  // Delta_theta <a,theta>^2
    double laplacian_from_modes = 0.0;
};

/// <a,theta>^2 split into degree 0 and 2 parts. theta must be a unit vector.
QuadraticDecomposition degree1_quadratic_identity(std::span<const double> a,
                                                  std::span<const double> theta);

}  // namespace fowler_lab
