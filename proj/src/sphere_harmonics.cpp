#include "fowler_lab/sphere_harmonics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fowler_lab {

namespace {

void require_dimension(int n) {
    if (n < 3) throw std::invalid_argument("sphere dimension n must be >= 3, got " + std::to_string(n));
}

void require_degree(int k) {
    if (k < 0) throw std::invalid_argument("harmonic degree must be >= 0, got " + std::to_string(k));
}

std::int64_t binomial(std::int64_t m, std::int64_t r) {
    if (r < 0 || m < 0 || r > m) return 0;
    r = std::min(r, m - r);
    std::int64_t out = 1;
    for (std::int64_t i = 1; i <= r; ++i) out = out * (m - r + i) / i;
    return out;
}

}  // namespace

HarmonicMode HarmonicMode::zonal(int degree, int dimension, std::vector<double> axis, Normalization norm) {
    require_dimension(dimension);
    require_degree(degree);
    if (!axis.empty()) {
        if (static_cast<int>(axis.size()) != dimension)
            throw std::invalid_argument("axis length must equal the dimension n");
        double r = 0.0;
        for (double x : axis) r += x * x;
        r = std::sqrt(r);
        if (r == 0.0) throw std::invalid_argument("axis must be nonzero");
        for (double& x : axis) x /= r;
    }
    return HarmonicMode{degree, dimension, fowler_lab::eigenvalue(degree, dimension), std::move(axis), norm};
}

double eigenvalue(int k, int n) {
    require_dimension(n);
    require_degree(k);
    return static_cast<double>(k) * static_cast<double>(k + n - 2);
}

std::int64_t multiplicity(int k, int n) {
    require_dimension(n);
    require_degree(k);
    return binomial(k + n - 1, n - 1) - binomial(k + n - 3, n - 1);
}

std::int64_t count_up_to_degree(int k, int n) {
    std::int64_t total = 0;
    for (int j = 0; j <= k; ++j) total += multiplicity(j, n);
    return total;
}

int degree_of_index(std::int64_t index, int n) {
    if (index < 0) throw std::invalid_argument("eigenfunction index must be >= 0");
    int k = 0;
    std::int64_t seen = multiplicity(0, n);
    while (index >= seen) seen += multiplicity(++k, n);
    return k;
}

double sphere_area(int n) {
    if (n < 1) throw std::invalid_argument("sphere_area needs n >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double eval_zonal(int k, int n, double s) {
    require_dimension(n);
    require_degree(k);
    if (k == 0) return 1.0;
    double p0 = 1.0, p1 = s;
    for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j + n - 4) * s * p1 - (j - 1.0) * p0) / (j + n - 3.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double eval_zonal_derivative(int k, int n, double s) {
    require_dimension(n);
    require_degree(k);
    if (k == 0) return 0.0;
    double p0 = 1.0, p1 = s, d0 = 0.0, d1 = 1.0;
    for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j + n - 4) * s * p1 - (j - 1.0) * p0) / (j + n - 3.0);
        double d2 = ((2.0 * j + n - 4) * (p1 + s * d1) - (j - 1.0) * d0) / (j + n - 3.0);
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return d1;
}

double eval_zonal(const HarmonicMode& mode, double s) {
    return normalization_factor(mode.degree, mode.dimension, mode.normalization) *
           eval_zonal(mode.degree, mode.dimension, s);
}

double eval_mode(const HarmonicMode& mode, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != mode.dimension)
        throw std::invalid_argument("theta length must equal the dimension n");
    double s = 0.0;
    if (mode.axis.empty()) {
        s = theta[0];
    } else {
        for (int i = 0; i < mode.dimension; ++i) s += mode.axis[i] * theta[i];
    }
    return eval_zonal(mode, s);
}

double zonal_norm_squared(int k, int n) {
    return sphere_area(n) / static_cast<double>(multiplicity(k, n));
}

double normalization_factor(int k, int n, Normalization norm) {
    if (norm == Normalization::Pole) return 1.0;
    return 1.0 / std::sqrt(zonal_norm_squared(k, n));
}

QuadratureRule gauss_gegenbauer(int n, int count) {
    require_dimension(n);
    if (count < 1) throw std::invalid_argument("quadrature needs at least one node");
    const double a = 0.5 * (n - 3);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
    for (int k = 1; k < count; ++k) {
        double b = k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0));
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    const double mu0 = std::exp(0.5 * std::log(std::numbers::pi) + std::lgamma(a + 1.0) - std::lgamma(a + 1.5));
    QuadratureRule rule;
    rule.nodes.resize(count);
    rule.weights.resize(count);
    for (int i = 0; i < count; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        double v = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v * v;
    }
    return rule;
}

double integrate_zonal(const std::function<double(double)>& f, int n, const QuadratureRule& rule) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sphere_area(n - 1) * sum;
}

std::vector<double> project_zonal(const std::function<double(double)>& f, int n, int max_degree,
                                  const QuadratureRule& rule) {
    require_dimension(n);
    require_degree(max_degree);
    std::vector<double> values(rule.nodes.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(rule.nodes[i]);
    std::vector<double> coeffs(max_degree + 1, 0.0);
    for (int k = 0; k <= max_degree; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            double z = eval_zonal(k, n, rule.nodes[i]);
            num += rule.weights[i] * values[i] * z;
            den += rule.weights[i] * z * z;
        }
        coeffs[k] = num / den;
    }
    return coeffs;
}

double zonal_laplacian(const std::function<double(double)>& f, int n, double s, double h) {
    double fp = (f(s + h) - f(s - h)) / (2.0 * h);
    double fpp = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
    return (1.0 - s * s) * fpp - (n - 1.0) * s * fp;
}

QuadraticDecomposition degree1_quadratic_identity(std::span<const double> a, std::span<const double> theta) {
    const int n = static_cast<int>(a.size());
    require_dimension(n);
    if (theta.size() != a.size()) throw std::invalid_argument("a and theta must have the same length");
    double norm_theta = 0.0, a2 = 0.0, dot = 0.0;
    for (int i = 0; i < n; ++i) {
        norm_theta += theta[i] * theta[i];
        a2 += a[i] * a[i];
        dot += a[i] * theta[i];
    }
    if (std::abs(std::sqrt(norm_theta) - 1.0) > 1e-12) throw std::invalid_argument("theta must be a unit vector");
    QuadraticDecomposition out;
    out.lhs = dot * dot;
    out.degree0 = a2 / n;
    out.degree2 = a2 * (n - 1.0) / n;
    double s = a2 > 0.0 ? dot / std::sqrt(a2) : 1.0;
    out.z2 = eval_zonal(2, n, s);
    out.rhs = out.degree0 + out.degree2 * out.z2;
    out.laplacian = 2.0 * a2 - 2.0 * n * dot * dot;
    out.laplacian_from_modes = -2.0 * (n - 1.0) * a2 * out.z2;
    return out;
}

}  // namespace fowler_lab
