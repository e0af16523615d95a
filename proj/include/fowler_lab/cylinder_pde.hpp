#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fowler_lab/decay_fit.hpp"
#include "fowler_lab/expansion.hpp"
#include "fowler_lab/floquet.hpp"
#include "fowler_lab/fowler.hpp"
#include "fowler_lab/sphere_harmonics.hpp"

namespace fowler_lab {

/// Uniform nodes t0, t0 + h, ..., t0 + (points - 1) h.
struct TimeGrid {
    double t0 = 0.0;
    double h = 1.0 / 64.0;
    int points = 0;

    static TimeGrid window(double t0, double length, double h);
    double t(int j) const { return t0 + h * j; }
    double end() const { return t(points - 1); }
};

/// Zonal field on [t0, T] x S^{n-1}: sum_k c_k(t) Z_k(<e_1, theta>), Z_k pole-normalized.
class CylinderField {
public:
    CylinderField() = default;
    CylinderField(FowlerParams params, TimeGrid grid, int modes);

    /// Projects f(t, s) onto the retained modes at every node.
    static CylinderField from_function(const FowlerParams& params, const TimeGrid& grid, int modes,
                                       const std::function<double(double, double)>& f);
    /// xi(t) in mode 0.
    static CylinderField lift(const FowlerOrbit& orbit, const TimeGrid& grid, int modes);

    const FowlerParams& params() const { return params_; }
    const TimeGrid& grid() const { return grid_; }
    int modes() const { return static_cast<int>(coeffs_.size()); }
    int points() const { return grid_.points; }
    HarmonicMode mode(int k) const;

    Eigen::VectorXd& coeff(int k) { return coeffs_.at(k); }
    const Eigen::VectorXd& coeff(int k) const { return coeffs_.at(k); }

    double value(int j, double s) const;
    double value(int j, std::span<const double> theta) const;
    /// max over s in [-1, 1] of |field(t_j, s)|
    double sup_theta(int j) const;
    /// max over nodes j in [skip, points - skip) of sup_theta(j)
    double sup_norm(int skip = 0) const;
    /// max over nodes of e^{beta t} sup_theta
    double weighted_norm(double beta) const;
    double min_value() const;

    CylinderField operator+(const CylinderField& o) const;
    CylinderField operator-(const CylinderField& o) const;

private:
    void require_compatible(const CylinderField& o) const;

    FowlerParams params_;
    TimeGrid grid_;
    std::vector<Eigen::VectorXd> coeffs_;
};

/// K(t, s) = k0 (1 + sum kappa_k e^{-beta_k t} Z_k(s)).
struct ForcingProfile {
    struct Component {
        int degree = 1;
        double amplitude = 0.0;
        double rate = 2.0;
    };
    double k0 = 1.0;
    std::vector<Component> components;

    static ForcingProfile flat(double k0) { return {k0, {}}; }
    double value(double t, double s, int n) const;
    /// K / k0 - 1
    double relative(double t, double s, int n) const;
    /// min of the rates; +inf when there are no components
    double flatness() const;
    /// Throws domain_error unless K > 0 on the grid (checked on a fine s-grid).
    void require_positive(const TimeGrid& grid, int n) const;
};

/// -f_tt - Delta f + q f - K f^e for the conformal problem.
CylinderField residual_M(const CylinderField& field, const ForcingProfile& k);
/// -f_tt - Delta f + q f - f^{p-1} for the CKN problem.
CylinderField residual_N(const CylinderField& field);

/// Two nodes at each end use one-sided differences; measure convergence away from them.
inline constexpr int residual_boundary_points = 2;

struct InverseOptions {
    double resonance_gap = 1e-6;
    int collocation = 128;
    /// Accept beta at a mode exponent: march back from the t-power particular solution.
    bool allow_resonant = false;
    /// Decay rate of the rhs near the end of the window; 0 estimates it from the rhs.
    /// With a fixed rate the inverse is exactly linear.
    double terminal_rate = 0.0;
};

struct InverseInfo {
    bool fast = false;  // sigma > beta: boundary value solve; otherwise backward marching
    bool asymptotic = false;  // terminal data from an asymptotic particular solution
    double gamma_hat = 0.0;
    std::vector<std::string> warnings;
};

/// Discrete inverse of L_i = -d^2/dt^2 + V_i on one grid, factorized once.
class ModeInverse {
public:
    ModeInverse(ModeSpectrum spectrum, TimeGrid grid, double beta, InverseOptions options = {});

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs, InverseInfo* info = nullptr) const;
    bool fast() const { return fast_; }
    const ModeSpectrum& spectrum() const { return spectrum_; }

private:
    struct Asymptotic {
        bool ok = false;
        double gamma = 0.0;
        ResonantSolution sol;
    };
    Asymptotic asymptotic(const Eigen::VectorXd& rhs, std::vector<std::string>& warnings) const;

    ModeSpectrum spectrum_;
    TimeGrid grid_;
    double beta_;
    InverseOptions options_;
    bool fast_ = false;
    Eigen::VectorXd potential_;
    struct Factor;
    std::shared_ptr<Factor> factor_;
};

Eigen::VectorXd inverse_L(const ModeSpectrum& spectrum, const Eigen::VectorXd& rhs, const TimeGrid& grid, double beta,
                          const InverseOptions& options = {});

/// (1 + x)^e - 1 - e x without cancellation for small x.
double nonlinear_remainder(double x, double e);

/// Approximate solution v^ whose mismatch the contraction corrects.
struct Ansatz {
    enum class Kind { Orbit, OrbitPlusKernel, CknKernel };
    Kind kind = Kind::Orbit;
    double amplitude = 0.0;  // delta
    double rate = 1.0;  // nu for CknKernel
};

/// v^ = xi + psi. The defect is (-d_tt - Delta + q) v^ - c xi^e - e c xi^{e-1} psi, evaluated analytically
/// so the fixed-point map never differences the orbit numerically.
struct ApproximateSolution {
    CylinderField value;
    CylinderField perturbation;  // psi
    CylinderField defect;
};

ApproximateSolution build_ansatz(const FowlerOrbit& orbit, const Ansatz& ansatz, const TimeGrid& grid, int modes);

struct ContractionOptions {
    double t0 = 2.0;
    double window = 12.0;
    double h = 1.0 / 64.0;
    int modes = 4;
    double tol = 1e-10;
    int max_iterations = 60;
    int max_doublings = 4;
    double beta = 0.0;  // weight rate; 0 takes the flatness of K (or the ansatz rate for CKN)
    InverseOptions inverse;
};

struct IterationRecord {
    int iteration = 0;
    double t0 = 0.0;
    double norm = 0.0;  // weighted norm of phi
    double difference = 0.0;  // weighted norm of phi_m - phi_{m-1}
    double factor = 0.0;  // difference ratio; 0 for the first step
};

struct ContractionResult {
    CylinderField v;
    CylinderField phi;
    CylinderField approx;
    double t0 = 0.0;
    double beta = 0.0;
    double weight = 0.0;  // rate used in the weighted norm
    bool converged = false;
    double final_factor = 0.0;
    int doublings = 0;
    std::vector<IterationRecord> trace;
    std::vector<std::string> warnings;
};

ContractionResult contraction_construct(std::shared_ptr<const FowlerOrbit> orbit, const ForcingProfile& k,
                                        const Ansatz& ansatz, const ContractionOptions& options = {});

/// Slope of log sup_theta |diff| on [t_begin, t_end], with and without a log t term.
DecayModels decay_rate_fit(const CylinderField& diff, double t_begin, double t_end,
                           const DecayFitOptions& options = {});

double remark_u(const std::array<double, 4>& x);
double remark_k(const std::array<double, 4>& x);

struct RemarkCheck {
    double residual_h = 0.0;
    double residual_half = 0.0;
    double ratio = 0.0;
    std::array<double, 4> grad_k0{};
    double grad_error = 0.0;  // max |dK/dx_i(0) - 1/8|
    int accepted = 0;
    int rejected = 0;
};

/// max over samples of |-Delta u - K u^3| with a 4th-order Laplacian of step h.
double remark_residual(const std::vector<std::array<double, 4>>& samples, double h, int* rejected = nullptr);
RemarkCheck remark_example_check(const std::vector<std::array<double, 4>>& samples, double h = 0.02);
/// Deterministic points with |x| in [r_min, r_max].
std::vector<std::array<double, 4>> remark_samples(int count, double r_min = 0.2, double r_max = 0.7);

}  // namespace fowler_lab
