#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace fowler_lab {

/// Real T-periodic function stored as N uniform samples on [0, T).
/// Evaluation off the grid is trigonometric interpolation.
class PeriodicFunction {
public:
    PeriodicFunction() = default;
    PeriodicFunction(double period, Eigen::VectorXd samples);

    template <class F>
    static PeriodicFunction from_callable(double period, int count, F&& f) {
        Eigen::VectorXd v(count);
        for (int i = 0; i < count; ++i) v(i) = f(period * i / count);
        return PeriodicFunction(period, std::move(v));
    }

    double period() const { return period_; }
    int size() const { return static_cast<int>(samples_.size()); }
    double node(int i) const { return period_ * i / size(); }
    const Eigen::VectorXd& samples() const { return samples_; }

    double operator()(double t) const;
    PeriodicFunction derivative(int order = 1) const;
    PeriodicFunction resampled(int count) const;
    /// Largest wavenumber whose coefficient exceeds rel_tol times the largest one.
    int bandwidth(double rel_tol) const;
    /// Resampled to the smallest power of two (>= min_count) holding the bandwidth three times over.
    PeriodicFunction compressed(double rel_tol = 1e-13, int min_count = 64) const;

    /// max |f| over the samples
    double sup_norm() const { return samples_.size() ? samples_.cwiseAbs().maxCoeff() : 0.0; }
    /// (1/T) int_0^T f g dt by the trapezoid rule, which is spectrally accurate here.
    double mean_product(const PeriodicFunction& other) const;

    PeriodicFunction operator+(const PeriodicFunction& o) const;
    PeriodicFunction operator-(const PeriodicFunction& o) const;
    PeriodicFunction operator*(double c) const;
    PeriodicFunction pointwise_product(const PeriodicFunction& o) const;

private:
    void require_compatible(const PeriodicFunction& o) const;

    double period_ = 1.0;
    Eigen::VectorXd samples_;
    std::vector<std::complex<double>> spectrum_;  // FFT of samples, computed once
};

/// Fourier differentiation matrix of the given order (1 or 2) on N uniform nodes over one period.
Eigen::MatrixXd fourier_differentiation_matrix(int count, double period, int order);

}  // namespace fowler_lab
