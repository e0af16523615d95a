#include "fowler_lab/periodic.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fowler_lab {

namespace {

std::vector<std::complex<double>> forward_fft(const Eigen::VectorXd& v) {
    Eigen::FFT<double> fft;
    std::vector<double> in(v.data(), v.data() + v.size());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    return out;
}

Eigen::VectorXd inverse_fft(const std::vector<std::complex<double>>& spec) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.inv(out, spec);
    Eigen::VectorXd v(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) v(i) = out[i].real();
    return v;
}

// Signed wavenumber of FFT bin j for N samples.
int wavenumber(int j, int count) { return j <= count / 2 ? j : j - count; }

}  // namespace

PeriodicFunction::PeriodicFunction(double period, Eigen::VectorXd samples)
    : period_(period), samples_(std::move(samples)) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) throw std::invalid_argument("period must be positive and finite");
    if (samples_.size() < 2) throw std::invalid_argument("periodic function needs at least two samples");
    spectrum_ = forward_fft(samples_);
}

double PeriodicFunction::operator()(double t) const {
    const int n = size();
    const double w = 2.0 * std::numbers::pi / period_;
    double sum = spectrum_[0].real();
    for (int j = 1; j < (n + 1) / 2; ++j) {
        std::complex<double> e = std::polar(1.0, w * j * t);
        sum += 2.0 * (spectrum_[j] * e).real();
    }
    if (n % 2 == 0) sum += spectrum_[n / 2].real() * std::cos(w * (n / 2) * t);
    return sum / n;
}

PeriodicFunction PeriodicFunction::derivative(int order) const {
    if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
    const int n = size();
    const double w = 2.0 * std::numbers::pi / period_;
    std::vector<std::complex<double>> spec = spectrum_;
    for (int j = 0; j < n; ++j) {
        int k = wavenumber(j, n);
        if (n % 2 == 0 && j == n / 2 && order % 2 == 1) {
            spec[j] = 0.0;
            continue;
        }
        spec[j] *= std::pow(std::complex<double>(0.0, w * k), order);
    }
    return PeriodicFunction(period_, inverse_fft(spec));
}

PeriodicFunction PeriodicFunction::resampled(int count) const {
    if (count < 2) throw std::invalid_argument("resample needs at least two samples");
    const int n = size();
    const double scale = static_cast<double>(count) / n;
    std::vector<std::complex<double>> spec(count, 0.0);
    auto bin = [count](int k) { return k >= 0 ? k : count + k; };
    for (int j = 0; j < n; ++j) {
        const int k = wavenumber(j, n);
        const std::complex<double> v = spectrum_[j] * scale;
        if (count > n) {
            if (n % 2 == 0 && 2 * std::abs(k) == n) {
                spec[bin(k)] += 0.5 * v;
                spec[bin(-k)] += 0.5 * v;
            } else {
                spec[bin(k)] += v;
            }
        } else if (2 * std::abs(k) < count) {
            spec[bin(k)] += v;
        } else if (count % 2 == 0 && 2 * std::abs(k) == count) {
            spec[count / 2] += v;
        }
    }
    return PeriodicFunction(period_, inverse_fft(spec));
}

int PeriodicFunction::bandwidth(double rel_tol) const {
    const int n = size();
    double top = 0.0;
    for (const auto& c : spectrum_) top = std::max(top, std::abs(c));
    int k = 0;
    for (int j = 0; j < n; ++j)
        if (std::abs(spectrum_[j]) > rel_tol * top) k = std::max(k, std::abs(wavenumber(j, n)));
    return k;
}

PeriodicFunction PeriodicFunction::compressed(double rel_tol, int min_count) const {
    const int need = 3 * (bandwidth(rel_tol) + 1);
    int count = std::max(2, min_count);
    while (count < need) count *= 2;
    return count >= size() ? *this : resampled(count);
}

double PeriodicFunction::mean_product(const PeriodicFunction& other) const {
    require_compatible(other);
    return samples_.dot(other.samples_) / size();
}

void PeriodicFunction::require_compatible(const PeriodicFunction& o) const {
    if (o.size() != size() || std::abs(o.period_ - period_) > 1e-12 * period_)
        throw std::invalid_argument("periodic functions sampled on different grids");
}

PeriodicFunction PeriodicFunction::operator+(const PeriodicFunction& o) const {
    require_compatible(o);
    return PeriodicFunction(period_, samples_ + o.samples_);
}

PeriodicFunction PeriodicFunction::operator-(const PeriodicFunction& o) const {
    require_compatible(o);
    return PeriodicFunction(period_, samples_ - o.samples_);
}

PeriodicFunction PeriodicFunction::operator*(double c) const { return PeriodicFunction(period_, samples_ * c); }

PeriodicFunction PeriodicFunction::pointwise_product(const PeriodicFunction& o) const {
    require_compatible(o);
    return PeriodicFunction(period_, samples_.cwiseProduct(o.samples_));
}

Eigen::MatrixXd fourier_differentiation_matrix(int count, double period, int order) {
    if (count < 2 || count % 2 != 0) throw std::invalid_argument("differentiation matrix needs an even node count");
    if (order != 1 && order != 2) throw std::invalid_argument("differentiation order must be 1 or 2");
    const double h = 2.0 * std::numbers::pi / count;
    const double scale = 2.0 * std::numbers::pi / period;
    Eigen::MatrixXd d(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            int m = i - j;
            double sign = (m % 2 == 0) ? 1.0 : -1.0;
            if (order == 1) {
                d(i, j) = m == 0 ? 0.0 : 0.5 * sign / std::tan(0.5 * m * h);
            } else if (m == 0) {
                d(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
            } else {
                double sn = std::sin(0.5 * m * h);
                d(i, j) = -0.5 * sign / (sn * sn);
            }
        }
    }
    return order == 1 ? Eigen::MatrixXd(d * scale) : Eigen::MatrixXd(d * scale * scale);
}

}  // namespace fowler_lab
