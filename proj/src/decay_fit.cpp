#include "fowler_lab/decay_fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fowler_lab {

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, bool with_log_t,
                   const DecayFitOptions& options) {
    if (t.size() != y.size()) throw std::invalid_argument("fit needs matching t and y");
    DecayFit fit;
    fit.log_model = with_log_t;
    std::size_t count = 0;
    while (count < y.size() && y[count] > options.floor && std::isfinite(y[count])) ++count;
    if (count < y.size()) {
        std::ostringstream os;
        os << "window shortened at t=" << t[count] << ": value below floor " << options.floor;
        fit.warnings.push_back(os.str());
    }
    if (with_log_t && count > 0 && t.front() <= 0.0) throw std::invalid_argument("log t model needs t > 0");
    int harmonics = options.period > 0.0 ? options.harmonics : 0;
    if (harmonics > 0 && count > 0 && t[count - 1] - t.front() < options.period) {
        fit.warnings.push_back("window shorter than one period; harmonic terms dropped");
        harmonics = 0;
    }
    const int cols = 2 + (with_log_t ? 1 : 0) + 2 * harmonics;
    if (static_cast<int>(count) < cols + 2) throw std::domain_error("too few samples above the floor to fit a decay rate");

    Eigen::MatrixXd a(count, cols);
    Eigen::VectorXd b(count);
    for (std::size_t i = 0; i < count; ++i) {
        int c = 0;
        a(i, c++) = 1.0;
        a(i, c++) = t[i];
        if (with_log_t) a(i, c++) = std::log(t[i]);
        for (int k = 1; k <= harmonics; ++k) {
            const double w = 2.0 * std::numbers::pi * k / options.period;
            a(i, c++) = std::cos(w * t[i]);
            a(i, c++) = std::sin(w * t[i]);
        }
        b(i) = std::log(y[i]);
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    Eigen::VectorXd r = a * x - b;
    const double mean = b.mean();
    const double ss_tot = (b.array() - mean).square().sum();
    fit.intercept = x(0);
    fit.rate = -x(1);
    fit.log_coefficient = with_log_t ? x(2) : 0.0;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - r.squaredNorm() / ss_tot : 1.0;
    fit.rms_residual = std::sqrt(r.squaredNorm() / count);
    fit.points = static_cast<int>(count);
    fit.t_begin = t.front();
    fit.t_end = t[count - 1];
    return fit;
}

DecayModels fit_decay_models(const std::vector<double>& t, const std::vector<double>& y,
                             const DecayFitOptions& options, double improvement) {
    DecayModels m;
    m.plain = fit_decay(t, y, false, options);
    m.with_log = fit_decay(t, y, true, options);
    const double miss_plain = 1.0 - m.plain.r_squared;
    const double miss_log = 1.0 - m.with_log.r_squared;
    m.prefers_log = m.with_log.log_coefficient > 0.0 && miss_plain > improvement * std::max(miss_log, 1e-300) &&
                    miss_plain > 1e-20;
    return m;
}

}  // namespace fowler_lab
