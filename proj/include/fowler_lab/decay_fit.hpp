#pragma once

#include <string>
#include <vector>

namespace fowler_lab {

/// log y ~ c - rate t [+ k log t] [+ harmonics of the given period]
struct DecayFit {
    double rate = 0.0;
    double log_coefficient = 0.0;  // k; zero for the plain model
    double intercept = 0.0;
    double r_squared = 0.0;
    double rms_residual = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    int points = 0;
    bool log_model = false;
    std::vector<std::string> warnings;
};

struct DecayFitOptions {
    double period = 0.0;    // 0 disables the harmonic terms
    int harmonics = 4;
    double floor = 1e-14;   // samples below this end the window
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, bool with_log_t,
                   const DecayFitOptions& options = {});

struct DecayModels {
    DecayFit plain;
    DecayFit with_log;
    bool prefers_log = false;
    const DecayFit& chosen() const { return prefers_log ? with_log : plain; }
};

/// Fits both models. The log model wins when its t-power is positive and it lowers 1 - r^2 by the given factor.
DecayModels fit_decay_models(const std::vector<double>& t, const std::vector<double>& y,
                             const DecayFitOptions& options = {}, double improvement = 2.0);

}  // namespace fowler_lab
