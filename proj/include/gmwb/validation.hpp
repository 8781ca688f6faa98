#pragma once

#include "gmwb/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gmwb {

/// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the KS statistic with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

/// Law of V_t started at v0 under the exact variance dynamics with nu = n kappa^2 / 4:
/// V_t / s^2 is noncentral chi-square with n degrees of freedom.
double variance_transition_cdf(double x, double v0, double t, double rho_rev, double kappa, int n);

struct CheckResult {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

/// Self-checks of the engine at the configured market: weights, variance law,
/// martingale identity and agreement with the Euler reference.
std::vector<CheckResult> run_validation(const RunConfig& config);

}  // namespace gmwb
