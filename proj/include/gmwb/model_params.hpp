#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gmwb {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Risk-neutral market: variance drift level, mean reversion, vol-of-vol,
/// spot variance, Brownian correlation, lognormal jump intensity/mean/log-std
/// and the continuously compounded short rate.
struct MarketParamsQ {
    double nu = 0.18;
    double rho_rev = 2.86;
    double kappa = 0.6;
    double v0 = 0.04;
    double rho = -0.96;
    double lambda = 0.21;
    double delta = -0.1252;
    double chi = 0.18;
    double r = 0.02;

    void validate() const;
};

struct RiskPremia {
    double eta_s = 0.0;  // equity
    double eta_v = 0.0;  // volatility
    double eta_j = 0.0;  // jump (compensator units)
};

/// Real-world counterpart of MarketParamsQ. `mu_bar` and `alpha` are the
/// account-drift coefficients of dF/F = (mu_bar - alpha V) dt + ...
struct MarketParamsP {
    double nu = 0.0;
    double rho_rev = 0.0;
    double kappa = 0.0;
    double v0 = 0.0;
    double rho = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double chi = 0.0;
    double r = 0.0;
    double mu_bar = 0.0;
    double alpha = 0.0;
};

/// How the jump part 2*phi of VIX^2 enters the constant fee rate alpha0.
enum class JumpFeeTerm {
    Unscaled,            // alpha0 = q + c_bar + m (A - 2 phi) + 2 phi
    ScaledByMultiplier,  // alpha0 = q + c_bar + m A, i.e. exactly q + c_bar + m VIX^2 at V = 0
};

struct FeeStructure {
    double q = 0.0075;     // investment management fee, paid to a third party
    double c_bar = 0.0;    // base rider fee
    double m = 0.0;        // VIX^2 multiplier
    JumpFeeTerm jump_term = JumpFeeTerm::Unscaled;

    void validate() const;
};

/// Withdrawal rate `rate` applies on [from_year, to_year).
struct WithdrawalSegment {
    double from_year = 0.0;
    double to_year = 0.0;
    double rate = 0.0;
};

/// Either a withdrawal schedule that returns exactly f0, or (no withdrawals at
/// all) a plain accumulation contract running for `term` years.
struct ContractSpec {
    double f0 = 100.0;
    std::vector<WithdrawalSegment> withdrawals;
    double term = 0.0;

    static ContractSpec constant_rate(double f0, double rate);
    static ContractSpec accumulation(double f0, double term);
    /// Yearly segments starting at t = 0, one rate per year.
    static ContractSpec yearly(double f0, const std::vector<double>& rates);

    void validate() const;
    /// First time the cumulative withdrawals reach f0, or `term` without withdrawals.
    double maturity() const;
    bool has_withdrawals() const { return !withdrawals.empty(); }
    /// Right-continuous withdrawal rate; at t >= maturity() the left limit.
    double withdrawal_rate(double t) const;
    double total_withdrawals() const;
};

/// SDE coefficients of the explicit weak solution for one parameter set:
/// OU component count, the closest explicit drift level and the exponent
/// coefficients of the kernel and likelihood recursions.
struct KernelCoefficients {
    int n = 1;
    double nu_kappa = 0.0;
    double mu_kappa = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;
};

struct DerivedConstants {
    double phi = 0.0;
    double tau_bar = 30.0 / 365.0;
    double A = 0.0;
    double B = 0.0;
    double alpha0 = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    KernelCoefficients kernel;
};

struct StepConstants {
    double psi = 1.0;
    double sigma = 0.0;
    double h = 0.0;
};

/// Coefficients of the account/variance SDE under whichever measure is being
/// simulated. Built from (MarketParamsQ, DerivedConstants) or MarketParamsP.
struct Dynamics {
    double nu = 0.0;
    double rho_rev = 0.0;
    double kappa = 0.0;
    double v0 = 0.0;
    double rho = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double chi = 0.0;
    double r = 0.0;
    double mu = 0.0;
    double alpha = 0.0;
};

inline constexpr double kRelTol = 1e-12;

double jump_compensator(double lambda, double delta, double chi);

/// n = max(floor(4 nu / kappa^2 + 1/2), 1); nu_kappa is snapped to nu when
/// they agree to kRelTol so that e = f = 0 exactly.
KernelCoefficients kernel_coefficients(double nu, double rho_rev, double kappa, double rho,
                                       double mu, double alpha);

DerivedConstants derive_constants(const MarketParamsQ& market, const FeeStructure& fee);

MarketParamsP derive_p_params(const MarketParamsQ& market, const RiskPremia& premia,
                              const DerivedConstants& derived);

double vix_squared(const DerivedConstants& derived, double v);

struct FeeRates {
    double gamma = 0.0;  // total fee rate q + c_t
    double rider = 0.0;  // c_t
};

FeeRates fee_rates(const DerivedConstants& derived, const FeeStructure& fee, double v);

StepConstants step_constants(double rho_rev, double kappa, double h);

bool condition_c(double nu, double kappa);
inline bool condition_c(const MarketParamsQ& market) { return condition_c(market.nu, market.kappa); }

Dynamics q_dynamics(const MarketParamsQ& market, const DerivedConstants& derived);
Dynamics p_dynamics(const MarketParamsP& p);

}  // namespace gmwb
