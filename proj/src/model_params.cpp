#include "gmwb/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gmwb {

namespace {

bool nearly_equal(double x, double y, double rel = kRelTol) {
    return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

void MarketParamsQ::validate() const {
    require(nu > 0.0, "market.nu must be > 0");
    require(rho_rev > 0.0, "market.rho_rev must be > 0");
    require(kappa > 0.0, "market.kappa must be > 0");
    require(v0 > 0.0, "market.v0 must be > 0");
    require(rho >= -1.0 && rho <= 1.0, "market.rho must lie in [-1, 1]");
    require(lambda >= 0.0, "market.lambda must be >= 0");
    require(delta > -1.0, "market.delta must be > -1");
    require(chi >= 0.0, "market.chi must be >= 0");
    require(r >= 0.0, "market.r must be >= 0");
}

void FeeStructure::validate() const {
    require(q >= 0.0, "fee.q must be >= 0");
    require(c_bar >= 0.0, "fee.c_bar must be >= 0");
    require(m >= 0.0, "fee.m must be >= 0");
}

ContractSpec ContractSpec::constant_rate(double f0, double rate) {
    if (!(rate > 0.0) || !(f0 > 0.0)) throw ConfigError("constant withdrawal needs f0 > 0 and rate > 0");
    ContractSpec c;
    c.f0 = f0;
    c.withdrawals.push_back({0.0, f0 / rate, rate});
    return c;
}

ContractSpec ContractSpec::accumulation(double f0, double term) {
    ContractSpec c;
    c.f0 = f0;
    c.term = term;
    return c;
}

ContractSpec ContractSpec::yearly(double f0, const std::vector<double>& rates) {
    ContractSpec c;
    c.f0 = f0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        c.withdrawals.push_back({static_cast<double>(i), static_cast<double>(i + 1), rates[i]});
    }
    return c;
}

void ContractSpec::validate() const {
    require(f0 > 0.0, "contract.f0 must be > 0");
    if (withdrawals.empty()) {
        require(term > 0.0, "a contract without withdrawals needs term > 0");
        return;
    }
    double prev_end = 0.0;
    for (const auto& s : withdrawals) {
        require(s.from_year >= 0.0 && s.to_year > s.from_year,
                "withdrawal segments need 0 <= from_year < to_year");
        require(s.from_year >= prev_end - 1e-12, "withdrawal segments must be sorted and disjoint");
        require(s.rate >= 0.0, "withdrawal rates must be >= 0");
        prev_end = s.to_year;
    }
    const double total = total_withdrawals();
    if (!nearly_equal(total, f0, 1e-9)) {
        std::ostringstream os;
        os << "withdrawal schedule totals " << total << " but must exhaust f0 = " << f0;
        throw ConfigError(os.str());
    }
}

double ContractSpec::total_withdrawals() const {
    double total = 0.0;
    for (const auto& s : withdrawals) total += s.rate * (s.to_year - s.from_year);
    return total;
}

double ContractSpec::maturity() const {
    if (withdrawals.empty()) {
        if (!(term > 0.0)) throw ConfigError("a contract without withdrawals needs term > 0");
        return term;
    }
    double cum = 0.0;
    for (const auto& s : withdrawals) {
        const double amount = s.rate * (s.to_year - s.from_year);
        if (s.rate > 0.0 && cum + amount >= f0 * (1.0 - 1e-9)) {
            const double t = s.from_year + (f0 - cum) / s.rate;
            return std::min(t, s.to_year);
        }
        cum += amount;
    }
    throw ConfigError("withdrawal schedule never exhausts f0");
}

double ContractSpec::withdrawal_rate(double t) const {
    if (withdrawals.empty()) return 0.0;
    const double T = maturity();
    if (t >= T - 1e-12 * std::max(1.0, T)) {
        for (auto it = withdrawals.rbegin(); it != withdrawals.rend(); ++it) {
            if (it->from_year < T) return it->rate;
        }
        return 0.0;
    }
    for (const auto& s : withdrawals) {
        if (t >= s.from_year && t < s.to_year) return s.rate;
    }
    return 0.0;
}

double jump_compensator(double lambda, double delta, double chi) {
    if (!(delta > -1.0)) throw DomainError("jump_compensator: delta must be > -1");
    if (lambda == 0.0) return 0.0;
    // delta - log1p(delta) loses digits near 0; the series is delta^2/2 - delta^3/3 + ...
    double core;
    if (std::abs(delta) < 1e-4) {
        core = delta * delta * (0.5 - delta / 3.0 + delta * delta / 4.0);
    } else {
        core = delta - std::log1p(delta);
    }
    return lambda * (core + 0.5 * chi * chi);
}

KernelCoefficients kernel_coefficients(double nu, double rho_rev, double kappa, double rho,
                                       double mu, double alpha) {
    KernelCoefficients k;
    const double k2 = kappa * kappa;
    k.n = std::max(static_cast<int>(std::floor(4.0 * nu / k2 + 0.5)), 1);
    k.nu_kappa = k.n * k2 / 4.0;
    if (nearly_equal(k.nu_kappa, nu)) k.nu_kappa = nu;
    k.mu_kappa = mu + rho / kappa * (k.nu_kappa - nu);
    k.a = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    k.b = mu - nu * rho / kappa;
    k.c = rho * rho_rev / kappa - 0.5 - alpha;
    k.d = rho / kappa;
    k.e = (nu - k.nu_kappa) / k2;
    k.f = k.e * (k2 - nu - k.nu_kappa) / 2.0;
    return k;
}

DerivedConstants derive_constants(const MarketParamsQ& market, const FeeStructure& fee) {
    market.validate();
    fee.validate();
    DerivedConstants d;
    const double x = market.rho_rev * d.tau_bar;
    const double one_minus_exp = -std::expm1(-x);  // 1 - e^{-x}
    d.phi = jump_compensator(market.lambda, market.delta, market.chi);
    d.B = one_minus_exp / x;
    const double a_diffusive = market.nu * (x - one_minus_exp) / (market.rho_rev * market.rho_rev * d.tau_bar);
    d.A = a_diffusive + 2.0 * d.phi;
    d.alpha = fee.m * d.B;
    if (fee.jump_term == JumpFeeTerm::ScaledByMultiplier) {
        d.alpha0 = fee.q + fee.c_bar + fee.m * d.A;
    } else {
        d.alpha0 = fee.q + fee.c_bar + fee.m * a_diffusive + 2.0 * d.phi;
    }
    d.mu = market.r - market.delta * market.lambda - d.alpha0;
    d.kernel = kernel_coefficients(market.nu, market.rho_rev, market.kappa, market.rho, d.mu, d.alpha);
    return d;
}

MarketParamsP derive_p_params(const MarketParamsQ& market, const RiskPremia& premia,
                              const DerivedConstants& derived) {
    MarketParamsP p;
    p.nu = market.nu;
    p.kappa = market.kappa;
    p.v0 = market.v0;
    p.rho = market.rho;
    p.chi = market.chi;
    p.r = market.r;
    p.rho_rev = market.rho_rev - premia.eta_v;
    if (!(p.rho_rev > 0.0)) throw DomainError("derive_p_params: rho_rev - eta_v must be > 0");
    p.delta = market.delta;
    const double phi_star = derived.phi - premia.eta_j;
    if (phi_star < 0.0) throw DomainError("derive_p_params: phi - eta_j must be >= 0");
    const double per_unit = jump_compensator(1.0, p.delta, p.chi);
    if (phi_star == 0.0) {
        p.lambda = 0.0;
    } else if (per_unit > 0.0) {
        p.lambda = phi_star / per_unit;
    } else {
        throw DomainError("derive_p_params: degenerate jump law cannot carry a jump premium");
    }
    if (premia.eta_j == 0.0) p.lambda = market.lambda;
    p.mu_bar = market.r - p.delta * p.lambda - derived.alpha0;
    p.alpha = derived.alpha - premia.eta_s;
    return p;
}

double vix_squared(const DerivedConstants& derived, double v) { return derived.A + derived.B * v; }

FeeRates fee_rates(const DerivedConstants& derived, const FeeStructure& fee, double v) {
    FeeRates out;
    out.gamma = derived.alpha0 + derived.alpha * v;
    out.rider = (derived.alpha0 - fee.q) + derived.alpha * v;
    return out;
}

StepConstants step_constants(double rho_rev, double kappa, double h) {
    if (!(h > 0.0) || !(rho_rev > 0.0) || !(kappa > 0.0)) {
        throw DomainError("step_constants: need h, rho_rev, kappa > 0");
    }
    StepConstants s;
    s.h = h;
    s.psi = std::exp(-0.5 * rho_rev * h);
    s.sigma = kappa * std::sqrt(-std::expm1(-rho_rev * h) / (4.0 * rho_rev));
    return s;
}

bool condition_c(double nu, double kappa) {
    const double k2 = kappa * kappa;
    const int n = std::max(static_cast<int>(std::floor(4.0 * nu / k2 + 0.5)), 1);
    return nearly_equal(n * k2 / 4.0, nu);
}

Dynamics q_dynamics(const MarketParamsQ& market, const DerivedConstants& derived) {
    Dynamics d;
    d.nu = market.nu;
    d.rho_rev = market.rho_rev;
    d.kappa = market.kappa;
    d.v0 = market.v0;
    d.rho = market.rho;
    d.lambda = market.lambda;
    d.delta = market.delta;
    d.chi = market.chi;
    d.r = market.r;
    d.mu = derived.mu;
    d.alpha = derived.alpha;
    return d;
}

Dynamics p_dynamics(const MarketParamsP& p) {
    Dynamics d;
    d.nu = p.nu;
    d.rho_rev = p.rho_rev;
    d.kappa = p.kappa;
    d.v0 = p.v0;
    d.rho = p.rho;
    d.lambda = p.lambda;
    d.delta = p.delta;
    d.chi = p.chi;
    d.r = p.r;
    d.mu = p.mu_bar;
    d.alpha = p.alpha;
    return d;
}

}  // namespace gmwb
