#include "gmwb/validation.hpp"

#include "gmwb/oracle.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gmwb {

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double variance_transition_cdf(double x, double v0, double t, double rho_rev, double kappa, int n) {
    if (x <= 0.0) return 0.0;
    const double s2 = kappa * kappa * (-std::expm1(-rho_rev * t)) / (4.0 * rho_rev);
    const double noncentrality = std::exp(-rho_rev * t) * v0 / s2;
    const boost::math::non_central_chi_squared law(static_cast<double>(n), noncentrality);
    return boost::math::cdf(law, x / s2);
}

namespace {

CheckResult within(const std::string& name, double value, double reference, double tolerance,
                   const std::string& detail) {
    return {name, value, reference, tolerance, std::abs(value - reference) <= tolerance, detail};
}

std::string describe(double se, double k) {
    std::ostringstream os;
    os.precision(6);
    os << k << " standard errors of " << se;
    return os.str();
}

}  // namespace

std::vector<CheckResult> run_validation(const RunConfig& config) {
    std::vector<CheckResult> out;
    SimConfig base = config.sim;
    base.n_paths = config.commands.validate_paths;
    base.batches = std::min<std::size_t>(base.batches, base.n_paths);

    // Likelihood weights.
    {
        const SimulationResult res = simulate(base);
        if (condition_c(base.market)) {
            double worst = 0.0;
            for (const auto& p : res.paths) worst = std::max(worst, std::abs(p.l - 1.0));
            out.push_back(within("weights_identically_one", worst, 0.0, 0.0, "exact drift: every weight must equal 1"));
        } else {
            const Estimate mass = weighted_estimate(res, [](const PathOutcome&) { return 1.0; });
            out.push_back(within("weight_mean_one", mass.value, 1.0, 4.0 * mass.std_error, describe(mass.std_error, 4)));
        }
    }

    // Variance marginal at t = 1 against the noncentral chi-square law.
    {
        const DerivedConstants derived = derive_constants(base.market, base.fee);
        const KernelConfig cfg = make_kernel_config(q_dynamics(base.market, derived), base.epsilon, base.sub_steps);
        const std::vector<double> grid = time_grid(1.0, base.h);
        const StepPlan full = StepPlan::make(cfg, base.h);
        const StepPlan last = StepPlan::make(cfg, grid.back() - grid[grid.size() - 2]);
        std::vector<double> v(base.n_paths);
        for (std::size_t i = 0; i < base.n_paths; ++i) {
            Particle p = init_particle(base.market.v0, cfg.coeffs.n, i, 1.0, base.seed);
            for (std::size_t k = 1; k < grid.size(); ++k) {
                weighted_step(p, cfg, k + 1 == grid.size() ? last : full, grid[k - 1], StreamNormals{&p.streams.ou},
                              StreamNormals{&p.streams.integral}, false);
            }
            v[i] = p.v;
        }
        const double d = ks_statistic(v, [&](double x) {
            return variance_transition_cdf(x, base.market.v0, 1.0, base.market.rho_rev, base.market.kappa, cfg.coeffs.n);
        });
        const double pv = ks_pvalue(d, v.size());
        out.push_back({"variance_law_ks_pvalue", pv, 0.01, 0.0, pv > 0.01, "KS p-value must exceed 0.01"});
    }

    // Accumulation contract without withdrawals: E[F_T L] = f0 exp((r - alpha0) T).
    {
        SimConfig acc = base;
        acc.fee.m = 0.0;
        acc.contract = ContractSpec::accumulation(100.0, 1.0);
        const SimulationResult res = simulate(acc);
        const Estimate growth = weighted_estimate(res, [](const PathOutcome& p) { return p.f_T / 100.0; });
        const double alpha0 = derive_constants(acc.market, acc.fee).alpha0;
        out.push_back(within("account_martingale", growth.value, std::exp((acc.market.r - alpha0) * 1.0),
                             4.0 * growth.std_error, describe(growth.std_error, 4)));
    }

    // Short GMWB against the Euler reference, weights active.
    {
        SimConfig toy = base;
        toy.market.nu = 0.1773;
        toy.contract = ContractSpec::constant_rate(10.0, 10.0);
        const Estimate explicit_est = net_liability(simulate(toy));
        EulerConfig ec;
        ec.base = toy;
        ec.base.seed = toy.seed ^ 0x5bd1e995ULL;
        ec.h_e = config.commands.euler_h;
        const Estimate euler_est = net_liability(euler_simulate(ec).result);
        const double se = std::hypot(explicit_est.std_error, euler_est.std_error);
        out.push_back(within("euler_agreement", explicit_est.value, euler_est.value, 3.0 * se, describe(se, 3)));
    }

    // Pre-generated normals reproduce streaming exactly.
    {
        SimConfig small = base;
        small.n_paths = std::min<std::size_t>(base.n_paths, 200);
        small.batches = std::min<std::size_t>(small.batches, small.n_paths / 2);
        small.contract = ContractSpec::constant_rate(10.0, 10.0);
        small.market.nu = 0.1773;
        SimConfig pooled = small;
        pooled.pooled = true;
        const SimulationResult a = simulate(small), b = simulate(pooled);
        double worst = a.paths.size() == b.paths.size() ? 0.0 : 1.0;
        for (std::size_t i = 0; i < std::min(a.paths.size(), b.paths.size()); ++i) {
            worst = std::max({worst, std::abs(a.paths[i].c - b.paths[i].c), std::abs(a.paths[i].w - b.paths[i].w),
                              std::abs(a.paths[i].l - b.paths[i].l)});
        }
        out.push_back(within("pooled_matches_streaming", worst, 0.0, 0.0, "bitwise equality"));
    }
    return out;
}

}  // namespace gmwb
