#include "gmwb/oracle.hpp"

#include "gmwb/parallel.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>

namespace gmwb {

namespace {

struct EulerGroup {
    std::vector<PathOutcome> paths;
    std::size_t negative = 0;
    std::size_t steps = 0;
};

}  // namespace

EulerResult euler_simulate(const EulerConfig& config) {
    const SimConfig& base = config.base;
    base.market.validate();
    base.fee.validate();
    base.contract.validate();
    if (!(config.h_e >= 1e-7)) throw ConfigError("euler h_e must be >= 1e-7");
    if (base.n_paths < 2 || base.batches < 2 || base.batches > base.n_paths) {
        throw ConfigError("euler run needs n_paths >= batches >= 2");
    }

    const DerivedConstants derived = derive_constants(base.market, base.fee);
    const Dynamics dyn = simulated_dynamics(base, derived);
    const CashflowRates rates = cashflow_rates(derived, base.fee, base.market.r);
    const double T = base.contract.maturity();
    const std::vector<double> t = time_grid(T, config.h_e);
    const std::size_t steps = t.size() - 1;
    const double tiny = 1e-9 * std::max(1.0, T);
    const double r = base.market.r;
    const double f0 = base.contract.f0;

    std::vector<double> disc(steps + 1), w_start(steps), w_end(steps), payout_cum(steps + 1, 0.0);
    for (std::size_t k = 0; k <= steps; ++k) disc[k] = std::exp(-r * t[k]);
    for (std::size_t k = 1; k <= steps; ++k) {
        w_start[k - 1] = base.contract.withdrawal_rate(t[k - 1] + tiny);
        w_end[k - 1] = base.contract.withdrawal_rate(t[k] - tiny);
        payout_cum[k] = payout_cum[k - 1] +
                        0.5 * (t[k] - t[k - 1]) * (disc[k - 1] * w_start[k - 1] + disc[k] * w_end[k - 1]);
    }
    const double a = std::sqrt(std::max(0.0, 1.0 - dyn.rho * dyn.rho));
    const double log_mean = std::log1p(dyn.delta) - 0.5 * dyn.chi * dyn.chi;

    const std::size_t groups = base.batches;
    std::vector<std::size_t> sizes(groups, base.n_paths / groups);
    for (std::size_t g = 0; g < base.n_paths % groups; ++g) ++sizes[g];
    std::vector<std::size_t> first(groups, 0);
    for (std::size_t g = 1; g < groups; ++g) first[g] = first[g - 1] + sizes[g - 1];

    std::vector<EulerGroup> out(groups);
    parallel_for(groups, base.threads, [&](std::size_t g) {
        EulerGroup& eg = out[g];
        boost::random::normal_distribution<double> size_law(log_mean, dyn.chi);
        for (std::size_t i = 0; i < sizes[g]; ++i) {
            const std::uint64_t id = first[g] + i;
            Stream zv({base.seed, id, Purpose::OU, 0});
            Stream zs({base.seed, id, Purpose::StochIntegral, 0});
            Stream jc({base.seed, id, Purpose::JumpCount, 0});
            Stream js({base.seed, id, Purpose::JumpSize, 0});
            double v = dyn.v0, f = f0, c = 0.0, q = 0.0, w = 0.0, tau0 = T;
            bool absorbed = false;
            for (std::size_t k = 1; k <= steps; ++k) {
                const double h = t[k] - t[k - 1];
                const double sq = std::sqrt(h);
                const double vp = std::max(v, 0.0);
                const double sv = std::sqrt(vp);
                const double z2 = draw_normal(zv);
                const double z1 = draw_normal(zs);
                const double jumps = static_cast<double>(draw_poisson(jc, dyn.lambda * h));
                double jump = 1.0;
                for (double j = 0; j < jumps; ++j) jump *= std::exp(size_law(js));
                const double v_raw = v + (dyn.nu - dyn.rho_rev * vp) * h + dyn.kappa * sv * sq * z2;
                if (v_raw < 0.0) ++eg.negative;
                const double f_new = f + f * (dyn.mu - dyn.alpha * vp) * h + f * sv * sq * (a * z1 + dyn.rho * z2) +
                                     f * (jump - 1.0) - w_start[k - 1] * h;
                const double vn = std::max(v_raw, 0.0);
                const double fn = f_new > 0.0 ? f_new : 0.0;
                const double rider_prev = disc[k - 1] * (rates.rider_base + rates.rider_slope * vp) * f;
                const double rider_next = disc[k] * (rates.rider_base + rates.rider_slope * vn) * fn;
                c += 0.5 * h * (rider_prev + rider_next);
                q += 0.5 * h * rates.management * (disc[k - 1] * f + disc[k] * fn);
                v = v_raw;
                f = fn;
                if (f_new <= 0.0) {
                    absorbed = true;
                    tau0 = t[k];
                    w = payout_cum[steps] - payout_cum[k];
                    eg.steps += k;
                    break;
                }
            }
            if (!absorbed) eg.steps += steps;
            PathOutcome o;
            o.c = c;
            o.w = w;
            o.q = q;
            o.l = 1.0;
            o.f_T = f;
            o.tau0 = tau0;
            o.absorbed = absorbed;
            o.batch = static_cast<std::uint32_t>(g);
            o.id = id;
            eg.paths.push_back(o);
        }
    });

    EulerResult res;
    res.result.batch_sizes = sizes;
    res.result.n_paths = base.n_paths;
    res.result.steps = steps;
    res.result.maturity = T;
    res.result.discount_T = disc[steps];
    std::size_t negative = 0, stepped = 0;
    for (auto& g : out) {
        res.result.paths.insert(res.result.paths.end(), g.paths.begin(), g.paths.end());
        negative += g.negative;
        stepped += g.steps;
    }
    res.steps = steps;
    res.negative_fraction = stepped > 0 ? static_cast<double>(negative) / static_cast<double>(stepped) : 0.0;
    return res;
}

}  // namespace gmwb
