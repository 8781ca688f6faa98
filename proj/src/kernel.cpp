#include "gmwb/kernel.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>

namespace gmwb {

ParticleStreams ParticleStreams::make(std::uint64_t seed, std::uint64_t particle_id) {
    return {Stream({seed, particle_id, Purpose::OU, 0}), Stream({seed, particle_id, Purpose::StochIntegral, 0}),
            Stream({seed, particle_id, Purpose::JumpCount, 0}), Stream({seed, particle_id, Purpose::JumpSize, 0}),
            Stream({seed, particle_id, Purpose::Bridge, 0})};
}

KernelConfig make_kernel_config(const Dynamics& dyn, double epsilon, int sub_steps, AbsorptionTiming absorption,
                                int bridge_levels) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (!(epsilon < dyn.v0)) throw ConfigError("epsilon must be below the initial variance");
    if (sub_steps < 1) throw ConfigError("sub_steps must be >= 1");
    if (bridge_levels < 0 || bridge_levels > 40) throw ConfigError("bridge_levels must lie in [0, 40]");
    KernelConfig cfg;
    cfg.dyn = dyn;
    cfg.coeffs = kernel_coefficients(dyn.nu, dyn.rho_rev, dyn.kappa, dyn.rho, dyn.mu, dyn.alpha);
    cfg.epsilon = epsilon;
    cfg.sub_steps = sub_steps;
    cfg.absorption = absorption;
    cfg.bridge_levels = bridge_levels;
    return cfg;
}

JumpLaw JumpLaw::make(double lambda, double delta, double chi, double h) {
    JumpLaw law;
    law.lambda_h = lambda * h;
    law.log_mean = std::log1p(delta) - 0.5 * chi * chi;
    law.log_sd = chi;
    if (law.lambda_h > 0.0) law.count = boost::random::poisson_distribution<std::uint64_t, double>(law.lambda_h);
    return law;
}

StepPlan StepPlan::make(const KernelConfig& cfg, double h) {
    StepPlan plan;
    plan.h = h;
    plan.sub = step_constants(cfg.dyn.rho_rev, cfg.dyn.kappa, h / cfg.sub_steps);
    plan.jumps = JumpLaw::make(cfg.dyn.lambda, cfg.dyn.delta, cfg.dyn.chi, h);
    if (cfg.bridge_levels > 0 && cfg.weighted()) {
        // Brownian-bridge sup bound per coordinate: P(sup |b_i| > x / sqrt(n)) <= 2 exp(-2 x^2 / (n s^2 dt)),
        // summed over n coordinates and held below 1e-12.
        const double n = static_cast<double>(cfg.coeffs.n);
        const double k_reach = std::sqrt(0.5 * n * std::log(2.0 * n / 1e-12));
        const double diffusion = 0.5 * cfg.dyn.kappa;
        const double theta = 0.5 * cfg.dyn.rho_rev;
        double len = plan.sub.h;
        for (int j = 0; j < cfg.bridge_levels; ++j) {
            const StepConstants half = step_constants(cfg.dyn.rho_rev, cfg.dyn.kappa, 0.5 * len);
            BridgeLevel lv;
            lv.psi = half.psi;
            lv.sd = half.sigma / std::sqrt(1.0 + half.psi * half.psi);
            lv.reach = k_reach * diffusion * std::sqrt(len);
            lv.shrink = 1.0 / std::cosh(0.5 * theta * len);
            plan.bridge.push_back(lv);
            len *= 0.5;
        }
    }
    return plan;
}

Particle init_particle(double v0, int n, std::uint64_t id, double f0, std::uint64_t seed) {
    if (!(v0 > 0.0) || n < 1) throw DomainError("init_particle: need v0 > 0 and n >= 1");
    Particle p;
    p.y.assign(static_cast<std::size_t>(n), std::sqrt(v0 / n));
    p.v = v0;
    p.f = f0;
    p.id = id;
    p.streams = ParticleStreams::make(seed, id);
    return p;
}

namespace {

double segment_distance(const OuState& a, const OuState& b) {
    double ab = 0.0, bb = 0.0, aa = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        ab += a[i] * d;
        bb += d * d;
        aa += a[i] * a[i];
    }
    const double lambda = bb > 0.0 ? std::clamp(-ab / bb, 0.0, 1.0) : 0.0;
    return std::sqrt(std::max(aa + 2.0 * lambda * ab + lambda * lambda * bb, 0.0));
}

bool refine(const OuState& a, const OuState& b, std::size_t level, double t0, double len, double r2,
            const std::vector<BridgeLevel>& levels, Stream& normals, Crossing& out) {
    double vb = 0.0;
    for (double y : b) vb += y * y;
    if (level == levels.size()) {
        if (vb > r2) return false;
        out = {true, t0 + len, vb};
        return true;
    }
    const BridgeLevel& lv = levels[level];
    if (vb > r2 && segment_distance(a, b) * lv.shrink - std::sqrt(r2) > lv.reach) return false;
    OuState mid(a.size());
    const double c = lv.psi / (1.0 + lv.psi * lv.psi);
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = c * (a[i] + b[i]) + lv.sd * draw_normal(normals);
    if (refine(a, mid, level + 1, t0, 0.5 * len, r2, levels, normals, out)) return true;
    return refine(mid, b, level + 1, t0 + 0.5 * len, 0.5 * len, r2, levels, normals, out);
}

}  // namespace

Crossing bridge_crossing(const OuState& a, const OuState& b, double r2, const std::vector<BridgeLevel>& levels,
                         Stream& normals) {
    Crossing out;
    refine(a, b, 0, 0.0, 1.0, r2, levels, normals, out);
    return out;
}

double jump_factor(const JumpLaw& law, Stream& count_stream, Stream& size_stream) {
    if (law.lambda_h <= 0.0) return 1.0;
    const std::uint64_t jumps = law.count(count_stream);
    if (jumps == 0) return 1.0;
    boost::random::normal_distribution<double> size(law.log_mean, law.log_sd);
    double log_sum = 0.0;
    for (std::uint64_t i = 0; i < jumps; ++i) log_sum += size(size_stream);
    return std::exp(log_sum);
}

void account_step(Particle& p, const StepStart& start, const GridPoint& prev, const GridPoint& next,
                  double f0, AbsorptionTiming timing) {
    const double h = next.t - prev.t;
    p.r_acc = start.r_acc + 0.5 * h * (prev.w / start.g + next.w / p.g);
    const double remaining = f0 - p.r_acc;
    if (remaining > 0.0) {
        p.f = p.g * remaining;
        return;
    }
    p.f = 0.0;
    p.absorbed = true;
    if (timing == AbsorptionTiming::Interpolated && p.r_acc > start.r_acc) {
        const double theta = std::clamp((f0 - start.r_acc) / (p.r_acc - start.r_acc), 0.0, 1.0);
        p.tau0 = prev.t + theta * h;
    } else {
        p.tau0 = next.t;
    }
}

CashflowRates cashflow_rates(const DerivedConstants& derived, const FeeStructure& fee, double r) {
    return {derived.alpha0 - fee.q, derived.alpha, fee.q, r};
}

void cashflow_step(Particle& p, const StepStart& start, const CashflowRates& rates, const GridPoint& prev,
                   const GridPoint& next, AbsorptionTiming timing) {
    const double h = next.t - prev.t;
    if (start.absorbed) {
        p.w_acc += 0.5 * h * (prev.discount * prev.w + next.discount * next.w);
        return;
    }
    const double rider_prev = prev.discount * (rates.rider_base + rates.rider_slope * start.v) * start.f;
    const double mgmt_prev = prev.discount * rates.management * start.f;
    if (p.absorbed && timing == AbsorptionTiming::Interpolated) {
        // Fees accrue on [t_prev, tau0] down to F = 0, the guarantee pays on [tau0, t_next].
        const double alive = p.tau0 - prev.t;
        p.c_acc += 0.5 * alive * rider_prev;
        p.q_acc += 0.5 * alive * mgmt_prev;
        const double theta = h > 0.0 ? alive / h : 1.0;
        const double w_tau = prev.w + theta * (next.w - prev.w);
        const double disc_tau = std::exp(-rates.r * p.tau0);
        p.w_acc += 0.5 * (next.t - p.tau0) * (disc_tau * w_tau + next.discount * next.w);
        return;
    }
    const double rider_next = next.discount * (rates.rider_base + rates.rider_slope * p.v) * p.f;
    const double mgmt_next = next.discount * rates.management * p.f;
    p.c_acc += 0.5 * h * (rider_prev + rider_next);
    p.q_acc += 0.5 * h * (mgmt_prev + mgmt_next);
}

}  // namespace gmwb
