#include "gmwb/pricing.hpp"

#include "gmwb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gmwb {

void SimConfig::validate() const {
    market.validate();
    fee.validate();
    contract.validate();
    if (n_paths < 2) throw ConfigError("sim.n_paths must be >= 2");
    if (!(h >= 1e-6)) throw ConfigError("sim.h must be >= 1e-6");
    if (contract.maturity() < h * (1.0 - 1e-9)) throw ConfigError("maturity must cover at least one step h");
    if (sub_steps < 1) throw ConfigError("sim.sub_steps must be >= 1");
    if (bridge_levels < 0 || bridge_levels > 40) throw ConfigError("sim.bridge_levels must lie in [0, 40]");
    if (batches < 2 || batches > n_paths) throw ConfigError("sim.batches must lie in [2, n_paths]");
    if (threads < 1) throw ConfigError("sim.threads must be >= 1");
    if (!(branch.q1 > 0.0) || !(branch.q2 > 0.0)) throw ConfigError("sim.q1 and sim.q2 must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("sim.epsilon must lie in (0, 1)");
    if (!(epsilon < market.v0)) throw ConfigError("sim.epsilon must be below market.v0");
}

std::vector<double> time_grid(double maturity, double h) {
    const auto full = static_cast<std::size_t>(std::floor(maturity / h + 1e-9));
    std::vector<double> t(full + 1);
    for (std::size_t k = 0; k <= full; ++k) t[k] = static_cast<double>(k) * h;
    const double tol = 1e-9 * std::max(1.0, maturity);
    if (maturity - t.back() > tol) {
        t.push_back(maturity);
    } else {
        t.back() = maturity;
    }
    if (t.size() < 2) throw ConfigError("time grid needs at least one step");
    return t;
}

Dynamics simulated_dynamics(const SimConfig& config, const DerivedConstants& derived) {
    if (config.measure == Measure::Q) return q_dynamics(config.market, derived);
    return p_dynamics(derive_p_params(config.market, config.premia, derived));
}

namespace {

struct StepGrid {
    GridPoint prev;
    GridPoint next;
};

struct GroupOutput {
    std::vector<PathOutcome> paths;
    std::size_t branch_events = 0;
};

class Engine {
public:
    explicit Engine(const SimConfig& config) : cfg_(config) {
        cfg_.validate();
        derived_ = derive_constants(cfg_.market, cfg_.fee);
        kcfg_ = make_kernel_config(simulated_dynamics(cfg_, derived_), cfg_.epsilon, cfg_.sub_steps, cfg_.absorption,
                                   cfg_.bridge_levels);
        rates_ = cashflow_rates(derived_, cfg_.fee, cfg_.market.r);
        maturity_ = cfg_.contract.maturity();
        t_ = time_grid(maturity_, cfg_.h);
        steps_ = t_.size() - 1;

        const double tiny = 1e-9 * std::max(1.0, maturity_);
        const double r = cfg_.market.r;
        grid_.resize(steps_);
        payout_cum_.assign(steps_ + 1, 0.0);
        for (std::size_t k = 1; k <= steps_; ++k) {
            StepGrid& g = grid_[k - 1];
            g.prev = {t_[k - 1], std::exp(-r * t_[k - 1]), cfg_.contract.withdrawal_rate(t_[k - 1] + tiny)};
            g.next = {t_[k], std::exp(-r * t_[k]), cfg_.contract.withdrawal_rate(t_[k] - tiny)};
            const double hk = t_[k] - t_[k - 1];
            payout_cum_[k] = payout_cum_[k - 1] + 0.5 * hk * (g.prev.discount * g.prev.w + g.next.discount * g.next.w);
        }
        full_ = StepPlan::make(kcfg_, cfg_.h);
        last_ = StepPlan::make(kcfg_, t_[steps_] - t_[steps_ - 1]);
        weighted_ = kcfg_.weighted();
        branching_ = cfg_.branching && weighted_;
        n_ = kcfg_.coeffs.n;
    }

    SimulationResult run() const {
        const std::size_t groups = cfg_.batches;
        std::vector<std::size_t> sizes(groups, cfg_.n_paths / groups);
        for (std::size_t g = 0; g < cfg_.n_paths % groups; ++g) ++sizes[g];
        std::vector<std::size_t> first(groups, 0);
        for (std::size_t g = 1; g < groups; ++g) first[g] = first[g - 1] + sizes[g - 1];

        std::vector<GroupOutput> out(groups);
        parallel_for(groups, cfg_.threads, [&](std::size_t g) {
            if (cfg_.pooled) {
                out[g] = run_group<true>(g, first[g], sizes[g]);
            } else {
                out[g] = run_group<false>(g, first[g], sizes[g]);
            }
        });

        SimulationResult res;
        res.batch_sizes = sizes;
        res.n_paths = cfg_.n_paths;
        res.steps = steps_;
        res.maturity = maturity_;
        res.discount_T = grid_.back().next.discount;
        res.weighted = weighted_;
        std::size_t total = 0;
        for (const auto& o : out) total += o.paths.size();
        res.paths.reserve(total);
        for (auto& o : out) {
            res.paths.insert(res.paths.end(), o.paths.begin(), o.paths.end());
            res.branch_events += o.branch_events;
        }
        return res;
    }

private:
    struct Pools {
        NormalPool ou;
        NormalPool integral;
    };

    const StepPlan& plan(std::size_t k) const { return k == steps_ ? last_ : full_; }

    Pools make_pools(Particle& p, std::size_t remaining_steps) const {
        const std::size_t per_step = static_cast<std::size_t>(n_) * static_cast<std::size_t>(cfg_.sub_steps);
        return {pregenerate_pool(p.streams.ou, remaining_steps * per_step),
                pregenerate_pool(p.streams.integral, remaining_steps)};
    }

    bool tracking(const Particle& p) const { return weighted_ && !p.eta_hit; }

    // Full step of a live account: kernel, jumps, withdrawals, cash flows.
    template <class Ou, class Integral>
    void advance_alive(Particle& p, std::size_t k, Ou&& ou, Integral&& integral) const {
        const StepStart s = snapshot(p);
        const StepGrid& g = grid_[k - 1];
        weighted_step(p, kcfg_, plan(k), g.prev.t, ou, integral, true);
        settle_account(p, s, k);
    }

    void settle_account(Particle& p, const StepStart& s, std::size_t k) const {
        const StepGrid& g = grid_[k - 1];
        p.g = jump_overlay(s.g, s.h_val, p.h_val, plan(k).jumps, p.streams.jump_count, p.streams.jump_size);
        account_step(p, s, g.prev, g.next, cfg_.contract.f0, cfg_.absorption);
        cashflow_step(p, s, rates_, g.prev, g.next, cfg_.absorption);
        if (p.absorbed) p.absorbed_step = static_cast<std::uint32_t>(k);
    }

    template <class Ou, class Integral>
    void advance(Particle& p, std::size_t k, Ou&& ou, Integral&& integral) const {
        if (!p.absorbed) {
            advance_alive(p, k, ou, integral);
        } else if (tracking(p)) {
            weighted_step(p, kcfg_, plan(k), grid_[k - 1].prev.t, ou, integral, false);
        }
    }

    template <bool Pooled>
    void step_particle(Particle& p, Pools* pools, std::size_t k) const {
        if constexpr (Pooled) {
            advance(p, k, PoolNormals{&pools->ou}, PoolNormals{&pools->integral});
        } else {
            advance(p, k, StreamNormals{&p.streams.ou}, StreamNormals{&p.streams.integral});
        }
    }

    PathOutcome outcome(const Particle& p, std::uint32_t group) const {
        PathOutcome o;
        o.c = p.c_acc;
        o.w = p.w_acc;
        if (p.absorbed) o.w += payout_cum_[steps_] - payout_cum_[p.absorbed_step];
        o.q = p.q_acc;
        o.l = p.l;
        o.f_T = p.f;
        o.tau0 = p.absorbed ? p.tau0 : maturity_;
        o.absorbed = p.absorbed;
        o.eta_hit = p.eta_hit;
        o.batch = group;
        o.id = p.id;
        return o;
    }

    template <bool Pooled>
    GroupOutput run_group(std::size_t group, std::size_t first, std::size_t size) const {
        if (cfg_.memory == MemoryMode::AncestryReplay) return run_replay<Pooled>(group, first, size);
        if (branching_) return run_branching<Pooled>(group, first, size);
        return run_independent<Pooled>(group, first, size);
    }

    Particle root(std::size_t id) const {
        return init_particle(kcfg_.dyn.v0, n_, id, cfg_.contract.f0, cfg_.seed);
    }

    // No branching: each path runs to the end on its own; a settled account
    // whose weight is no longer moving has nothing left to simulate.
    template <bool Pooled>
    GroupOutput run_independent(std::size_t group, std::size_t first, std::size_t size) const {
        GroupOutput out;
        out.paths.reserve(size);
        for (std::size_t i = 0; i < size; ++i) {
            Particle p = root(first + i);
            Pools pools;
            if constexpr (Pooled) pools = make_pools(p, steps_);
            for (std::size_t k = 1; k <= steps_; ++k) {
                if (p.absorbed && !tracking(p)) break;
                step_particle<Pooled>(p, &pools, k);
            }
            out.paths.push_back(outcome(p, static_cast<std::uint32_t>(group)));
        }
        return out;
    }

    Ensemble make_ensemble(std::size_t group, std::size_t first, std::size_t size) const {
        Ensemble ens;
        ens.group = group;
        ens.seed = cfg_.seed;
        ens.particles.reserve(size);
        for (std::size_t i = 0; i < size; ++i) ens.particles.push_back(root(first + i));
        return ens;
    }

    template <bool Pooled>
    void remap_pools(std::vector<Pools>& pools, Ensemble& ens, const BranchReport& report, std::size_t k) const {
        std::vector<Pools> next(ens.particles.size());
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (i < report.kept) {
                next[i] = std::move(pools[report.parents[i]]);
            } else {
                next[i] = make_pools(ens.particles[i], steps_ - k);
            }
        }
        pools = std::move(next);
    }

    template <bool Pooled>
    GroupOutput run_branching(std::size_t group, std::size_t first, std::size_t size) const {
        Ensemble ens = make_ensemble(group, first, size);
        std::vector<Pools> pools(Pooled ? size : 0);
        if constexpr (Pooled) {
            for (std::size_t i = 0; i < size; ++i) pools[i] = make_pools(ens.particles[i], steps_);
        }
        GroupOutput out;
        for (std::size_t k = 1; k <= steps_; ++k) {
            for (std::size_t i = 0; i < ens.particles.size(); ++i) {
                step_particle<Pooled>(ens.particles[i], Pooled ? &pools[i] : nullptr, k);
            }
            if (k == steps_) break;
            ens.step = k;
            const BranchReport report = branch_step(ens, cfg_.branch);
            out.branch_events += report.out_of_band;
            if constexpr (Pooled) remap_pools<Pooled>(pools, ens, report, k);
        }
        out.paths.reserve(ens.particles.size());
        for (const auto& p : ens.particles) out.paths.push_back(outcome(p, static_cast<std::uint32_t>(group)));
        return out;
    }

    // Two passes: the variance/kernel/weight paths with branching, storing V
    // and H per step; then the account along the ancestors of the terminal
    // particles only, each ancestor node visited once.
    template <bool Pooled>
    GroupOutput run_replay(std::size_t group, std::size_t first, std::size_t size) const {
        Ensemble ens = make_ensemble(group, first, size);
        std::vector<Pools> pools(Pooled ? size : 0);
        if constexpr (Pooled) {
            for (std::size_t i = 0; i < size; ++i) pools[i] = make_pools(ens.particles[i], steps_);
        }
        // Index k-1 holds step k: values of the particles stepped in step k.
        std::vector<std::vector<double>> v_at(steps_), h_at(steps_);
        std::vector<std::vector<std::uint64_t>> id_at(steps_);
        Ancestry ancestry;  // column k-1: parents of the population entering step k+1
        GroupOutput out;
        for (std::size_t k = 1; k <= steps_; ++k) {
            auto& vs = v_at[k - 1];
            auto& hs = h_at[k - 1];
            auto& ids = id_at[k - 1];
            vs.resize(ens.particles.size());
            hs.resize(ens.particles.size());
            ids.resize(ens.particles.size());
            for (std::size_t i = 0; i < ens.particles.size(); ++i) {
                Particle& p = ens.particles[i];
                ids[i] = p.id;
                const StepGrid& g = grid_[k - 1];
                if constexpr (Pooled) {
                    weighted_step(p, kcfg_, plan(k), g.prev.t, PoolNormals{&pools[i].ou},
                                  PoolNormals{&pools[i].integral}, true);
                } else {
                    weighted_step(p, kcfg_, plan(k), g.prev.t, StreamNormals{&p.streams.ou},
                                  StreamNormals{&p.streams.integral}, true);
                }
                vs[i] = p.v;
                hs[i] = p.h_val;
            }
            if (k == steps_) break;
            if (!branching_) {
                std::vector<std::uint32_t> same(ens.particles.size());
                std::iota(same.begin(), same.end(), 0u);
                ancestry.record(std::move(same));
                continue;
            }
            ens.step = k;
            BranchReport report = branch_step(ens, cfg_.branch);
            out.branch_events += report.out_of_band;
            if constexpr (Pooled) remap_pools<Pooled>(pools, ens, report, k);
            ancestry.record(std::move(report.parents));
        }

        // needed[k-1][j]: particle j stepped in step k is an ancestor of a terminal particle.
        std::vector<std::vector<char>> needed(steps_);
        needed[steps_ - 1].assign(v_at[steps_ - 1].size(), 1);
        for (std::size_t k = steps_; k >= 2; --k) {
            needed[k - 2].assign(v_at[k - 2].size(), 0);
            const auto& col = ancestry.column(k - 2);
            for (std::size_t j = 0; j < needed[k - 1].size(); ++j) {
                if (needed[k - 1][j]) needed[k - 2][col[j]] = 1;
            }
        }

        std::vector<Particle> cur(size);
        for (std::size_t i = 0; i < size; ++i) {
            Particle& p = cur[i];
            p.v = kcfg_.dyn.v0;
            p.f = cfg_.contract.f0;
            p.id = first + i;
            p.streams = ParticleStreams::make(cfg_.seed, p.id);
        }
        for (std::size_t k = 1; k <= steps_; ++k) {
            const auto& need = needed[k - 1];
            std::vector<Particle> next(need.size());
            for (std::size_t j = 0; j < need.size(); ++j) {
                if (!need[j]) continue;
                const std::size_t pred = k == 1 ? j : ancestry.column(k - 2)[j];
                Particle p = cur[pred];
                if (p.id != id_at[k - 1][j]) {
                    p.id = id_at[k - 1][j];
                    p.streams = ParticleStreams::make(cfg_.seed, p.id);
                }
                const StepStart s = snapshot(p);
                p.v = v_at[k - 1][j];
                p.h_val = h_at[k - 1][j];
                if (!s.absorbed) settle_account(p, s, k);
                next[j] = std::move(p);
            }
            cur = std::move(next);
        }

        out.paths.reserve(cur.size());
        for (std::size_t j = 0; j < cur.size(); ++j) {
            Particle& p = cur[j];
            p.l = ens.particles[j].l;
            p.eta_hit = ens.particles[j].eta_hit;
            out.paths.push_back(outcome(p, static_cast<std::uint32_t>(group)));
        }
        return out;
    }

    SimConfig cfg_;
    DerivedConstants derived_;
    KernelConfig kcfg_;
    CashflowRates rates_;
    double maturity_ = 0.0;
    std::vector<double> t_;
    std::size_t steps_ = 0;
    std::vector<StepGrid> grid_;
    std::vector<double> payout_cum_;
    StepPlan full_;
    StepPlan last_;
    bool weighted_ = false;
    bool branching_ = false;
    int n_ = 1;
};

}  // namespace

SimulationResult simulate(const SimConfig& config) { return Engine(config).run(); }

std::vector<double> batch_means(const SimulationResult& result, const std::function<double(const PathOutcome&)>& x) {
    std::vector<double> means(result.batch_sizes.size(), 0.0);
    for (const auto& p : result.paths) means.at(p.batch) += x(p) * p.l;
    for (std::size_t b = 0; b < means.size(); ++b) means[b] /= static_cast<double>(result.batch_sizes[b]);
    return means;
}

Estimate weighted_estimate(const SimulationResult& result, const std::function<double(const PathOutcome&)>& x) {
    const std::size_t nb = result.batch_sizes.size();
    double total = 0.0, sum_l = 0.0, sum_l2 = 0.0;
    for (const auto& p : result.paths) {
        total += x(p) * p.l;
        sum_l += p.l;
        sum_l2 += p.l * p.l;
    }
    Estimate e;
    e.batches = nb;
    e.value = total / static_cast<double>(result.n_paths);
    if (nb >= 2) {
        const std::vector<double> means = batch_means(result, x);
        const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(nb);
        double ss = 0.0;
        for (double m : means) ss += (m - mean) * (m - mean);
        e.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
    }
    e.n_effective = sum_l2 > 0.0 ? sum_l * sum_l / sum_l2 : 0.0;
    return e;
}

Estimate net_liability(const SimulationResult& result) {
    return weighted_estimate(result, [](const PathOutcome& p) { return p.w - p.c; });
}

Estimate net_liability(const SimConfig& config) { return net_liability(simulate(config)); }

FeePayout fee_and_payout(const SimulationResult& result) {
    FeePayout fp;
    fp.fee = weighted_estimate(result, [](const PathOutcome& p) { return p.c; });
    fp.payout = weighted_estimate(result, [](const PathOutcome& p) { return p.w; });
    fp.net = net_liability(result);
    return fp;
}

FeePayout fee_and_payout(const SimConfig& config) { return fee_and_payout(simulate(config)); }

FairFeeResult fair_base_fee(double m, const SimConfig& config, const FairFeeOptions& options) {
    if (!(options.lo >= 0.0 && options.hi > options.lo)) throw ConfigError("fair fee bracket must satisfy 0 <= lo < hi");
    if (!(options.tol > 0.0)) throw ConfigError("fair fee tolerance must be > 0");
    SimConfig cfg = config;
    cfg.fee.m = m;
    FairFeeResult res;
    auto eval = [&](double c_bar) {
        cfg.fee.c_bar = c_bar;
        ++res.evaluations;
        return net_liability(cfg);
    };
    double lo = options.lo, hi = options.hi;
    Estimate e_lo = eval(lo);
    Estimate e_hi = eval(hi);
    double g_lo = e_lo.value - options.target;
    double g_hi = e_hi.value - options.target;
    if (!(g_lo > 0.0 && g_hi < 0.0)) {
        std::ostringstream os;
        os.precision(10);
        os << "fair fee bracket [" << lo << ", " << hi << "] does not straddle the target: liability "
           << e_lo.value << " at lo, " << e_hi.value << " at hi";
        throw BracketError(os.str(), e_lo.value, e_hi.value);
    }
    Estimate last = std::abs(g_lo) < std::abs(g_hi) ? e_lo : e_hi;
    bool settled = false;
    int stale = 0;  // +1: lo kept repeatedly, -1: hi kept repeatedly
    for (int it = 0; it < options.max_iterations && hi - lo >= options.tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (options.method == RootMethod::Illinois) {
            double a = g_lo, b = g_hi;
            if (stale >= 2) a *= 0.5;
            if (stale <= -2) b *= 0.5;
            mid = lo + a / (a - b) * (hi - lo);
            // keep the trial strictly inside so the bracket always shrinks
            mid = std::clamp(mid, lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo));
        }
        const Estimate e = eval(mid);
        const double g = e.value - options.target;
        last = e;
        if (options.stop_within_error && std::abs(g) < e.std_error) {
            res.c_bar = mid;
            res.liability = e;
            settled = true;
            const double slope = (g_lo - g_hi) / (hi - lo);
            res.std_error = slope > 0.0 ? e.std_error / slope : 0.0;
            res.lo = lo;
            res.hi = hi;
            break;
        }
        if (g > 0.0) {
            lo = mid;
            g_lo = g;
            stale = stale < 0 ? stale - 1 : -1;
        } else {
            hi = mid;
            g_hi = g;
            stale = stale > 0 ? stale + 1 : 1;
        }
    }
    if (!settled) {
        const double slope = (g_lo - g_hi) / (hi - lo);
        res.c_bar = lo + g_lo / slope;
        res.liability = last;
        res.std_error = last.std_error / slope;
        res.lo = lo;
        res.hi = hi;
    }
    return res;
}

double annuity_value(const ContractSpec& contract, double r) {
    const double T = contract.maturity();
    double total = 0.0;
    for (const auto& s : contract.withdrawals) {
        const double a = s.from_year;
        const double b = std::min(s.to_year, T);
        if (b <= a) continue;
        if (r == 0.0) {
            total += s.rate * (b - a);
        } else {
            total += s.rate * std::exp(-r * a) * (-std::expm1(-r * (b - a))) / r;
        }
    }
    return total;
}

ConsistencyResult fair_fee_consistency(const SimulationResult& result, const SimConfig& config) {
    ConsistencyResult out;
    out.annuity = annuity_value(config.contract, config.market.r);
    const double f0 = config.contract.f0;
    const double disc = result.discount_T;
    const double ann = out.annuity;
    out.terminal = weighted_estimate(result, [disc](const PathOutcome& p) { return disc * p.f_T; });
    out.management = weighted_estimate(result, [](const PathOutcome& p) { return p.q; });
    out.residual = weighted_estimate(
        result, [=](const PathOutcome& p) { return f0 - ann - disc * p.f_T - p.q; });
    return out;
}

ConsistencyResult fair_fee_consistency(const SimConfig& config) {
    return fair_fee_consistency(simulate(config), config);
}

std::vector<LossSample> loss_samples(const SimulationResult& result) {
    std::vector<LossSample> out;
    out.reserve(result.paths.size());
    for (const auto& p : result.paths) out.push_back({p.w - p.c, p.l, p.batch});
    return out;
}

std::vector<LossSample> loss_samples(const SimConfig& config) { return loss_samples(simulate(config)); }

}  // namespace gmwb
