#pragma once

#include "gmwb/model_params.hpp"
#include "gmwb/rng.hpp"

#include <boost/container/small_vector.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace gmwb {

struct ParticleStreams {
    Stream ou;
    Stream integral;
    Stream jump_count;
    Stream jump_size;
    Stream bridge;

    static ParticleStreams make(std::uint64_t seed, std::uint64_t particle_id);
};

/// One simulated path. `y` are the OU components with v == sum(y^2); `h_val`
/// is the continuous kernel H, `g` the jump-included kernel G, `l` the
/// likelihood weight. Account fields follow F = G * max(f0 - r_acc, 0);
/// c_acc, w_acc and q_acc are discounted rider-fee income, guarantee payout
/// and management fee paid while the account is alive.
struct Particle {
    boost::container::small_vector<double, 4> y;
    double v = 0.0;
    double h_val = 1.0;
    double l = 1.0;
    bool eta_hit = false;
    double eta_time = 0.0;
    double g = 1.0;
    double r_acc = 0.0;
    double f = 0.0;
    bool absorbed = false;
    double tau0 = 0.0;
    std::uint32_t absorbed_step = 0;  // outer step in which f reached 0
    double c_acc = 0.0;
    double w_acc = 0.0;
    double q_acc = 0.0;
    std::uint64_t id = 0;
    ParticleStreams streams;
};

enum class AbsorptionTiming {
    Grid,          // tau0 is the first grid time with f0 - r_acc <= 0
    Interpolated,  // tau0 located by linear interpolation of r_acc inside the step
};

struct KernelConfig {
    Dynamics dyn;
    KernelCoefficients coeffs;
    double epsilon = 1e-4;
    int sub_steps = 1;
    AbsorptionTiming absorption = AbsorptionTiming::Grid;
    // Bisection depth of the OU-bridge search for barrier crossings between
    // grid points. 0 monitors the barrier on the grid only and stops the
    // weight at the start of the step in which it is first seen.
    int bridge_levels = 0;

    /// Likelihood weights are needed only off Condition (C).
    bool weighted() const { return coeffs.e != 0.0; }
};

KernelConfig make_kernel_config(const Dynamics& dyn, double epsilon = 1e-4, int sub_steps = 1,
                                AbsorptionTiming absorption = AbsorptionTiming::Grid, int bridge_levels = 0);

/// Lognormal compound-Poisson jump law over one step of length h.
struct JumpLaw {
    double lambda_h = 0.0;
    double log_mean = 0.0;
    double log_sd = 0.0;
    boost::random::poisson_distribution<std::uint64_t, double> count{1.0};

    static JumpLaw make(double lambda, double delta, double chi, double h);
};

/// Splitting an interval of one bridge level at its midpoint: each half has
/// OU decay `psi`, the midpoint given both ends has sd `sd`, and a path that
/// stays `reach` away from the segment between the ends is ignored.
struct BridgeLevel {
    double psi = 1.0;
    double sd = 0.0;
    double reach = 0.0;
    double shrink = 1.0;
};

/// Everything that depends on the length of one outer step.
struct StepPlan {
    double h = 0.0;
    StepConstants sub;  // exact OU coefficients over h / sub_steps
    JumpLaw jumps;
    std::vector<BridgeLevel> bridge;  // level j splits intervals of length sub.h / 2^j

    static StepPlan make(const KernelConfig& cfg, double h);
};

Particle init_particle(double v0, int n, std::uint64_t id, double f0 = 1.0, std::uint64_t seed = 0);

using OuState = boost::container::small_vector<double, 4>;

struct Crossing {
    bool hit = false;
    double theta = 1.0;  // fraction of the interval elapsed at the first point inside
    double v = 0.0;
};

/// First point of the bisected OU bridge from `a` to `b` with |y|^2 <= r2.
Crossing bridge_crossing(const OuState& a, const OuState& b, double r2, const std::vector<BridgeLevel>& levels,
                         Stream& normals);

/// Exact OU transition of every component (on the sub-grid when
/// sub_steps > 1), trapezoid integrals of V and 1/V, conditional-Gaussian
/// update of H and the likelihood update with stopping at the epsilon barrier.
/// With `update_kernel == false` H is left untouched and no integral normal is
/// drawn (used once the account is absorbed and H no longer matters).
template <class OuNormals, class IntegralNormals>
void weighted_step(Particle& p, const KernelConfig& cfg, const StepPlan& plan, double t_prev,
                   OuNormals&& ou, IntegralNormals&& integral, bool update_kernel = true) {
    const KernelCoefficients& k = cfg.coeffs;
    const int steps = cfg.sub_steps;
    const double hs = plan.sub.h;
    const double psi = plan.sub.psi;
    const double sigma = plan.sub.sigma;
    const bool track_weight = cfg.weighted() && !p.eta_hit;

    const double v_prev = p.v;
    const bool search = track_weight && !plan.bridge.empty();
    double sum_v = 0.5 * v_prev;
    double sum_inv = track_weight ? 0.5 / v_prev : 0.0;
    double v_min = v_prev;
    double v = v_prev;
    Crossing hit;
    double hit_inv = 0.0;
    double hit_t = 0.0;
    OuState y_old;
    for (int s = 1; s <= steps; ++s) {
        if (search && !hit.hit) y_old = p.y;
        const double v_old = v;
        v = 0.0;
        for (double& y : p.y) {
            y = psi * y + sigma * ou();
            v += y * y;
        }
        if (search && !hit.hit) {
            hit = bridge_crossing(y_old, p.y, cfg.epsilon, plan.bridge, p.streams.bridge);
            if (hit.hit) {
                hit_t = (s - 1 + hit.theta) * hs;
                hit_inv = (sum_inv - 0.5 / v_old) * hs + 0.5 * hit.theta * hs * (1.0 / v_old + 1.0 / hit.v);
            }
        }
        const double wgt = (s < steps) ? 1.0 : 0.5;
        sum_v += wgt * v;
        if (track_weight) sum_inv += wgt / v;
        v_min = std::min(v_min, v);
    }
    p.v = v;
    const double h = plan.h;
    const double int_v = sum_v * hs;

    if (update_kernel) {
        const double z = integral();
        p.h_val *= std::exp(k.a * std::sqrt(int_v) * z + k.b * h + k.c * int_v + k.d * (v - v_prev));
    }

    if (!track_weight) return;
    if (search) {
        if (hit.hit) {
            p.l *= std::exp(k.e * (std::log(hit.v / v_prev) + cfg.dyn.rho_rev * hit_t) + k.f * hit_inv);
            p.eta_hit = true;
            p.eta_time = t_prev + hit_t;
        } else {
            p.l *= std::exp(k.e * (std::log(v / v_prev) + cfg.dyn.rho_rev * h) + k.f * sum_inv * hs);
        }
    } else if (v_min > cfg.epsilon) {
        p.l *= std::exp(k.e * (std::log(v / v_prev) + cfg.dyn.rho_rev * h) + k.f * sum_inv * hs);
    } else {
        p.eta_hit = true;
        p.eta_time = t_prev;
    }
}

/// Product of exp(Y_i) over a Poisson(lambda h) number of lognormal jumps.
double jump_factor(const JumpLaw& law, Stream& count_stream, Stream& size_stream);

/// G over one step: G grows as H between jumps, then picks up the jump factor.
inline double jump_overlay(double g_prev, double h_prev, double h_new, const JumpLaw& law,
                           Stream& count_stream, Stream& size_stream) {
    return g_prev * (h_new / h_prev) * jump_factor(law, count_stream, size_stream);
}

/// State of a particle at the start of a step, needed by the trapezoid rules.
struct StepStart {
    double v = 0.0;
    double h_val = 1.0;
    double g = 1.0;
    double f = 0.0;
    double r_acc = 0.0;
    bool absorbed = false;
};

inline StepStart snapshot(const Particle& p) { return {p.v, p.h_val, p.g, p.f, p.r_acc, p.absorbed}; }

/// Time, discount factor e^{-rt} and withdrawal rate at one grid point.
struct GridPoint {
    double t = 0.0;
    double discount = 1.0;
    double w = 0.0;
};

/// Withdrawal accumulator R = int w/G, account F = G max(f0 - R, 0) and
/// absorption. Must not be called on a particle absorbed at step start.
void account_step(Particle& p, const StepStart& start, const GridPoint& prev, const GridPoint& next,
                  double f0, AbsorptionTiming timing);

/// Per-unit-account fee rates: rider = rider_base + rider_slope * V.
struct CashflowRates {
    double rider_base = 0.0;  // alpha0 - q
    double rider_slope = 0.0; // alpha
    double management = 0.0;  // q
    double r = 0.0;
};

CashflowRates cashflow_rates(const DerivedConstants& derived, const FeeStructure& fee, double r);

/// Discounted rider fee income (alive at step start) or guarantee payout
/// (absorbed at step start), trapezoid in time.
void cashflow_step(Particle& p, const StepStart& start, const CashflowRates& rates,
                   const GridPoint& prev, const GridPoint& next, AbsorptionTiming timing);

}  // namespace gmwb
