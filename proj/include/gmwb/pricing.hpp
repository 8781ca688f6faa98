#pragma once

#include "gmwb/branching.hpp"
#include "gmwb/kernel.hpp"
#include "gmwb/model_params.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace gmwb {

enum class Measure { Q, P };

enum class MemoryMode {
    SinglePass,      // particles carry the account through branching
    AncestryReplay,  // V/H/L first, then the account along surviving lineages
};

struct SimConfig {
    MarketParamsQ market;
    RiskPremia premia;
    Measure measure = Measure::Q;
    FeeStructure fee;
    ContractSpec contract = ContractSpec::constant_rate(100.0, 7.0);
    std::size_t n_paths = 50000;
    double h = 1.0 / 250.0;
    std::uint64_t seed = 20240101;
    double epsilon = 1e-4;
    BranchParams branch;
    bool branching = true;
    int sub_steps = 1;
    int bridge_levels = 16;
    MemoryMode memory = MemoryMode::SinglePass;
    bool pooled = false;
    int threads = 1;
    std::size_t batches = 50;
    AbsorptionTiming absorption = AbsorptionTiming::Grid;

    void validate() const;
};

/// Discounted values at time 0 for one terminal particle.
struct PathOutcome {
    double c = 0.0;    // rider fee income
    double w = 0.0;    // guarantee payout
    double q = 0.0;    // management fee paid while alive
    double l = 1.0;    // likelihood weight at T (frozen at the barrier)
    double f_T = 0.0;  // undiscounted account value at T
    double tau0 = 0.0;
    bool absorbed = false;
    bool eta_hit = false;
    std::uint32_t batch = 0;
    std::uint64_t id = 0;
};

struct SimulationResult {
    std::vector<PathOutcome> paths;
    std::vector<std::size_t> batch_sizes;  // initial particles per batch
    std::size_t n_paths = 0;
    std::size_t steps = 0;
    double maturity = 0.0;
    double discount_T = 1.0;
    bool weighted = false;
    std::size_t branch_events = 0;  // particles resampled, summed over steps and batches
};

/// Time grid t_0 = 0 < ... < t_K = T; the last step is shortened when T is not
/// a multiple of h.
std::vector<double> time_grid(double maturity, double h);

/// Coefficients actually simulated: Q dynamics, or P dynamics built from the
/// premia. Fee-related constants always come from the Q side.
Dynamics simulated_dynamics(const SimConfig& config, const DerivedConstants& derived);

SimulationResult simulate(const SimConfig& config);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    double n_effective = 0.0;
    std::size_t batches = 0;
};

/// Per-batch values of sum(x * L) / initial batch size.
std::vector<double> batch_means(const SimulationResult& result, const std::function<double(const PathOutcome&)>& x);

/// Batch-means estimate of E[x * L], normalised by the initial particle count.
Estimate weighted_estimate(const SimulationResult& result, const std::function<double(const PathOutcome&)>& x);

Estimate net_liability(const SimulationResult& result);
Estimate net_liability(const SimConfig& config);

struct FeePayout {
    Estimate fee;     // E[C_T]
    Estimate payout;  // E[W_T]
    Estimate net;     // E[W_T - C_T]
};

FeePayout fee_and_payout(const SimulationResult& result);
FeePayout fee_and_payout(const SimConfig& config);

enum class RootMethod {
    Bisection,
    Illinois,  // regula falsi with the stale end's value halved
};

struct FairFeeOptions {
    double lo = 0.0;
    double hi = 0.05;
    double tol = 1e-5;
    double target = 0.0;  // solve net liability == target
    bool stop_within_error = true;
    int max_iterations = 60;
    RootMethod method = RootMethod::Bisection;
};

struct FairFeeResult {
    double c_bar = 0.0;
    double std_error = 0.0;  // noise in the root, from the local slope
    Estimate liability;      // at c_bar
    double lo = 0.0;
    double hi = 0.0;
    int evaluations = 0;
};

class BracketError : public std::runtime_error {
public:
    BracketError(const std::string& what, double at_lo, double at_hi)
        : std::runtime_error(what), at_lo_(at_lo), at_hi_(at_hi) {}
    double at_lo() const { return at_lo_; }
    double at_hi() const { return at_hi_; }

private:
    double at_lo_;
    double at_hi_;
};

/// Bracketed root search in c_bar at fixed multiplier m, same seed at every
/// evaluation. The reported root interpolates linearly inside the final bracket.
FairFeeResult fair_base_fee(double m, const SimConfig& config, const FairFeeOptions& options = {});

/// Closed-form integral of e^{-rt} w_t over the schedule.
double annuity_value(const ContractSpec& contract, double r);

struct ConsistencyResult {
    Estimate residual;  // f0 - annuity - E[e^{-rT} F_T] - E[management fees]
    double annuity = 0.0;
    Estimate terminal;     // E[e^{-rT} F_T]
    Estimate management;   // E[int q e^{-rt} F_t dt]
};

ConsistencyResult fair_fee_consistency(const SimulationResult& result, const SimConfig& config);
ConsistencyResult fair_fee_consistency(const SimConfig& config);

struct LossSample {
    double value = 0.0;  // W_T - C_T
    double weight = 1.0;
    std::uint32_t batch = 0;
};

std::vector<LossSample> loss_samples(const SimulationResult& result);
std::vector<LossSample> loss_samples(const SimConfig& config);

}  // namespace gmwb
