#pragma once

#include "gmwb/pricing.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace gmwb {

/// Weighted empirical law of the discounted loss, kept sorted by value.
class LossDistribution {
public:
    LossDistribution() = default;
    explicit LossDistribution(std::vector<LossSample> samples);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::vector<LossSample>& samples() const { return samples_; }
    double total_weight() const { return total_weight_; }
    std::size_t batches() const { return batches_; }
    /// Samples of one batch, still sorted.
    LossDistribution batch(std::uint32_t b) const;

private:
    std::vector<LossSample> samples_;
    double total_weight_ = 0.0;
    std::size_t batches_ = 0;
};

/// Smallest sample value y with weight(samples <= y) / total >= zeta.
double var(const LossDistribution& dist, double zeta);
/// Weighted mean of the samples strictly above var(dist, zeta).
double cte(const LossDistribution& dist, double zeta);

double weighted_mean(const LossDistribution& dist);
double weighted_variance(const LossDistribution& dist);

struct LossSummary {
    Estimate mean;
    Estimate variance;
    Estimate cte;
    double var = 0.0;
    double zeta = 0.9;
};

/// Statistics on the full sample with batch-means standard errors.
LossSummary summary(const LossDistribution& dist, double zeta = 0.9);

enum class FeeMode {
    Fair,         // c_bar solved so that the net liability is 0 at the base V0
    Underpriced,  // c_bar solved so that the net liability is 1 at the base V0
};

struct SweepOptions {
    std::vector<double> v0_grid;
    std::vector<double> m_grid;
    FeeMode fee_mode = FeeMode::Fair;
    Measure measure = Measure::Q;
    /// Base fee per entry of m_grid; solved for when empty.
    std::vector<double> c_bar;
    FairFeeOptions fair;
    double zeta = 0.9;
};

struct SweepCell {
    double v0 = 0.0;
    double m = 0.0;
    double c_bar = 0.0;
    Estimate net_liability;            // Q runs
    std::optional<LossSummary> loss;   // P runs
};

std::vector<SweepCell> sensitivity_sweep(const SimConfig& base, const SweepOptions& options);

}  // namespace gmwb
