#include "gmwb/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gmwb {

LossDistribution::LossDistribution(std::vector<LossSample> samples) : samples_(std::move(samples)) {
    for (const auto& s : samples_) {
        if (!(s.weight > 0.0)) throw DomainError("loss sample weights must be > 0");
        total_weight_ += s.weight;
        batches_ = std::max<std::size_t>(batches_, static_cast<std::size_t>(s.batch) + 1);
    }
    std::stable_sort(samples_.begin(), samples_.end(),
                     [](const LossSample& a, const LossSample& b) { return a.value < b.value; });
}

LossDistribution LossDistribution::batch(std::uint32_t b) const {
    std::vector<LossSample> part;
    for (const auto& s : samples_) {
        if (s.batch == b) part.push_back(s);
    }
    return LossDistribution(std::move(part));
}

namespace {

void check_level(const LossDistribution& dist, double zeta) {
    if (dist.empty()) throw DomainError("empty loss distribution");
    if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
}

// Index of the first sample of the value group holding the zeta-quantile.
std::size_t quantile_index(const LossDistribution& dist, double zeta) {
    const auto& s = dist.samples();
    const double target = zeta * dist.total_weight() * (1.0 - 1e-14);
    double cum = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j < s.size() && s[j].value == s[i].value) cum += s[j++].weight;
        if (cum >= target) return i;
        i = j;
    }
    return s.size() - 1;
}

}  // namespace

double var(const LossDistribution& dist, double zeta) {
    check_level(dist, zeta);
    return dist.samples()[quantile_index(dist, zeta)].value;
}

double cte(const LossDistribution& dist, double zeta) {
    check_level(dist, zeta);
    const double v = var(dist, zeta);
    double sw = 0.0, swx = 0.0;
    for (const auto& s : dist.samples()) {
        if (s.value > v) {
            sw += s.weight;
            swx += s.weight * s.value;
        }
    }
    if (sw == 0.0) throw DomainError("degenerate tail: no sample lies strictly above the quantile");
    return swx / sw;
}

double weighted_mean(const LossDistribution& dist) {
    if (dist.empty()) throw DomainError("empty loss distribution");
    double swx = 0.0;
    for (const auto& s : dist.samples()) swx += s.weight * s.value;
    return swx / dist.total_weight();
}

double weighted_variance(const LossDistribution& dist) {
    const double mean = weighted_mean(dist);
    double ss = 0.0;
    for (const auto& s : dist.samples()) ss += s.weight * (s.value - mean) * (s.value - mean);
    return ss / dist.total_weight();
}

namespace {

double batch_error(const std::vector<double>& values) {
    const std::size_t b = values.size();
    if (b < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(b);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace

LossSummary summary(const LossDistribution& dist, double zeta) {
    LossSummary out;
    out.zeta = zeta;
    out.mean.value = weighted_mean(dist);
    out.variance.value = weighted_variance(dist);
    out.var = var(dist, zeta);
    out.cte.value = cte(dist, zeta);

    double sw = 0.0, sw2 = 0.0;
    for (const auto& s : dist.samples()) {
        sw += s.weight;
        sw2 += s.weight * s.weight;
    }
    const double ess = sw * sw / sw2;

    std::vector<double> means, variances, ctes;
    for (std::uint32_t b = 0; b < dist.batches(); ++b) {
        const LossDistribution part = dist.batch(b);
        if (part.size() < 2) continue;
        means.push_back(weighted_mean(part));
        variances.push_back(weighted_variance(part));
        ctes.push_back(cte(part, zeta));
    }
    for (Estimate* e : {&out.mean, &out.variance, &out.cte}) {
        e->batches = means.size();
        e->n_effective = ess;
    }
    out.mean.std_error = batch_error(means);
    out.variance.std_error = batch_error(variances);
    out.cte.std_error = batch_error(ctes);
    return out;
}

std::vector<SweepCell> sensitivity_sweep(const SimConfig& base, const SweepOptions& options) {
    if (options.v0_grid.empty() || options.m_grid.empty()) throw ConfigError("sweep grids must be nonempty");
    if (!options.c_bar.empty() && options.c_bar.size() != options.m_grid.size()) {
        throw ConfigError("sweep c_bar list must match m_grid");
    }
    std::vector<SweepCell> cells;
    for (std::size_t i = 0; i < options.m_grid.size(); ++i) {
        const double m = options.m_grid[i];
        double c_bar;
        if (!options.c_bar.empty()) {
            c_bar = options.c_bar[i];
        } else {
            SimConfig pricing = base;
            pricing.measure = Measure::Q;
            FairFeeOptions fair = options.fair;
            fair.target = options.fee_mode == FeeMode::Underpriced ? 1.0 : 0.0;
            c_bar = fair_base_fee(m, pricing, fair).c_bar;
        }
        for (double v0 : options.v0_grid) {
            SimConfig cfg = base;
            cfg.measure = options.measure;
            cfg.market.v0 = v0;
            cfg.fee.m = m;
            cfg.fee.c_bar = c_bar;
            SweepCell cell;
            cell.v0 = v0;
            cell.m = m;
            cell.c_bar = c_bar;
            const SimulationResult result = simulate(cfg);
            cell.net_liability = net_liability(result);
            if (options.measure == Measure::P) {
                cell.loss = summary(LossDistribution(loss_samples(result)), options.zeta);
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace gmwb
