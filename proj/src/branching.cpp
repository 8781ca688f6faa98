#include "gmwb/branching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmwb {

namespace {
// Band edges are closed up to round-off so an all-equal ensemble stays put.
constexpr double kBandTol = 1e-12;
}  // namespace

Band branch_band(std::span<const double> weights, const BranchParams& params) {
    if (weights.empty()) throw std::invalid_argument("branch_band: empty ensemble");
    const double n = static_cast<double>(weights.size());
    double sum = 0.0, sum_log = 0.0, sum_log2 = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("branch_band: weights must be > 0");
        const double lw = std::log(w);
        sum += w;
        sum_log += lw;
        sum_log2 += lw * lw;
    }
    Band band;
    band.mean = sum / n;
    const double mean_log = sum_log / n;
    const double var_log = std::max(0.0, sum_log2 / n - mean_log * mean_log);
    band.ratio = std::exp(params.q1 * std::pow(var_log, 0.5 * params.q2));
    return band;
}

std::uint64_t child_particle_id(std::uint64_t group, std::uint64_t sequence) {
    return (1ULL << 63) | (group << 36) | (sequence & ((1ULL << 36) - 1));
}

BranchReport branch_step(Ensemble& ensemble, const BranchParams& params) {
    auto& particles = ensemble.particles;
    std::vector<double> weights(particles.size());
    std::transform(particles.begin(), particles.end(), weights.begin(), [](const Particle& p) { return p.l; });

    BranchReport report;
    report.band = branch_band(weights, params);
    const double mean = report.band.mean;
    const double lo = mean / report.band.ratio * (1.0 - kBandTol);
    const double hi = mean * report.band.ratio * (1.0 + kBandTol);

    std::vector<Particle> next;
    next.reserve(particles.size());
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < particles.size(); ++i) {
        const double w = weights[i];
        if (w >= lo && w <= hi) {
            report.parents.push_back(i);
            next.push_back(std::move(particles[i]));
        } else {
            out.push_back(i);
        }
    }
    report.kept = next.size();
    report.out_of_band = out.size();

    if (!out.empty()) {
        const std::size_t m = out.size();
        Stream uniforms({ensemble.seed, ensemble.group, Purpose::BranchUniform, ensemble.step});
        Stream shuffle({ensemble.seed, ensemble.group, Purpose::Permutation, ensemble.step});
        std::vector<double> strata(m);
        for (std::size_t j = 0; j < m; ++j) {
            strata[j] = (static_cast<double>(j) + draw_uniform01(uniforms)) / static_cast<double>(m);
        }
        const std::vector<std::size_t> perm = random_permutation(shuffle, m);

        for (std::size_t j = 0; j < m; ++j) {
            const std::uint32_t parent = out[j];
            const double ratio = weights[parent] / mean;
            const double whole = std::floor(ratio);
            const std::size_t count =
                static_cast<std::size_t>(whole) + (strata[perm[j]] <= ratio - whole ? 1 : 0);
            const Particle& src = particles[parent];
            for (std::size_t c = 0; c < count; ++c) {
                Particle child = src;
                child.l = mean;
                child.id = child_particle_id(ensemble.group, ensemble.next_child++);
                child.streams = ParticleStreams::make(ensemble.seed, child.id);
                next.push_back(std::move(child));
                report.parents.push_back(parent);
            }
            report.offspring += count;
        }
    }

    if (next.empty()) {
        throw ExtinctionError("ensemble extinct after branching at step " + std::to_string(ensemble.step),
                              ensemble.step);
    }
    particles = std::move(next);
    return report;
}

std::vector<std::uint32_t> Ancestry::lineage(std::uint32_t index) const {
    std::vector<std::uint32_t> path(columns_.size() + 1);
    path.back() = index;
    for (std::size_t k = columns_.size(); k-- > 0;) {
        path[k] = columns_[k].at(path[k + 1]);
    }
    return path;
}

}  // namespace gmwb
