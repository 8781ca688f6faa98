#pragma once

#include "gmwb/kernel.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gmwb {

/// q1 scales and q2 shapes the acceptance band around the mean weight.
struct BranchParams {
    double q1 = 1.0;
    double q2 = 1.0;
};

/// Particles with weight in [mean / ratio, mean * ratio] are left alone.
struct Band {
    double mean = 0.0;
    double ratio = 1.0;
};

Band branch_band(std::span<const double> weights, const BranchParams& params);

class ExtinctionError : public std::runtime_error {
public:
    ExtinctionError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// A population of particles that branches as a unit. Children get ids
/// (and therefore streams) of their own, built from `group` and a counter.
struct Ensemble {
    std::vector<Particle> particles;
    std::size_t step = 0;
    std::uint64_t group = 0;
    std::uint64_t seed = 0;
    std::uint64_t next_child = 0;
};

std::uint64_t child_particle_id(std::uint64_t group, std::uint64_t sequence);

struct BranchReport {
    Band band;
    std::vector<std::uint32_t> parents;  // parents[i]: pre-branch index of new particle i
    std::size_t kept = 0;
    std::size_t out_of_band = 0;
    std::size_t offspring = 0;
};

/// Keeps in-band particles in place and residually branches the rest with
/// stratified uniforms assigned through a random permutation; offspring get
/// the mean weight. Throws ExtinctionError if nothing survives.
BranchReport branch_step(Ensemble& ensemble, const BranchParams& params);

/// Parent-index columns, one per branching step.
class Ancestry {
public:
    void record(std::vector<std::uint32_t> parents) { columns_.push_back(std::move(parents)); }
    std::size_t steps() const { return columns_.size(); }
    const std::vector<std::uint32_t>& column(std::size_t k) const { return columns_.at(k); }
    /// Index at every recorded step (0 = initial population) of the ancestors
    /// of final particle `index`.
    std::vector<std::uint32_t> lineage(std::uint32_t index) const;

private:
    std::vector<std::vector<std::uint32_t>> columns_;
};

}  // namespace gmwb
