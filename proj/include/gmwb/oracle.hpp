#pragma once

#include "gmwb/pricing.hpp"

#include <cstddef>

namespace gmwb {

/// Plain discretisation of the account/variance SDE used as a reference.
/// Only market, premia, measure, fee, contract, n_paths, seed, batches and
/// threads are read from `base`.
struct EulerConfig {
    SimConfig base;
    double h_e = 1e-4;
};

struct EulerResult {
    SimulationResult result;          // same layout as the explicit engine, l == 1
    double negative_fraction = 0.0;   // share of steps whose untruncated V update was < 0
    std::size_t steps = 0;
};

/// Full-truncation Euler: drift and diffusion of V use max(V, 0), the account
/// follows dF = F (mu - alpha V+) dt + F sqrt(V+) dW + F dX - w dt and is
/// absorbed at 0; jumps enter via a Poisson count per step.
EulerResult euler_simulate(const EulerConfig& config);

}  // namespace gmwb
