#include "gmwb/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace gmwb;

TEST_CASE("Euler and explicit engine agree on a pure Heston accumulation") {
    SimConfig c;
    c.market.lambda = 0.0;
    c.contract = ContractSpec::accumulation(100.0, 1.0);
    c.n_paths = 20000;
    const SimulationResult ex = simulate(c);
    EulerConfig ec{c, 1e-3};
    ec.base.seed = c.seed ^ 0x5bd1e995ULL;
    const EulerResult eu = euler_simulate(ec);
    auto pv = [&](const SimulationResult& r) {
        const double d = r.discount_T;
        return weighted_estimate(r, [d](const PathOutcome& p) { return d * p.f_T; });
    };
    const Estimate a = pv(ex), b = pv(eu.result);
    CHECK(std::abs(a.value - b.value) < 3.0 * std::hypot(a.std_error, b.std_error));
    // Both sit near the closed form f0 exp(-alpha0 T).
    const double alpha0 = derive_constants(c.market, c.fee).alpha0;
    CHECK(std::abs(a.value - 100.0 * std::exp(-alpha0)) < 4.0 * a.std_error);
}

TEST_CASE("coarse Euler steps push the variance negative before truncation") {
    SimConfig c;
    c.contract = ContractSpec::constant_rate(10.0, 10.0);
    c.n_paths = 2000;
    c.batches = 20;
    const EulerResult coarse = euler_simulate({c, 0.05});
    CHECK(coarse.negative_fraction > 0.0);
    CHECK(coarse.steps == 20);
    for (const auto& p : coarse.result.paths) {
        REQUIRE(p.l == 1.0);
        REQUIRE(p.f_T >= 0.0);
        if (p.absorbed) REQUIRE(p.f_T == 0.0);
    }
}

TEST_CASE("Euler runs are deterministic and thread-independent") {
    SimConfig c;
    c.contract = ContractSpec::constant_rate(10.0, 10.0);
    c.n_paths = 400;
    c.batches = 8;
    const EulerResult a = euler_simulate({c, 1e-3});
    c.threads = 3;
    const EulerResult b = euler_simulate({c, 1e-3});
    REQUIRE(a.result.paths.size() == b.result.paths.size());
    for (std::size_t i = 0; i < a.result.paths.size(); ++i) {
        REQUIRE(a.result.paths[i].c == b.result.paths[i].c);
        REQUIRE(a.result.paths[i].w == b.result.paths[i].w);
    }
    CHECK_THROWS_AS(euler_simulate({c, 0.0}), ConfigError);
}
