#include "gmwb/risk.hpp"

#include <doctest.h>

#include <cmath>

using namespace gmwb;

namespace {

LossDistribution grid_1_to_100(double weight = 1.0) {
    std::vector<LossSample> s;
    for (int i = 100; i >= 1; --i) s.push_back({static_cast<double>(i), weight, static_cast<std::uint32_t>(i % 4)});
    return LossDistribution(std::move(s));
}

LossDistribution random_dist(std::uint64_t seed, double shift = 0.0, double scale = 1.0) {
    Stream s({seed, 0, Purpose::OU, 0});
    std::vector<LossSample> out;
    for (int i = 0; i < 5000; ++i) {
        const double x = draw_normal(s) * 10.0 + std::exp(draw_normal(s));
        const double w = std::exp(0.5 * draw_normal(s));
        out.push_back({shift + scale * x, w, static_cast<std::uint32_t>(i % 10)});
    }
    return LossDistribution(std::move(out));
}

}  // namespace

TEST_CASE("quantile and tail mean on a grid") {
    const LossDistribution d = grid_1_to_100();
    CHECK(var(d, 0.9) == 90.0);
    CHECK(cte(d, 0.9) == doctest::Approx(95.5).epsilon(1e-15));
    CHECK(var(d, 0.901) == 91.0);
    CHECK(var(d, 0.005) == 1.0);
    CHECK(var(grid_1_to_100(3.7), 0.9) == 90.0);
    CHECK(cte(grid_1_to_100(3.7), 0.9) == doctest::Approx(95.5).epsilon(1e-15));
}

TEST_CASE("weights shift the quantile") {
    // Sample 10 carries as much weight as the other nine together.
    std::vector<LossSample> s;
    for (int i = 1; i <= 9; ++i) s.push_back({static_cast<double>(i), 1.0, 0});
    s.push_back({10.0, 9.0, 0});
    const LossDistribution d(s);
    CHECK(var(d, 0.5) == 9.0);
    CHECK(var(d, 0.51) == 10.0);
    CHECK(var(d, 0.4) == 8.0);
    CHECK(cte(d, 0.4) == doctest::Approx((9.0 + 90.0) / 10.0).epsilon(1e-15));
}

TEST_CASE("atoms and degenerate tails") {
    std::vector<LossSample> s(50, LossSample{3.25, 1.0, 0});
    const LossDistribution d(s);
    for (double z : {0.01, 0.5, 0.99}) CHECK(var(d, z) == 3.25);
    CHECK_THROWS_AS(cte(d, 0.5), DomainError);
    CHECK(weighted_variance(d) == 0.0);
    CHECK_THROWS_AS(var(LossDistribution{}, 0.5), DomainError);
    CHECK_THROWS_AS(var(d, 1.0), DomainError);
    CHECK_THROWS_AS(LossDistribution(std::vector<LossSample>{{1.0, 0.0, 0}}), DomainError);
}

TEST_CASE("translation and scaling") {
    const LossDistribution base = random_dist(4);
    const LossDistribution moved = random_dist(4, 12.5, 1.0);
    const LossDistribution scaled = random_dist(4, 0.0, 4.0);
    for (double z : {0.5, 0.9, 0.99}) {
        CHECK(var(moved, z) == doctest::Approx(var(base, z) + 12.5).epsilon(1e-12));
        CHECK(cte(moved, z) == doctest::Approx(cte(base, z) + 12.5).epsilon(1e-12));
        CHECK(var(scaled, z) == doctest::Approx(4.0 * var(base, z)).epsilon(1e-12));
        CHECK(cte(scaled, z) == doctest::Approx(4.0 * cte(base, z)).epsilon(1e-12));
        CHECK(cte(base, z) >= var(base, z));
    }
    double prev = -1e300;
    for (double z = 0.05; z < 0.999; z += 0.01) {
        const double c = cte(base, z);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("equal weights match the unweighted statistics") {
    std::vector<LossSample> a, b;
    Stream s({8, 0, Purpose::OU, 0});
    for (int i = 0; i < 1000; ++i) {
        const double x = draw_normal(s);
        a.push_back({x, 1.0, 0});
        b.push_back({x, 0.37, 0});
    }
    const LossDistribution da(a), db(b);
    for (double z : {0.1, 0.9}) {
        CHECK(var(da, z) == var(db, z));
        CHECK(cte(da, z) == doctest::Approx(cte(db, z)).epsilon(1e-13));
    }
    CHECK(weighted_mean(da) == doctest::Approx(weighted_mean(db)).epsilon(1e-12));
    CHECK(weighted_variance(da) == doctest::Approx(weighted_variance(db)).epsilon(1e-12));
}

TEST_CASE("summary with batch errors") {
    const LossDistribution d = random_dist(5);
    CHECK(d.batches() == 10);
    CHECK(d.batch(3).size() == 500);
    const LossSummary s = summary(d, 0.9);
    CHECK(s.mean.value == doctest::Approx(weighted_mean(d)).epsilon(1e-13));
    CHECK(s.variance.value == doctest::Approx(weighted_variance(d)).epsilon(1e-13));
    CHECK(s.cte.value == doctest::Approx(cte(d, 0.9)).epsilon(1e-13));
    CHECK(s.var == var(d, 0.9));
    CHECK(s.mean.std_error > 0.0);
    CHECK(s.variance.std_error > 0.0);
    CHECK(s.cte.std_error > 0.0);
    CHECK(s.mean.batches == 10);
}

TEST_CASE("batch errors shrink as one over root N") {
    SimConfig c;
    c.contract = ContractSpec::constant_rate(10.0, 10.0);
    c.fee.c_bar = 0.02;
    // 200 batches keep the noise of the error estimates themselves near 5%.
    c.batches = 200;
    c.n_paths = 50000;
    const LossSummary lo = summary(LossDistribution(loss_samples(c)));
    c.n_paths = 200000;
    const LossSummary hi = summary(LossDistribution(loss_samples(c)));
    CHECK(lo.mean.std_error / hi.mean.std_error == doctest::Approx(2.0).epsilon(0.2));
    CHECK(lo.cte.std_error / hi.cte.std_error == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("sweep grid layout") {
    SimConfig c;
    c.n_paths = 500;
    c.batches = 10;
    c.contract = ContractSpec::constant_rate(10.0, 10.0);
    SweepOptions opt;
    opt.v0_grid = {0.02, 0.08};
    opt.m_grid = {0.0, 0.3};
    opt.c_bar = {0.02, 0.01};
    const auto cells = sensitivity_sweep(c, opt);
    REQUIRE(cells.size() == 4);
    for (const auto& cell : cells) {
        CHECK(cell.c_bar == (cell.m == 0.0 ? 0.02 : 0.01));
        CHECK_FALSE(cell.loss.has_value());
    }
    opt.measure = Measure::P;
    const auto p = sensitivity_sweep(c, opt);
    for (const auto& cell : p) CHECK(cell.loss.has_value());
    opt.v0_grid.clear();
    CHECK_THROWS(sensitivity_sweep(c, opt));
}
