#include "gmwb/model_params.hpp"

#include <doctest.h>

#include <cmath>

using namespace gmwb;

namespace {

// Reference evaluations at 30 digits (mpmath), base market.
constexpr double kPhi = 0.00519959793770009826886;
constexpr double kB = 0.891158548716889180712691;
constexpr double kA = 0.0172493571449666117376302;
constexpr double kADiffusive = 0.00685016126956641519990;
constexpr double kAlphaM03 = 0.267347564615066754213807;
constexpr double kAlpha0Scaled = 0.0229748071434899835212891;
constexpr double kAlpha0Unscaled = 0.0302542442562701210976998;
constexpr double kMuScaled = 0.0233171928565100164787109;
constexpr double kGammaScaled = 0.0336687097280926536898414;
constexpr double kVix2 = 0.0528956990936421789661379;
constexpr double kPsi = 0.994296328053011592512926;
constexpr double kSigma = 0.0189195303855401264511139;
constexpr double kLambdaStar = 0.163901435674077875356641;

FeeStructure vix_fee(JumpFeeTerm term) {
    FeeStructure f;
    f.q = 0.0075;
    f.c_bar = 0.0103;
    f.m = 0.3;
    f.jump_term = term;
    return f;
}

bool rel_close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

}  // namespace

TEST_CASE("jump compensator") {
    CHECK(jump_compensator(0.21, -0.1252, 0.18) == doctest::Approx(kPhi).epsilon(1e-13));
    // The four-digit reference value is a rounding of the exact 0.00519960.
    CHECK(rel_close(jump_compensator(0.21, -0.1252, 0.18), 0.005205, 2e-3));
    CHECK(jump_compensator(0.0, 3.0, 2.0) == 0.0);
    CHECK(jump_compensator(1.0, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(jump_compensator(1.0, -1.0, 0.1), DomainError);
    for (double d : {-0.9, -0.3, 0.0, 0.4, 2.0}) CHECK(jump_compensator(0.5, d, 0.0) >= 0.0);
}

TEST_CASE("derived constants at the base market") {
    const MarketParamsQ mk;
    const DerivedConstants d = derive_constants(mk, vix_fee(JumpFeeTerm::ScaledByMultiplier));
    CHECK(d.B == doctest::Approx(kB).epsilon(1e-13));
    CHECK(d.A == doctest::Approx(kA).epsilon(1e-13));
    CHECK(rel_close(d.B, 0.89116, 1e-5));
    CHECK(rel_close(d.A, 0.017260, 1e-3));
    CHECK(d.B > 0.0);
    CHECK(d.B < 1.0);

    const KernelCoefficients& k = d.kernel;
    CHECK(k.n == 2);
    CHECK(k.nu_kappa == mk.nu);
    CHECK(k.e == 0.0);
    CHECK(k.f == 0.0);
    CHECK(k.mu_kappa == d.mu);
    CHECK(k.a == doctest::Approx(std::sqrt(1.0 - mk.rho * mk.rho)).epsilon(1e-15));
    CHECK(k.d == doctest::Approx(mk.rho / mk.kappa).epsilon(1e-15));
    CHECK(k.b == doctest::Approx(d.mu - mk.nu * mk.rho / mk.kappa).epsilon(1e-14));
    CHECK(k.c == doctest::Approx(mk.rho * mk.rho_rev / mk.kappa - 0.5 - d.alpha).epsilon(1e-14));
}

TEST_CASE("fee constants under both jump-term conventions") {
    const MarketParamsQ mk;
    const DerivedConstants s = derive_constants(mk, vix_fee(JumpFeeTerm::ScaledByMultiplier));
    CHECK(s.alpha == doctest::Approx(kAlphaM03).epsilon(1e-13));
    CHECK(s.alpha0 == doctest::Approx(kAlpha0Scaled).epsilon(1e-13));
    CHECK(s.mu == doctest::Approx(kMuScaled).epsilon(1e-12));
    CHECK(rel_close(s.alpha, 0.267347, 1e-5));
    CHECK(rel_close(s.alpha0, 0.022978, 5e-4));
    CHECK(rel_close(s.mu, 0.023314, 5e-4));

    const DerivedConstants u = derive_constants(mk, vix_fee(JumpFeeTerm::Unscaled));
    CHECK(u.alpha0 == doctest::Approx(kAlpha0Unscaled).epsilon(1e-13));
    CHECK(u.alpha0 - s.alpha0 == doctest::Approx(2.0 * (1.0 - 0.3) * kPhi).epsilon(1e-10));
    CHECK(u.mu == doctest::Approx(mk.r - mk.delta * mk.lambda - u.alpha0).epsilon(1e-14));

    // m = 1 makes the two conventions coincide; m = 0 gives q + c_bar + 2 phi unscaled.
    FeeStructure one = vix_fee(JumpFeeTerm::Unscaled);
    one.m = 1.0;
    FeeStructure one_s = one;
    one_s.jump_term = JumpFeeTerm::ScaledByMultiplier;
    CHECK(derive_constants(mk, one).alpha0 == doctest::Approx(derive_constants(mk, one_s).alpha0).epsilon(1e-15));
    FeeStructure flat = vix_fee(JumpFeeTerm::Unscaled);
    flat.m = 0.0;
    CHECK(derive_constants(mk, flat).alpha0 == doctest::Approx(0.0075 + 0.0103 + 2.0 * kPhi).epsilon(1e-14));
    flat.jump_term = JumpFeeTerm::ScaledByMultiplier;
    CHECK(derive_constants(mk, flat).alpha0 == doctest::Approx(0.0075 + 0.0103).epsilon(1e-14));
    CHECK(kA - kADiffusive == doctest::Approx(2.0 * kPhi).epsilon(1e-12));
}

TEST_CASE("vix squared") {
    const MarketParamsQ mk;
    const DerivedConstants d = derive_constants(mk, {});
    CHECK(vix_squared(d, 0.04) == doctest::Approx(kVix2).epsilon(1e-13));
    CHECK(rel_close(vix_squared(d, 0.04), 0.052906, 5e-4));
    CHECK(100.0 * std::sqrt(vix_squared(d, 0.04)) == doctest::Approx(23.0).epsilon(1e-3));
    CHECK(vix_squared(d, 0.0) == d.A);
    for (double v1 : {0.0, 0.01, 0.3}) {
        for (double v2 : {0.02, 0.5}) {
            const double gap = vix_squared(d, v1) + vix_squared(d, v2) - 2.0 * vix_squared(d, 0.5 * (v1 + v2));
            CHECK(std::abs(gap) < 1e-15);
        }
    }
}

TEST_CASE("fee rates") {
    const MarketParamsQ mk;
    FeeStructure flat;
    flat.q = 0.0075;
    flat.c_bar = 0.02;
    flat.jump_term = JumpFeeTerm::ScaledByMultiplier;
    const DerivedConstants df = derive_constants(mk, flat);
    CHECK(fee_rates(df, flat, 0.0).gamma == doctest::Approx(0.0275).epsilon(1e-14));
    CHECK(fee_rates(df, flat, 0.7).gamma == fee_rates(df, flat, 0.0).gamma);

    const FeeStructure vf = vix_fee(JumpFeeTerm::ScaledByMultiplier);
    const DerivedConstants dv = derive_constants(mk, vf);
    CHECK(fee_rates(dv, vf, 0.04).gamma == doctest::Approx(kGammaScaled).epsilon(1e-13));
    CHECK(rel_close(fee_rates(dv, vf, 0.04).gamma, 0.033672, 5e-4));
    double prev = -1.0;
    for (double v : {0.0, 0.01, 0.04, 0.2, 1.0}) {
        const FeeRates fr = fee_rates(dv, vf, v);
        CHECK(fr.rider - fee_rates(dv, vf, 0.0).rider == doctest::Approx(dv.alpha * v).epsilon(1e-13));
        CHECK(fr.gamma - fr.rider == doctest::Approx(vf.q).epsilon(1e-14));
        CHECK(fr.rider > 0.0);
        CHECK(fr.gamma > prev);
        prev = fr.gamma;
    }
}

TEST_CASE("step constants") {
    const StepConstants s = step_constants(2.86, 0.6, 1.0 / 250.0);
    CHECK(s.psi == doctest::Approx(kPsi).epsilon(1e-14));
    CHECK(s.sigma == doctest::Approx(kSigma).epsilon(1e-13));
    CHECK(s.psi == doctest::Approx(0.9942963).epsilon(1e-7));
    CHECK(rel_close(s.sigma, 0.0189198, 2e-5));
    for (double h : {1.0, 1e-2, 1e-5, 1e-9}) {
        const StepConstants t = step_constants(2.86, 0.6, h);
        CHECK(t.psi > 0.0);
        CHECK(t.psi < 1.0);
        CHECK(t.sigma > 0.0);
        const double identity = 0.36 / (4.0 * 2.86) * -std::expm1(-2.86 * h);
        CHECK(std::abs(t.sigma * t.sigma - identity) <= 1e-14 * identity);
        if (h >= 1e-2) CHECK(t.sigma * t.sigma == doctest::Approx(0.36 / (4.0 * 2.86) * (1.0 - t.psi * t.psi)).epsilon(1e-12));
    }
    const StepConstants tiny = step_constants(2.86, 0.6, 1e-10);
    CHECK(tiny.sigma / std::sqrt(1e-10) == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(tiny.psi == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(step_constants(2.86, 0.6, 0.0), DomainError);
}

TEST_CASE("condition C") {
    CHECK(condition_c(0.18, 0.6));
    CHECK_FALSE(condition_c(0.1773, 0.6));
    CHECK(condition_c(0.09, 0.6));
    CHECK(kernel_coefficients(0.09, 2.86, 0.6, -0.96, 0.0, 0.0).n == 1);
    CHECK(kernel_coefficients(0.01, 2.86, 0.6, -0.96, 0.0, 0.0).n == 1);

    // n minimizes |nu - k kappa^2 / 4| over k >= 1, ties rounding up.
    for (double nu = 0.005; nu < 1.5; nu += 0.0137) {
        const KernelCoefficients k = kernel_coefficients(nu, 2.86, 0.6, -0.5, 0.01, 0.0);
        CHECK(k.n >= 1);
        CHECK(k.nu_kappa == doctest::Approx(k.n * 0.09).epsilon(1e-15));
        for (int j = 1; j < 30; ++j) CHECK(std::abs(nu - k.nu_kappa) <= std::abs(nu - j * 0.09) + 1e-15);
        const bool exact = condition_c(nu, 0.6);
        CHECK(exact == (k.e == 0.0));
        CHECK(exact == (k.f == 0.0));
        CHECK(exact == (k.mu_kappa == 0.01));
    }
}

TEST_CASE("real-world parameters") {
    const MarketParamsQ mk;
    const DerivedConstants d = derive_constants(mk, {});
    const MarketParamsP p = derive_p_params(mk, {0.6667, -2.0, 1.1414e-3}, d);
    CHECK(p.rho_rev == doctest::Approx(4.86).epsilon(1e-15));
    CHECK(p.lambda == doctest::Approx(kLambdaStar).epsilon(1e-12));
    CHECK(rel_close(p.lambda, 0.1639, 1e-3));
    CHECK(mk.nu / p.rho_rev == doctest::Approx(0.037).epsilon(1e-2));
    CHECK(mk.r + 0.6667 * 0.04 - p.lambda * p.delta == doctest::Approx(0.0672).epsilon(1e-3));
    CHECK(p.delta == mk.delta);
    CHECK(p.alpha == doctest::Approx(d.alpha - 0.6667).epsilon(1e-15));

    const MarketParamsP same = derive_p_params(mk, {}, d);
    CHECK(same.rho_rev == mk.rho_rev);
    CHECK(same.lambda == doctest::Approx(mk.lambda).epsilon(1e-14));
    CHECK(same.delta == mk.delta);
    CHECK(same.mu_bar == doctest::Approx(d.mu).epsilon(1e-15));
    CHECK(same.alpha == d.alpha);

    CHECK_THROWS(derive_p_params(mk, {0.0, 2.86, 0.0}, d));
    CHECK_THROWS(derive_p_params(mk, {0.0, 0.0, 1.0}, d));
}

TEST_CASE("parameter validation") {
    MarketParamsQ mk;
    CHECK_NOTHROW(mk.validate());
    mk.rho = 1.5;
    CHECK_THROWS_AS(mk.validate(), ConfigError);
    mk = {};
    mk.delta = -1.0;
    CHECK_THROWS_AS(mk.validate(), ConfigError);
    mk = {};
    mk.kappa = 0.0;
    CHECK_THROWS_AS(mk.validate(), ConfigError);
    FeeStructure f;
    f.m = -0.1;
    CHECK_THROWS_AS(f.validate(), ConfigError);
}

TEST_CASE("contract schedules") {
    const ContractSpec base = ContractSpec::constant_rate(100.0, 7.0);
    CHECK(base.maturity() == doctest::Approx(100.0 / 7.0).epsilon(1e-14));
    CHECK(base.total_withdrawals() == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(base.withdrawal_rate(3.0) == 7.0);
    CHECK(base.withdrawal_rate(base.maturity()) == 7.0);

    std::vector<double> deferred(10, 0.0);
    for (int i = 0; i < 10; ++i) deferred.push_back(10.0);
    const ContractSpec d = ContractSpec::yearly(100.0, deferred);
    CHECK_NOTHROW(d.validate());
    CHECK(d.maturity() == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(d.withdrawal_rate(9.999) == 0.0);
    CHECK(d.withdrawal_rate(10.0) == 10.0);

    CHECK_THROWS_AS(ContractSpec::yearly(100.0, {7.0, 7.0}).validate(), ConfigError);
    CHECK_THROWS_AS(ContractSpec::yearly(100.0, {-1.0, 101.0}).validate(), ConfigError);
    const ContractSpec acc = ContractSpec::accumulation(100.0, 2.5);
    CHECK_NOTHROW(acc.validate());
    CHECK(acc.maturity() == 2.5);
    CHECK(acc.withdrawal_rate(1.0) == 0.0);
}
