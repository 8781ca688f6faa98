import math

import pytest

import gmwb


def small(n=2000):
    c = gmwb.SimConfig()
    c.n_paths = n
    c.batches = 20
    c.h = 0.02
    c.contract = gmwb.Contract.constant_rate(100.0, 10.0)
    return c


def test_defaults_and_derived_constants():
    c = gmwb.SimConfig()
    assert c.market.nu == 0.18
    assert gmwb.condition_c(c.market)
    f = gmwb.FeeStructure()
    f.c_bar = 0.01
    d = gmwb.derive_constants(c.market, f)
    assert d.n == 2
    assert d.alpha0 == pytest.approx(f.q + f.c_bar + 2.0 * d.phi, rel=1e-12)
    assert d.B == pytest.approx((1.0 - math.exp(-c.market.rho_rev * 30 / 365)) / (c.market.rho_rev * 30 / 365))


def test_contract_schedule():
    k = gmwb.Contract.yearly(100.0, [0, 0, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10])
    assert k.maturity() == pytest.approx(12.0)
    assert k.withdrawal_rate(1.5) == 0.0
    assert k.withdrawal_rate(2.0) == 10.0


def test_net_liability_falls_with_the_fee():
    c = small()
    c.fee.c_bar = 0.005
    lo = gmwb.fee_and_payout(c)
    c.fee.c_bar = 0.03
    hi = gmwb.fee_and_payout(c)
    assert hi.fee.value > lo.fee.value
    assert hi.net.value < lo.net.value
    assert lo.net.std_error > 0.0
    assert gmwb.net_liability(c).value == hi.net.value


def test_runs_repeat_exactly_and_ignore_threads():
    c = small()
    c.fee.c_bar = 0.02
    a = gmwb.net_liability(c)
    c.threads = 4
    b = gmwb.net_liability(c)
    assert a.value == b.value
    assert a.std_error == b.std_error


def test_fair_fee_brackets_zero():
    c = small(4000)
    r = gmwb.fair_base_fee(0.0, c, tol=1e-4, method=gmwb.RootMethod.ILLINOIS)
    assert 0.0 < r.c_bar < 0.05
    assert abs(r.liability.value) < 4.0 * r.liability.std_error + 0.05


def test_loss_summary_under_p():
    c = small()
    c.measure = gmwb.Measure.P
    c.premia = gmwb.RiskPremia(0.6667, -2.0, 1.1414e-3)
    c.fee.c_bar = 0.02
    s = gmwb.loss_summary(c, 0.9)
    assert s.cte.value >= s.var
    samples = gmwb.loss_samples(c)
    total = sum(w for _, w, _ in samples)
    assert sum(x * w for x, w, _ in samples) / total == pytest.approx(s.mean.value, rel=1e-9, abs=1e-9)


def test_euler_reference_is_close():
    c = small(4000)
    c.market.nu = 0.1773
    c.fee.c_bar = 0.02
    a = gmwb.net_liability(c)
    b = gmwb.euler_net_liability(c, 1e-2)
    assert abs(a.value - b.value) < 4.0 * math.hypot(a.std_error, b.std_error) + 0.2


def test_config_errors_raise_value_error():
    with pytest.raises(ValueError):
        gmwb.config_from_json('{"sim": {"n_paths": -1}}')
    c = gmwb.config_from_json('{"sim": {"n_paths": 123}, "market": {"v0": 0.05}}')
    assert c.n_paths == 123
    assert c.market.v0 == 0.05
    c = small()
    c.n_paths = 0
    with pytest.raises(ValueError):
        gmwb.net_liability(c)
