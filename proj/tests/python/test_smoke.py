import math

import pytest

import womops


def test_solve_m1_table7():
    sol = womops.solve_m1(450, {"market": {"tau": 2}})
    assert sol["case"] == "II"
    assert sol["policy"]["t3"] == pytest.approx(1.4907, abs=1e-4)
    assert sol["kkt_residual"] < 1e-6


def test_solve_m2_with_recovery():
    sol = womops.solve_m2({"market": {"tau": 2}}, recovery=True)
    assert sol["recovery"]["label"] == "Non-opt-Eq"
    assert sol["recovery"]["shortfall"] == pytest.approx(0.29, abs=0.02)


def test_simulate_cycle():
    trace = womops.simulate({"market": {"tau": 2}, "response": {"c2": 3}}, iters=10)
    assert len(trace["iterations"]) == 11
    assert trace["classification"]["kind"] == "Cycle2"
    assert trace["iterations"][1]["lambda_p"] == pytest.approx(186.34, abs=0.005)


def test_closed_form_boundary():
    cf = womops.closed_form_t3({"market": {"tau": 5}}, fee=10)
    assert cf["t3"] == pytest.approx(2.7508, abs=1e-3)
    with pytest.raises(womops.RegimeViolation):
        womops.closed_form_t3({"market": {"tau": 1}}, fee=10)


def test_potential_market():
    assert womops.potential_market("linear", 100, 1, 5, 10) == pytest.approx(450)
    assert womops.potential_market("logarithmic", 20, 101, 5, 10) == pytest.approx(100 * math.log(91))
    with pytest.raises(womops.InvalidParams):
        womops.potential_market("cubic", 1, 1, 1, 1)


def test_config_errors_name_the_field():
    with pytest.raises(womops.ConfigError, match="market.K"):
        womops.solve_m2({"market": {"K": "lots"}})
