import pytest

from traded_control.errors import ContractError
from traded_control.metrics import (
    SafetyParams,
    compromised_safety,
    rhe_from_flags,
    safety_improvement_from_series,
)

P = SafetyParams(cs_headway=1.0, cs_offset=2.0, relevance_epsilon=1e-6)


def test_cs_examples():
    assert compromised_safety(25.0, 27.0, P) == 0.0
    assert compromised_safety(25.0, 20.0, P) == 7.0
    assert compromised_safety(0.0, 5.0, P) == 0.0


def test_si_hand_case():
    si, t = safety_improvement_from_series([2.0, 2.0], [0.0, 1.0], 1e-6)
    assert t == 2
    assert si == pytest.approx(0.75, abs=1e-12)


def test_si_limits():
    assert safety_improvement_from_series([1.0, 3.0], [0.0, 0.0], 1e-6)[0] == 1.0
    assert safety_improvement_from_series([1.0, 3.0], [1.0, 3.0], 1e-6)[0] == 0.0
    assert safety_improvement_from_series([0.0, 0.0], [1.0, 1.0], 1e-6) == (None, 0)


def test_si_can_be_negative():
    si, _ = safety_improvement_from_series([1.0], [3.0], 1e-6)
    assert si == -2.0


def test_si_ignores_irrelevant_steps():
    si, t = safety_improvement_from_series([0.0, 5e-7, 2.0], [4.0, 4.0, 1.0], 1e-6)
    assert (si, t) == (0.5, 1)


def test_si_misaligned():
    with pytest.raises(ContractError):
        safety_improvement_from_series([1.0], [1.0, 2.0])


def test_rhe_counting():
    fog = [False] * 390 + [True] * 110
    lam = [1.0] * 39 + [0.0] * 351 + [1.0] * 110
    assert rhe_from_flags(lam, fog) == 0.1
    assert rhe_from_flags([1.0] * 500, fog) == 1.0
    assert rhe_from_flags([0.0] * 390 + [1.0] * 110, fog) == 0.0
    assert rhe_from_flags([1.0] * 3, [True] * 3) is None
