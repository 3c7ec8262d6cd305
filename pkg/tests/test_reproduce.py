import pytest

from chiralent import reproduce
from chiralent.reproduce import Check, Report


def test_check_modes():
    assert Check("x", 1.0, 1.05, 0.1).passed is True
    assert Check("x", 1.0, 0.5, 0.0, "le").passed is False
    assert Check("x", 1.0, 0.5, 0.0, "ge").passed is True
    assert Check("x", 1.0, None, None).passed is None
    assert Check("x", 1.0, None, None).line().startswith("info")


def test_report_ignores_informational_rows():
    rep = Report("t", [Check("a", 1.0, None, None), Check("b", 1.0, 1.0, 0.0)])
    assert rep.passed and rep.to_dict()["checks"][0]["passed"] is None
    assert "== t" in rep.text()


@pytest.mark.parametrize("table", ["negativity-theory", "chirality-curve", "werner-c4", "efficiency-count"])
def test_fast_tables_pass(table):
    rep = reproduce.run(table)
    assert rep.passed, rep.text()


def test_separable_bounds_small_sample():
    assert reproduce.run("separable-bounds", n_states=500).passed


def test_efficiency_ratio_is_exact():
    assert reproduce.efficiency_ratio(4) == reproduce.Fraction(16, 3)
    assert reproduce.efficiency_ratio(6) == reproduce.Fraction(36, 5)
