import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from qkramers import CubicPotential, DomainError


def test_paper_geometry(potential):
    # stationary points by root finding, independent of the closed forms
    xb = optimize.brentq(lambda x: potential.derivative(x, 1), 1.0, 10.0)
    assert potential.xb == pytest.approx(xb, rel=1e-12)
    assert potential.b_bar == pytest.approx(1.23310, abs=1e-5)
    assert potential.xb == pytest.approx(4.93241, abs=2e-5)
    assert potential.omega0_sq == pytest.approx(2.46621, abs=1e-5)
    assert potential.omegab_sq == pytest.approx(2.46621, abs=1e-5)


def test_barrier_height_is_ten(potential):
    assert potential(potential.xb) - potential(0.0) == pytest.approx(10.0, abs=1e-9)
    assert potential.e_act_closed == pytest.approx(10.0, rel=1e-12)


def test_small_energy_limit():
    p = CubicPotential.from_energy(0.5, 1e-12)
    assert p.b_bar < 1e-3 and p.xb < 1e-2


def test_derivatives(potential):
    assert potential.derivative(potential.x0, 1) == 0
    assert potential.derivative(potential.xb, 1) == pytest.approx(0, abs=1e-12)
    assert potential.derivative(0.0, 2) == pytest.approx(2 * potential.b_bar)
    assert potential.derivative(potential.xb, 2) == pytest.approx(-2 * potential.b_bar)
    for x in (-3.0, 0.0, 2.5, 7.0):
        assert potential.derivative(x, 3) == -1.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.05, 5.0), e=st.floats(0.1, 100.0))
def test_energy_round_trip(a, e):
    p = CubicPotential.from_energy(a, e)
    assert p.e_act == pytest.approx(e, rel=1e-12)
    assert p.omega0_sq > 0 and p.omegab_sq > 0
    assert p.omega0_sq == pytest.approx(p.omegab_sq, rel=1e-12)


def test_json_exactly_one_of_energy_or_b():
    assert CubicPotential.from_json('{"a_bar": 0.5, "e_act": 10}').e_act == pytest.approx(10)
    assert CubicPotential.from_json('{"a_bar": 0.5, "b_bar": 1.0}').b_bar == 1.0
    with pytest.raises(DomainError):
        CubicPotential.from_dict({"a_bar": 0.5, "e_act": 10, "b_bar": 1})
    with pytest.raises(DomainError):
        CubicPotential.from_dict({"a_bar": 0.5})


def test_invalid_coefficients():
    with pytest.raises(DomainError):
        CubicPotential(-1.0, 1.0)
