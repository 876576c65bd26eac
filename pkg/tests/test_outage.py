import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import kv

from risfoxh import foxh, simulate
from risfoxh.errors import ConfigurationError, UnsupportedDimensionError
from risfoxh.fading import FadingModel, RisLinkSpec, to_foxh
from risfoxh.outage import OutageResult, build_prop1_params, exact_outage, exact_outage_rice

R = FadingModel.rayleigh()


@pytest.mark.parametrize("rho_db", [-5, 0, 10, 25])
def test_single_rayleigh_closed_form(rho_db):
    rho = 10 ** (rho_db / 10)
    y = math.sqrt(1 / rho)
    ref = 1 - 2 * y * kv(1, 2 * y)
    res = exact_outage(RisLinkSpec.iid(1, R, R, rho, 1.0))
    assert res.method == "exact-multivar-H"
    assert res.probability == pytest.approx(ref, abs=1e-10)


def test_single_element_against_product_density():
    h, g = FadingModel.nakagami(2.0), FadingModel.alpha_mu(1.5, 2.0)
    prod = foxh.product_params(to_foxh(h), to_foxh(g))
    y = 0.6
    ref = integrate.quad(lambda x: foxh.eval(prod, x)[0], 0, y, epsabs=1e-13)[0]
    got = exact_outage(RisLinkSpec(((h, g),), 1 / y ** 2, 1.0)).probability
    assert got == pytest.approx(ref, abs=1e-9)


def test_two_elements_against_convolution():
    # P(X1 + X2 < y) = int_0^y F(y - x) f(x) dx for i.i.d. products of Rayleighs
    y = 1.2
    F = lambda t: 1 - 2 * t * kv(1, 2 * t) if t > 0 else 0.0
    f = lambda t: 4 * t * kv(0, 2 * t)
    ref = integrate.quad(lambda x: F(y - x) * f(x), 0, y, limit=200)[0]
    got = exact_outage(RisLinkSpec.iid(2, R, R, 1 / y ** 2, 1.0)).probability
    assert got == pytest.approx(ref, abs=1e-8)


def test_rice_with_zero_k_matches_rayleigh():
    a = exact_outage_rice(0.0, 0.0, 2, 10.0, 1.0).probability
    b = exact_outage(RisLinkSpec.iid(2, R, R, 10.0, 1.0)).probability
    assert a == pytest.approx(b, abs=1e-10)


def test_rice_series_tagged_and_against_mc():
    res = exact_outage_rice(2.0, 2.0, 2, 10 ** 0.8, 1.0)
    assert res.method == "rice-series"
    link = RisLinkSpec.iid(2, FadingModel.rice(2.0), FadingModel.rice(2.0), 10 ** 0.8, 1.0)
    est = simulate.simulate_outage(link, None, 2_000_000, seed=4)
    assert est.contains(res.probability, z=3.0)


def test_mixed_elements_against_mc():
    link = RisLinkSpec(((R, FadingModel.nakagami(2.0)), (FadingModel.fisher_f(3.0, 4.0), R)), 10.0, 1.0)
    res = exact_outage(link)
    est = simulate.simulate_outage(link, None, 2_000_000, seed=8)
    assert est.contains(res.probability, z=3.0)


@settings(max_examples=8, deadline=None)
@given(st.floats(-5, 20), st.floats(0.5, 5))
def test_monotone_in_snr(rho_db, step):
    link = RisLinkSpec.iid(2, FadingModel.nakagami(1.5), R, 10 ** (rho_db / 10), 1.0)
    lo = exact_outage(link).probability
    hi = exact_outage(link.with_snr(rho=10 ** ((rho_db + step) / 10))).probability
    assert hi <= lo + 1e-10


def test_dimension_guard():
    with pytest.raises(UnsupportedDimensionError):
        exact_outage(RisLinkSpec.iid(4, R, R, 10.0, 1.0))


def test_constant_model_rejected():
    with pytest.raises(ConfigurationError):
        exact_outage(RisLinkSpec.iid(1, FadingModel.constant(), R, 10.0, 1.0))


def test_prop1_params_refuse_rice():
    with pytest.raises(ConfigurationError):
        build_prop1_params(RisLinkSpec.iid(1, FadingModel.rice(1.0), R, 10.0, 1.0))


def test_result_validation():
    with pytest.raises(ValueError):
        OutageResult(1.5, "exact-multivar-H", 0.0)
    with pytest.raises(ValueError):
        OutageResult(0.5, "guess", 0.0)
    with pytest.raises(ValueError):
        OutageResult(0.5, "clt", -1.0)
