import numpy as np
import pytest

from crestwave.errors import HolomorphicityError
from crestwave.evolution import compute_derived, validate_state
from crestwave.initial_data import (
    CrestSpec,
    _binomial_series,
    crest_data,
    estimate_M,
    mollify_data,
)
from crestwave.spectral import make_grid

RNG = np.random.default_rng(52)


def test_crest_spec_validation():
    with pytest.raises(ValueError):
        CrestSpec(nu=0.7)
    with pytest.raises(ValueError):
        CrestSpec(nu=0.5)
    with pytest.raises(ValueError):
        CrestSpec(nu=0.3, regularization_delta=-0.1)
    with pytest.raises(ValueError):
        CrestSpec(nu=0.3, velocity_mode=1)


def test_degenerate_exponent_limit_is_flat():
    # nu -> 1 corresponds to exponent 0: the series collapses to 1
    coef = _binomial_series(0.0, 32)
    assert coef[0] == 1.0
    assert np.max(np.abs(coef[1:])) == 0.0
    coef2 = _binomial_series(-1e-12, 32)
    assert np.max(np.abs(coef2[1:])) < 1e-10


def test_crest_holomorphic_by_construction():
    g = make_grid(1024)
    st = crest_data(CrestSpec(nu=0.35, velocity_amplitude=0.03j), g)
    assert g.positive_mode_mass(st.Zp - 1.0) < 1e-10
    assert g.positive_mode_mass(np.conj(st.Zt)) < 1e-12
    assert abs(np.mean(st.Zp) - 1.0) < 1e-13
    assert np.max(np.abs(g.deriv(st.Zdev) - (st.Zp - 1.0))) < 1e-10


def test_crest_local_slope():
    g = make_grid(2048)
    nu = 0.35
    st = crest_data(CrestSpec(nu=nu, regularization_delta=0.0), g)
    ac = 0.5 * g.dx
    r = np.abs(g.nodes - ac)
    sel = (r > 20 * g.dx) & (r < 0.3)
    slope = np.polyfit(np.log(r[sel]), np.log(np.abs(st.Zp[sel])), 1)[0]
    assert abs(slope - (nu - 1.0)) < 0.03 * abs(nu - 1.0)


def test_crest_state_invariants():
    g = make_grid(512)
    for delta in (0.05, 0.0):
        st = crest_data(CrestSpec(nu=0.3, regularization_delta=delta), g)
        assert float(np.min(np.abs(st.Zp))) > 0.1
        diag = validate_state(st, tol=1e-8)
        assert diag.holo_residual_Zp < 1e-10


def test_mollify_identity_and_semigroup():
    g = make_grid(512)
    st = crest_data(CrestSpec(nu=0.4, regularization_delta=0.1,
                              velocity_amplitude=0.02j), g)
    same = mollify_data(st, 0.0)
    assert np.max(np.abs(same.Zp - st.Zp)) < 1e-12
    one = mollify_data(mollify_data(st, 0.07), 0.13)
    two = mollify_data(st, 0.2)
    assert np.max(np.abs(one.Zp - two.Zp)) < 1e-12
    assert np.max(np.abs(one.Zt - two.Zt)) < 1e-12


def test_mollified_crest_regular_and_curvature_growth():
    g = make_grid(2048)
    st = crest_data(CrestSpec(nu=0.35), g)
    kappas = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        stm = mollify_data(st, eps)
        assert float(np.min(np.abs(stm.Zp))) > 0.0
        der = compute_derived(stm)
        kappas.append(float(np.max(np.abs(der.Theta.real))))
    assert all(kappas[i] < kappas[i + 1] for i in range(len(kappas) - 1))


def test_estimate_m_flat_zero():
    g = make_grid(256)
    from crestwave.evolution import flat_state

    m = estimate_M(flat_state(g))
    assert m.total == 0.0


def test_estimate_m_single_mode_decay():
    g = make_grid(256)
    mu = 0.05
    Zp = 1.0 + mu * np.exp(-1j * g.nodes)
    from crestwave.evolution import make_state

    st = make_state(g, 1j * mu * np.exp(-1j * g.nodes), Zp, np.zeros(256, complex), 0.0)
    m = estimate_M(st, depth_ladder=[-1.0])
    # at depth y the mode carries e^{-|y|}; 1/Psi - 1 = -mu e^{-1} e^{-ia} + O(mu^2)
    expect = mu * np.exp(-1.0) * np.sqrt(2 * np.pi)
    assert abs(m.components["invPsi_minus1_L2"] - expect) < 20 * mu ** 2


def test_estimate_m_crest_growth_and_ladder_monotonicity():
    g = make_grid(1024)
    totals = []
    for delta in (0.1, 0.03, 0.01):
        st = crest_data(CrestSpec(nu=0.35, regularization_delta=delta), g)
        m = estimate_M(st)
        assert np.isfinite(m.total)
        totals.append(m.total)
    assert totals[0] < totals[1] < totals[2]
    st = crest_data(CrestSpec(nu=0.35, regularization_delta=0.05), g)
    coarse = estimate_M(st, depth_ladder=[-0.5, -0.125])
    fine = estimate_M(st, depth_ladder=[-0.5, -0.25, -0.125, -0.0625])
    assert fine.total >= coarse.total - 1e-12


def test_estimate_m_rejects_nonholomorphic():
    g = make_grid(256)
    from crestwave.evolution import make_state

    Zp = 1.0 + 0.05 * np.exp(2j * g.nodes)
    st = make_state(g, np.zeros(256, complex), Zp, np.zeros(256, complex), 0.0)
    with pytest.raises(HolomorphicityError):
        estimate_M(st)
