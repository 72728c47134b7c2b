import numpy as np
from dataclasses import replace

from crestwave.energies import (
    energy_aux,
    energy_delta,
    energy_high,
    energy_sigma,
    f_delta_norm,
    weighted_norm,
    write_reports_csv,
)
from crestwave.evolution import compute_derived, flat_state, make_state, refine_state
from crestwave.pair import init_pair
from crestwave.spectral import make_grid

from helpers import random_real_field, random_smooth_state

RNG = np.random.default_rng(404)
TWO_PI = 2 * np.pi


# -- weighted norms ---------------------------------------------------------------


def test_norm_examples():
    g = make_grid(128)
    st = flat_state(g)
    mode = np.exp(2j * g.nodes)
    assert abs(weighted_norm(st, mode, "Hhalf") ** 2 - 2 * TWO_PI) < 1e-12
    const = (3 - 4j) * np.ones(128)
    assert weighted_norm(st, const, "Hhalf") < 1e-12
    assert abs(weighted_norm(st, const, "Linf") - 5.0) < 1e-14
    d = compute_derived(st)
    assert abs(weighted_norm(st, d.omega, "Wspace") - 1.0) < 1e-13


def test_wspace_product_inequality():
    # ||w1 w2||_W <= ||w1||_W ||w2||_W pointwise product rule gives this
    g = make_grid(128)
    st = random_smooth_state(g, RNG, amp=0.2)
    for _ in range(50):
        w1 = g.dealias(random_real_field(g, RNG, 5, 0.8) + 1j * random_real_field(g, RNG, 5, 0.8))
        w2 = g.dealias(random_real_field(g, RNG, 5, 0.8) + 1j * random_real_field(g, RNG, 5, 0.8))
        lhs = weighted_norm(st, w1 * w2, "Wspace")
        rhs = weighted_norm(st, w1, "Wspace") * weighted_norm(st, w2, "Wspace")
        assert lhs <= rhs * (1 + 1e-9)


def test_linfty_hhalf_weighted_interpolation():
    # ||f||_inf^2 <= C ||f/w||_2 ||w f'||_2 with weights away from zero
    g = make_grid(256)
    ratios = []
    for _ in range(60):
        f = g.dealias(random_real_field(g, RNG, 8, 1.0) + 1j * random_real_field(g, RNG, 8, 1.0))
        w = 1.0 + 0.6 * np.sin(g.nodes + RNG.uniform(0, TWO_PI))
        num = g.linf_norm(f) ** 2
        den = g.l2_norm(f / w) * g.l2_norm(w * g.deriv(f))
        if den > 1e-14:
            ratios.append(num / den)
    print(f"\n  Linf-Hhalf interpolation constant over ensemble: {max(ratios):.3f}")
    assert max(ratios) < 10.0


# -- single-state energies -----------------------------------------------------------


def test_flat_energies_vanish():
    g = make_grid(128)
    for fam in (energy_sigma, energy_high, energy_aux):
        rep = fam(flat_state(g, sigma=0.02))
        assert rep.total == 0.0


def test_sigma_zero_leaves_four_terms():
    g = make_grid(128)
    st = random_smooth_state(g, RNG, sigma=0.0)
    rep = energy_sigma(st)
    nonzero = {k for k, v in rep.components.items() if v > 1e-20}
    assert nonzero == {
        "dap_invZp_L2sq",
        "invZp_dap_invZp_Hhalfsq",
        "Ztapbar_L2sq",
        "invZp2_dap_Ztapbar_L2sq",
    }


def test_sigma_energy_monotone_in_sigma():
    g = make_grid(128)
    st = random_smooth_state(g, RNG, sigma=0.0)
    values = []
    for s in (0.0, 1e-4, 1e-3, 1e-2, 1e-1):
        values.append(energy_sigma(replace(st, sigma=s)).total)
    assert all(values[i] <= values[i + 1] for i in range(len(values) - 1))


def test_energy_high_single_mode_frozen_values():
    g = make_grid(128)
    delta = 0.1 - 0.05j
    Zt = np.conj(delta * np.exp(-1j * g.nodes))
    st = make_state(g, np.zeros(128, complex), np.ones(128, complex), Zt, 0.0)
    rep = energy_high(st)
    mag = abs(delta) ** 2 * TWO_PI
    assert abs(rep.components["Ztapbar_L2sq"] - mag) < 1e-13
    assert abs(rep.components["invZp2_dap_Ztapbar_L2sq"] - mag) < 1e-13
    assert abs(rep.components["invZp3_dap_Ztapbar_Hhalfsq"] - mag) < 1e-13
    assert rep.components["dap_invZp_L2sq"] == 0.0


def test_energy_aux_term_structure():
    g = make_grid(128)
    st = random_smooth_state(g, RNG, sigma=0.0)
    st = replace(st, Zt=np.zeros(128, complex))
    rep = energy_aux(st)
    for name in ("invZp12_dap_Ztapbar_L2sq", "invZp52_dap2_Ztapbar_L2sq",
                 "invZp72_dap2_Ztapbar_Hhalfsq"):
        assert rep.components[name] == 0.0
    for name in ("Zp12_dap_invZp_Linfsq", "invZp12_dap2_invZp_L2sq",
                 "invZp52_dap3_invZp_L2sq"):
        assert rep.components[name] > 0.0


def test_spectral_convergence_on_refinement():
    g = make_grid(128)
    st = random_smooth_state(g, np.random.default_rng(7001), sigma=1e-2, amp=0.08)
    st2 = refine_state(st, 256)
    for fam in (energy_sigma, energy_high, energy_aux):
        a = fam(st)
        b = fam(st2)
        for k in a.components:
            va, vb = a.components[k], b.components[k]
            assert abs(va - vb) <= 1e-8 * max(1.0, abs(va)), (fam.__name__, k, va, vb)


# -- pair energies --------------------------------------------------------------------


def test_identical_pair_zero_delta_energy():
    g = make_grid(128)
    st = random_smooth_state(g, RNG, sigma=0.0)
    pair = init_pair(st, replace(st, sigma=0.0))
    rep = energy_delta(pair)
    assert rep.total < 1e-25
    repf = f_delta_norm(pair)
    assert repf.total < 1e-12


def test_identical_data_sigma_weighted_terms_only():
    g = make_grid(128)
    st = random_smooth_state(g, RNG, sigma=0.0)
    pair = init_pair(replace(st, sigma=1e-3), st)
    rep = energy_delta(pair)
    for name, val in rep.components.items():
        if name.startswith(("d1_a_", "d2_a_", "coupling")):
            assert val > 0.0, name
        else:
            assert val < 1e-25, name
    aux_b = energy_aux(pair.state_b).total
    assert abs(rep.components["coupling_sigma_aux_b"] - 1e-3 * aux_b) < 1e-15 * aux_b


def test_f_delta_velocity_mode_closed_forms():
    # b-solution differs by Zbar_t = delta e^{-ia}; leading-order components
    g = make_grid(128)
    delta = 1e-3
    st_a = flat_state(g, 0.0)
    Zt = np.conj(delta * np.exp(-1j * g.nodes))
    st_b = make_state(g, np.zeros(128, complex), np.ones(128, complex), Zt, 0.0)
    rep = f_delta_norm(init_pair(st_a, st_b))
    c = rep.components
    tol = 20 * delta ** 2
    assert abs(c["fd_delta_Zt_Hhalf"] - delta * np.sqrt(TWO_PI)) < tol
    assert abs(c["fd_delta_DapZt_L2"] - delta * np.sqrt(TWO_PI)) < tol
    assert abs(c["fd_delta_bap_L2"] - 2 * delta * np.sqrt(np.pi)) < tol
    assert abs(c["fd_delta_A1_L2"] - delta ** 2 * np.sqrt(TWO_PI)) < 1e-12
    assert c["fd_delta_Ztt_Hhalf"] < 1e-10
    assert c["fd_delta_invZp_Hhalf"] < 1e-12
    assert c["fd_delta_halpha_L2"] < 1e-10


def test_csv_round_trip(tmp_path):
    g = make_grid(64)
    st = random_smooth_state(g, RNG, sigma=1e-2, amp=0.1)
    reports = [energy_sigma(st)]
    path = tmp_path / "energy_sigma.csv"
    write_reports_csv(path, reports)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# crestwave-csv v1 family=sigma")
    header = lines[1].split(",")
    row = lines[2].split(",")
    assert header[0] == "time" and header[-1] == "total"
    assert len(header) == len(row) == 2 + len(reports[0].components)
    assert abs(float(row[-1]) - reports[0].total) < 1e-15