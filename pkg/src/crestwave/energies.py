"""Weighted norms and the energy functionals.

Families:

* ``sigma``   capillary-gravity energy; thirteen weighted terms (nine in the
              first group, four velocity terms), sigma-weighted ones vanish
              identically at sigma = 0
* ``high``    higher-order energy of the zero-surface-tension solution
* ``aux``     auxiliary zero-surface-tension energy (the coupling partner)
* ``delta``   difference energy between a sigma > 0 solution (a) and a
              sigma = 0 solution (b), subtracted in Lagrangian labels via
              Delta(f) = f_a - U(f_b), plus the coupling term sigma * aux(b)
* ``f_delta`` uniqueness-grade difference norm (seven first-power terms)

Every report carries its named components separately; totals are sums of
the stored components.  Fractional powers of Z_ap use the continuous
branch of log Z_ap carried by the state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateJacobianError
from .evolution import ABS_ZP_FLOOR, compute_derived

NORM_KINDS = ("L2", "Hhalf", "Linf", "Wspace", "Cspace")
FAMILIES = ("sigma", "high", "aux", "delta", "f_delta")


@dataclass
class EnergyReport:
    family: str
    time: float
    components: dict = field(default_factory=dict)

    @property
    def total(self):
        return float(sum(self.components.values()))

    def csv_header(self):
        return "time," + ",".join(self.components) + ",total"

    def csv_row(self, fmt="%.17g"):
        vals = [self.time, *self.components.values(), self.total]
        return ",".join(fmt % v for v in vals)

    def to_json_dict(self):
        return {
            "family": self.family,
            "time": self.time,
            "components": {k: float(v) for k, v in self.components.items()},
            "total": self.total,
        }


def weighted_norm(state, f, kind):
    """Norm of a field, possibly weighted by the interface geometry.

    Wspace: ||f||_inf + ||(1/|Z_ap|) d_a f||_2.
    Cspace: ||f||_{H^1/2} + (1 + ||d_a (1/|Z_ap|)||_2) ||f |Z_ap|||_2.
    """
    grid = state.grid
    if kind == "L2":
        return grid.l2_norm(f)
    if kind == "Hhalf":
        return grid.hhalf_norm(f)
    if kind == "Linf":
        return grid.sup_norm(f)
    abs_Zp = np.abs(state.Zp)
    if float(abs_Zp.min()) < ABS_ZP_FLOOR:
        raise DegenerateJacobianError("degenerate |Z_ap| weight in norm")
    if kind == "Wspace":
        return grid.sup_norm(f) + grid.l2_norm(grid.deriv(f) / abs_Zp)
    if kind == "Cspace":
        wfac = 1.0 + grid.l2_norm(grid.deriv(1.0 / abs_Zp))
        return grid.hhalf_norm(f) + wfac * grid.l2_norm(f * abs_Zp)
    raise ValueError(f"unknown norm kind {kind!r}")


def _state_blocks(state):
    """Shared ingredients of all families for one state.

    The numerical solution lives on the dealiased band, so every nonlinear
    ingredient is rebuilt band-limited before derivatives are taken: the
    ringing that pointwise division leaves above the filter cutoff is
    representation debris, and the k^3-amplified weighted norms would
    otherwise be dominated by it on marginally resolved states.
    """
    grid = state.grid
    Zp_band = 1.0 + grid.dealias(state.Zp - 1.0)
    raw_angle = np.angle(Zp_band)
    g_band = raw_angle + 2.0 * np.pi * np.round((state.g - raw_angle) / (2.0 * np.pi))
    log_Zp = np.log(np.abs(Zp_band)) + 1j * g_band
    inv = grid.dealias(1.0 / Zp_band)
    d1 = grid.deriv(inv)
    d2 = grid.deriv(d1)
    d3 = grid.deriv(d2)
    Ztb1 = grid.dealias(grid.deriv(np.conj(state.Zt)))
    Ztb2 = grid.deriv(Ztb1)
    Ztb3 = grid.deriv(Ztb2)
    omega = Zp_band / np.abs(Zp_band)
    q = omega * d1
    Theta = 1j * q - 1j * (q - grid.hilbert(q)).real
    return {
        "grid": grid,
        "inv": inv,
        "d1": d1,
        "d2": d2,
        "d3": d3,
        "Ztb1": Ztb1,
        "Ztb2": Ztb2,
        "Ztb3": Ztb3,
        "omega": omega,
        "Theta": Theta,
        "pow": lambda p: np.exp(p * log_Zp),
    }


def energy_sigma(state):
    """The thirteen-term capillary-gravity energy of one solution."""
    s = state.sigma
    B = _state_blocks(state)
    grid, inv, d1, d2, d3 = B["grid"], B["inv"], B["d1"], B["d2"], B["d3"]
    pw = B["pow"]
    dTheta = grid.deriv(B["Theta"])
    comp = {
        "dap_invZp_L2sq": grid.l2_norm(d1) ** 2,
        "invZp_dap_invZp_Hhalfsq": grid.hhalf_norm(inv * d1) ** 2,
        "sigma_dap_Theta_Hhalfsq": grid.hhalf_norm(s * dTheta) ** 2,
        "sigma16_Zp12_dap_invZp_L2p6": grid.l2_norm(s ** (1 / 6) * pw(0.5) * d1) ** 6,
        "sigma12_Zp12_dap_invZp_Linfsq": grid.sup_norm(np.sqrt(s) * pw(0.5) * d1) ** 2,
        "sigma12_invZp12_dap2_invZp_L2sq": grid.l2_norm(np.sqrt(s) * pw(-0.5) * d2) ** 2,
        "sigma12_invZp32_dap2_invZp_Hhalfsq": grid.hhalf_norm(np.sqrt(s) * pw(-1.5) * d2) ** 2,
        "sigma_invZp_dap3_invZp_L2sq": grid.l2_norm(s * inv * d3) ** 2,
        "sigma_invZp2_dap3_invZp_Hhalfsq": grid.hhalf_norm(s * pw(-2.0) * d3) ** 2,
        "Ztapbar_L2sq": grid.l2_norm(B["Ztb1"]) ** 2,
        "invZp2_dap_Ztapbar_L2sq": grid.l2_norm(pw(-2.0) * B["Ztb2"]) ** 2,
        "sigma12_invZp12_dap_Ztapbar_L2sq": grid.l2_norm(np.sqrt(s) * pw(-0.5) * B["Ztb2"]) ** 2,
        "sigma12_invZp52_dap2_Ztapbar_L2sq": grid.l2_norm(np.sqrt(s) * pw(-2.5) * B["Ztb3"]) ** 2,
    }
    return EnergyReport("sigma", state.time, comp)


def energy_high(state):
    """Five-term higher-order energy for zero surface tension."""
    B = _state_blocks(state)
    grid, pw = B["grid"], B["pow"]
    comp = {
        "dap_invZp_L2sq": grid.l2_norm(B["d1"]) ** 2,
        "invZp2_dap2_invZp_L2sq": grid.l2_norm(pw(-2.0) * B["d2"]) ** 2,
        "Ztapbar_L2sq": grid.l2_norm(B["Ztb1"]) ** 2,
        "invZp2_dap_Ztapbar_L2sq": grid.l2_norm(pw(-2.0) * B["Ztb2"]) ** 2,
        "invZp3_dap_Ztapbar_Hhalfsq": grid.hhalf_norm(pw(-3.0) * B["Ztb2"]) ** 2,
    }
    return EnergyReport("high", state.time, comp)


def energy_aux(state):
    """Six-term auxiliary energy for the zero-surface-tension solution."""
    B = _state_blocks(state)
    grid, pw = B["grid"], B["pow"]
    comp = {
        "Zp12_dap_invZp_Linfsq": grid.sup_norm(pw(0.5) * B["d1"]) ** 2,
        "invZp12_dap2_invZp_L2sq": grid.l2_norm(pw(-0.5) * B["d2"]) ** 2,
        "invZp52_dap3_invZp_L2sq": grid.l2_norm(pw(-2.5) * B["d3"]) ** 2,
        "invZp12_dap_Ztapbar_L2sq": grid.l2_norm(pw(-0.5) * B["Ztb2"]) ** 2,
        "invZp52_dap2_Ztapbar_L2sq": grid.l2_norm(pw(-2.5) * B["Ztb3"]) ** 2,
        "invZp72_dap2_Ztapbar_Hhalfsq": grid.hhalf_norm(pw(-3.5) * B["Ztb3"]) ** 2,
    }
    return EnergyReport("aux", state.time, comp)


# term names of energy_sigma reused verbatim for the sigma-weighted part of
# the difference energy (solution a only), in the order of the display
_DELTA1_SIGMA_TERMS = (
    "sigma16_Zp12_dap_invZp_L2p6",
    "sigma12_Zp12_dap_invZp_Linfsq",
    "sigma12_invZp12_dap2_invZp_L2sq",
    "sigma12_invZp32_dap2_invZp_Hhalfsq",
    "sigma_dap_Theta_Hhalfsq",
    "sigma_invZp_dap3_invZp_L2sq",
    "sigma_invZp2_dap3_invZp_Hhalfsq",
)
_DELTA2_SIGMA_TERMS = (
    "sigma12_invZp12_dap_Ztapbar_L2sq",
    "sigma12_invZp52_dap2_Ztapbar_L2sq",
)


def energy_delta(pair):
    """Full difference energy for a (sigma, 0) solution pair.

    Delta-terms subtract in Lagrangian labels through the composed map
    (Delta(f) = f_a - f_b o htilde); the htilde-terms live on the composed
    map itself, and the coupling term is sigma_a times the auxiliary energy
    of the zero-surface-tension solution.
    """
    a, b = pair.state_a, pair.state_b
    grid = a.grid
    Ba = _state_blocks(a)
    Bb = _state_blocks(b)
    htil = pair.map_tilde

    def delta(fa, fb):
        return fa - grid.interpolate(fb, htil.values)

    abs_a = np.abs(a.Zp)
    htil_ap = htil.jacobian()
    dev_j = htil_ap - 1.0

    comp = {
        "d0_delta_omega_Linfsq": grid.sup_norm(delta(Ba["omega"], Bb["omega"])) ** 2,
        "d0_htilap_minus1_LinfHhalfsq": (grid.sup_norm(dev_j + 0j) + grid.hhalf_norm(dev_j)) ** 2,
        "d0_Dapa_htilap_minus1_L2sq": grid.l2_norm(grid.deriv(dev_j) / abs_a) ** 2,
        "d0_absZpa_Util_invabsZpb_minus1_Linfsq": grid.sup_norm(
            abs_a * grid.interpolate_real(1.0 / np.abs(b.Zp), htil.values) - 1.0 + 0j
        )
        ** 2,
        "d1_delta_dap_invZp_L2sq": grid.l2_norm(delta(Ba["d1"], Bb["d1"])) ** 2,
        "d1_delta_invZp_dap_invZp_Hhalfsq": grid.hhalf_norm(
            delta(Ba["inv"] * Ba["d1"], Bb["inv"] * Bb["d1"])
        )
        ** 2,
    }
    sig_a = energy_sigma(a)
    for name in _DELTA1_SIGMA_TERMS:
        comp["d1_a_" + name] = sig_a.components[name]
    comp["d2_delta_Ztapbar_L2sq"] = grid.l2_norm(delta(Ba["Ztb1"], Bb["Ztb1"])) ** 2
    comp["d2_delta_invZp2_dap_Ztapbar_L2sq"] = (
        grid.l2_norm(delta(Ba["pow"](-2.0) * Ba["Ztb2"], Bb["pow"](-2.0) * Bb["Ztb2"])) ** 2
    )
    for name in _DELTA2_SIGMA_TERMS:
        comp["d2_a_" + name] = sig_a.components[name]
    comp["coupling_sigma_aux_b"] = a.sigma * energy_aux(b).total
    return EnergyReport("delta", pair.time, comp)


def f_delta_norm(pair, derived_a=None, derived_b=None):
    """Uniqueness-grade difference norm in the conformal frame of solution a.

    Seven first-power components: H^1/2 of Delta(Z_t), Delta(Z_tt),
    Delta(1/Z_ap); L2 of Delta(h_alpha o h^-1), Delta(D_a Z_t), Delta(A1)
    and Delta(b_ap).
    """
    a, b = pair.state_a, pair.state_b
    grid = a.grid
    der_a = derived_a if derived_a is not None else compute_derived(a)
    der_b = derived_b if derived_b is not None else compute_derived(b)
    htil = pair.map_tilde

    def delta(fa, fb):
        return fa - grid.interpolate(fb, htil.values)

    def lag_jacobian(map_):
        # (h_alpha o h^{-1})(a') evaluated on the grid
        inv = map_.inverse()
        return grid.interpolate_real(map_.jacobian(), inv.values)

    comp = {
        "fd_delta_Zt_Hhalf": grid.hhalf_norm(delta(a.Zt, b.Zt)),
        "fd_delta_Ztt_Hhalf": grid.hhalf_norm(delta(der_a.Ztt, der_b.Ztt)),
        "fd_delta_invZp_Hhalf": grid.hhalf_norm(delta(1.0 / a.Zp, 1.0 / b.Zp)),
        "fd_delta_halpha_L2": grid.l2_norm(
            delta(lag_jacobian(pair.map_a), lag_jacobian(pair.map_b))
        ),
        "fd_delta_DapZt_L2": grid.l2_norm(
            delta(grid.deriv(a.Zt) / a.Zp, grid.deriv(b.Zt) / b.Zp)
        ),
        "fd_delta_A1_L2": grid.l2_norm(delta(der_a.A1, der_b.A1)),
        "fd_delta_bap_L2": grid.l2_norm(delta(der_a.b_ap, der_b.b_ap)),
    }
    return EnergyReport("f_delta", pair.time, comp)


def write_reports_csv(path, reports):
    """One CSV per family: header comment with the schema version, then one
    row per time with the named components in stable order."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to write")
    family = reports[0].family
    with open(path, "w") as fh:
        fh.write(f"# crestwave-csv v1 family={family}\n")
        fh.write(reports[0].csv_header() + "\n")
        for r in reports:
            if r.family != family:
                raise ValueError("mixed families in one CSV")
            fh.write(r.csv_row() + "\n")
