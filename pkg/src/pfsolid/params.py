"""Model parameters for both solidification families.

Pure-melt parameters are already non-dimensional. Alloy parameters start
from dimensional material properties and are reduced to the non-dimensional
set used by the solver (capillary length, diffusivity ratio, pulling
velocity, thermal length, characteristic time, coupling constant).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class ParameterError(ValueError):
    """A model parameter violates its admissible range; names the parameter."""


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ParameterError(f"{name}: {msg}")


@dataclass(frozen=True)
class PureMeltParams:
    """Non-dimensional inputs for the undercooled pure-melt model.

    ``delta`` is the signed initial value of the scaled temperature in the
    melt (e.g. -0.75), ``xi`` couples the temperature into the double well,
    ``fold`` selects four- or six-fold interface anisotropy.
    """

    D: float = 1.0
    eps4: float = 0.05
    lambda0: float = 1.0
    tau0: float = 1.0
    xi: float = 1.6
    delta: float = -0.75
    fold: int = 4


def validate_pure_melt(p: PureMeltParams) -> PureMeltParams:
    """Return ``p`` unchanged if every invariant holds, else raise."""
    _require(p.D > 0, "D", f"must be > 0, got {p.D}")
    _require(p.lambda0 > 0, "lambda0", f"must be > 0, got {p.lambda0}")
    _require(p.tau0 > 0, "tau0", f"must be > 0, got {p.tau0}")
    _require(p.xi > 0, "xi", f"must be > 0, got {p.xi}")
    # 1 - 3*eps4 is the prefactor of the anisotropy function and must stay positive
    _require(0.0 <= p.eps4 < 1.0 / 3.0, "eps4", f"must lie in [0, 1/3), got {p.eps4}")
    _require(p.fold in (4, 6), "fold", f"must be 4 or 6, got {p.fold}")
    return p


@dataclass(frozen=True)
class AlloyMaterial:
    """Dimensional material properties of a dilute binary alloy.

    Units: diffusivities m^2/s, gibbs_thomson m*K, m_l K/wt%, c0 wt%,
    G K/m, v_p m/s, lambda0 m. a1 and a2 are the thin-interface model
    constants. Defaults are the Al-4wt%Cu data set.
    """

    D_l: float = 2.4e-9
    D_s: float = 1.15e-12
    k: float = 0.14
    eps4: float = 0.05
    gibbs_thomson: float = 2.36e-7
    m_l: float = -3.5
    c0: float = 4.0
    G: float = 3700.0
    v_p: float = 1.35e-5
    lambda0: float = 1.058e-6
    a1: float = 0.8839
    a2: float = 0.6267

    def validate(self) -> "AlloyMaterial":
        _require(self.D_l > 0, "D_l", f"must be > 0, got {self.D_l}")
        _require(self.D_s >= 0, "D_s", f"must be >= 0, got {self.D_s}")
        _require(0.0 < self.k < 1.0, "k", f"must lie in (0, 1), got {self.k}")
        _require(0.0 <= self.eps4 < 1.0 / 3.0, "eps4", f"must lie in [0, 1/3), got {self.eps4}")
        _require(self.gibbs_thomson > 0, "gibbs_thomson", f"must be > 0, got {self.gibbs_thomson}")
        _require(self.m_l < 0, "m_l", f"must be < 0, got {self.m_l}")
        _require(self.c0 > 0, "c0", f"must be > 0, got {self.c0}")
        _require(self.G > 0, "G", f"must be > 0, got {self.G}")
        _require(self.v_p >= 0, "v_p", f"must be >= 0, got {self.v_p}")
        _require(self.lambda0 > 0, "lambda0", f"must be > 0, got {self.lambda0}")
        _require(self.a1 > 0, "a1", f"must be > 0, got {self.a1}")
        _require(self.a2 > 0, "a2", f"must be > 0, got {self.a2}")
        return self


@dataclass(frozen=True)
class AlloyParams:
    """Non-dimensional alloy parameter set consumed by the solver.

    Lengths are measured in units of the interface thickness and times in
    units of ``tau0``; see :func:`derive_alloy_params` for the reduction.
    ``lT_nd`` may be ``inf`` to disable the thermal-gradient tilt (free
    growth, G -> 0).
    """

    d0: float
    Xi: float
    D_nd: float
    Ds_over_Dl: float
    v_nd: float
    lT_nd: float
    tau0: float
    xi: float
    k: float
    eps4: float
    use_ohno_matsuura: bool = False
    fold: int = field(default=4)


def derive_alloy_params(mat: AlloyMaterial, use_ohno_matsuura: bool = False) -> AlloyParams:
    """Reduce dimensional alloy properties to the solver's non-dimensional set.

    The chemical capillary length uses the magnitude of the liquidus slope,
    so d0 > 0 for any admissible material. Pure function: equal inputs give
    bitwise-equal outputs.
    """
    mat.validate()
    d0 = mat.k * mat.gibbs_thomson / (abs(mat.m_l) * mat.c0 * (1.0 - mat.k))
    Xi = mat.lambda0 / d0
    _require(Xi > 1, "lambda0", f"diffuse interface must exceed capillary length, got ratio {Xi}")
    xi = mat.a1 * Xi
    tau0 = mat.a1 * mat.a2 * xi * mat.lambda0**2 / mat.D_l
    D_nd = mat.D_l * tau0 / mat.lambda0**2
    v_nd = mat.v_p * tau0 / mat.lambda0
    lT_nd = abs(mat.m_l) * (1.0 - mat.k) * mat.c0 / (mat.k * mat.G * mat.lambda0)
    return AlloyParams(
        d0=d0,
        Xi=Xi,
        D_nd=D_nd,
        Ds_over_Dl=mat.D_s / mat.D_l,
        v_nd=v_nd,
        lT_nd=lT_nd,
        tau0=tau0,
        xi=xi,
        k=mat.k,
        eps4=mat.eps4,
        use_ohno_matsuura=use_ohno_matsuura,
    )


def free_growth(params: AlloyParams) -> AlloyParams:
    """Variant of ``params`` with the directional constraints removed (G=0, v=0)."""
    return replace(params, v_nd=0.0, lT_nd=float("inf"))
