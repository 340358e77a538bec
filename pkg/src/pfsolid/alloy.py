"""Semi-discrete residuals for the dilute binary-alloy model.

Supersaturation transport with anti-trapping current plus the order
parameter equation under the frozen-temperature approximation: the tilt
(y - v*t)/l_T shifts both the reaction term and the phi relaxation rate.
Free equiaxed growth is the lT -> inf limit (tilt identically zero).
Residual convention matches pure_melt: mass * d(field)/dt = -res.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .anisotropy import GRAD_CUTOFF_SQ, anisotropy_arrays
from .grid import FieldState, Grid
from .params import AlloyParams
from .pure_melt import AssemblyError, _axis_views, phi_gradient_residual, tau_lumped_mass

ANTITRAP_PREFACTOR = 1.0 / (2.0 * np.sqrt(2.0))


@dataclass
class AlloyResidual:
    res_uc: np.ndarray
    res_phi: np.ndarray
    lumped_mass_uc: np.ndarray
    lumped_mass_phi: np.ndarray
    source_uc: np.ndarray


def composition_from_uc(u_c, phi, c_l0: float, k: float):
    """Physical solute composition from supersaturation and phase."""
    return 0.5 * c_l0 * (1.0 + (1.0 - k) * u_c) * ((1.0 - phi) + k * (1.0 + phi))


def antitrapping_flux(u_c: float, phi: float, dphi_dt: float, grad_phi, k: float) -> np.ndarray:
    """Interface-normal solute flux correction (thin-interface closed form).

    J = 1/(2*sqrt(2)) * (1 + (1-k)*u_c) * dphi_dt * grad_phi/|grad_phi|,
    zero below the gradient regularization cutoff. ``phi`` itself does not
    enter the closed form; it is accepted for interface symmetry with the
    transport coefficients.
    """
    g = np.asarray(grad_phi, dtype=float)
    gsq = float(g @ g)
    if gsq < GRAD_CUTOFF_SQ or dphi_dt == 0.0:
        return np.zeros_like(g)
    return ANTITRAP_PREFACTOR * (1.0 + (1.0 - k) * u_c) * dphi_dt * g / np.sqrt(gsq)


def _tilt(y, params: AlloyParams, time: float):
    if not np.isfinite(params.lT_nd):
        return np.zeros_like(y) if isinstance(y, np.ndarray) else 0.0
    return (y - params.v_nd * time) / params.lT_nd


def _y_coords_flat(grid: Grid) -> np.ndarray:
    y = grid.axis_coords(1)
    if grid.dim == 2:
        return np.broadcast_to(y[:, None], grid.n[::-1]).reshape(-1).copy()
    return np.broadcast_to(y[None, :, None], grid.n[::-1]).reshape(-1).copy()


def _diffusivity(phi, params: AlloyParams):
    base = 0.5 * (1.0 - phi)
    if params.use_ohno_matsuura:
        return params.D_nd * (base + params.k * params.Ds_over_Dl * 0.5 * (1.0 + phi))
    return params.D_nd * base


def alloy_phi_residual(
    state: FieldState, grid: Grid, params: AlloyParams, time: float, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """(res_phi, lumped_mass_phi) of the order-parameter equation at ``state``."""
    phi, uc = state.phi, state.scalar_a
    mass_l = grid.node_volumes()
    y = _y_coords_flat(grid)
    tilt = _tilt(y, params, time)
    one_m = 1.0 - phi * phi
    reaction = phi - phi**3 - params.xi * one_m * one_m * (uc + tilt)
    res_phi = phi_gradient_residual(phi, grid, 1.0, params.eps4, params.fold, workers)
    res_phi = res_phi - mass_l * reaction
    tilt_factor = 1.0 - (1.0 - params.k) * tilt
    if np.min(tilt_factor) <= 0.0:
        raise AssemblyError(
            "phi relaxation factor 1-(1-k)(y-vt)/l_T is non-positive; "
            "domain extends past the liquidus isotherm"
        )
    mass_phi = tilt_factor * tau_lumped_mass(phi, grid, 1.0, 1.0, params.eps4, params.fold)
    return res_phi, mass_phi


def uc_transport_residual(
    phi_flat: np.ndarray,
    uc_flat: np.ndarray,
    grid: Grid,
    params: AlloyParams,
    dphi_dt: np.ndarray | None,
    workers: int = 1,
) -> np.ndarray:
    """Assembled divergence action: diffusion with interpolated diffusivity
    minus the anti-trapping current (flat array)."""
    at_scale = ANTITRAP_PREFACTOR
    if params.use_ohno_matsuura:
        at_scale *= 1.0 - params.k * params.Ds_over_Dl
    with_at = dphi_dt is not None and at_scale != 0.0
    k = params.k
    total = None
    views_u = _axis_views(grid, uc_flat)
    views_p = _axis_views(grid, phi_flat)
    views_r = _axis_views(grid, dphi_dt) if with_at else [None] * len(views_u)
    for (uv, hn, ht, restore), pv, rv in zip(views_u, views_p, views_r):
        pview = pv[0]
        du = K.normal_diff(uv, hn)
        dp = K.normal_diff(pview, hn)
        pmid = K.edge_mean(pview)
        coeff = _diffusivity(pmid, params)
        flux_edge = coeff * du  # per-edge part, shared by both instances
        if with_at:
            umid = K.edge_mean(uv)
            rmid = K.edge_mean(rv[0])
            at_edge = at_scale * (1.0 + (1.0 - k) * umid) * rmid
        if grid.dim == 2:
            w = hn * ht[0] / 2.0
            gt = K.trans_grad_2d(pview, ht[0])
            tx = {}
            for side, rows in ((0, slice(None, -1)), (1, slice(1, None))):
                f = flux_edge[rows]
                if with_at:
                    gn = dp[rows]
                    gsq = gn * gn + gt * gt
                    live = gsq >= GRAD_CUTOFF_SQ
                    inv = np.where(live, 1.0 / np.sqrt(np.where(live, gsq, 1.0)), 0.0)
                    f = f - at_edge[rows] * gn * inv
                tx[side] = w * f
            part = K.combine_flux_2d(tx[0], tx[1], uv.shape) / hn
        else:
            w = hn * ht[0] * ht[1] / 4.0
            g1, g2 = K.trans_grads_3d(pview, ht[0], ht[1])
            m2, m1 = uv.shape[0], uv.shape[1]
            tx = {}
            for b in (0, 1):
                for a in (0, 1):
                    sl = (slice(b, b + m2 - 1), slice(a, a + m1 - 1), slice(None))
                    f = flux_edge[sl]
                    if with_at:
                        gn = dp[sl]
                        gsq = gn * gn + g1[b] * g1[b] + g2[a] * g2[a]
                        live = gsq >= GRAD_CUTOFF_SQ
                        inv = np.where(live, 1.0 / np.sqrt(np.where(live, gsq, 1.0)), 0.0)
                        f = f - at_edge[sl] * gn * inv
                    tx[(b, a)] = w * f
            part = K.combine_flux_3d(tx, uv.shape) / hn
        part = restore(part)
        total = part if total is None else total + part
    return total.reshape(-1)


def uc_mass_and_source(
    phi_new: np.ndarray,
    uc_old: np.ndarray,
    grid: Grid,
    params: AlloyParams,
    dphi_dt: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodal lumped mass ((1+k)/2 - (1-k)phi/2) and solute release source.

    Evaluating the mass factor at the end-of-step phi and the release
    factor at the old u_c makes the discrete solute integral telescoping,
    so zero-flux conservation of int(c) holds to rounding.
    """
    k = params.k
    mass_l = grid.node_volumes()
    mass_uc = mass_l * (0.5 * (1.0 + k) - 0.5 * (1.0 - k) * phi_new)
    if dphi_dt is None:
        source = np.zeros_like(mass_uc)
    else:
        source = mass_l * (1.0 + (1.0 - k) * uc_old) * 0.5 * dphi_dt
    return mass_uc, source


def assemble_alloy(
    state: FieldState,
    grid: Grid,
    params: AlloyParams,
    time: float | None = None,
    dphi_dt: np.ndarray | None = None,
    workers: int = 1,
) -> AlloyResidual:
    """One-shot assembly of all alloy residual pieces at ``state``.

    ``dphi_dt`` is the nodal rate entering the anti-trapping current and
    the release term; omit it for a pure spatial-operator evaluation.
    """
    state.check(grid)
    t = state.time if time is None else time
    res_phi, mass_phi = alloy_phi_residual(state, grid, params, t, workers)
    res_uc = uc_transport_residual(state.phi, state.scalar_a, grid, params, dphi_dt, workers)
    mass_uc, source = uc_mass_and_source(state.phi, state.scalar_a, grid, params, dphi_dt)
    for name, arr in (("res_uc", res_uc), ("res_phi", res_phi)):
        bad = K.first_nonfinite(arr)
        if bad is not None:
            raise AssemblyError(f"non-finite {name} at node {bad} (t={t})")
    return AlloyResidual(
        res_uc=res_uc,
        res_phi=res_phi,
        lumped_mass_uc=mass_uc,
        lumped_mass_phi=mass_phi,
        source_uc=source,
    )
