"""Directional interface-energy factor a_s(n) and its gradient sensitivities.

For four-fold symmetry a_s = (1 - 3*eps)[1 + 4*eps/(1-3*eps) * sum_k g_k^4 / |g|^4]
with g the order-parameter gradient; in 2D this equals 1 + eps*cos(4*theta).
Six-fold symmetry (2D only) uses 1 + eps*cos(6*theta) directly. Below the
gradient cutoff the bulk phases are isotropic: a_s = 1 with zero derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# |grad phi|^2 below this is treated as bulk (the directional formula is 0/0 there)
GRAD_CUTOFF_SQ = 1e-12


@dataclass(frozen=True)
class AnisotropyEval:
    a_s: float
    d_as_d_gradphi: np.ndarray
    grad_phi_sq: float


def anisotropy_arrays(comps: list[np.ndarray], eps: float, fold: int = 4):
    """Vectorized a_s and d(a_s)/d(g_k) for gradient component arrays.

    Returns ``(a_s, [d_as/dg_k per axis], |g|^2)`` with the regularized
    isotropic limit applied wherever |g|^2 < GRAD_CUTOFF_SQ.
    """
    q = comps[0] * comps[0]
    for c in comps[1:]:
        q = q + c * c
    live = q >= GRAD_CUTOFF_SQ
    if eps == 0.0:
        a = np.ones_like(q)
        return a, [np.zeros_like(q) for _ in comps], q
    qs = np.where(live, q, 1.0)  # guard divisions in the dead region
    if fold == 4:
        s = comps[0] ** 4
        for c in comps[1:]:
            s = s + c**4
        b = 4.0 * eps
        a = (1.0 - 3.0 * eps) + b * s / (qs * qs)
        derivs = [(4.0 * b / (qs * qs)) * c * (c * c - s / qs) for c in comps]
    elif fold == 6:
        if len(comps) != 2:
            raise ValueError("six-fold anisotropy is 2D only")
        gx, gy = comps
        theta = np.arctan2(gy, gx)
        a = 1.0 + eps * np.cos(6.0 * theta)
        t = -6.0 * eps * np.sin(6.0 * theta)
        derivs = [t * (-gy / qs), t * (gx / qs)]
    else:
        raise ValueError(f"fold must be 4 or 6, got {fold}")
    a = np.where(live, a, 1.0)
    derivs = [np.where(live, d, 0.0) for d in derivs]
    return a, derivs, q


def eval_anisotropy(grad_phi, eps4: float, fold: int = 4) -> AnisotropyEval:
    """Point evaluation of a_s and its analytic gradient sensitivities."""
    if not 0.0 <= eps4 < 1.0 / 3.0:
        raise ValueError(f"eps4 must lie in [0, 1/3), got {eps4}")
    g = np.asarray(grad_phi, dtype=float)
    comps = [np.asarray(gi) for gi in g]
    a, derivs, q = anisotropy_arrays(comps, eps4, fold)
    return AnisotropyEval(
        a_s=float(a),
        d_as_d_gradphi=np.array([float(d) for d in derivs]),
        grad_phi_sq=float(q),
    )


def lambda_tau_of_n(aniso: AnisotropyEval, lambda0: float, tau0: float) -> tuple[float, float]:
    """Direction-dependent interface length and relaxation time."""
    return lambda0 * aniso.a_s, tau0 * aniso.a_s * aniso.a_s
