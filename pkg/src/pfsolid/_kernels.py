"""Low-level structured-grid assembly kernels.

Gradient-energy and diffusion terms are integrated per axis at element
edge midpoints (the edges parallel to that axis); reaction and mass terms
use nodal quadrature. On a uniform grid the isotropic limit of this
assembly is exactly the conservative 5-point (2D) / 7-point (3D) flux
stencil divided by the lumped mass, while anisotropic terms remain the
exact gradient of the discretely integrated free energy.

The 2D combiners build every nodal sum from mirror-paired binary
additions, so reflections and 90-degree rotations of the input field
commute with assembly bitwise (IEEE addition is commutative). Do not
reorder the summation trees. 3D combiners use fixed-order accumulation,
which is deterministic but not exactly symmetric.

Worker counts only chunk element-wise evaluations along the leading axis
into disjoint output slices; results are bitwise independent of the
worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def chunked_eval(fn, inputs, workers: int = 1):
    """Evaluate ``fn(*chunks) -> tuple of arrays`` over leading-axis chunks.

    ``fn`` must be elementwise (no reductions), so chunked evaluation is
    bitwise identical to a single call for any worker count.
    """
    if workers <= 1 or inputs[0].shape[0] < 2 * workers:
        return fn(*inputs)
    m = inputs[0].shape[0]
    bounds = [(i * m) // workers for i in range(workers + 1)]
    first = fn(*(a[bounds[0]:bounds[1]] for a in inputs))
    single = not isinstance(first, tuple)
    outs = (first,) if single else first
    full = tuple(np.empty((m,) + o.shape[1:], dtype=o.dtype) for o in outs)
    for o, f in zip(full, outs):
        o[bounds[0]:bounds[1]] = f
    def run(ci):
        lo, hi = bounds[ci], bounds[ci + 1]
        res = fn(*(a[lo:hi] for a in inputs))
        res = (res,) if single else res
        for o, r in zip(full, res):
            o[lo:hi] = r
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run, range(1, workers)))
    return full[0] if single else full


def normal_diff(P: np.ndarray, h: float) -> np.ndarray:
    """Per-edge derivative along the last axis: (P[..., i+1] - P[..., i]) / h."""
    return (P[..., 1:] - P[..., :-1]) / h


def edge_mean(P: np.ndarray) -> np.ndarray:
    """Midpoint value on edges along the last axis."""
    return 0.5 * (P[..., 1:] + P[..., :-1])


def trans_grad_2d(P: np.ndarray, ht: float) -> np.ndarray:
    """Element-wise transverse derivative at edge midpoints, 2D.

    Bilinear d/dy at (xi=0, eta=+-1) is eta-independent, so both the south
    and the north edge instance of an element share this value.
    """
    return ((P[1:, :-1] + P[1:, 1:]) - (P[:-1, :-1] + P[:-1, 1:])) / (2.0 * ht)


def combine_flux_2d(TXs: np.ndarray, TXn: np.ndarray, shape) -> np.ndarray:
    """Scatter +-t_x per edge instance onto nodes (un-divided by h)."""
    A1 = np.zeros(shape)
    A2 = np.zeros(shape)
    A3 = np.zeros(shape)
    A4 = np.zeros(shape)
    A1[:-1, 1:] = TXs
    A2[1:, 1:] = TXn
    A3[:-1, :-1] = TXs
    A4[1:, :-1] = TXn
    return (A1 + A2) - (A3 + A4)


def combine_trans_2d(TYs: np.ndarray, TYn: np.ndarray, shape) -> np.ndarray:
    """Scatter the transverse anisotropy terms (un-divided by 2*ht)."""
    B1 = np.zeros(shape)
    B2 = np.zeros(shape)
    B3 = np.zeros(shape)
    B4 = np.zeros(shape)
    B1[:-1, 1:] = TYs
    B2[:-1, :-1] = TYs
    B3[:-1, 1:] = TYn
    B4[:-1, :-1] = TYn
    t_this = (B1 + B2) + (B3 + B4)
    C1 = np.zeros(shape)
    C2 = np.zeros(shape)
    C3 = np.zeros(shape)
    C4 = np.zeros(shape)
    C1[1:, 1:] = TYs
    C2[1:, :-1] = TYs
    C3[1:, 1:] = TYn
    C4[1:, :-1] = TYn
    t_below = (C1 + C2) + (C3 + C4)
    return t_below - t_this


def corner_mass_2d(v00, v10, v01, v11, w: float, shape) -> np.ndarray:
    """Nodal quadrature of a coefficient from its element-corner instances.

    ``vab`` is the instance value at the corner with x-side a, y-side b
    (element-indexed arrays). Antipodal corners are paired first.
    """
    P00 = np.zeros(shape)
    P10 = np.zeros(shape)
    P01 = np.zeros(shape)
    P11 = np.zeros(shape)
    P00[:-1, :-1] = v00
    P10[:-1, 1:] = v10
    P01[1:, :-1] = v01
    P11[1:, 1:] = v11
    return w * ((P00 + P11) + (P10 + P01))


# 3D counterparts. Instance layout for an axis pass on a (m2, m1, n) view:
# each element has four edges parallel to the working axis, indexed by
# (b, a) = (side along axis -3, side along axis -2).


def trans_grads_3d(P: np.ndarray, h1: float, h2: float):
    """Transverse derivatives at the four edge midpoints of each element.

    Returns (g1, g2): g1[b] is the axis(-2) derivative at the two b-layers,
    g2[a] the axis(-3) derivative at the two a-rows; each entry is an
    element-indexed array.
    """
    em = edge_mean(P)  # midpoints along the working axis
    g1 = [
        (em[:-1, 1:, :] - em[:-1, :-1, :]) / h1,
        (em[1:, 1:, :] - em[1:, :-1, :]) / h1,
    ]
    g2 = [
        (em[1:, :-1, :] - em[:-1, :-1, :]) / h2,
        (em[1:, 1:, :] - em[:-1, 1:, :]) / h2,
    ]
    return g1, g2


def combine_flux_3d(TX, shape) -> np.ndarray:
    """Scatter +-t_x for the four instances TX[(b, a)] onto nodes."""
    out = np.zeros(shape)
    for b in (0, 1):
        for a in (0, 1):
            t = TX[(b, a)]
            sl_b = slice(b, b + shape[0] - 1)
            sl_a = slice(a, a + shape[1] - 1)
            out[sl_b, sl_a, 1:] += t
            out[sl_b, sl_a, :-1] -= t
    return out


def combine_trans1_3d(TY, shape) -> np.ndarray:
    """Scatter the axis(-2) transverse terms TY[(b, a)] (un-divided by 2*h1)."""
    out = np.zeros(shape)
    for b in (0, 1):
        for a in (0, 1):
            t = TY[(b, a)]
            sl_b = slice(b, b + shape[0] - 1)
            for col in (slice(1, None), slice(0, -1)):
                out[sl_b, 1:, col] += t
                out[sl_b, :-1, col] -= t
    return out


def combine_trans2_3d(TZ, shape) -> np.ndarray:
    """Scatter the axis(-3) transverse terms TZ[(b, a)] (un-divided by 2*h2)."""
    out = np.zeros(shape)
    for b in (0, 1):
        for a in (0, 1):
            t = TZ[(b, a)]
            sl_a = slice(a, a + shape[1] - 1)
            for col in (slice(1, None), slice(0, -1)):
                out[1:, sl_a, col] += t
                out[:-1, sl_a, col] -= t
    return out


def corner_mass_3d(v, w: float, shape) -> np.ndarray:
    """Nodal quadrature from the eight corner instances v[(c, b, a)]."""
    out = np.zeros(shape)
    for c in (0, 1):
        for b in (0, 1):
            for a in (0, 1):
                out[
                    c : c + shape[0] - 1,
                    b : b + shape[1] - 1,
                    a : a + shape[2] - 1,
                ] += v[(c, b, a)]
    return w * out


def first_nonfinite(arr: np.ndarray):
    """Flat index of the first non-finite entry, or None."""
    bad = ~np.isfinite(arr)
    if bad.any():
        return int(np.flatnonzero(bad)[0])
    return None
