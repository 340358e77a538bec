"""Semi-discrete residuals for the undercooled pure-melt model.

The scaled temperature u obeys du/dt = D lap(u) + phi_dot/2; the order
parameter obeys tau(n) phi_dot = -df/dphi + div(lambda(n)^2 grad phi) plus
the anisotropy-derivative (torque) terms. Residual convention:
mass * d(field)/dt = -res, so res collects stiffness and reaction actions.
Zero-flux boundaries are natural and contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .anisotropy import anisotropy_arrays
from .grid import FieldState, Grid
from .params import PureMeltParams, validate_pure_melt


class AssemblyError(RuntimeError):
    """Non-finite value produced during assembly."""


@dataclass
class PureMeltResidual:
    res_u: np.ndarray
    res_phi: np.ndarray
    lumped_mass_u: np.ndarray
    lumped_mass_phi: np.ndarray


def dwell_derivative(phi, u, xi: float):
    """d/dphi of the tilted double well: -phi + phi^3 + xi*u*(1-phi^2)^2."""
    one_m = 1.0 - phi * phi
    return -phi + phi * phi * phi + xi * u * one_m * one_m


def _axis_views(grid: Grid, flat: np.ndarray):
    """Views of a nodal array with each working axis moved last.

    Yields (view, h_normal, h_trans...) plus a callable restoring node
    orientation. The x/y passes are exact transposes of each other so the
    assembled operator commutes with 90-degree rotations in 2D.
    """
    nd = grid.as_nd(flat)
    h = grid.spacing
    if grid.dim == 2:
        return [
            (nd, h[0], (h[1],), lambda a: a),
            (nd.swapaxes(0, 1), h[1], (h[0],), lambda a: a.swapaxes(0, 1)),
        ]
    return [
        (nd, h[0], (h[1], h[2]), lambda a: a),
        (nd.swapaxes(1, 2), h[1], (h[0], h[2]), lambda a: a.swapaxes(1, 2)),
        (np.moveaxis(nd, 0, 2), h[2], (h[0], h[1]), lambda a: np.moveaxis(a, 2, 0)),
    ]


def _phi_instance_2d(gn, gt, lam0, eps, fold, w, torque=True):
    a, derivs, _ = anisotropy_arrays([gn, gt], eps, fold)
    lam = lam0 * a
    gn2 = gn * gn
    ll = lam * lam0
    tx = w * (lam * lam * gn + ll * derivs[0] * gn2)
    ty = w * (ll * derivs[1] * gn2)
    return tx, ty


def _phi_instance_3d(gn, g1, g2, lam0, eps, fold, w, torque=True):
    a, derivs, _ = anisotropy_arrays([gn, g1, g2], eps, fold)
    lam = lam0 * a
    gn2 = gn * gn
    ll = lam * lam0
    tx = w * (lam * lam * gn + ll * derivs[0] * gn2)
    t1 = w * (ll * derivs[1] * gn2)
    t2 = w * (ll * derivs[2] * gn2)
    return tx, t1, t2


def phi_gradient_residual(
    phi_flat: np.ndarray, grid: Grid, lam0: float, eps: float, fold: int, workers: int = 1
) -> np.ndarray:
    """Assembled stiffness + torque action of the phi weak form (flat array).

    In the isotropic limit the torque terms vanish identically and the
    operator is plain constant-coefficient diffusion.
    """
    if eps == 0.0:
        return scalar_diffusion_residual(phi_flat, grid, lam0 * lam0)
    total = None
    for view, hn, ht, restore in _axis_views(grid, phi_flat):
        if grid.dim == 2:
            w = hn * ht[0] / 2.0
            dn = K.normal_diff(view, hn)
            gt = K.trans_grad_2d(view, ht[0])
            fn = lambda a, b: _phi_instance_2d(a, b, lam0, eps, fold, w, True)
            txs, tys = K.chunked_eval(fn, (dn[:-1], gt), workers)
            txn, tyn = K.chunked_eval(fn, (dn[1:], gt), workers)
            part = K.combine_flux_2d(txs, txn, view.shape) / hn
            part = part + K.combine_trans_2d(tys, tyn, view.shape) / (2.0 * ht[0])
        else:
            w = hn * ht[0] * ht[1] / 4.0
            dn = K.normal_diff(view, hn)
            g1, g2 = K.trans_grads_3d(view, ht[0], ht[1])
            tx, t1, t2 = {}, {}, {}
            for b in (0, 1):
                for a in (0, 1):
                    gna = dn[b : b + view.shape[0] - 1, a : a + view.shape[1] - 1, :]
                    fn3 = lambda p, q, r: _phi_instance_3d(p, q, r, lam0, eps, fold, w, True)
                    tx[(b, a)], t1[(b, a)], t2[(b, a)] = K.chunked_eval(
                        fn3, (np.ascontiguousarray(gna), g1[b], g2[a]), workers
                    )
            part = K.combine_flux_3d(tx, view.shape) / hn
            part = part + (
                K.combine_trans1_3d(t1, view.shape) / (2.0 * ht[0])
                + K.combine_trans2_3d(t2, view.shape) / (2.0 * ht[1])
            )
        part = restore(part)
        total = part if total is None else total + part
    return total.reshape(-1)


def scalar_diffusion_residual(u_flat: np.ndarray, grid: Grid, coeff: float) -> np.ndarray:
    """Constant-coefficient diffusion stiffness action (flat array)."""
    total = None
    for view, hn, ht, restore in _axis_views(grid, u_flat):
        w = coeff * hn * np.prod(ht) / 2.0 ** (grid.dim - 1)
        dn = K.normal_diff(view, hn)
        if grid.dim == 2:
            part = K.combine_flux_2d(w * dn[:-1], w * dn[1:], view.shape) / hn
        else:
            tx = {}
            for b in (0, 1):
                for a in (0, 1):
                    tx[(b, a)] = w * dn[b : b + view.shape[0] - 1, a : a + view.shape[1] - 1, :]
            part = K.combine_flux_3d(tx, view.shape) / hn
        part = restore(part)
        total = part if total is None else total + part
    return total.reshape(-1)


def tau_lumped_mass(
    phi_flat: np.ndarray, grid: Grid, lam0_unused, tau0: float, eps: float, fold: int
) -> np.ndarray:
    """Row-sum mass with tau(n) = tau0 * a_s^2 at nodal quadrature points.

    The gradient entering a_s at an element corner is the one-sided edge
    difference pair of that corner; the four (eight) corner instances of a
    node are averaged with antipodal pairing.
    """
    if eps == 0.0:
        return tau0 * grid.node_volumes()
    nd = grid.as_nd(phi_flat)
    h = grid.spacing

    def asq(*comps):
        a, _, _ = anisotropy_arrays(list(comps), eps, fold)
        return a * a

    if grid.dim == 2:
        dx = K.normal_diff(nd, h[0])  # (ny, nx-1)
        dy = K.normal_diff(nd.swapaxes(0, 1), h[1]).swapaxes(0, 1)  # (ny-1, nx)
        v00 = asq(dx[:-1, :], dy[:, :-1])
        v10 = asq(dx[:-1, :], dy[:, 1:])
        v01 = asq(dx[1:, :], dy[:, :-1])
        v11 = asq(dx[1:, :], dy[:, 1:])
        w = tau0 * h[0] * h[1] / 4.0
        return K.corner_mass_2d(v00, v10, v01, v11, w, nd.shape).reshape(-1)
    dx = K.normal_diff(nd, h[0])  # (nz, ny, nx-1)
    dy = (nd[:, 1:, :] - nd[:, :-1, :]) / h[1]  # (nz, ny-1, nx)
    dz = (nd[1:, :, :] - nd[:-1, :, :]) / h[2]  # (nz-1, ny, nx)
    v = {}
    for c in (0, 1):
        for b in (0, 1):
            for a in (0, 1):
                nz, ny, nx = nd.shape
                gx = dx[c : c + nz - 1, b : b + ny - 1, :]
                gy = dy[c : c + nz - 1, :, a : a + nx - 1]
                gz = dz[:, b : b + ny - 1, a : a + nx - 1]
                v[(c, b, a)] = asq(gx, gy, gz)
    w = tau0 * h[0] * h[1] * h[2] / 8.0
    return K.corner_mass_3d(v, w, nd.shape).reshape(-1)


def assemble_pure_melt(
    state: FieldState, grid: Grid, params: PureMeltParams, workers: int = 1
) -> PureMeltResidual:
    """Assemble both weak-form residuals and lumped masses at ``state``.

    res_u is the thermal stiffness action only; the phi_dot/2 release is
    applied nodally by the stepper so that the zero-flux invariant
    d/dt int(u - phi/2) = 0 holds to rounding. Raises AssemblyError if a
    non-finite value appears.
    """
    validate_pure_melt(params)
    state.check(grid)
    res_u = scalar_diffusion_residual(state.scalar_a, grid, params.D)
    mass_u = grid.node_volumes()
    reaction = mass_u * dwell_derivative(state.phi, state.scalar_a, params.xi)
    res_phi = reaction + phi_gradient_residual(
        state.phi, grid, params.lambda0, params.eps4, params.fold, workers
    )
    mass_phi = tau_lumped_mass(state.phi, grid, params.lambda0, params.tau0, params.eps4, params.fold)
    for name, arr in (("res_u", res_u), ("res_phi", res_phi)):
        bad = K.first_nonfinite(arr)
        if bad is not None:
            raise AssemblyError(f"non-finite {name} at node {bad} (t={state.time})")
    return PureMeltResidual(
        res_u=res_u, res_phi=res_phi, lumped_mass_u=mass_u, lumped_mass_phi=mass_phi
    )


def discrete_energy(state: FieldState, grid: Grid, params: PureMeltParams) -> float:
    """Free-energy functional evaluated with the assembly's own quadrature.

    Nodal quadrature for the double well, edge-midpoint quadrature for the
    gradient term; phi_gradient_residual is the exact gradient of this
    value with respect to nodal phi at frozen u.
    """
    phi, u = state.phi, state.scalar_a
    one_m = 1.0 - phi * phi
    fwell = -0.5 * phi**2 + 0.25 * phi**4 + params.xi * u * phi * (
        1.0 - (2.0 / 3.0) * phi**2 + 0.2 * phi**4
    )
    total = float(np.dot(grid.node_volumes(), fwell))
    lam0, eps, fold = params.lambda0, params.eps4, params.fold
    for view, hn, ht, _restore in _axis_views(grid, state.phi):
        w = hn * np.prod(ht) / 2.0 ** (grid.dim - 1)
        dn = K.normal_diff(view, hn)
        if grid.dim == 2:
            gt = K.trans_grad_2d(view, ht[0])
            for gna in (dn[:-1], dn[1:]):
                a, _, _ = anisotropy_arrays([gna, gt], eps, fold)
                lam = lam0 * a
                total += float(np.sum(w * 0.5 * lam * lam * gna * gna))
        else:
            g1, g2 = K.trans_grads_3d(view, ht[0], ht[1])
            for b in (0, 1):
                for a_side in (0, 1):
                    gna = dn[b : b + view.shape[0] - 1, a_side : a_side + view.shape[1] - 1, :]
                    a, _, _ = anisotropy_arrays([gna, g1[b], g2[a_side]], eps, fold)
                    lam = lam0 * a
                    total += float(np.sum(w * 0.5 * lam * lam * gna * gna))
    return total
