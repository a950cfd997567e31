"""DG convection operator with monotone two-point fluxes.

The residual of one element against its own basis is

    A_e(u, phi) = fhat_{e+1/2} phi(x-_{e+1/2}) - fhat_{e-1/2} phi(x+_{e-1/2})
                  - int_{I_e} f(u) phi' dx,

with the volume term integrated by a (k+2)-point Gauss rule.  Periodic
topology wraps the interface states; compact-support mode uses zero exterior
traces at both ends.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .mesh import PERIODIC
from .quadrature import gauss_on


@dataclass(frozen=True)
class FluxKind:
    """Flux function plus the data a monotone numerical flux needs."""

    tag: str
    f: Callable
    fprime_bound: Optional[Callable] = None
    linear_speed: Optional[float] = None
    sonic: Optional[float] = None


def upwind_linear(speed=1.0):
    s = float(speed)
    return FluxKind(tag="upwind_linear", f=lambda u: s * u,
                    fprime_bound=lambda u: abs(s) * np.ones_like(np.asarray(u, dtype=float)),
                    linear_speed=s)


def lax_friedrichs(f, fprime_bound):
    return FluxKind(tag="lax_friedrichs", f=f, fprime_bound=fprime_bound)


def godunov(f, fprime=None, sonic=None):
    """Exact Riemann flux for convex f; pass the sonic point when known."""
    if sonic is None and fprime is not None:
        try:
            sonic = brentq(fprime, -1e3, 1e3)
        except ValueError:
            sonic = None
    return FluxKind(tag="godunov", f=f, fprime_bound=fprime, sonic=sonic)


def numerical_flux(kind, uL, uR):
    """Two-point monotone flux fhat(uL, uR); vectorizes over arrays."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    if kind.tag == "upwind_linear":
        if kind.linear_speed is None:
            raise ValueError("upwind flux requires a linear flux function")
        c = kind.linear_speed
        out = c * (uL if c >= 0 else uR)
    elif kind.tag == "lax_friedrichs":
        lam = np.maximum(np.abs(kind.fprime_bound(uL)), np.abs(kind.fprime_bound(uR)))
        out = 0.5 * (kind.f(uL) + kind.f(uR)) - 0.5 * lam * (uR - uL)
    elif kind.tag == "godunov":
        fL, fR = kind.f(uL), kind.f(uR)
        fmin = np.minimum(fL, fR)
        if kind.sonic is not None:
            inside = (uL < kind.sonic) & (kind.sonic < uR)
            fmin = np.where(inside, np.minimum(fmin, kind.f(kind.sonic * np.ones_like(uL))), fmin)
        out = np.where(uL <= uR, fmin, np.maximum(fL, fR))
    else:
        raise ValueError(f"unknown flux kind {kind.tag!r}")
    if np.ndim(out) == 0 or (np.isscalar(uL) and np.isscalar(uR)):
        return float(out)
    return out


def cell_entropy_production(kind, uL, uR):
    """Theta = int_{uL}^{uR} (f(u) - fhat(uL, uR)) du, 10-point Gauss."""
    uL, uR = float(uL), float(uR)
    if uL == uR:
        return 0.0
    fhat = numerical_flux(kind, uL, uR)
    x, w = gauss_on(uL, uR, 10)
    return float(np.dot(w, kind.f(x) - fhat))


def _interface_states(field):
    """Left/right states at every flux interface, ordered left-to-right.

    Periodic meshes have n_free interfaces (index i sits at node i, the wrap
    seam included); compact-support meshes have n_free + 1 with zero exterior
    traces at both ends.
    """
    space = field.space
    n = space.k + 1
    coe = field.coeffs.reshape(space.n_free, n)
    tl, tr = space.trace_tables()
    right_vals = np.einsum("ij,ij->i", coe, tr)   # u(x-_{e+1/2}) per element
    left_vals = np.einsum("ij,ij->i", coe, tl)    # u(x+_{e-1/2}) per element
    if space.mesh.bc_mode == PERIODIC:
        uL = np.roll(right_vals, 1)   # interface i: left neighbor is element i-1
        uR = left_vals
        return uL, uR
    uL = np.concatenate([[0.0], right_vals])
    uR = np.concatenate([left_vals, [0.0]])
    return uL, uR


def convection_residual(field, kind):
    """Vector of A_e(u, phi) over all test basis functions."""
    space = field.space
    n = space.k + 1
    coe = field.coeffs.reshape(space.n_free, n)

    uL, uR = _interface_states(field)
    fhat = numerical_flux(kind, uL, uR)
    if space.mesh.bc_mode == PERIODIC:
        fhat_left = fhat                    # flux at node e for element e
        fhat_right = np.roll(fhat, -1)      # flux at node e+1
    else:
        fhat_left = fhat[:-1]
        fhat_right = fhat[1:]

    _, w, phi, dphi = space.quad_tables(space.k + 2)
    tl, tr = space.trace_tables()
    uq = np.einsum("eqi,ei->eq", phi, coe)
    vol = np.einsum("eqi,eq->ei", dphi, w * kind.f(uq))
    out = fhat_right[:, None] * tr - fhat_left[:, None] * tl - vol
    return out.ravel()


def convection_matrix(space, kind):
    """Dense operator of the residual for linear fluxes (column-by-column)."""
    if kind.linear_speed is None and kind.tag != "upwind_linear":
        raise ValueError("convection_matrix requires a linear flux")
    from .space import DGField
    nd = space.n_dof
    mat = np.empty((nd, nd))
    for j in range(nd):
        ej = np.zeros(nd)
        ej[j] = 1.0
        mat[:, j] = convection_residual(DGField(space, ej), kind)
    return mat
