"""Piecewise-polynomial DG spaces over a Mesh.

Each element carries the L2-orthonormalized Legendre basis

    phi_{e,l}(x) = sqrt((2l+1)/h_e) * P_l(2(x - c_e)/h_e),   l = 0..k,

so the global mass matrix is the identity on the free degrees of freedom.
Ghost elements are excluded from the global index space entirely: in
volume-constraint mode every field vanishes identically on the interaction
band, which is how the zero volume constraint is imposed strongly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import PERIODIC, VOLUME_CONSTRAINT, Mesh
from .quadrature import gauss_rule

_NODE_TOL = 1e-12


def _legendre_matrix(xi, k):
    """P_0..P_k evaluated at xi; shape (len(xi), k+1)."""
    return np.polynomial.legendre.legvander(np.asarray(xi, dtype=float), k)


def _legendre_deriv_matrix(xi, k):
    xi = np.asarray(xi, dtype=float)
    out = np.zeros((xi.size, k + 1))
    for l in range(1, k + 1):
        coef = np.zeros(l + 1)
        coef[l] = 1.0
        out[:, l] = np.polynomial.legendre.legval(xi, np.polynomial.legendre.legder(coef))
    return out


class DGSpace:
    """Degree-k broken polynomial space with ghost dofs eliminated."""

    def __init__(self, mesh: Mesh, k: int):
        if k < 1 or k != int(k):
            raise ValueError(f"polynomial degree k must be an integer >= 1; got {k}")
        self.mesh = mesh
        self.k = int(k)
        m, N = mesh.m_ghost, mesh.n_phys
        self.free_elements = np.arange(m, m + N)
        self.n_free = N
        self.n_dof = (self.k + 1) * N
        # dof_start[e] = first global dof of element e, -1 on ghost elements
        self.dof_start = np.full(mesh.n_elements, -1, dtype=int)
        self.dof_start[self.free_elements] = (self.k + 1) * np.arange(N)
        self._norms = np.sqrt((2.0 * np.arange(self.k + 1) + 1.0))
        self._quad_cache = {}
        self._trace_cache = None

    # -- local basis -------------------------------------------------------

    def basis_at(self, e, x):
        """Values of element e's basis at physical points x; (len(x), k+1)."""
        xl, xr = self.mesh.nodes[e], self.mesh.nodes[e + 1]
        h = xr - xl
        xi = (2.0 * (np.asarray(x, dtype=float) - xl) - h) / h
        return _legendre_matrix(xi, self.k) * (self._norms / np.sqrt(h))

    def basis_deriv_at(self, e, x):
        xl, xr = self.mesh.nodes[e], self.mesh.nodes[e + 1]
        h = xr - xl
        xi = (2.0 * (np.asarray(x, dtype=float) - xl) - h) / h
        return _legendre_deriv_matrix(xi, self.k) * (self._norms / np.sqrt(h)) * (2.0 / h)

    def trace_left(self, e):
        """Basis traces at the element's left endpoint (xi = -1)."""
        h = self.mesh.widths[e]
        signs = np.where(np.arange(self.k + 1) % 2 == 0, 1.0, -1.0)
        return self._norms / np.sqrt(h) * signs

    def trace_right(self, e):
        h = self.mesh.widths[e]
        return self._norms / np.sqrt(h)

    def element_dofs(self, e):
        """Global dof indices of element e, or None on ghost elements."""
        start = self.dof_start[e]
        if start < 0:
            return None
        return np.arange(start, start + self.k + 1)

    def quad_tables(self, npts):
        """Cached Gauss data over the free elements.

        Returns (x, w, phi, dphi) with shapes (n_free, npts) for nodes and
        weights and (n_free, npts, k+1) for basis values/derivatives.
        """
        if npts not in self._quad_cache:
            xg, wg = gauss_rule(npts)
            xl = self.mesh.nodes[self.free_elements]
            xr = self.mesh.nodes[self.free_elements + 1]
            half = 0.5 * (xr - xl)
            x = xl[:, None] + half[:, None] * (xg[None, :] + 1.0)
            w = half[:, None] * np.tile(wg, (self.n_free, 1))
            phi = np.empty((self.n_free, npts, self.k + 1))
            dphi = np.empty_like(phi)
            for i, e in enumerate(self.free_elements):
                phi[i] = self.basis_at(e, x[i])
                dphi[i] = self.basis_deriv_at(e, x[i])
            self._quad_cache[npts] = (x, w, phi, dphi)
        return self._quad_cache[npts]

    def trace_tables(self):
        """Left/right endpoint basis traces over the free elements."""
        if self._trace_cache is None:
            tl = np.array([self.trace_left(e) for e in self.free_elements])
            tr = np.array([self.trace_right(e) for e in self.free_elements])
            self._trace_cache = (tl, tr)
        return self._trace_cache

    # -- interfaces --------------------------------------------------------

    def interface_nodes(self):
        """Node indices of interfaces that can carry a nonzero jump."""
        m, N = self.mesh.m_ghost, self.mesh.n_phys
        if self.mesh.bc_mode == PERIODIC:
            return np.arange(N)          # node i (i=0 is the wrap seam a==b)
        return np.arange(m, m + N + 1)   # a, interior nodes, b

    def interface_elements(self, node_idx):
        """(left element, right element) adjacent to a given interface node.

        Missing neighbors (outside the mesh) are returned as -1; periodic
        indices wrap.
        """
        if self.mesh.bc_mode == PERIODIC:
            N = self.mesh.n_phys
            return (node_idx - 1) % N, node_idx % N
        left = node_idx - 1
        right = node_idx if node_idx < self.mesh.n_elements else -1
        return left, right


@dataclass
class DGField:
    """Coefficient vector over a DGSpace, element-major and degree-minor."""

    space: DGSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.n_dof,):
            raise ValueError("coefficient vector does not match the space")

    def element_coeffs(self, e):
        start = self.space.dof_start[e]
        if start < 0:
            return None
        return self.coeffs[start:start + self.space.k + 1]

    def copy(self):
        return DGField(self.space, self.coeffs.copy())


def project(space, f):
    """Element-wise L2 projection with a (k+3)-point Gauss rule per element."""
    k = space.k
    xg, wg = gauss_rule(k + 3)
    coeffs = np.empty(space.n_dof)
    for i, e in enumerate(space.free_elements):
        xl, xr = space.mesh.nodes[e], space.mesh.nodes[e + 1]
        half = 0.5 * (xr - xl)
        x = xl + half * (xg + 1.0)
        fx = np.asarray(f(x), dtype=float)
        if fx.shape != x.shape:
            fx = np.array([float(f(xi)) for xi in x])
        phi = space.basis_at(e, x)
        coeffs[i * (k + 1):(i + 1) * (k + 1)] = phi.T @ (half * wg * fx)
    return DGField(space, coeffs)


def eval_field(field, x, side="right"):
    """One-sided point value; zero beyond the extended domain (volume mode)."""
    space = field.space
    mesh = space.mesh
    nodes = mesh.nodes
    x = float(x)
    if mesh.bc_mode == PERIODIC:
        period = mesh.b - mesh.a
        x = mesh.a + (x - mesh.a) % period
        if side == "left" and abs(x - mesh.a) <= _NODE_TOL * max(1.0, mesh.h):
            x = mesh.b  # left limit at the seam lives at the right end
    tol = _NODE_TOL * max(1.0, mesh.h)
    if x < nodes[0] - tol or x > nodes[-1] + tol:
        return 0.0
    x = min(max(x, nodes[0]), nodes[-1])
    j = int(np.searchsorted(nodes, x, side="right")) - 1
    j = min(max(j, 0), mesh.n_elements - 1)
    # snap to an interface when applicable so side selection is exact
    node_idx = None
    if abs(x - nodes[j]) <= tol:
        node_idx = j
    elif abs(x - nodes[j + 1]) <= tol:
        node_idx = j + 1
    if node_idx is not None:
        e = node_idx - 1 if side == "left" else node_idx
        x = nodes[node_idx]
    else:
        e = j
    if e < 0 or e >= mesh.n_elements:
        return 0.0
    ce = field.element_coeffs(e)
    if ce is None:
        return 0.0
    return float(field.space.basis_at(e, [x])[0] @ ce)


def jump(field, node_idx):
    """Right trace minus left trace at an interface node (exterior trace 0)."""
    space = field.space
    eL, eR = space.interface_elements(node_idx)
    val = 0.0
    if eR >= 0:
        cR = field.element_coeffs(eR)
        if cR is not None:
            val += float(space.trace_left(eR) @ cR)
    if eL >= 0:
        cL = field.element_coeffs(eL)
        if cL is not None:
            val -= float(space.trace_right(eL) @ cL)
    return val


def mass_matrix(space):
    """Gram matrix of the local basis; identity by orthonormalization."""
    return sp.identity(space.n_dof, format="csr")


def snapshot(field, points_per_element=8):
    """Plot-ready samples: equispaced points per element incl. both one-sided traces."""
    space = field.space
    xs, us = [], []
    for e in space.free_elements:
        xl, xr = space.mesh.nodes[e], space.mesh.nodes[e + 1]
        x = np.linspace(xl, xr, points_per_element)
        phi = space.basis_at(e, x)
        xs.append(x)
        us.append(phi @ field.element_coeffs(e))
    return np.concatenate(xs), np.concatenate(us)
