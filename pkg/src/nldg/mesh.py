"""1D partitions of the computational domain plus its interaction band.

In volume-constraint mode the physical interval (a, b) is extended by ghost
elements until the band [a - delta, a] and [b, b + delta] is covered; fields
are pinned to zero there.  Periodic mode keeps only the physical elements and
wraps all couplings modulo N.
"""

import math
from dataclasses import dataclass, field

import numpy as np

VOLUME_CONSTRAINT = "volume_constraint"
PERIODIC = "periodic"

_FUZZ = 1e-9


@dataclass(frozen=True)
class Mesh:
    """Ordered interface coordinates with ghost layout and size metrics.

    ``nodes`` holds every interface including ghost ones; element e occupies
    (nodes[e], nodes[e+1]).  Physical elements are indices
    m_ghost .. m_ghost + n_phys - 1.  ``hhat = min(rho, delta)`` is the
    near-field range over which assembly integrates analytically, and
    ``nu = rho / h`` records the mesh-regularity ratio (1 on uniform meshes).
    """

    a: float
    b: float
    nodes: np.ndarray
    n_phys: int
    m_ghost: int
    bc_mode: str
    delta: float
    h: float = field(init=False)
    rho: float = field(init=False)
    hhat: float = field(init=False)
    nu: float = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        widths = np.diff(nodes)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "h", float(widths.max()))
        object.__setattr__(self, "rho", float(widths.min()))
        object.__setattr__(self, "hhat", min(self.rho, self.delta))
        object.__setattr__(self, "nu", float(widths.min() / widths.max()))
        self._check_layout()

    def _check_layout(self):
        m, N = self.m_ghost, self.n_phys
        if len(self.nodes) != N + 2 * m + 1:
            raise ValueError("node count inconsistent with n_phys/m_ghost")
        tol = _FUZZ * max(self.h, 1.0)
        if abs(self.nodes[m] - self.a) > tol or abs(self.nodes[m + N] - self.b) > tol:
            raise ValueError("physical endpoints must coincide with mesh nodes")
        if self.bc_mode == VOLUME_CONSTRAINT:
            if m < 1:
                raise ValueError("volume-constraint meshes need ghost elements")
            if self.nodes[0] > self.a - self.delta + tol:
                raise ValueError("left ghost band does not cover a - delta")
            if self.nodes[1] <= self.a - self.delta - tol:
                raise ValueError("left ghost layer is wider than one element band")
            if self.nodes[-1] < self.b + self.delta - tol:
                raise ValueError("right ghost band does not cover b + delta")
            if self.nodes[-2] >= self.b + self.delta + tol:
                raise ValueError("right ghost layer is wider than one element band")
        elif self.bc_mode == PERIODIC:
            if m != 0:
                raise ValueError("periodic meshes carry no ghost elements")
        else:
            raise ValueError(f"unknown bc_mode {self.bc_mode!r}")

    @property
    def n_elements(self):
        return self.n_phys + 2 * self.m_ghost

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def is_uniform(self):
        w = self.widths
        return bool(np.all(np.abs(w - w[0]) <= 1e-12 * w[0]))

    def is_ghost(self, e):
        return e < self.m_ghost or e >= self.m_ghost + self.n_phys


def build_mesh(a, b, N, delta, bc_mode=VOLUME_CONSTRAINT):
    """Uniform partition of (a, b) into N elements, extended per bc_mode.

    Volume-constraint mode appends m = ceil(delta / h) width-h ghost elements
    on each side so the outermost ghost interface reaches at least a - delta
    (resp. b + delta).  Periodic mode records wrap topology and no ghosts.
    """
    a, b, delta = float(a), float(b), float(delta)
    if N <= 1 or N != int(N):
        raise ValueError(f"need an integer N >= 2; got {N}")
    if delta <= 0.0:
        raise ValueError(f"horizon delta must be positive; got {delta}")
    if b <= a:
        raise ValueError("domain must satisfy b > a")
    N = int(N)
    h = (b - a) / N
    if bc_mode == PERIODIC:
        m = 0
    else:
        # fuzz keeps m minimal when delta is an exact multiple of h
        m = max(1, math.ceil(delta / h - _FUZZ))
    nodes = a + h * np.arange(-m, N + m + 1)
    return Mesh(a=a, b=b, nodes=nodes, n_phys=N, m_ghost=m,
                bc_mode=bc_mode, delta=delta)


def far_field_breakpoints(mesh, delta):
    """Partition points of (hhat, delta] where the shifted-grid overlap changes.

    For uniform meshes these are the multiples of h inside (hhat, delta); in
    general all pairwise node differences falling in that interval.  Both
    endpoints hhat and delta are included.  Empty when delta <= hhat.
    """
    hhat = min(mesh.rho, delta)
    if delta <= hhat * (1.0 + 1e-14):
        return np.empty(0)
    if mesh.is_uniform:
        h = mesh.widths[0]
        lmin = int(math.floor(hhat / h + _FUZZ)) + 1
        lmax = int(math.ceil(delta / h - _FUZZ)) - 1
        interior = h * np.arange(lmin, lmax + 1)
    else:
        nodes = mesh.nodes
        diffs = (nodes[None, :] - nodes[:, None]).ravel()
        interior = np.unique(diffs[(diffs > hhat * (1 + 1e-12)) &
                                   (diffs < delta * (1 - 1e-12))])
    pts = np.concatenate(([hhat], interior, [delta]))
    pts = np.unique(pts)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.diff(pts) > 1e-12 * delta
    return pts[keep]
