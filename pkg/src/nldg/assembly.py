"""Assembly of the penalized nonlocal bilinear forms over a DG space.

The quadratic form splits by shift size.  Near field (0 < s < hhat with
hhat = min(rho, delta)): both one-element and cross-interface x-integrals are
polynomials in s, so their monomial coefficients are recovered from values at
2k+2 Chebyshev-spaced shifts and contracted against exact kernel moments;
the singular weight |s|^{-alpha} never meets a quadrature rule.  Far field
(hhat < s < delta): five-point Gauss-Legendre in s on every subinterval
between grid-offset breakpoints, with x-overlap integrals done by Gauss rules
that are exact at degree 2k.

Interface terms (jump penalty, the two consistency couplings, and the
jump-corrected cross term) are assembled as local blocks over the stacked
degrees of freedom of the two adjacent elements; ghost-side dofs are simply
dropped, which realizes the zero exterior trace.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .kernel import kernel_eval, partial_moment
from .mesh import PERIODIC, far_field_breakpoints
from .quadrature import gauss_rule

_FAR_FIELD_SPTS = 5


# ---------------------------------------------------------------------------
# penalty variants

@dataclass(frozen=True)
class PenaltyVariant:
    """Interface-term flavor plus its penalty scaling mu = c * h**exponent."""

    tag: str
    mu_coeff: float
    mu_exponent: float

    def mu_value(self, h):
        return self.mu_coeff * float(h) ** self.mu_exponent


def nip(c=5.0):
    """Symmetric interface coupling, mu = c/h."""
    return PenaltyVariant("nIP", float(c), -1.0)


def nnipg(c=5.0):
    """Skew interface coupling, mu = c/h."""
    return PenaltyVariant("nNIPG", float(c), -1.0)


def nbz(k, c=1.0):
    """Pure superpenalty, no interface coupling, mu = c * h**-(2k+1)."""
    return PenaltyVariant("nBZ", float(c), -(2.0 * int(k) + 1.0))


# ---------------------------------------------------------------------------
# assembled forms

@dataclass
class FormSet:
    """Sparse matrices of the quadratic/bilinear forms over one space.

    E is both the cross-shift form and the Gram matrix of the E-seminorm;
    Jsym/Jskew are the symmetric and antisymmetric interface couplings;
    P is the jump Gram matrix scaled by int_0^hhat s^2 gamma ds; Jsemi is
    the Gram matrix of the J-seminorm.
    """

    space: object
    kernel: object
    E: sp.csr_matrix
    Jsym: sp.csr_matrix
    Jskew: sp.csr_matrix
    P: sp.csr_matrix
    Jsemi: sp.csr_matrix


def compose_scheme(forms, variant, h):
    """B = E + J(variant) + mu * P with mu = variant.mu_value(h)."""
    mu = variant.mu_value(h)
    if variant.tag == "nBZ":
        J = None
    elif variant.tag == "nIP":
        J = forms.Jsym
    elif variant.tag == "nNIPG":
        J = forms.Jskew
    else:
        raise ValueError(f"unknown penalty variant {variant.tag!r}")
    B = forms.E + mu * forms.P
    if J is not None:
        B = B + J
    return B.tocsr()


# ---------------------------------------------------------------------------
# local helpers

def _basis_local(h, u, k):
    """Orthonormal Legendre basis of an element of width h, local coord u."""
    xi = 2.0 * np.asarray(u, dtype=float) / h - 1.0
    norms = np.sqrt((2.0 * np.arange(k + 1) + 1.0) / h)
    return np.polynomial.legendre.legvander(xi, k) * norms


def _trace_right_local(h, k):
    return np.sqrt((2.0 * np.arange(k + 1) + 1.0) / h)


def _trace_left_local(h, k):
    signs = np.where(np.arange(k + 1) % 2 == 0, 1.0, -1.0)
    return np.sqrt((2.0 * np.arange(k + 1) + 1.0) / h) * signs


def _cheb_samples(hhat, n):
    """n Chebyshev-spaced shifts strictly inside (0, hhat)."""
    theta = (2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n)
    return np.sort(hhat * 0.5 * (1.0 + np.cos(theta)))


def _recover_coeffs(s_samples, hhat, samples, pmin, nq):
    """Coefficients (in t = s/hhat) of samples/s**pmin, degree < nq."""
    t = s_samples / hhat
    y = samples / (s_samples ** pmin)[:, None]
    V = t[:, None] ** np.arange(nq)
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    return coef


def _reduced_moments(ks, hhat, pmin, nq, shift=0):
    """PM(q + pmin + shift, 0, hhat) / hhat**q for q = 0..nq-1."""
    return np.array([partial_moment(ks, q + pmin + shift, 0.0, hhat) / hhat ** q
                     for q in range(nq)])


class _Triplets:
    """COO accumulator; duplicate entries sum on conversion."""

    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add_block(self, block, row_dofs, col_dofs):
        rmask = row_dofs >= 0
        cmask = col_dofs >= 0
        if not rmask.any() or not cmask.any():
            return
        blk = block[np.ix_(rmask, cmask)]
        rr, cc = np.meshgrid(row_dofs[rmask], col_dofs[cmask], indexing="ij")
        self.rows.append(rr.ravel())
        self.cols.append(cc.ravel())
        self.vals.append(blk.ravel())

    def add_raw(self, rows, cols, vals):
        self.rows.append(rows.ravel())
        self.cols.append(cols.ravel())
        self.vals.append(vals.ravel())

    def to_csr(self, n):
        if not self.rows:
            return sp.csr_matrix((n, n))
        mat = sp.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(n, n))
        return mat.tocsr()


# ---------------------------------------------------------------------------
# near field

def _element_samples(h_e, s_samples, k):
    """Same-element x-integrals of E+u E+v for each sampled shift."""
    xg, wg = gauss_rule(k + 1)
    out = np.empty((len(s_samples), (k + 1) ** 2))
    for i, s in enumerate(s_samples):
        length = h_e - s
        u = 0.5 * length * (xg + 1.0)
        w = 0.5 * length * wg
        dphi = _basis_local(h_e, u + s, k) - _basis_local(h_e, u, k)
        out[i] = (dphi.T @ (dphi * w[:, None])).ravel()
    return out


def _interface_samples(hL, hR, s_samples, k):
    """Jump-corrected cross integrals on (X-s, X) for each sampled shift.

    Returns quadratic samples over the stacked [left; right] dofs and the
    linear samples of int g dx used by the consistency couplings.
    """
    n = k + 1
    xg, wg = gauss_rule(k + 1)
    TL = _trace_right_local(hL, k)
    TR = _trace_left_local(hR, k)
    quad = np.empty((len(s_samples), (2 * n) ** 2))
    lin = np.empty((len(s_samples), 2 * n))
    for i, s in enumerate(s_samples):
        w = 0.5 * s * (xg + 1.0)       # distance below the interface
        wq = 0.5 * s * wg
        G = np.hstack([-(_basis_local(hL, hL - w, k) - TL),
                       _basis_local(hR, s - w, k) - TR])
        quad[i] = (G.T @ (G * wq[:, None])).ravel()
        lin[i] = wq @ G
    return quad, lin, TL, TR


def _near_field(space, ks, trip_E, trip_Jsym, trip_Jskew, trip_P, trip_Jsemi):
    mesh = space.mesh
    k = space.k
    n = k + 1
    hhat = mesh.hhat
    ns = 2 * k + 2
    s_samples = _cheb_samples(hhat, ns)
    pm2 = partial_moment(ks, 2, 0.0, hhat)

    mom_elem = _reduced_moments(ks, hhat, 2, 2 * k)
    mom_quad = _reduced_moments(ks, hhat, 3, 2 * k - 1)
    mom_quad_shift = _reduced_moments(ks, hhat, 3, 2 * k - 1, shift=-1)
    mom_lin = _reduced_moments(ks, hhat, 2, k)

    widths = mesh.widths
    scale = mesh.h

    # same-element contributions, one block per distinct width
    elem_cache = {}
    for e in space.free_elements:
        key = round(widths[e] / scale, 9)
        if key not in elem_cache:
            samples = _element_samples(widths[e], s_samples, k)
            coef = _recover_coeffs(s_samples, hhat, samples, 2, 2 * k)
            elem_cache[key] = 2.0 * (mom_elem @ coef).reshape(n, n)
        dofs = space.element_dofs(e)
        trip_E.add_block(elem_cache[key], dofs, dofs)

    # interface contributions, one block set per distinct width pair
    iface_cache = {}
    for node in space.interface_nodes():
        eL, eR = space.interface_elements(node)
        hL, hR = widths[eL], widths[eR]
        key = (round(hL / scale, 9), round(hR / scale, 9))
        if key not in iface_cache:
            quad, lin, TL, TR = _interface_samples(hL, hR, s_samples, k)
            cquad = _recover_coeffs(s_samples, hhat, quad, 3, 2 * k - 1)
            clin = _recover_coeffs(s_samples, hhat, lin, 2, k)
            e2 = 2.0 * (mom_quad @ cquad).reshape(2 * n, 2 * n)
            jsemi = 2.0 * hL * (mom_quad_shift @ cquad).reshape(2 * n, 2 * n)
            q = mom_lin @ clin
            t = np.concatenate([-TL, TR])
            iface_cache[key] = (
                e2,
                2.0 * (np.outer(t, q) + np.outer(q, t)),
                2.0 * (np.outer(t, q) - np.outer(q, t)),
                pm2 * np.outer(t, t),
                jsemi,
            )
        e2, jsym, jskew, pblk, jsemi = iface_cache[key]
        dL = space.element_dofs(eL)
        dR = space.element_dofs(eR)
        minus = np.full(n, -1, dtype=int)
        dofs = np.concatenate([dL if dL is not None else minus,
                               dR if dR is not None else minus])
        trip_E.add_block(e2, dofs, dofs)
        trip_Jsym.add_block(jsym, dofs, dofs)
        trip_Jskew.add_block(jskew, dofs, dofs)
        trip_P.add_block(pblk, dofs, dofs)
        trip_Jsemi.add_block(jsemi, dofs, dofs)


# ---------------------------------------------------------------------------
# far field

def _far_field(space, ks, trip_E):
    mesh = space.mesh
    k = space.k
    n = k + 1
    bps = far_field_breakpoints(mesh, ks.delta)
    if len(bps) < 2:
        return
    xg, wg = gauss_rule(_FAR_FIELD_SPTS)
    lo, hi = bps[:-1], bps[1:]
    half = 0.5 * (hi - lo)
    s_nodes = (lo[:, None] + half[:, None] * (xg[None, :] + 1.0)).ravel()
    s_wts = (half[:, None] * wg[None, :]).ravel()
    gam = kernel_eval(ks, s_nodes) * s_wts

    if mesh.is_uniform:
        _far_field_uniform(space, s_nodes, gam, trip_E)
    else:
        _far_field_general(space, s_nodes, gam, trip_E)

    # the two identical ``shifted mass'' terms contribute on the diagonal
    diag = 4.0 * float(gam.sum()) * np.ones(space.n_dof)
    trip_E.add_raw(np.arange(space.n_dof), np.arange(space.n_dof), diag)


def _far_field_uniform(space, s_nodes, gam, trip_E):
    """Cross terms -2(C + C^T) exploiting translation invariance."""
    mesh = space.mesh
    k = space.k
    n = k + 1
    h = mesh.widths[0]
    m, N = mesh.m_ghost, mesh.n_phys
    xg, wg = gauss_rule(k + 1)
    periodic = mesh.bc_mode == PERIODIC
    src = space.free_elements
    local = np.arange(n)

    for s, g in zip(s_nodes, gam):
        q = int(np.floor(s / h + 1e-12))
        r = s - q * h
        pieces = []
        if h - r > 1e-14 * h:
            u = 0.5 * (h - r) * (xg + 1.0)
            w = 0.5 * (h - r) * wg
            A0 = _basis_local(h, u, k).T @ (_basis_local(h, u + r, k) * w[:, None])
            pieces.append((q, A0))
        if r > 1e-14 * h:
            u = (h - r) + 0.5 * r * (xg + 1.0)
            w = 0.5 * r * wg
            A1 = _basis_local(h, u, k).T @ (_basis_local(h, u + r - h, k) * w[:, None])
            pieces.append((q + 1, A1))
        for offset, A in pieces:
            tgt = src + offset
            if periodic:
                tgt = tgt % N
                rows_e, cols_e = src, tgt
            else:
                valid = (tgt >= m) & (tgt < m + N)
                if not valid.any():
                    continue
                rows_e, cols_e = src[valid], tgt[valid]
            rstart = space.dof_start[rows_e]
            cstart = space.dof_start[cols_e]
            rows = (rstart[:, None, None] + local[None, :, None])
            cols = (cstart[:, None, None] + local[None, None, :])
            rows = np.broadcast_to(rows, (len(rows_e), n, n))
            cols = np.broadcast_to(cols, (len(rows_e), n, n))
            vals = np.broadcast_to((-2.0 * g) * A, (len(rows_e), n, n))
            # C and C^T in one pass
            trip_E.add_raw(rows.copy(), cols.copy(), vals.copy())
            trip_E.add_raw(cols.copy(), rows.copy(), vals.copy())


def _far_field_general(space, s_nodes, gam, trip_E):
    mesh = space.mesh
    k = space.k
    nodes = mesh.nodes
    xg, wg = gauss_rule(k + 1)
    for s, g in zip(s_nodes, gam):
        for e in space.free_elements:
            xl, xr = nodes[e], nodes[e + 1]
            lo_t = int(np.searchsorted(nodes, xl + s, side="right")) - 1
            hi_t = int(np.searchsorted(nodes, xr + s, side="left"))
            for ct in range(max(lo_t, 0), min(hi_t, mesh.n_elements)):
                dofs_c = space.element_dofs(ct)
                if dofs_c is None:
                    continue
                plo = max(xl, nodes[ct] - s)
                phi_ = min(xr, nodes[ct + 1] - s)
                if phi_ - plo <= 1e-15 * mesh.h:
                    continue
                x = plo + 0.5 * (phi_ - plo) * (xg + 1.0)
                w = 0.5 * (phi_ - plo) * wg
                A = space.basis_at(e, x).T @ (space.basis_at(ct, x + s) * w[:, None])
                dofs_r = space.element_dofs(e)
                blk = -2.0 * g * A
                trip_E.add_block(blk, dofs_r, dofs_c)
                trip_E.add_block(blk.T, dofs_c, dofs_r)


# ---------------------------------------------------------------------------
# public entry points

def assemble_forms(space, ks):
    """Assemble E, Jsym, Jskew, P and Jsemi for one space/kernel pair."""
    mesh = space.mesh
    if abs(ks.delta - mesh.delta) > 1e-12 * max(ks.delta, mesh.delta):
        raise ValueError(
            f"kernel horizon {ks.delta} differs from the mesh horizon {mesh.delta}")
    if mesh.bc_mode == PERIODIC and ks.delta >= (mesh.b - mesh.a):
        raise ValueError("periodic assembly requires delta < domain length")

    trip_E, trip_Jsym, trip_Jskew, trip_P, trip_Jsemi = (
        _Triplets(), _Triplets(), _Triplets(), _Triplets(), _Triplets())
    _near_field(space, ks, trip_E, trip_Jsym, trip_Jskew, trip_P, trip_Jsemi)
    _far_field(space, ks, trip_E)

    nd = space.n_dof
    return FormSet(space=space, kernel=ks,
                   E=trip_E.to_csr(nd),
                   Jsym=trip_Jsym.to_csr(nd),
                   Jskew=trip_Jskew.to_csr(nd),
                   P=trip_P.to_csr(nd),
                   Jsemi=trip_Jsemi.to_csr(nd))


def assemble_load(space, f):
    """Moment vector of f against the basis, (k+3)-point Gauss per element."""
    k = space.k
    xg, wg = gauss_rule(k + 3)
    out = np.empty(space.n_dof)
    for i, e in enumerate(space.free_elements):
        xl, xr = space.mesh.nodes[e], space.mesh.nodes[e + 1]
        half = 0.5 * (xr - xl)
        x = xl + half * (xg + 1.0)
        fx = np.asarray(f(x), dtype=float)
        if fx.shape != x.shape:
            fx = np.array([float(f(xi)) for xi in x])
        phi = space.basis_at(e, x)
        out[i * (k + 1):(i + 1) * (k + 1)] = phi.T @ (half * wg * fx)
    return out
