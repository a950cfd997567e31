"""Steady solves, error norms and convergence studies.

Linear systems are banded after the natural element-major ordering, so the
solve is a direct banded factorization: Cholesky for the symmetric-definite
variant, LU otherwise.  A failed factorization is surfaced as
StabilityError since in practice it means the penalty is below its
stability threshold.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import assemble_forms, assemble_load, compose_scheme
from .kernel import make_kernel
from .mesh import PERIODIC, build_mesh
from .quadrature import gauss_rule
from .space import DGField, DGSpace, project


class StabilityError(RuntimeError):
    """Factorization failure, typically a penalty below the stable range."""


# ---------------------------------------------------------------------------
# banded direct solve

def _to_banded(B):
    coo = B.tocoo()
    n = B.shape[0]
    bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
    ab = np.zeros((2 * bw + 1, n))
    np.add.at(ab, (bw + coo.row - coo.col, coo.col), coo.data)
    return bw, ab


def _solve_direct(B, rhs, symmetric_definite):
    # periodic wrap couplings break bandedness; fall back to sparse LU
    coo = B.tocoo()
    n = B.shape[0]
    bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
    if bw > n // 2:
        try:
            return spla.splu(B.tocsc()).solve(rhs)
        except RuntimeError as exc:
            raise StabilityError(f"sparse factorization failed: {exc}") from None
    bw, ab = _to_banded(B)
    try:
        if symmetric_definite:
            return sla.solveh_banded(ab[:bw + 1, :], rhs)
        return sla.solve_banded((bw, bw), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise StabilityError(
            f"banded factorization failed ({exc}); the penalty is likely below "
            "its stability threshold") from None


def solve_steady(problem, N, k, variant, kernel, forms=None):
    """Assemble and solve the steady penalized system for one mesh."""
    if not problem.steady:
        raise ValueError(f"problem {problem.id} is time-dependent; use imex_evolve")
    a, b = problem.domain
    mesh = build_mesh(a, b, N, kernel.delta, problem.bc_mode)
    space = DGSpace(mesh, k)
    if forms is None:
        forms = assemble_forms(space, kernel)
    B = compose_scheme(forms, variant, mesh.h)
    rhs = assemble_load(space, problem.rhs(kernel))
    u = _solve_direct(B, rhs, symmetric_definite=(variant.tag == "nIP"))
    return DGField(space, u)


# ---------------------------------------------------------------------------
# norms

def l2_error(fld, exact):
    """L2 distance to a reference profile, (k+4)-point Gauss per element."""
    space = fld.space
    x, w, phi, _ = space.quad_tables(space.k + 4)
    coe = fld.coeffs.reshape(space.n_free, space.k + 1)
    uh = np.einsum("eqi,ei->eq", phi, coe)
    ex = np.asarray(exact(x.ravel()), dtype=float).reshape(x.shape)
    return float(np.sqrt(np.sum(w * (uh - ex) ** 2)))


def l2_norm(fld):
    """Exact L2 norm; the basis is orthonormal."""
    return float(np.linalg.norm(fld.coeffs))


def l2_diff(fld_a, fld_b, window=None):
    """L2 distance of two fields on possibly different meshes.

    Integrates over the union of both break sets (restricted to `window`
    when given) with a Gauss rule exact for the squared difference.
    """
    from .space import eval_field
    ka, kb = fld_a.space.k, fld_b.space.k
    mesh_a, mesh_b = fld_a.space.mesh, fld_b.space.mesh
    lo = window[0] if window else max(mesh_a.a, mesh_b.a)
    hi = window[1] if window else min(mesh_a.b, mesh_b.b)
    cuts = np.concatenate([mesh_a.nodes, mesh_b.nodes])
    cuts = np.unique(cuts[(cuts > lo) & (cuts < hi)])
    edges = np.concatenate([[lo], cuts, [hi]])
    xg, wg = gauss_rule(max(ka, kb) + 2)
    total = 0.0
    for el, er in zip(edges[:-1], edges[1:]):
        if er - el < 1e-14 * (hi - lo):
            continue
        half = 0.5 * (er - el)
        x = el + half * (xg + 1.0)
        va = np.array([eval_field(fld_a, xi) for xi in x])
        vb = np.array([eval_field(fld_b, xi) for xi in x])
        total += float(np.dot(half * wg, (va - vb) ** 2))
    return math.sqrt(total)


def energy_norms(fld, forms, mu):
    """(E, J, P) seminorms and the triple norm of a discrete field."""
    v = fld.coeffs
    e2 = float(v @ (forms.E @ v))
    j2 = float(v @ (forms.Jsemi @ v))
    p2 = float(v @ (forms.P @ v))
    clip = lambda x: max(x, 0.0)
    triple = math.sqrt(clip(e2) + clip(j2) + mu * clip(p2))
    return math.sqrt(clip(e2)), math.sqrt(clip(j2)), math.sqrt(clip(p2)), triple


# ---------------------------------------------------------------------------
# convergence studies

def delta_rule(rule):
    """Normalize a horizon rule to a callable h -> delta."""
    if callable(rule):
        return rule
    if isinstance(rule, (int, float)):
        return lambda h: float(rule)
    if rule == "2.5h":
        return lambda h: 2.5 * h
    if rule == "sqrt_h":
        return lambda h: math.sqrt(h)
    raise ValueError(f"unknown horizon rule {rule!r}")


@dataclass
class ReportRow:
    N: int
    h: float
    delta: float
    mu: float
    l2_error: float
    l2_order: Optional[float] = None
    energy_error: Optional[float] = None
    energy_order: Optional[float] = None


@dataclass
class ConvergenceReport:
    scheme: str
    k: int
    alpha: float
    rows: list = field(default_factory=list)

    def add(self, **kw):
        row = ReportRow(**kw)
        if self.rows:
            prev = self.rows[-1]
            ratio = math.log(row.N / prev.N)
            row.l2_order = math.log(prev.l2_error / row.l2_error) / ratio
            if row.energy_error and prev.energy_error:
                row.energy_order = math.log(prev.energy_error / row.energy_error) / ratio
        self.rows.append(row)
        return row

    @property
    def final_order(self):
        return self.rows[-1].l2_order if self.rows else None

    def errors(self):
        return [r.l2_error for r in self.rows]

    def orders(self):
        return [r.l2_order for r in self.rows[1:]]


def convergence_study(problem, Ns, k, variant, alpha, rule, with_energy=True):
    """Solve over increasing N, rebuilding the kernel when delta couples to h."""
    Ns = list(Ns)
    if any(n2 <= n1 for n1, n2 in zip(Ns, Ns[1:])):
        raise ValueError("mesh sequence must be increasing")
    rule_fn = delta_rule(rule)
    report = ConvergenceReport(scheme=variant.tag, k=k, alpha=alpha)
    a, b = problem.domain
    for N in Ns:
        h = (b - a) / N
        ks = make_kernel(alpha, rule_fn(h))
        mesh = build_mesh(a, b, N, ks.delta, problem.bc_mode)
        space = DGSpace(mesh, k)
        forms = assemble_forms(space, ks)
        fld = solve_steady(problem, N, k, variant, ks, forms=forms)
        mu = variant.mu_value(h)
        err = l2_error(fld, problem.exact)
        erow = dict(N=N, h=h, delta=ks.delta, mu=mu, l2_error=err)
        if with_energy:
            diff = DGField(space, fld.coeffs - project(space, problem.exact).coeffs)
            erow["energy_error"] = energy_norms(diff, forms, mu)[3]
        report.add(**erow)
    return report
