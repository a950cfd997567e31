"""Numerical verification of the stability and boundedness inequalities.

Every inequality the analysis provides is a finite-dimensional statement on
one assembled space, so each constant is estimated at the matrix level:
generalized eigenvalues for exact extremes, seeded random sampling for
lower-bound spot checks.  Sweeps across (N, k, alpha, delta) report how the
estimates drift, which is the computable meaning of "independent of h and
delta".
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True)
class InequalityReport:
    quantity: str
    N: int
    k: int
    alpha: float
    delta: float
    mu: float
    estimate: float
    method: str


def _gram(forms, mu):
    return (forms.E + forms.Jsemi + mu * forms.P).toarray()


def _bilinear(forms, tag, mu):
    """E + J + mu P at an explicitly prescribed penalty value."""
    B = forms.E + mu * forms.P
    if tag == "nIP":
        B = B + forms.Jsym
    elif tag == "nNIPG":
        B = B + forms.Jskew
    elif tag != "nBZ":
        raise ValueError(f"unknown penalty variant {tag!r}")
    return B.tocsr()


def stability_constant(forms, variant, mu):
    """Smallest eigenvalue of sym(B) against the triple-norm Gram matrix.

    Positive values certify coercivity at this penalty; nonpositive values
    flag a penalty below its stability threshold.
    """
    if mu <= 0.0:
        raise ValueError("penalty mu must be positive")
    B = _bilinear(forms, variant.tag, mu).toarray()
    A = 0.5 * (B + B.T)
    G = _gram(forms, mu)
    try:
        vals = sla.eigh(A, G, eigvals_only=True, subset_by_index=[0, 0])
    except sla.LinAlgError as exc:
        raise RuntimeError(f"triple-norm Gram matrix is not definite: {exc}") from None
    return float(vals[0])


def lemma_c0(forms, n_samples=1000, seed=0):
    """Supremum of |v|_J^2 / |v|_E^2 over the discrete space.

    The E form may be only semidefinite in floating point, so the pencil is
    regularized by eps = 1e-12 tr(E)/n; a seeded random sweep double-checks
    the eigenvalue from below.
    """
    E = forms.E.toarray()
    J = forms.Jsemi.toarray()
    n = E.shape[0]
    eps = 1e-12 * np.trace(E) / n
    Ereg = E + eps * np.eye(n)
    top = float(sla.eigh(J, Ereg, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, n_samples))
    num = np.einsum("ij,ij->j", V, J @ V)
    den = np.einsum("ij,ij->j", V, Ereg @ V)
    sampled = float(np.max(num / den))
    return max(top, sampled)


def boundedness_check(forms, mu, trials=1000, seed=0, variant=None):
    """Max of |B(v, w)| / (|||v||| |||w|||) over seeded random pairs.

    Requires mu >= 1/rho, under which the continuity bound caps the ratio
    at 2; a violation raises.
    """
    rho = forms.space.mesh.rho
    if mu < 1.0 / rho * (1.0 - 1e-12):
        raise ValueError(f"the continuity bound needs mu >= 1/rho = {1.0 / rho}")
    tag = variant.tag if variant is not None else "nIP"
    B = _bilinear(forms, tag, mu)
    G = forms.E + forms.Jsemi + mu * forms.P
    rng = np.random.default_rng(seed)
    n = B.shape[0]
    V = rng.standard_normal((n, trials))
    W = rng.standard_normal((n, trials))
    num = np.abs(np.einsum("ij,ij->j", V, B @ W))
    tv = np.einsum("ij,ij->j", V, G @ V)
    tw = np.einsum("ij,ij->j", W, G @ W)
    ratios = num / np.sqrt(tv * tw)
    worst = float(np.max(ratios))
    if worst > 2.0 + 1e-9:
        raise RuntimeError(f"continuity bound violated: ratio {worst} > 2")
    return worst


def poincare_ratio(forms, mu, method="eigen", trials=200, seed=0):
    """Supremum of ||v||_L2 / |||v|||; the L2 Gram matrix is the identity."""
    G = _gram(forms, mu)
    if method == "eigen":
        lam_min = float(sla.eigh(G, eigvals_only=True, subset_by_index=[0, 0])[0])
        if lam_min <= 0.0:
            raise RuntimeError("triple-norm Gram matrix is numerically singular")
        return 1.0 / math.sqrt(lam_min)
    rng = np.random.default_rng(seed)
    n = G.shape[0]
    V = rng.standard_normal((n, trials))
    num = np.einsum("ij,ij->j", V, V)
    den = np.einsum("ij,ij->j", V, G @ V)
    return float(np.sqrt(np.max(num / den)))


def run_sweep(quantity, configs, mu_coeff=5.0, seed=0, trials=1000):
    """Evaluate one diagnostic over prebuilt (forms, meta) configurations.

    `configs` yields (forms, N, k, alpha, delta); mu = mu_coeff / h
    throughout, which matches the penalty used by the production scheme.
    """
    from .assembly import nip
    out = []
    for forms, N, k, alpha, delta in configs:
        h = forms.space.mesh.h
        mu = mu_coeff / h
        if quantity == "stability":
            est = stability_constant(forms, nip(mu_coeff), mu)
            method = "eigen"
        elif quantity == "c0":
            est = lemma_c0(forms, n_samples=trials, seed=seed)
            method = "eigen"
        elif quantity == "boundedness":
            est = boundedness_check(forms, mu, trials=trials, seed=seed)
            method = "random_sample"
        elif quantity == "poincare":
            est = poincare_ratio(forms, mu)
            method = "eigen"
        else:
            raise ValueError(f"unknown diagnostic quantity {quantity!r}")
        out.append(InequalityReport(quantity=quantity, N=N, k=k, alpha=alpha,
                                    delta=delta, mu=mu, estimate=est, method=method))
    return out
