"""Power-law interaction kernel and its exact partial moments.

The kernel has horizon ``delta`` and singularity exponent ``alpha``:

    gamma(s) = scale * |s|**(-alpha)   on 0 < |s| <= delta,  else 0,

with ``scale = (3 - alpha) / (2 delta**(3 - alpha))`` chosen so that the
second moment over (-delta, delta) equals one.  All weighted integrals of
monomials against gamma are available in closed form through
:func:`partial_moment`; assembly never integrates through the singularity
numerically.
"""

import math
from dataclasses import dataclass

import numpy as np

_LOG_BRANCH_TOL = 1e-13


@dataclass(frozen=True)
class KernelSpec:
    """Horizon, singularity exponent and the normalization factor."""

    alpha: float
    delta: float
    scale: float


def make_kernel(alpha, delta):
    """Build a normalized kernel spec; rejects alpha >= 3 and delta <= 0."""
    alpha = float(alpha)
    delta = float(delta)
    if not 0.0 <= alpha < 3.0:
        raise ValueError(f"alpha must lie in [0, 3); got {alpha}"
                         " (second moment diverges at alpha >= 3)")
    if delta <= 0.0:
        raise ValueError(f"horizon delta must be positive; got {delta}")
    scale = (3.0 - alpha) / (2.0 * delta ** (3.0 - alpha))
    return KernelSpec(alpha=alpha, delta=delta, scale=scale)


def kernel_eval(ks, s):
    """Pointwise kernel value; even in s, zero beyond the horizon.

    s = 0 is rejected: the kernel is singular there and every caller is
    expected to integrate across the origin analytically.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr == 0.0):
        raise ValueError("kernel is singular at s = 0; use partial_moment")
    out = np.where(np.abs(s_arr) <= ks.delta,
                   ks.scale * np.abs(s_arr) ** (-ks.alpha), 0.0)
    if np.isscalar(s) or s_arr.ndim == 0:
        return float(out)
    return out


def partial_moment(ks, p, s1, s2):
    """Closed form of ``int_{s1}^{s2} s**p gamma(s) ds`` for 0 <= s1 <= s2 <= delta.

    Uses the power antiderivative, with a logarithmic branch when
    ``p + 1 - alpha`` vanishes.  Divergent combinations (s1 = 0 with
    p <= alpha - 1) are rejected.
    """
    if p < 0 or p != int(p):
        raise ValueError(f"moment order p must be a nonnegative integer; got {p}")
    s1 = float(s1)
    s2 = float(s2)
    if s1 < 0.0 or s2 < s1:
        raise ValueError(f"need 0 <= s1 <= s2; got s1={s1}, s2={s2}")
    if s2 > ks.delta * (1.0 + 1e-12):
        raise ValueError(f"s2={s2} exceeds the horizon delta={ks.delta}")
    expo = p + 1.0 - ks.alpha
    if s1 == 0.0 and expo <= 0.0:
        raise ValueError(
            f"int s^{p} gamma ds diverges at 0 for alpha={ks.alpha}")
    if s1 == s2:
        return 0.0
    if abs(expo) < _LOG_BRANCH_TOL:
        return ks.scale * math.log(s2 / s1)
    return ks.scale * (s2 ** expo - s1 ** expo) / expo
