"""Independent reference computations used to check the fast paths."""

import itertools

import mpmath
import numpy as np


def q_mp(x: float) -> float:
    """Gaussian tail at 50-digit precision."""
    with mpmath.workdps(50):
        return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


def access_by_enumeration(m_max: int, n_res: int, p: float, include_zero: bool) -> float:
    """Sum the probability of every request pattern over ``m_max`` slots.

    Each slot independently carries a valid request with probability ``p``;
    a pattern grants access when its request count is at most ``n_res``
    (and, without the empty-beam term, at least one).
    """
    total = 0.0
    lo = 0 if include_zero else 1
    for pattern in itertools.product((0, 1), repeat=m_max):
        k = sum(pattern)
        if lo <= k <= n_res:
            total += p**k * (1 - p) ** (m_max - k)
    return total


def access_by_enumeration_vec(m_max: int, p: float):
    """All-n_res version: returns (include_zero, paper_exact) arrays over n_res = 0..m_max."""
    k = np.array([sum(pat) for pat in itertools.product((0, 1), repeat=m_max)], dtype=np.int64)
    w = np.array([p**int(j) * (1 - p) ** (m_max - int(j)) for j in k])
    inc = np.array([w[k <= n].sum() for n in range(m_max + 1)])
    exact = np.array([w[(k >= 1) & (k <= n)].sum() for n in range(m_max + 1)])
    return inc, exact
