"""Pure-Python twin of the compiled kernel module.

Every function here must stay expression-for-expression identical to
``_kernels.pyx`` so that a run produces bit-identical output regardless of
which backend got selected at import.
"""

import math

BACKEND = "python"


def geometric_attr(start, end, frac):
    """Interpolate between two endpoint values on a geometric curve.

    frac is the normalized position in [0, 1]; frac=0 yields ``start``
    exactly and frac=1 yields ``end`` exactly.
    """
    if start == end:
        return start
    return start * (end / start) ** frac


def percent_step_attr(start, end, major, minor, major_step, minor_step):
    """Apply multiplicative per-release steps, clamped to [start, end].

    major/minor are release counts; the steps are signed fractions
    (e.g. +0.02 per major, +0.001 per minor). The result never leaves
    the closed interval spanned by the two endpoints.
    """
    value = start * (1.0 + major_step) ** major * (1.0 + minor_step) ** minor
    lo = start if start < end else end
    hi = end if start < end else start
    if value < lo:
        return lo
    if value > hi:
        return hi
    return value


def reward_value(delay_ratio, instability, accuracy, alpha, w1, w2, w3):
    """Scalar reward trading off delay and instability against accuracy."""
    return -(1.0 - alpha) * (w1 * delay_ratio + w2 * instability) + alpha * w3 * accuracy


def q_step(q_sa, lr, r, gamma, max_next):
    """One-step temporal-difference update target for a Q-table entry."""
    return q_sa + lr * (r + gamma * max_next - q_sa)


def exp_interval(u, mean):
    """Inverse-transform exponential draw from a uniform u in [0, 1)."""
    return -mean * math.log1p(-u)
