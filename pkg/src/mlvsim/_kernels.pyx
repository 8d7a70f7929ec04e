# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: attribute curves, reward, exponential sampling.

Must stay expression-for-expression identical to ``_kernels_py.py`` so both
backends produce bit-identical simulation output.
"""

from libc.math cimport log1p, pow

BACKEND = "compiled"


cpdef double geometric_attr(double start, double end, double frac):
    if start == end:
        return start
    return start * pow(end / start, frac)


cpdef double percent_step_attr(double start, double end, double major,
                               double minor, double major_step,
                               double minor_step):
    cdef double value = start * pow(1.0 + major_step, major) * pow(1.0 + minor_step, minor)
    cdef double lo = start if start < end else end
    cdef double hi = end if start < end else start
    if value < lo:
        return lo
    if value > hi:
        return hi
    return value


cpdef double reward_value(double delay_ratio, double instability,
                          double accuracy, double alpha, double w1,
                          double w2, double w3):
    return -(1.0 - alpha) * (w1 * delay_ratio + w2 * instability) + alpha * w3 * accuracy


cpdef double q_step(double q_sa, double lr, double r, double gamma,
                    double max_next):
    return q_sa + lr * (r + gamma * max_next - q_sa)


cpdef double exp_interval(double u, double mean):
    return -mean * log1p(-u)
