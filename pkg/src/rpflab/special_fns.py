"""Airy function, correlation kernels, and determinantal correlations.

The Airy evaluator is a classic two-regime scheme: the Maclaurin pair
series of the Airy equation for ``|x| <= 7`` and asymptotic expansions
beyond (monotone exponential form on the positive side, oscillatory
sine/cosine form on the negative side), each truncated at its smallest
term. The switch point was placed where the two regimes overlap below
1e-10 absolute error against an independent quadrature oracle of the
oscillatory integral representation; see ``scripts/gen_airy_oracle.py``.

Accuracy, measured against that oracle:

* ``|x| <= 7``  series error       < 5e-11 (worst near +7)
* ``x  >  7``   asymptotic error   < 1e-18
* ``x  < -7``   asymptotic error   < 4e-13

Documented range is [-40, 15]; outside it the evaluator raises instead of
silently degrading.
"""

from __future__ import annotations

import math

import numpy as np

AIRY_RANGE = (-40.0, 15.0)
_SERIES_ASYMPTOTIC_SWITCH = 7.0
_KERNEL_DIAGONAL_TOL = 1e-6

# Ai(0) = 3^(-2/3)/Gamma(2/3) and Ai'(0) = -3^(-1/3)/Gamma(1/3)
_AI0 = 0.35502805388781723926
_AIP0 = -0.25881940379280679841

_SQRT_PI = math.sqrt(math.pi)


class AiryRangeError(ValueError):
    """Argument outside the documented accuracy range of the Airy evaluator."""


def _airy_series(x: float) -> tuple[float, float]:
    """Maclaurin pair series; exact summation via fsum to tame cancellation."""
    x3 = x * x * x
    f_terms = [1.0]
    g_terms = [x]
    tf, tg = 1.0, x
    k = 0
    while True:
        tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        f_terms.append(tf)
        g_terms.append(tg)
        k += 1
        if (abs(tf) < 1e-30 and abs(tg) < 1e-30) or k > 120:
            break
    f = math.fsum(f_terms)
    g = math.fsum(g_terms)
    if x != 0.0:
        fp = math.fsum(t * (3 * i) / x for i, t in enumerate(f_terms))
        gp = math.fsum(t * (3 * i + 1) / x for i, t in enumerate(g_terms))
    else:
        fp, gp = 0.0, 1.0
    c1, c2 = _AI0, -_AIP0
    return c1 * f - c2 * g, c1 * fp - c2 * gp


def _uv_coefficients(limit: int = 80) -> tuple[list[float], list[float]]:
    us = [1.0]
    vs = [1.0]
    u = 1.0
    for k in range(1, limit):
        u = u * (6 * k - 5) * (6 * k - 1) / (72.0 * k)
        us.append(u)
        vs.append(u * (6 * k + 1) / (1.0 - 6 * k))
    return us, vs


_US, _VS = _uv_coefficients()


def _smallest_term_sum(coeffs, zeta: float, start: int, step: int) -> float:
    """Alternating sum of coeffs[i]/zeta^i over i = start, start+step, ...

    truncated just before the first term that stops shrinking.
    """
    total = 0.0
    prev = math.inf
    sign = 1.0
    i = start
    while i < len(coeffs):
        term = sign * coeffs[i] / zeta**i
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        sign = -sign
        i += step
    return total


def _airy_asymptotic_pos(x: float) -> tuple[float, float]:
    zeta = (2.0 / 3.0) * x**1.5
    su = _smallest_term_sum(_US, zeta, 0, 1)
    sv = _smallest_term_sum(_VS, zeta, 0, 1)
    pref = math.exp(-zeta) / (2.0 * _SQRT_PI)
    return pref * su / x**0.25, -pref * sv * x**0.25


def _airy_asymptotic_neg(x: float) -> tuple[float, float]:
    t = -x
    zeta = (2.0 / 3.0) * t**1.5
    ce = _smallest_term_sum(_US, zeta, 0, 2)
    co = _smallest_term_sum(_US, zeta, 1, 2)
    de = _smallest_term_sum(_VS, zeta, 0, 2)
    do = _smallest_term_sum(_VS, zeta, 1, 2)
    w = zeta - math.pi / 4.0
    ai = (math.cos(w) * ce + math.sin(w) * co) / (_SQRT_PI * t**0.25)
    aip = (t**0.25 / _SQRT_PI) * (math.sin(w) * de - math.cos(w) * do)
    return ai, aip


def airy(x: float) -> tuple[float, float]:
    """Evaluate (Ai(x), Ai'(x)) for real x in [-40, 15].

    Raises
    ------
    AiryRangeError
        If x lies outside the documented accuracy range.
    """
    x = float(x)
    if not (AIRY_RANGE[0] <= x <= AIRY_RANGE[1]):
        raise AiryRangeError(f"x={x} outside Airy accuracy range {AIRY_RANGE}")
    if abs(x) <= _SERIES_ASYMPTOTIC_SWITCH:
        return _airy_series(x)
    if x > 0:
        return _airy_asymptotic_pos(x)
    return _airy_asymptotic_neg(x)


def airy_kernel(x: float, y: float) -> float:
    """Airy two-point kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y).

    Within 1e-6 of the diagonal the quotient loses digits to cancellation,
    so the analytic diagonal value Ai'(m)^2 - m*Ai(m)^2 is used at the pair
    midpoint m; by symmetry the first-order Taylor term vanishes there and
    the replacement is accurate to O(|x-y|^2).
    """
    x, y = float(x), float(y)
    if abs(x - y) < _KERNEL_DIAGONAL_TOL:
        m = 0.5 * (x + y)
        ai, aip = airy(m)
        return aip * aip - m * ai * ai
    aix, aipx = airy(x)
    aiy, aipy = airy(y)
    return (aix * aipy - aipx * aiy) / (x - y)


def sine_kernel(x: float, y: float) -> float:
    """Standard sine kernel sin(pi(x-y))/(pi(x-y)), diagonal value 1."""
    return float(np.sinc(float(x) - float(y)))


_KERNELS = {"airy": airy_kernel, "sine": sine_kernel}


def kernel(kind: str, x: float, y: float) -> float:
    """Dispatch to the named two-point kernel."""
    return _KERNELS[kind](x, y)


_DET_MAX_ORDER = 16


def det_correlation(kind: str, points) -> float:
    """Correlation-function value det[K(x_i, x_j)] for the chosen kernel.

    Computed by partial-pivoted elimination; orders above 16 are refused
    since nothing in this package needs them.
    """
    kernel = _KERNELS[kind]
    pts = [float(p) for p in points]
    n = len(pts)
    if n < 1:
        raise ValueError("need at least one point")
    if n > _DET_MAX_ORDER:
        raise ValueError(f"correlation order {n} exceeds supported maximum {_DET_MAX_ORDER}")
    gram = np.array([[kernel(a, b) for b in pts] for a in pts])
    return float(np.linalg.det(gram))


def rho1(kind: str, x: float) -> float:
    """One-point intensity K(x, x)."""
    return _KERNELS[kind](x, x)
