"""Potential and Hamiltonian algebra for the compensated log-gas.

Everything here works over complex points so that one and two dimensional
cases share a code path; one-dimensional data simply has zero imaginary
parts. The linear compensation uses the complex pairing
``m . x = Re[x * conj(m)]``, which reduces to ordinary multiplication on
the real line.

The central objects:

* block interaction sums between two annular blocks, optionally
  compensated by the difference of the outer block's compensator pair;
* compensated Hamiltonians, where the free potential is tilted by the
  limiting compensator so that soft-edge free terms stay bounded;
* the geometric-series tail of the log potential around the origin, with
  a rigorous remainder bound;
* a certified upper bound for the Lipschitz constant of the compensated
  window-to-annulus interaction, together with grid-sup evaluators used
  as its independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config_space import AnnulusSequence, Configuration, Window, restrict


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


def pair_dot(m: complex, x: complex) -> float:
    """Real pairing m . x = Re[x * conj(m)]; plain product on the real line."""
    return (x * m.conjugate()).real


@dataclass(frozen=True)
class CompensatorSequence:
    """Compensator constants m_s per annulus index, with limit m_inf.

    Indices beyond the explicitly configured values fall back to ``m_inf``,
    so the defining limit m_s -> m_inf holds by construction.
    """

    m_inf: complex
    values: tuple[complex, ...] = ()

    def m_at(self, s) -> complex:
        if s == math.inf:
            return self.m_inf
        idx = int(s)
        if idx < 1:
            raise IndexError("compensator index must be >= 1 or inf")
        if idx <= len(self.values):
            return self.values[idx - 1]
        return self.m_inf

    @classmethod
    def constant(cls, value) -> "CompensatorSequence":
        return cls(m_inf=complex(value))

    @classmethod
    def softedge_default(cls, beta: float, n: int) -> "CompensatorSequence":
        """Constant compensators beta * n^(1/3).

        This is the linear coefficient of the expanded soft-edge confinement,
        so the tilted free potential (beta/4) n^(-1/3) x^2 stays bounded on
        compacts uniformly in n.
        """
        return cls.constant(beta * n ** (1.0 / 3.0))


ZERO_COMPENSATORS = CompensatorSequence.constant(0.0)


def log_potential(x: complex, y: complex, beta: float) -> float:
    """Pairwise log potential -beta * log|x - y| with an inf sentinel at x = y."""
    gap = abs(complex(x) - complex(y))
    if gap == 0.0:
        if beta > 0:
            return math.inf
        return -math.inf if beta < 0 else 0.0
    return -beta * math.log(gap)


@dataclass(frozen=True)
class PotentialPair:
    """Free potential phi, symmetric pair potential psi, and the beta of psi."""

    phi: object
    psi: object
    beta: float

    @classmethod
    def log_gas(cls, beta: float, phi=None) -> "PotentialPair":
        """Log pair potential with an optional free potential (default 0)."""
        free = phi if phi is not None else (lambda x: 0.0)
        return cls(phi=free, psi=lambda a, b: log_potential(a, b, beta), beta=beta)

    @classmethod
    def free_only(cls, phi) -> "PotentialPair":
        """No interaction; used as the independence control."""
        return cls(phi=phi, psi=lambda a, b: 0.0, beta=0.0)


def hamiltonian(pp: PotentialPair, w: Window, config: Configuration) -> float:
    """Energy of the points inside ``w``: free terms plus internal pairs."""
    pts = restrict(config, w).points
    total = 0.0
    for p in pts:
        total += pp.phi(p)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            total += pp.psi(pts[i], pts[j])
    return total


def compensated_hamiltonian(pp: PotentialPair, comp: CompensatorSequence,
                            w: Window, config: Configuration) -> float:
    """Hamiltonian with the free potential tilted to phi(x) - m_inf . x."""
    pts = restrict(config, w).points
    total = 0.0
    for p in pts:
        total += pp.phi(p) - pair_dot(comp.m_inf, p)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            total += pp.psi(pts[i], pts[j])
    return total


def block_interaction(x_cfg: Configuration, y_cfg: Configuration,
                      ann: AnnulusSequence, blocks, pp: PotentialPair,
                      comp: CompensatorSequence | None = None,
                      compensated: bool = False) -> float:
    """Interaction sum between the points of two annular blocks.

    ``blocks`` is (r, s, t, u) with r < s <= t < u <= inf: the x points are
    restricted to the band [b_r, b_s) and the y points to [b_t, b_u). With
    ``compensated`` the linear term Re[(sum of x) * conj(m_t - m_u)] is added.
    """
    r, s, t, u = blocks
    if not (r < s <= t < u):
        raise ValueError(f"blocks must satisfy r < s <= t < u, got {blocks}")
    if compensated and comp is None:
        raise ValueError("compensated block interaction requires a CompensatorSequence")
    wx = Window.annulus(r, s, ann)
    wy = Window.annulus(t, u, ann)
    xs = restrict(x_cfg, wx).points
    ys = restrict(y_cfg, wy).points
    total = 0.0
    for a in xs:
        for b in ys:
            total += pp.psi(a, b)
    if compensated:
        diff = comp.m_at(t) - comp.m_at(u)
        total += pair_dot(diff, sum(xs, start=complex(0.0)))
    return total


def taylor_tail(x: complex, y_cfg: Configuration, beta: float,
                L: int) -> tuple[float, float]:
    """Truncated expansion of the log-potential difference around the origin.

    Returns the partial sum to order ``L`` of
    beta * sum_j sum_{l>=1} (1/l) Re[(x/y_j)^l], which converges to
    Psi(x, y) - Psi(0, y) summed over the y points, together with the
    rigorous remainder bound |beta| * sum_j r_j^(L+1) / ((L+1)(1 - r_j)),
    r_j = |x|/|y_j|.

    Raises DomainError unless |x| < |y_j| strictly for every j.
    """
    if L < 1:
        raise ValueError("truncation order L must be >= 1")
    x = complex(x)
    ys = np.array(y_cfg.points, dtype=complex)
    if ys.size == 0:
        return 0.0, 0.0
    if np.any(np.abs(ys) <= abs(x)):
        raise DomainError("expansion requires |x| < |y_j| for every y point")
    ratios = x / ys
    power = np.ones_like(ratios)
    total = 0.0
    for ell in range(1, L + 1):
        power = power * ratios
        total += float(np.sum(power.real)) / ell
    radii = np.abs(ratios)
    bound = abs(beta) * float(np.sum(radii ** (L + 1) / ((L + 1) * (1.0 - radii))))
    return beta * total, bound


# --- Lipschitz functional of the compensated window-to-annulus interaction ---


def power_gap_sup(ell: int, radius: float) -> float:
    """sup over |x|,|w| <= radius of |x^l - w^l| / (l |x - w|).

    The difference quotient extends continuously to x = w where it equals
    |x|^(l-1), so the supremum is radius^(l-1), attained on the boundary.
    """
    return radius ** (ell - 1)


def power_gap_grid_sup(ell: int, radius: float, base: int = 50,
                       tol: float = 0.01, max_rounds: int = 6) -> float:
    """Grid evaluation of :func:`power_gap_sup` on the real interval.

    Doubles the grid until the supremum moves by less than ``tol``
    relatively; converges to the closed form from below. Kept as a check
    on the closed form, not used in certified bounds.
    """
    k = base
    prev = -math.inf
    for _ in range(max_rounds):
        xs = np.linspace(-radius, radius, k + 2)[1:-1]
        diff = np.abs(xs[:, None] ** ell - xs[None, :] ** ell)
        gap = np.abs(xs[:, None] - xs[None, :])
        mask = gap > 0
        cur = float(np.max(diff[mask] / (ell * gap[mask])))
        if prev > -math.inf and abs(cur - prev) <= tol * abs(cur):
            return cur
        prev = cur
        k *= 2
    return prev


def c6x(beta: float, radius: float, ell0: int) -> float:
    """Coefficient of the middle-order sums: |beta| * max_{l < ell0} radius^(l-1)."""
    if ell0 < 2:
        raise ValueError("ell0 must be >= 2")
    return abs(beta) * max(power_gap_sup(ell, radius) for ell in range(1, ell0))


def c6y(beta: float, radius: float) -> float:
    """Coefficient of the geometric tail: |beta| * sup_{l} radius^(l-1)/radius^l."""
    return abs(beta) / radius


def _first_order_coefficient(ys: np.ndarray, comp: CompensatorSequence,
                             r, s, beta: float) -> complex:
    total = complex(np.sum(1.0 / ys)) if ys.size else 0.0
    return beta * total + (comp.m_at(r).conjugate() - comp.m_at(s).conjugate())


def lipschitz_ratio(x: complex, w: complex, y_cfg: Configuration,
                    r, s, ann: AnnulusSequence, comp: CompensatorSequence,
                    beta: float) -> float:
    """|PsiTilde(x, y) - PsiTilde(w, y)| / |x - w| for window points x != w.

    PsiTilde is the compensated interaction between the window (ball r) and
    the annular block [b_r, b_s), with compensator pair (m_r, m_s).
    """
    x, w = complex(x), complex(w)
    if x == w:
        raise ValueError("lipschitz ratio requires x != w")
    b = ann.radius(r)
    if abs(x) >= b or abs(w) >= b:
        raise DomainError("window points must lie strictly inside the ball")
    pp = PotentialPair.log_gas(beta)
    vx = block_interaction(Configuration([x]), y_cfg, ann, (0, r, r, s), pp,
                           comp, compensated=True)
    vw = block_interaction(Configuration([w]), y_cfg, ann, (0, r, r, s), pp,
                           comp, compensated=True)
    return abs(vx - vw) / abs(x - w)


def lipschitz_ratio_grid_sup(y_cfg: Configuration, r, s, ann: AnnulusSequence,
                             comp: CompensatorSequence, beta: float,
                             grid: int = 50, tol: float = 0.01,
                             max_rounds: int = 3) -> float:
    """Grid supremum of :func:`lipschitz_ratio` over real window pairs.

    Uses an interior grid on (-b_r, b_r), doubled until the supremum moves
    by less than ``tol`` relatively. This is the independent oracle that the
    certified :func:`lipschitz_bound` must dominate.
    """
    b = ann.radius(r)
    ys = np.array(restrict(y_cfg, Window.annulus(r, s, ann)).points, dtype=complex)
    mdiff = comp.m_at(r) - comp.m_at(s)
    k = grid
    prev = -math.inf
    for _ in range(max_rounds):
        xs = np.linspace(-b, b, k + 2)[1:-1]
        if ys.size:
            profile = -beta * np.sum(np.log(np.abs(xs[:, None] - ys[None, :])), axis=1)
        else:
            profile = np.zeros_like(xs)
        profile = profile + (xs * np.conj(mdiff)).real
        num = np.abs(profile[:, None] - profile[None, :])
        den = np.abs(xs[:, None] - xs[None, :])
        mask = den > 0
        cur = float(np.max(num[mask] / den[mask]))
        if prev > -math.inf and abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
        k *= 2
    return prev


def geometric_tail(mod: np.ndarray, b: float, ell0: int) -> np.ndarray:
    """Exact tail sum_{l >= ell0} (b/|y|)^l = b^ell0 / (|y|^(ell0-1) (|y| - b)).

    This dominates, and is at most ell0 times, the shell functional
    b^ell0 / (|y|^ell0 - b^ell0) used in the tail-set definitions.
    """
    return b**ell0 / (mod ** (ell0 - 1) * (mod - b))


def lipschitz_bound(y_cfg: Configuration, r, s, ann: AnnulusSequence,
                    comp: CompensatorSequence, beta: float,
                    ell0: int) -> float:
    """Certified upper bound for the Lipschitz constant of PsiTilde over the window.

    The bound is |c1| + c6x * sum_{l=2}^{ell0-1} |sum_j y_j^-l|
    + c6y * sum_j b_r^ell0 / (|y_j|^(ell0-1) (|y_j| - b_r)), where c1 is the
    complex first-order coefficient beta * sum_j 1/y_j + conj(m_r) - conj(m_s)
    and the last term is the exact geometric tail of the expansion. The sums
    run over the y points in the band [b_r, b_s).

    Raises DomainError if any y point has modulus <= b_r, which would break
    the geometric tail.
    """
    if ell0 < 2:
        raise ValueError("ell0 must be >= 2")
    b = ann.radius(r)
    all_pts = np.array(y_cfg.points, dtype=complex)
    if all_pts.size and np.any(np.abs(all_pts) <= b):
        raise DomainError("all y points must satisfy |y| > b_r")
    ys = np.array(restrict(y_cfg, Window.annulus(r, s, ann)).points, dtype=complex)
    first = abs(_first_order_coefficient(ys, comp, r, s, beta))
    middle = 0.0
    if ys.size:
        cx = c6x(beta, b, ell0)
        for ell in range(2, ell0):
            middle += cx * abs(complex(np.sum(ys ** (-float(ell)))))
        tail = c6y(beta, b) * float(np.sum(geometric_tail(np.abs(ys), b, ell0)))
    else:
        tail = 0.0
    return first + middle + tail
