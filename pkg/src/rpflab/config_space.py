"""Point configurations, cutoff windows, and restriction maps.

A configuration is a finite multiset of points stored as complex numbers;
one-dimensional ensembles carry exactly zero imaginary parts. Windows are
centered balls ``{|x| < b_r}``, annuli ``{b_r <= |x| < b_s}``, and
complements ``{|x| >= b_r}`` cut from a strictly increasing sequence of
radii. The boundary convention is half-open throughout: a point exactly on
an inner radius belongs to the annulus outside it, never to the ball.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Configuration:
    """Finite point multiset, kept sorted by (real, imag) for determinism."""

    points: tuple[complex, ...]

    def __init__(self, points=()):
        pts = tuple(sorted((complex(p) for p in points), key=lambda z: (z.real, z.imag)))
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @classmethod
    def from_reals(cls, xs) -> "Configuration":
        return cls([complex(float(x), 0.0) for x in xs])

    def reals(self):
        """Real parts as a list; valid for one-dimensional configurations."""
        return [p.real for p in self.points]

    def to_pairs(self) -> list[list[float]]:
        return [[p.real, p.imag] for p in self.points]

    def to_json(self) -> str:
        return json.dumps(self.to_pairs())

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls(complex(re, im) for re, im in json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for p in self.points:
            writer.writerow([repr(p.real), repr(p.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Configuration":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        return cls(complex(float(re), float(im)) for re, im in rows)


@dataclass(frozen=True)
class AnnulusSequence:
    """Strictly increasing cutoff radii ``b_1 < b_2 < ...`` with ``b_1 >= 1``.

    Index 0 maps to the degenerate radius 0, so an annulus from 0 to r
    coincides with the ball of index r; index ``math.inf`` denotes the
    unbounded outside.
    """

    cutoffs: tuple[float, ...]

    def __init__(self, cutoffs):
        cut = tuple(float(b) for b in cutoffs)
        if not cut:
            raise ValueError("cutoff sequence must be nonempty")
        if cut[0] < 1.0:
            raise ValueError("first cutoff must be >= 1")
        if any(b2 <= b1 for b1, b2 in zip(cut, cut[1:])):
            raise ValueError("cutoffs must be strictly increasing")
        object.__setattr__(self, "cutoffs", cut)

    @classmethod
    def default(cls, count: int = 8) -> "AnnulusSequence":
        """The sequence b_r = r."""
        return cls(tuple(float(r) for r in range(1, count + 1)))

    def __len__(self) -> int:
        return len(self.cutoffs)

    def radius(self, r) -> float:
        """Cutoff b_r; r = 0 gives 0.0 and r = inf gives inf."""
        if r == 0:
            return 0.0
        if r == math.inf:
            return math.inf
        idx = int(r)
        if idx < 1 or idx > len(self.cutoffs):
            raise IndexError(f"annulus index {r} outside configured range 1..{len(self.cutoffs)}")
        return self.cutoffs[idx - 1]


@dataclass(frozen=True)
class Window:
    """Ball, annulus, or complement referencing an AnnulusSequence.

    ``r`` and ``s`` are annulus indices, not radii: the window covers
    moduli in the half-open band [b_r, b_s).
    """

    kind: str
    r: float
    s: float
    ann: AnnulusSequence = field(compare=False)

    @classmethod
    def ball(cls, r, ann: AnnulusSequence) -> "Window":
        return cls("ball", 0, r, ann)

    @classmethod
    def annulus(cls, r, s, ann: AnnulusSequence) -> "Window":
        if not r < s:
            raise ValueError(f"annulus requires r < s, got ({r}, {s})")
        return cls("annulus", r, s, ann)

    @classmethod
    def complement(cls, r, ann: AnnulusSequence) -> "Window":
        return cls("complement", r, math.inf, ann)

    def bounds(self) -> tuple[float, float]:
        """Half-open modulus bounds [lo, hi) of the window."""
        return self.ann.radius(self.r), self.ann.radius(self.s)

    def contains(self, point: complex) -> bool:
        lo, hi = self.bounds()
        return lo <= abs(point) < hi


def restrict(config: Configuration, w: Window) -> Configuration:
    """Points of ``config`` lying in ``w``, multiplicity preserved."""
    return Configuration(p for p in config if w.contains(p))


def count(config: Configuration, w: Window) -> int:
    """Number of points of ``config`` in ``w`` (with multiplicity)."""
    return sum(1 for p in config if w.contains(p))
