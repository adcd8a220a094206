"""Numerical evaluation of the tail-moment and tightness conditions.

Four families of diagnostics, all reported as :class:`ConditionReport`:

* ``check_h4``: inverse-power tail moments of the one-point intensity and
  L1 norms of the annular inverse-power sums ``v_ell``, across a grid of
  ensemble sizes, with boundedness and decay-in-s verdicts (condition H4).
* ``estimate_hrk_complement``: tail probabilities of the certified
  Lipschitz envelope exceeding a level k, an upper bound for the measure
  of configurations outside the set H_{r,k} (condition H3).
* ``check_h5``: tail probabilities of the per-order sets U and the
  geometric-tail set Ubar, with the diagnostic V-set decomposition and its
  empirical Chebyshev bounds (condition H5).
* ``quasi_gibbs_probe``: oscillation of the conditional log-density of the
  window given the outside, the two-sided-density diagnostic behind the
  quasi-Gibbs property.

Annulus-index conventions match :mod:`rpflab.config_space`: windows are
half-open bands, and the index ``inf`` denotes the unbounded outside,
legitimate here because a finite ensemble carries at most n points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config_space import AnnulusSequence, Configuration, Window, restrict
from .ensembles import EnsembleSpec, sample_many, sample_scaled
from .interactions import (CompensatorSequence, DomainError, c6x, c6y,
                           geometric_tail)

DEFAULT_ELL0 = 3
DEFAULT_P_MAX = 64


@dataclass(frozen=True)
class ConditionReport:
    """Structured numeric results of one condition evaluation."""

    condition: str
    params: dict
    table: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    seed: int | None = None
    replicas: int | None = None

    def to_json(self) -> str:
        payload = {
            "condition": self.condition,
            "params": self.params,
            "table": self.table,
            "verdicts": self.verdicts,
            "seed": self.seed,
            "replicas": self.replicas,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _s_label(s) -> str:
    return "inf" if s == math.inf else str(int(s))


def v_ell(config: Configuration, ell: int, r, s, ann: AnnulusSequence,
          comp: CompensatorSequence, beta: float) -> complex:
    """Annular inverse-power sum beta * sum_{x in band} x^-ell.

    For ell = 1 the conjugate compensator difference conj(m_r) - conj(m_s)
    is added. ``s`` may be inf (complement window).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    pts = np.array(restrict(config, Window.annulus(r, s, ann)).points, dtype=complex)
    if pts.size and np.any(pts == 0):
        raise DomainError("point at the origin inside an annulus")
    total = beta * complex(np.sum(pts ** (-float(ell)))) if pts.size else 0.0 + 0.0j
    if ell == 1:
        total = total + comp.m_at(r).conjugate() - comp.m_at(s).conjugate()
    return complex(total)


def tail_integral(samples, ell0: int) -> tuple[float, float]:
    """Monte Carlo estimate of E[sum_{|x|>=1} |x|^-ell0] with replica stderr.

    By the factorial-moment identity this expectation equals the integral
    of |x|^-ell0 against the one-point intensity over {|x| >= 1}.
    """
    if ell0 < 2:
        raise ValueError("ell0 must be >= 2")
    if len(samples) < 2:
        raise ValueError("need at least 2 replicas")
    vals = np.empty(len(samples))
    for i, cfg in enumerate(samples):
        mods = np.abs(np.array(cfg.points, dtype=complex))
        mods = mods[mods >= 1.0]
        vals[i] = float(np.sum(mods ** (-float(ell0))))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def _sup_p_abs_v1(base: complex, r, s, comp_family, p_max: int) -> tuple[float, int]:
    """sup over p <= p_max of |base + conj(m^p_r) - conj(m^p_s)| and its argmax."""
    best, best_p = -1.0, 1
    for p in range(1, p_max + 1):
        comp = comp_family(p)
        val = abs(base + comp.m_at(r).conjugate() - comp.m_at(s).conjugate())
        if val > best:
            best, best_p = val, p
    return best, best_p


def check_h4(beta: float, n_grid, ell0: int, ann: AnnulusSequence,
             replicas: int, seed: int, *, scaling: str = "softedge",
             method: str = "tridiagonal", comp_family=None,
             p_max: int = DEFAULT_P_MAX, r: int = 1, s_values=None,
             workers: int = 1) -> ConditionReport:
    """Tail-moment boundedness and annular-norm decay across ensemble sizes.

    For each n in ``n_grid``: the inverse-power tail integral, and for each
    order ell < ell0 the empirical L1 norm of sup_p |v^p_ell| over the
    finite bands (r, s) and the outside bands (s, inf), s in ``s_values``.

    The compensator family ``comp_family(p)`` defaults to the constant
    soft-edge compensators, under which the p-dependence vanishes exactly;
    the attained p is reported either way.

    Verdicts: (a) tail integrals bounded across n (max/min ratio <= 3);
    (b) outside-band norms non-increasing in s within one standard error,
    per n and per order.
    """
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    n_grid = [int(n) for n in n_grid]
    if sorted(n_grid) != n_grid:
        raise ValueError("n grid must be increasing")
    s_values = list(s_values) if s_values is not None else list(range(r + 1, 7))
    if comp_family is None:
        comp_family = lambda p: CompensatorSequence.softedge_default(beta, p)

    table = []
    tails = {}
    norms = {}  # (n, ell, s_label) -> (mean, stderr)
    for n in n_grid:
        spec = EnsembleSpec(beta=beta, n=n, scaling=scaling, method=method, seed=seed)
        samples = sample_many(spec, replicas, workers=workers)
        t_val, t_err = tail_integral(samples, ell0)
        tails[n] = t_val
        table.append({"kind": "tail_integral", "n": n, "ell0": ell0,
                      "value": t_val, "stderr": t_err})
        zero_comp = CompensatorSequence.constant(0.0)
        # bands: finite (r, s) and outside (s, inf)
        bands = [(r, s) for s in s_values] + [(s, math.inf) for s in s_values]
        for ell in range(1, ell0):
            for lo, hi in bands:
                vals = np.empty(replicas)
                attained = np.empty(replicas, dtype=int)
                for i, cfg in enumerate(samples):
                    base = v_ell(cfg, ell, lo, hi, ann, zero_comp, beta)
                    if ell == 1:
                        vals[i], attained[i] = _sup_p_abs_v1(base, lo, hi, comp_family, p_max)
                    else:
                        vals[i], attained[i] = abs(base), 1
                mean = float(vals.mean())
                err = float(vals.std(ddof=1) / math.sqrt(replicas))
                p_at = int(np.bincount(attained).argmax())
                norms[(n, ell, lo, _s_label(hi))] = (mean, err)
                table.append({"kind": "v_norm", "n": n, "ell": ell,
                              "r": lo, "s": _s_label(hi),
                              "value": mean, "stderr": err, "sup_p_at": p_at})

    tail_vals = [tails[n] for n in n_grid]
    ratio = max(tail_vals) / min(tail_vals) if min(tail_vals) > 0 else math.inf
    decay_ok = True
    for n in n_grid:
        for ell in range(1, ell0):
            seq = [norms[(n, ell, s, "inf")] for s in s_values]
            for (m1, e1), (m2, e2) in zip(seq, seq[1:]):
                if m2 > m1 + math.hypot(e1, e2):
                    decay_ok = False
    verdicts = {
        "tail_bounded": bool(ratio <= 3.0),
        "tail_max_min_ratio": ratio,
        "outside_norms_decreasing_in_s": bool(decay_ok),
    }
    params = {"beta": beta, "n_grid": n_grid, "ell0": ell0, "r": r,
              "s_values": s_values, "scaling": scaling, "method": method,
              "p_max": p_max, "cutoffs": list(ann.cutoffs)}
    return ConditionReport("H4", params, table, verdicts, seed, replicas)


@dataclass(frozen=True)
class EnvelopeValues:
    """Per-replica ingredients of the certified Lipschitz envelope."""

    first_sup: float      # sup over s of |c1(r, s)|
    middle_sups: tuple    # per order 2..ell0-1, sup over s of |sum y^-ell|
    shell_sum: float      # sum over the outside of 1/(|y|^ell0 - b_r^ell0)
    envelope: float


def _envelope_values(cfg: Configuration, r, ann: AnnulusSequence,
                     comp: CompensatorSequence, beta: float, ell0: int,
                     s_values) -> EnvelopeValues:
    b = ann.radius(r)
    out = np.array(restrict(cfg, Window.complement(r, ann)).points, dtype=complex)
    s_list = list(s_values) + [math.inf]
    first_sup = 0.0
    middle = [0.0] * max(0, ell0 - 2)
    for s in s_list:
        hi = ann.radius(s)
        band = out[(np.abs(out) < hi)] if hi != math.inf else out
        base = beta * complex(np.sum(1.0 / band)) if band.size else 0.0 + 0.0j
        c1 = base + comp.m_at(r).conjugate() - comp.m_at(s).conjugate()
        first_sup = max(first_sup, abs(c1))
        for j, ell in enumerate(range(2, ell0)):
            val = abs(complex(np.sum(band ** (-float(ell))))) if band.size else 0.0
            middle[j] = max(middle[j], val)
    if out.size:
        mods = np.abs(out)
        with np.errstate(divide="ignore"):
            shell = float(np.sum(1.0 / (mods**ell0 - b**ell0)))
            tail = float(np.sum(geometric_tail(mods, b, ell0)))
    else:
        shell, tail = 0.0, 0.0
    cx = c6x(beta, b, ell0)
    env = first_sup + cx * sum(middle) + c6y(beta, b) * tail
    return EnvelopeValues(first_sup, tuple(middle), shell, env)


def estimate_hrk_complement(samples, r, k_values, ann: AnnulusSequence,
                            comp: CompensatorSequence, beta: float,
                            ell0: int = DEFAULT_ELL0, s_values=None,
                            seed: int | None = None) -> ConditionReport:
    """Tail probabilities of the certified Lipschitz envelope (condition H3).

    For each replica the envelope is evaluated from the points outside the
    ball (points inside are window variables and do not enter); for each k
    two exceedance fractions are reported:

    * ``envelope``: fraction of replicas whose certified envelope exceeds k,
      an upper bound on the measure outside H_{r,k};
    * ``split``: fraction violating the per-order set-inclusion thresholds
      (each of the ell0 envelope terms capped at k/ell0), a coarser bound.

    Both are non-increasing in k by construction (nested sets). The shell
    functional of the split uses the tail-set sum 1/(|y|^ell0 - b^ell0);
    the exact geometric tail of the envelope is at most ell0 times it, so
    the shell threshold carries an extra factor ell0.
    """
    if ell0 < 2:
        raise ValueError("ell0 must be >= 2")
    s_values = list(s_values) if s_values is not None else list(range(r + 1, 7))
    b = ann.radius(r)
    cx = c6x(beta, b, ell0)
    cz = ell0 * c6y(beta, b) * b**ell0
    envs = [_envelope_values(cfg, r, ann, comp, beta, ell0, s_values)
            for cfg in samples]
    table = []
    for k in k_values:
        k = float(k)
        exceed_env = float(np.mean([e.envelope > k for e in envs]))

        def _violates(e: EnvelopeValues) -> bool:
            if e.first_sup > k / (ell0 * max(1.0, cx)):
                return True
            if any(m > k / (ell0 * cx) for m in e.middle_sups):
                return True
            return e.shell_sum > k / (ell0 * cz)
        exceed_split = float(np.mean([_violates(e) for e in envs]))
        table.append({"k": k, "envelope": exceed_env, "split": exceed_split})
    verdicts = {
        "nonincreasing_in_k": bool(all(a["envelope"] >= b_["envelope"]
                                       for a, b_ in zip(table, table[1:]))),
        "min_envelope_estimate": min(row["envelope"] for row in table),
    }
    params = {"beta": beta, "r": r, "ell0": ell0, "k_values": [float(k) for k in k_values],
              "s_values": s_values, "cutoffs": list(ann.cutoffs)}
    return ConditionReport("H3", params, table, verdicts, seed, len(list(samples)))


def check_h5(samples, r, ell0, ann: AnnulusSequence, comp: CompensatorSequence,
             beta: float, k_values, s_values=None,
             seed: int | None = None) -> ConditionReport:
    """Tail probabilities of the U / Ubar sets with the V-set diagnostics.

    Per k: exceedance fractions of sup_s |c1| (order 1), of the annular
    inverse-power sups (orders 2..ell0-1), and of the geometric tail sum
    over the outside; alongside, the shell decomposition V2 (far tail sum),
    V3 (nearest shell distance), V4 (shell count) with their empirical
    Chebyshev upper bounds, which dominate the measured fractions by the
    Markov inequality applied to the same empirical measure.
    """
    if ell0 < 2:
        raise ValueError("ell0 must be >= 2")
    s_values = list(s_values) if s_values is not None else list(range(r + 1, 7))
    b = ann.radius(r)
    b_next = ann.radius(r + 1)
    envs = [_envelope_values(cfg, r, ann, comp, beta, ell0, s_values)
            for cfg in samples]

    v2_sums, v2_tail_moments, v3_max, shell_counts = [], [], [], []
    for cfg in samples:
        far = np.abs(np.array(
            restrict(cfg, Window.complement(r + 1, ann)).points, dtype=complex))
        shell = np.abs(np.array(
            restrict(cfg, Window.annulus(r, r + 1, ann)).points, dtype=complex))
        v2_sums.append(float(np.sum(1.0 / (far**ell0 - b**ell0))) if far.size else 0.0)
        v2_tail_moments.append(float(np.sum(far ** (-float(ell0)))) if far.size else 0.0)
        with np.errstate(divide="ignore"):
            v3_max.append(float(np.max(1.0 / (shell**ell0 - b**ell0))) if shell.size else 0.0)
        shell_counts.append(len(shell))
    v2_sums = np.array(v2_sums)
    v2_tail_moments = np.array(v2_tail_moments)
    v3_max = np.array(v3_max)
    shell_counts = np.array(shell_counts, dtype=float)
    shell_mods = [np.abs(np.array(
        restrict(cfg, Window.annulus(r, r + 1, ann)).points, dtype=complex))
        for cfg in samples]

    table = []
    for k in k_values:
        k = float(k)
        row = {"k": k}
        for j, ell in enumerate(range(1, ell0)):
            if ell == 1:
                frac = float(np.mean([e.first_sup > k for e in envs]))
            else:
                frac = float(np.mean([e.middle_sups[ell - 2] > k for e in envs]))
            row[f"u{ell}_c"] = frac
        row["ubar_c"] = float(np.mean([e.shell_sum > k for e in envs]))
        thr = math.sqrt(k / 2.0) if k > 0 else 0.0
        row["v2_c"] = float(np.mean(v2_sums > k / 2.0)) if k > 0 else 1.0
        row["v3_c"] = float(np.mean(v3_max > thr)) if k > 0 else 1.0
        row["v4_c"] = float(np.mean(shell_counts > thr)) if k > 0 else 1.0
        if k > 0:
            row["v2_markov_bound"] = float(2.0 / k * np.mean(v2_sums))
            factor = b_next**ell0 / (b_next**ell0 - b**ell0)
            row["v2_refined_bound"] = float(2.0 / k * factor * np.mean(v2_tail_moments))
            width = math.sqrt(2.0 / k)
            u_counts = [float(np.sum(m**ell0 < b**ell0 + width)) for m in shell_mods]
            row["v3_shell_bound"] = float(np.mean(u_counts))
            row["v4_markov_bound"] = float(math.sqrt(2.0 / k) * np.mean(shell_counts))
        table.append(row)

    ubar_fracs = [row["ubar_c"] for row in table]
    verdicts = {
        "ubar_nonincreasing_in_k": bool(all(a >= b_ for a, b_ in zip(ubar_fracs, ubar_fracs[1:]))),
        "min_ubar_estimate": min(ubar_fracs),
        "chebyshev_dominates": bool(all(
            row["v2_c"] <= row["v2_markov_bound"] + 1e-12
            and row["v3_c"] <= row["v3_shell_bound"] + 1e-12
            and row["v4_c"] <= row["v4_markov_bound"] + 1e-12
            for row in table if "v2_markov_bound" in row)),
    }
    params = {"beta": beta, "r": r, "ell0": ell0,
              "k_values": [float(k) for k in k_values],
              "s_values": s_values, "cutoffs": list(ann.cutoffs)}
    return ConditionReport("H5", params, table, verdicts, seed, len(list(samples)))


def _inner_tuples(grid_points: np.ndarray, m_inside: int) -> np.ndarray:
    """Distinct sorted m-tuples from the grid, shape (T, m)."""
    if m_inside == 1:
        return grid_points[:, None]
    from itertools import combinations
    return np.array(list(combinations(grid_points, m_inside)))


def quasi_gibbs_probe(beta: float, n: int, m_inside: int, r, outer_replicas: int,
                      inner_grid: int, seed: int, ann: AnnulusSequence, *,
                      psi_zero: bool = False, method: str = "tridiagonal",
                      collision_tol: float = 1e-9) -> ConditionReport:
    """Oscillation of the window's conditional log-density given the outside.

    For each sampled soft-edge configuration the points outside the ball of
    index r are held fixed and the window content is swept over a grid of
    m-tuples; up to a per-sample constant the conditional log-density at a
    tuple x is

        beta * sum_{x_i, y_j} log|x_i - y_j| - m_inf . sum_i x_i,

    the cross-interaction with the outside plus the compensator tilt (the
    window's internal terms cancel between the joint density and the window
    Hamiltonian). Only the oscillation sup - inf over the grid is reported,
    per outer sample. Grid tuples colliding with an outside point are
    skipped. With ``psi_zero`` the interaction and the compensator are both
    dropped and the oscillation is identically zero (independence control).
    """
    if m_inside not in (1, 2, 3):
        raise ValueError("m_inside must be 1, 2 or 3")
    if n < 10 * m_inside:
        raise ValueError("need n >= 10 * m_inside")
    if outer_replicas < 1:
        raise ValueError("need at least one outer replica")
    b = ann.radius(r)
    g = int(inner_grid)
    grid = np.linspace(-b, b, g + 2)[1:-1]
    if m_inside > 1:
        grid = np.linspace(-b, b, min(g, 12) + 2)[1:-1]
    tuples = _inner_tuples(grid, m_inside)
    m_inf = 0.0 if psi_zero else beta * n ** (1.0 / 3.0)
    spec = EnsembleSpec(beta=beta, n=n, scaling="softedge", method=method, seed=seed)

    oscs = []
    skipped = 0
    for rep in range(outer_replicas):
        cfg = sample_scaled(spec, rep)
        out = np.array([p.real for p in restrict(cfg, Window.complement(r, ann))])
        if psi_zero:
            vals = np.zeros(len(tuples))
        else:
            gaps = np.abs(tuples[:, :, None] - out[None, None, :])
            ok = np.all(gaps > collision_tol, axis=(1, 2))
            skipped += int(np.sum(~ok))
            vals = beta * np.sum(np.log(gaps[ok]), axis=(1, 2)) \
                - m_inf * np.sum(tuples[ok], axis=1)
        if len(vals) < 2:
            continue
        oscs.append(float(np.max(vals) - np.min(vals)))
    if not oscs:
        raise RuntimeError("every outer replica collided with the whole grid")
    oscs = np.array(oscs)
    table = [{"osc_mean": float(oscs.mean()),
              "osc_p50": float(np.quantile(oscs, 0.5)),
              "osc_p90": float(np.quantile(oscs, 0.9)),
              "osc_max": float(oscs.max()),
              "skipped_grid_tuples": skipped}]
    verdicts = {
        "osc_all_finite": bool(np.all(np.isfinite(oscs))),
        "psi_zero_control": psi_zero,
    }
    params = {"beta": beta, "n": n, "m_inside": m_inside, "r": r,
              "outer": outer_replicas, "inner_grid": inner_grid,
              "psi_zero": psi_zero, "method": method,
              "m_inf": m_inf, "cutoffs": list(ann.cutoffs)}
    return ConditionReport("QG-probe", params, table, verdicts, seed, outer_replicas)


def quasi_gibbs_uniformity(beta: float, n_grid, m_inside: int, r,
                           outer_replicas: int, inner_grid: int, seed: int,
                           ann: AnnulusSequence, *, method: str = "tridiagonal",
                           growth_tolerance: float = 1.25) -> ConditionReport:
    """Probe oscillation stability across ensemble sizes.

    Runs :func:`quasi_gibbs_probe` for each n in ``n_grid`` and reports the
    per-size oscillation quantiles plus the growth of the 90th percentile
    from the smallest to the largest size; uniformity holds when that
    growth stays at or below ``growth_tolerance``.
    """
    n_grid = [int(n) for n in n_grid]
    if sorted(n_grid) != n_grid or len(n_grid) < 2:
        raise ValueError("n grid must be increasing with at least two sizes")
    table = []
    for n in n_grid:
        sub = quasi_gibbs_probe(beta, n, m_inside, r, outer_replicas,
                                inner_grid, seed, ann, method=method)
        row = {"n": n}
        row.update(sub.table[0])
        table.append(row)
    growth = table[-1]["osc_p90"] / table[0]["osc_p90"]
    verdicts = {
        "p90_growth": growth,
        "uniform_in_n": bool(growth <= growth_tolerance),
    }
    params = {"beta": beta, "n_grid": n_grid, "m_inside": m_inside, "r": r,
              "outer": outer_replicas, "inner_grid": inner_grid,
              "method": method, "growth_tolerance": growth_tolerance,
              "cutoffs": list(ann.cutoffs)}
    return ConditionReport("QG-probe", params, table, verdicts, seed, outer_replicas)
