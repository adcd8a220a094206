"""Command-line front door.

Every subcommand resolves its configuration from built-in defaults, an
optional JSON config file (``--config``), and command-line flags, in that
order of precedence; the resolved configuration (without I/O-only settings
like the output directory or worker count) is embedded in the artifact, so
any output can be reproduced byte-identically from itself. Report schemas
are documented in docs/reports.md.

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import condition_checker as cond
from . import dynamics, ensembles, estimator, interactions, special_fns
from .config_space import AnnulusSequence, Configuration
from .rng import stream

WORKERS_ENV = "RPF_LAB_WORKERS"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ValidationFailure(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in str(text).split(",") if tok != ""]


# Option tables: name -> (type, default, help). Defaults live here, not in
# argparse, so that a config file can slot in between defaults and flags.
_COMMON = {
    "seed": (int, 0, "master seed"),
    "outdir": (str, ".", "output directory"),
    "out": (str, None, "output file name (defaults to <command>.<ext>)"),
    "workers": (int, None, f"parallel workers (default ${WORKERS_ENV} or 1)"),
    "config": (str, None, "JSON config file; flags override file values"),
}

_ENSEMBLE = {
    "beta": (float, 2.0, "inverse temperature (1, 2 or 4 for dense)"),
    "n": (int, 100, "matrix size"),
    "scaling": (str, "softedge", "raw | bulk | softedge"),
    "method": (str, "tridiagonal", "dense | tridiagonal"),
    "replicas": (int, 100, "number of replicas"),
}

_CUTOFFS = {"cutoffs": (_float_list, [float(r) for r in range(1, 9)],
            "annulus radii b_1<b_2<...")}

COMMANDS: dict[str, dict] = {
    "sample": {**_ENSEMBLE},
    "kernel-table": {
        "kind": (str, "airy", "airy | sine"),
        "x-min": (float, -5.0, ""), "x-max": (float, 2.0, ""),
        "x-step": (float, 0.5, ""),
    },
    "correlate": {
        **_ENSEMBLE,
        "order": (int, 1, "correlation order (1 or 2)"),
        "bin-lo": (float, None, "left edge (default by scaling)"),
        "bin-hi": (float, None, "right edge (default by scaling)"),
        "bin-width": (float, None, "bin width (default by scaling)"),
        "prediction": (str, "auto", "auto | semicircle | airy | none"),
    },
    "check-h4": {
        "beta": (float, 2.0, ""), "method": (str, "tridiagonal", ""),
        "scaling": (str, "softedge", ""),
        "n-grid": (_int_list, [50, 100, 200, 400], "ensemble sizes"),
        "replicas": (int, 500, ""), "ell0": (int, 3, ""),
        "r": (int, 1, "window index"),
        "s-values": (_int_list, [2, 3, 4, 5, 6], "outer band indices"),
        "p-max": (int, 64, "compensator sup range"),
        **_CUTOFFS,
    },
    "check-h5": {
        **_ENSEMBLE, "ell0": (int, 3, ""), "r": (int, 1, ""),
        "k-grid": (_float_list, [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], ""),
        **_CUTOFFS,
    },
    "check-h3": {
        **_ENSEMBLE, "ell0": (int, 3, ""), "r": (int, 1, ""),
        "k-grid": (_float_list, [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], ""),
        **_CUTOFFS,
    },
    "qg-probe": {
        "beta": (float, 2.0, ""), "n": (int, 100, ""),
        "method": (str, "tridiagonal", ""),
        "m-inside": (int, 1, ""), "r": (int, 1, ""),
        "outer": (int, 100, "outer replicas"),
        "inner-grid": (int, 50, "window grid points"),
        "psi-zero": (bool, False, "independence control"),
        **_CUTOFFS,
    },
    "simulate": {
        "beta": (float, 2.0, ""), "n": (int, 20, ""),
        "scaling": (str, "raw", ""), "dt": (float, 1e-3, ""),
        "T": (float, 1.0, ""), "method": (str, "tridiagonal", ""),
        "sample-interval": (float, None, "output spacing (default T/100)"),
    },
    "invariance": {
        "beta": (float, 2.0, ""), "n": (int, 20, ""),
        "scaling": (str, "raw", ""), "dt": (float, 1e-3, ""),
        "T": (float, 1.0, ""), "replicas": (int, 500, ""),
        "method": (str, "tridiagonal", ""),
    },
    "taylor-check": {
        "trials": (int, 1000, ""), "L": (int, 60, "truncation order"),
        "max-ratio": (float, 0.9, "max |x|/|y|"), "beta": (float, 2.0, ""),
    },
    "lipschitz-check": {
        "trials": (int, 1000, ""), "ell0": (int, 3, ""),
        "beta": (float, 2.0, ""), "r": (int, 1, ""), "s": (int, 4, ""),
        "grid": (int, 50, "window grid points"), **_CUTOFFS,
    },
}

_CSV_COMMANDS = {"sample", "kernel-table", "correlate", "simulate"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpflab",
        description="finite-size random point field laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in COMMANDS.items():
        p = sub.add_parser(name)
        for opt, (typ, _default, help_text) in {**options, **_COMMON}.items():
            flag = "--" + opt
            if typ is bool:
                p.add_argument(flag, action="store_true", default=argparse.SUPPRESS,
                               help=help_text)
            else:
                p.add_argument(flag, type=typ, default=argparse.SUPPRESS,
                               help=help_text)
    return parser


def _resolve_config(command: str, args: argparse.Namespace) -> dict:
    options = {**COMMANDS[command], **_COMMON}
    resolved = {opt: spec[1] for opt, spec in options.items()}
    given = {k.replace("_", "-"): v for k, v in vars(args).items() if k != "command"}
    config_path = given.get("config", resolved.get("config"))
    if config_path:
        with open(config_path) as fh:
            file_conf = json.load(fh)
        for key, value in file_conf.items():
            if key in ("command",):
                continue
            if key not in options:
                raise ValidationFailure(f"unknown config key {key!r} for {command}")
            typ = options[key][0]
            resolved[key] = typ(value) if typ in (_int_list, _float_list) \
                and not isinstance(value, list) else value
    resolved.update(given)
    resolved["command"] = command
    return resolved


def _embedded_config(conf: dict) -> dict:
    hidden = {"outdir", "out", "workers", "config", "command"}
    embedded = {"command": conf["command"]}
    embedded.update({k: v for k, v in sorted(conf.items()) if k not in hidden})
    return embedded


def config_to_argv(embedded: dict) -> list[str]:
    """Rebuild an argv that reproduces the artifact of an embedded config."""
    argv = [embedded["command"]]
    for key, value in embedded.items():
        if key == "command" or value is None:
            continue
        if isinstance(value, bool):
            if value:
                argv.append(f"--{key}")
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        argv += [f"--{key}", str(value)]
    return argv


def _workers(conf: dict) -> int:
    if conf.get("workers") is not None:
        return max(1, int(conf["workers"]))
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def _json_artifact(conf: dict, payload: dict) -> str:
    payload = dict(payload)
    payload["config"] = _embedded_config(conf)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_artifact(conf: dict, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# config " + json.dumps(_embedded_config(conf), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _spec(conf: dict) -> ensembles.EnsembleSpec:
    return ensembles.EnsembleSpec(
        beta=conf["beta"], n=conf["n"], scaling=conf.get("scaling", "softedge"),
        method=conf.get("method", "tridiagonal"), seed=conf["seed"])


def _ann(conf: dict) -> AnnulusSequence:
    return AnnulusSequence(conf["cutoffs"])


# --- subcommand handlers ---------------------------------------------------


def _run_sample(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 1:
        raise ValidationFailure("replicas must be >= 1")
    samples = ensembles.sample_many(_spec(conf), conf["replicas"],
                                    workers=_workers(conf))
    rows = []
    for rep, cfg in enumerate(samples):
        for p in cfg.points:
            rows.append([rep, p.real, p.imag])
    return "sample.csv", _csv_artifact(conf, ["replica", "re", "im"], rows)


def _run_kernel_table(conf: dict) -> tuple[str, str]:
    kind = conf["kind"]
    if kind not in ("airy", "sine"):
        raise ValidationFailure("kind must be airy or sine")
    lo, hi, step = conf["x-min"], conf["x-max"], conf["x-step"]
    if step <= 0 or hi <= lo:
        raise ValidationFailure("need x-min < x-max and x-step > 0")
    xs = np.arange(lo, hi + step / 2, step)
    rows = []
    for x in xs:
        for y in xs:
            rows.append([float(x), float(y),
                         special_fns.kernel(kind, float(x), float(y)),
                         special_fns.rho1(kind, float(x))])
    return "kernel_table.csv", _csv_artifact(conf, ["x", "y", "k", "rho1_x"], rows)


_BIN_DEFAULTS = {"softedge": (-6.0, 3.0, 0.1), "bulk": (-2.5, 2.5, 0.05),
                 "raw": (-10.0, 10.0, 0.5)}


def _run_correlate(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 2:
        raise ValidationFailure("replicas must be >= 2")
    if conf["order"] not in (1, 2):
        raise ValidationFailure("order must be 1 or 2")
    scaling = conf["scaling"]
    d_lo, d_hi, d_w = _BIN_DEFAULTS[scaling]
    lo = conf["bin-lo"] if conf["bin-lo"] is not None else d_lo
    hi = conf["bin-hi"] if conf["bin-hi"] is not None else d_hi
    width = conf["bin-width"] if conf["bin-width"] is not None else d_w
    edges = np.arange(lo, hi + width / 2, width)
    samples = ensembles.sample_many(_spec(conf), conf["replicas"],
                                    workers=_workers(conf))
    est = estimator.estimate_correlation(samples, conf["order"], edges)

    mode = conf["prediction"]
    if mode == "auto":
        mode = {"bulk": "semicircle", "softedge": "airy", "raw": "none"}[scaling]
    if mode == "semicircle":
        predict = lambda x: conf["n"] * ensembles.semicircle_density(x)
    elif mode == "airy":
        predict = lambda x: special_fns.rho1("airy", x)
    elif mode == "none":
        predict = None
    else:
        raise ValidationFailure(f"unknown prediction mode {mode!r}")

    if conf["order"] == 1:
        rows = []
        if predict is None:
            for i, c in enumerate(est.centers()):
                rows.append([float(est.edges[i]), float(est.edges[i + 1]),
                             float(est.estimate[i]), float(est.stderr[i]), "", ""])
        else:
            report = estimator.compare_to_prediction(est, predict)
            for rec in report.to_rows(est):
                rows.append([rec["bin_lo"], rec["bin_hi"], rec["estimate"],
                             rec["stderr"], rec["prediction"], rec["z"]])
        header = ["bin_lo", "bin_hi", "estimate", "stderr", "prediction", "z"]
        return "correlate.csv", _csv_artifact(conf, header, rows)
    # order 2: flatten the pair table
    pair_pred = (lambda a, b: special_fns.det_correlation("airy", [a, b])) \
        if mode == "airy" else None
    rows = []
    centers = est.centers()
    for i in range(len(centers)):
        for j in range(len(centers)):
            pred = pair_pred(centers[i], centers[j]) if pair_pred else ""
            e, s = float(est.estimate[i, j]), float(est.stderr[i, j])
            z = "" if pair_pred is None else \
                (0.0 if e == pred else (e - pred) / s if s > 0 else math.inf)
            rows.append([float(centers[i]), float(centers[j]), e, s, pred, z])
    header = ["x", "y", "estimate", "stderr", "prediction", "z"]
    return "correlate.csv", _csv_artifact(conf, header, rows)


def _run_check_h4(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 2:
        raise ValidationFailure("replicas must be >= 2")
    report = cond.check_h4(
        beta=conf["beta"], n_grid=conf["n-grid"], ell0=conf["ell0"],
        ann=_ann(conf), replicas=conf["replicas"], seed=conf["seed"],
        scaling=conf["scaling"], method=conf["method"], p_max=conf["p-max"],
        r=conf["r"], s_values=conf["s-values"], workers=_workers(conf))
    payload = {"condition": report.condition, "params": report.params,
               "table": report.table, "verdicts": report.verdicts,
               "seed": report.seed, "replicas": report.replicas}
    return "check_h4.json", _json_artifact(conf, payload)


def _sampled_report(conf: dict, fn) -> dict:
    samples = ensembles.sample_many(_spec(conf), conf["replicas"],
                                    workers=_workers(conf))
    comp = interactions.CompensatorSequence.softedge_default(conf["beta"], conf["n"])
    report = fn(samples, comp)
    return {"condition": report.condition, "params": report.params,
            "table": report.table, "verdicts": report.verdicts,
            "seed": report.seed, "replicas": report.replicas}


def _run_check_h3(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 2:
        raise ValidationFailure("replicas must be >= 2")
    payload = _sampled_report(conf, lambda samples, comp: cond.estimate_hrk_complement(
        samples, conf["r"], conf["k-grid"], _ann(conf), comp, conf["beta"],
        ell0=conf["ell0"], seed=conf["seed"]))
    return "check_h3.json", _json_artifact(conf, payload)


def _run_check_h5(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 2:
        raise ValidationFailure("replicas must be >= 2")
    payload = _sampled_report(conf, lambda samples, comp: cond.check_h5(
        samples, conf["r"], conf["ell0"], _ann(conf), comp, conf["beta"],
        conf["k-grid"], seed=conf["seed"]))
    return "check_h5.json", _json_artifact(conf, payload)


def _run_qg_probe(conf: dict) -> tuple[str, str]:
    if conf["outer"] < 1:
        raise ValidationFailure("outer must be >= 1")
    report = cond.quasi_gibbs_probe(
        beta=conf["beta"], n=conf["n"], m_inside=conf["m-inside"], r=conf["r"],
        outer_replicas=conf["outer"], inner_grid=conf["inner-grid"],
        seed=conf["seed"], ann=_ann(conf), psi_zero=bool(conf["psi-zero"]),
        method=conf["method"])
    payload = {"condition": report.condition, "params": report.params,
               "table": report.table, "verdicts": report.verdicts,
               "seed": report.seed, "replicas": report.replicas}
    return "qg_probe.json", _json_artifact(conf, payload)


def _run_simulate(conf: dict) -> tuple[str, str]:
    spec = _spec({**conf, "replicas": 1})
    init = ensembles.sample_scaled(spec, 0)
    traj = dynamics.simulate_isde(
        init, conf["beta"], conf["n"], conf["scaling"], conf["dt"], conf["T"],
        conf["seed"], sample_interval=conf["sample-interval"])
    header = ["time"] + [f"x{i + 1}" for i in range(conf["n"])]
    rows = [[t] + [float(v) for v in xs] for t, xs in zip(traj.times, traj.states)]
    return "trajectory.csv", _csv_artifact(conf, header, rows)


def _run_invariance(conf: dict) -> tuple[str, str]:
    if conf["replicas"] < 2:
        raise ValidationFailure("replicas must be >= 2")
    report = dynamics.invariance_report(
        conf["beta"], conf["n"], conf["scaling"], conf["dt"], conf["T"],
        conf["replicas"], conf["seed"], method=conf["method"],
        workers=_workers(conf))
    return "invariance.json", _json_artifact(conf, report)


def _run_taylor_check(conf: dict) -> tuple[str, str]:
    trials, L, beta = conf["trials"], conf["L"], conf["beta"]
    if trials < 1 or L < 1:
        raise ValidationFailure("trials and L must be >= 1")
    rng = stream(conf["seed"], 11)
    violations = 0
    worst_margin = -math.inf
    for _ in range(trials):
        k = int(rng.integers(1, 6))
        x = complex(rng.uniform(-0.9, 0.9), 0.0)
        ys = []
        for _ in range(k):
            lo = abs(x) / conf["max-ratio"] if x != 0 else 1e-3
            mod = rng.uniform(max(lo, 1e-3), max(lo, 1e-3) + 3.0)
            ys.append(complex(mod * (1 if rng.random() < 0.5 else -1), 0.0))
        y_cfg = Configuration(ys)
        value, bound = interactions.taylor_tail(x, y_cfg, beta, L)
        direct = sum(interactions.log_potential(x, y, beta)
                     - interactions.log_potential(0.0, y, beta) for y in ys)
        gap = abs(value - direct)
        worst_margin = max(worst_margin, gap - bound)
        if gap > bound + 1e-12:
            violations += 1
    payload = {"trials": trials, "L": L, "violations": violations,
               "worst_gap_minus_bound": worst_margin,
               "verdict_pass": violations == 0}
    return "taylor_check.json", _json_artifact(conf, payload)


def _run_lipschitz_check(conf: dict) -> tuple[str, str]:
    trials = conf["trials"]
    if trials < 1:
        raise ValidationFailure("trials must be >= 1")
    ann = _ann(conf)
    r, s, beta, ell0 = conf["r"], conf["s"], conf["beta"], conf["ell0"]
    b = ann.radius(r)
    rng = stream(conf["seed"], 12)
    violations = 0
    worst = -math.inf
    for _ in range(trials):
        k = int(rng.integers(0, 12))
        mods = rng.uniform(2.0 * b, 8.0 * b, size=k)
        signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
        y_cfg = Configuration([complex(m * sg, 0.0) for m, sg in zip(mods, signs)])
        comp = interactions.CompensatorSequence(
            m_inf=complex(rng.normal(), 0.0),
            values=tuple(complex(rng.normal(), 0.0) for _ in range(len(ann))))
        sup = interactions.lipschitz_ratio_grid_sup(
            y_cfg, r, s, ann, comp, beta, grid=conf["grid"])
        bound = interactions.lipschitz_bound(y_cfg, r, s, ann, comp, beta, ell0)
        worst = max(worst, sup - bound)
        if sup > bound + 1e-9:
            violations += 1
    payload = {"trials": trials, "violations": violations,
               "worst_sup_minus_bound": worst, "verdict_pass": violations == 0}
    return "lipschitz_check.json", _json_artifact(conf, payload)


_HANDLERS = {
    "sample": _run_sample,
    "kernel-table": _run_kernel_table,
    "correlate": _run_correlate,
    "check-h4": _run_check_h4,
    "check-h5": _run_check_h5,
    "check-h3": _run_check_h3,
    "qg-probe": _run_qg_probe,
    "simulate": _run_simulate,
    "invariance": _run_invariance,
    "taylor-check": _run_taylor_check,
    "lipschitz-check": _run_lipschitz_check,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    command = args.command
    try:
        conf = _resolve_config(command, args)
        name, content = _HANDLERS[command](conf)
    except (ensembles.EigensolverError, dynamics.StepFailureError,
            interactions.DomainError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationFailure, ValueError, IndexError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    outdir = conf.get("outdir") or "."
    os.makedirs(outdir, exist_ok=True)
    if conf.get("out"):
        name = conf["out"]
    path = os.path.join(outdir, name)
    with open(path, "w") as fh:
        fh.write(content)
    print(path)
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
