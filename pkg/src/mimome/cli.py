"""Command-line front end.

Subcommands: gsvd, mi-table, allocate, sweep, ergodic, partial-csi. All rates
are reported in bits. The SNR axis is the total power budget in dB relative
to the unit noise power, snr_db = 10 log10(P_T). Outputs are deterministic
byte-for-byte for a fixed scenario, seed, and tool version; every CSV starts
with a comment line echoing them.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .allocate import (
    SecrecyProblem,
    SolverError,
    secrecy_rate,
)
from .channels import load_channel_pair, matrix_to_json
from .constellations import constellation
from .ergodic import (
    METHODS,
    EnsembleSpec,
    UncertaintyModel,
    allocate_by_method,
    draw_channel_pair,
    ergodic_sweep,
    partial_csi_sweep,
    rate_by_method,
)
from .gsvd import gsvd, reduce_to_parallel
from .scenario import ScenarioError, parse_scenario

SWEEP_COLUMNS = ("snr_db", "method", "constellation", "mean_rate_bits",
                 "stderr", "trials")


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.10g}"
    return str(v)


def _emit(path, text) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv_text(params, columns, rows) -> str:
    echo = " ".join(f"{k}={_fmt(v)}" for k, v in params)
    lines = [f"# mimome {__version__} | {echo}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _parse_grid(text: str) -> np.ndarray:
    """SNR grids are 'start:stop:step' (inclusive) or a single number."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"bad grid {text!r}: use start:stop:step or one number")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError(f"empty grid {text!r}")
    return start + step * np.arange(n)


def _parse_methods(text: str) -> tuple[str, ...]:
    if text == "all":
        return METHODS
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; pick from {METHODS} or 'all'")
    if not methods:
        raise ValueError("no methods given")
    return methods


def _sweep_rows(records, extra=()):
    rows = []
    for rec in records:
        row = [rec.snr_db, rec.method, rec.constellation,
               rec.mean_rate_bits, rec.stderr, rec.trials]
        row.extend(getattr(rec, name) for name in extra)
        rows.append(row)
    return rows


def _require(value, flag):
    if value is None:
        raise ValueError(f"{flag} is required (on the command line or in the scenario)")
    return value


# ---------------------------------------------------------------- subcommands

def _cmd_gsvd(args) -> int:
    pair = load_channel_pair(args.hb, args.he)
    g = gsvd(pair, rank_tol=args.rank_tol)
    hb_hat, he_hat = g.reconstruct()
    scale = max(np.linalg.norm(pair.hb), np.linalg.norm(pair.he), 1e-300)
    resid = max(np.linalg.norm(hb_hat - pair.hb), np.linalg.norm(he_hat - pair.he))
    out = {
        "version": __version__,
        "ma": g.m_a, "mb": g.m_b, "me": g.m_e,
        "k": g.k, "r": g.r, "s": g.s, "nu": g.nu, "null_dim": g.null_dim,
        "b": [float(x) for x in g.b],
        "e": [float(x) for x in g.e],
        "omega": [float(x) for x in g.omega],
        "rank_tol": g.rank_tol,
        "reconstruction_error": float(resid / scale),
    }
    if args.full:
        for name in ("psi_a", "psi_b", "psi_e", "sigma_b", "sigma_e", "omega_mat"):
            out[name] = matrix_to_json(getattr(g, name))
    _emit(args.out, _json_text(out))
    return 0


def _cmd_mi_table(args) -> int:
    c = constellation(args.constellation)
    if args.rho_min <= 0 or args.rho_max <= args.rho_min:
        raise ValueError("need 0 < --rho-min < --rho-max")
    if args.points < 2:
        raise ValueError("--points must be at least 2")
    grid = np.geomspace(args.rho_min, args.rho_max, args.points)
    mi_bits = np.atleast_1d(c.mutual_info(grid)) / math.log(2.0)
    mm = np.atleast_1d(c.mmse(grid))
    params = [("cmd", "mi-table"), ("constellation", c.name),
              ("rho_min", args.rho_min), ("rho_max", args.rho_max),
              ("points", args.points)]
    rows = [[float(r), float(i), float(m)] for r, i, m in zip(grid, mi_bits, mm)]
    _emit(args.out, _csv_text(params, ("rho", "I_bits", "mmse"), rows))
    return 0


def _resolve_bank(scn):
    """Channel bank of a scenario: the explicit pair, or trial 0 of the
    ensemble (the deterministic first draw)."""
    pair = scn.pair if scn.pair is not None else draw_channel_pair(scn.ensemble, 0)
    return reduce_to_parallel(gsvd(pair))


def _cmd_allocate(args) -> int:
    scn = parse_scenario(args.scenario)
    cname = args.constellation or scn.constellation
    c = constellation(_require(cname, "--constellation"))
    method = args.method or scn.method
    if args.power_db is not None:
        power = 10.0 ** (args.power_db / 10.0)
    else:
        power = _require(scn.power, "--power-db")
    bank = _resolve_bank(scn)
    alloc = allocate_by_method(bank, c, power, method, scn.solver)
    rate = rate_by_method(bank, c, alloc, method)
    per = []
    if method != "high-snr":
        res = secrecy_rate(SecrecyProblem(bank, c, power), alloc)
        per = [{"index": r.index, "kind": r.kind, "power": r.power,
                "rate_bob_bits": r.rate_bob_bits, "rate_eve_bits": r.rate_eve_bits}
               for r in res.per_channel]
    out = {
        "version": __version__,
        "constellation": c.name,
        "method": method,
        "power_db": 10.0 * math.log10(power) if power > 0 else None,
        "total_power": power,
        "seed": scn.seed,
        "rate_bits": rate,
        "mu": alloc.mu,
        "iterations": alloc.iterations,
        "residual": alloc.residual,
        "converged": alloc.converged,
        "slack": alloc.slack,
        "p": [float(x) for x in alloc.p],
        "per_channel": per,
    }
    fmt = args.format or scn.fmt or "json"
    if fmt == "json" or not per:
        _emit(args.out or scn.out, _json_text(out))
    else:
        params = [("cmd", "allocate"), ("constellation", c.name),
                  ("method", method), ("power_db", out["power_db"]),
                  ("seed", scn.seed), ("rate_bits", rate), ("mu", alloc.mu)]
        rows = [[d["index"], d["kind"], d["power"], d["rate_bob_bits"],
                 d["rate_eve_bits"]] for d in per]
        cols = ("index", "kind", "power", "rate_bob_bits", "rate_eve_bits")
        _emit(args.out or scn.out, _csv_text(params, cols, rows))
    return 0


def _pair_sweep_records(bank, c, snr_db, methods, cfg):
    """Single-pair (no ensemble) sweep: one deterministic record per point."""
    from .ergodic import SweepRecord
    records = []
    failures = []
    for snr in snr_db:
        pt = 10.0 ** (snr / 10.0)
        for method in methods:
            try:
                alloc = allocate_by_method(bank, c, pt, method, cfg)
                rate = rate_by_method(bank, c, alloc, method)
                records.append(SweepRecord(float(snr), method, c.name,
                                           rate, 0.0, 1, 0))
            except SolverError as exc:
                records.append(SweepRecord(float(snr), method, c.name,
                                           float("nan"), 0.0, 0, 1))
                failures.append(f"{method} at {snr:g} dB: {exc}")
    return records, failures


def _cmd_sweep(args) -> int:
    scn = parse_scenario(args.scenario)
    cname = args.constellation or scn.constellation
    c = constellation(_require(cname, "--constellation"))
    methods = _parse_methods(args.methods)
    snr_db = _parse_grid(args.snr_db)
    failures = []
    if scn.pair is not None:
        bank = _resolve_bank(scn)
        records, failures = _pair_sweep_records(bank, c, snr_db, methods, scn.solver)
        trials = 1
    else:
        records = ergodic_sweep(scn.ensemble, c, snr_db, methods, scn.solver)
        trials = scn.ensemble.trials
        nfail = sum(r.failures for r in records)
        if nfail:
            failures.append(f"{nfail} solver failures across the sweep")
    params = [("cmd", "sweep"), ("constellation", c.name),
              ("methods", "+".join(methods)), ("snr_db", args.snr_db),
              ("trials", trials), ("seed", scn.seed)]
    _emit(args.out or scn.out, _csv_text(params, SWEEP_COLUMNS,
                                         _sweep_rows(records)))
    if failures:
        for msg in failures:
            print(f"mimome sweep: {msg}", file=sys.stderr)
        return 3
    return 0


def _cmd_ergodic(args) -> int:
    spec = EnsembleSpec(args.ma, args.mb, args.me, trials=args.trials,
                        seed=args.seed)
    c = constellation(args.constellation)
    snr_db = _parse_grid(args.snr_db)
    records = ergodic_sweep(spec, c, snr_db, (args.method,))
    params = [("cmd", "ergodic"), ("ma", args.ma), ("mb", args.mb),
              ("me", args.me), ("trials", args.trials), ("seed", args.seed),
              ("constellation", c.name), ("method", args.method),
              ("snr_db", args.snr_db)]
    _emit(args.out, _csv_text(params, SWEEP_COLUMNS, _sweep_rows(records)))
    nfail = sum(r.failures for r in records)
    if nfail:
        print(f"mimome ergodic: {nfail} solver failures across the sweep",
              file=sys.stderr)
        return 3
    return 0


def _cmd_partial_csi(args) -> int:
    spec = EnsembleSpec(args.ma, args.mb, args.me, trials=args.trials,
                        seed=args.seed)
    c = constellation(args.constellation)
    snr_db = _parse_grid(args.snr_db)
    sigmas = [float(s) for s in args.sigma_e2.split(",") if s.strip()]
    if not sigmas:
        raise ValueError("--sigma-e2 needs at least one value")
    u = UncertaintyModel(sigmas[0], noise_trials=args.noise_trials, seed=args.seed)
    records = partial_csi_sweep(spec, c, snr_db, sigmas, method=args.method,
                                uncertainty=u)
    params = [("cmd", "partial-csi"), ("ma", args.ma), ("mb", args.mb),
              ("me", args.me), ("trials", args.trials), ("seed", args.seed),
              ("constellation", c.name), ("method", args.method),
              ("snr_db", args.snr_db), ("sigma_e2", args.sigma_e2),
              ("noise_trials", args.noise_trials)]
    cols = SWEEP_COLUMNS + ("sigma_e2",)
    _emit(args.out, _csv_text(params, cols, _sweep_rows(records, ("sigma_e2",))))
    nfail = sum(r.failures for r in records)
    if nfail:
        print(f"mimome partial-csi: {nfail} solver failures across the sweep",
              file=sys.stderr)
        return 3
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mimome",
        description="Secrecy-rate power allocation for MIMO wiretap channels "
                    "with finite-alphabet inputs.")
    ap.add_argument("--version", action="version",
                    version=f"mimome {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gsvd", help="decompose a channel pair into parallel "
                                    "subchannels")
    p.add_argument("hb", help="Bob channel matrix (JSON)")
    p.add_argument("he", help="Eve channel matrix (JSON)")
    p.add_argument("--full", action="store_true",
                   help="include the unitary factors in the output")
    p.add_argument("--rank-tol", type=float, default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_gsvd)

    p = sub.add_parser("mi-table", help="tabulate mutual information and MMSE "
                                        "over an SNR grid")
    p.add_argument("--constellation", required=True)
    p.add_argument("--rho-min", type=float, default=1e-4)
    p.add_argument("--rho-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_mi_table)

    p = sub.add_parser("allocate", help="allocate power for one scenario")
    p.add_argument("--scenario", required=True, help="scenario file (TOML/JSON)")
    p.add_argument("--constellation", default=None)
    p.add_argument("--power-db", type=float, default=None,
                   help="total power budget in dB over unit noise")
    p.add_argument("--method", default=None, choices=METHODS)
    p.add_argument("--format", default=None, choices=("json", "csv"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("sweep", help="rate-vs-power sweep for a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--constellation", default=None)
    p.add_argument("--methods", default="dual",
                   help="comma-separated subset of "
                        f"{'/'.join(METHODS)}, or 'all'")
    p.add_argument("--snr-db", default="-10:40:2",
                   help="grid start:stop:step in dB (inclusive)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("ergodic", help="ergodic rate over a random ensemble")
    p.add_argument("--ma", type=int, required=True)
    p.add_argument("--mb", type=int, required=True)
    p.add_argument("--me", type=int, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--constellation", required=True)
    p.add_argument("--method", default="dual", choices=METHODS)
    p.add_argument("--snr-db", default="-10:40:2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_ergodic)

    p = sub.add_parser("partial-csi", help="ergodic rate under eavesdropper "
                                           "CSI error")
    p.add_argument("--ma", type=int, required=True)
    p.add_argument("--mb", type=int, required=True)
    p.add_argument("--me", type=int, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--constellation", required=True)
    p.add_argument("--method", default="dual", choices=METHODS)
    p.add_argument("--snr-db", default="-10:40:2")
    p.add_argument("--sigma-e2", required=True,
                   help="CSI error variance(s), comma-separated")
    p.add_argument("--noise-trials", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_partial_csi)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"mimome: scenario error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"mimome: solver failed: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"mimome: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mimome: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
