"""Scenario files: a small TOML/JSON schema describing what to run.

A scenario names the channel source (an explicit matrix pair XOR a random
ensemble), the input alphabet, the allocation method, and optional solver
knobs. Command-line flags override scenario fields; the scenario carries the
reproducible part of a run.

Example (TOML)::

    constellation = "qpsk"
    method = "dual"
    ma = 5
    mb = 5
    me = 5
    trials = 500
    seed = 42

    [solver]
    method = "bisection"
    powerTol = 1e-9

or, for an explicit pair::

    constellation = "bpsk"
    hb = "hb.json"
    he = "he.json"
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:          # python < 3.11
    import tomli as tomllib

from .allocate import SolverConfig
from .channels import ChannelPair, load_channel_pair
from .ergodic import METHODS, EnsembleSpec

__all__ = ["Scenario", "ScenarioError", "parse_scenario"]


class ScenarioError(ValueError):
    """A scenario file is malformed; the message names the offending field."""


@dataclass(frozen=True)
class Scenario:
    """Validated scenario: exactly one of ``pair``/``ensemble`` is set."""

    constellation: str | None
    method: str
    pair: ChannelPair | None
    ensemble: EnsembleSpec | None
    power: float | None
    solver: SolverConfig
    out: str | None
    fmt: str | None

    @property
    def seed(self) -> int:
        return self.ensemble.seed if self.ensemble else 0


# accepted keys, with camelCase aliases matching the config documentation
_SOLVER_KEYS = {
    "method": "method",
    "alpha": "alpha",
    "maxiters": "max_iters",
    "max_iters": "max_iters",
    "powertol": "power_tol",
    "power_tol": "power_tol",
    "rhocap": "rho_cap",
    "rho_cap": "rho_cap",
    "roottol": "root_tol",
    "root_tol": "root_tol",
}
_TOP_KEYS = {"constellation", "method", "hb", "he", "ma", "mb", "me",
             "trials", "seed", "power", "power_db", "solver", "out", "format"}


def _load_raw(path: str) -> dict:
    if not os.path.exists(path):
        raise ScenarioError(f"scenario file not found: {path}")
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext == ".json":
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        else:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioError(f"could not parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a table/object at top level")
    return raw


def _field(raw, key, types, what):
    val = raw[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise ScenarioError(f"field '{key}': expected {what}")
    return val


def _solver_config(obj) -> SolverConfig:
    if not isinstance(obj, dict):
        raise ScenarioError("field 'solver': expected a table/object")
    kwargs = {}
    for key, val in obj.items():
        norm = _SOLVER_KEYS.get(str(key).lower())
        if norm is None:
            raise ScenarioError(f"field 'solver.{key}': unknown solver option")
        kwargs[norm] = val
    try:
        return SolverConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"field 'solver': {exc}") from None


def parse_scenario(path: str) -> Scenario:
    """Read and validate a scenario file (TOML by default, JSON by extension).

    Defaults: trials=500, seed=42, method="dual". Referenced matrix files must
    exist at parse time; negative budgets and unknown fields are rejected with
    the field named.
    """
    raw = _load_raw(path)
    for key in raw:
        if key not in _TOP_KEYS:
            raise ScenarioError(f"field '{key}': unknown field")

    has_pair = "hb" in raw or "he" in raw
    has_ens = any(k in raw for k in ("ma", "mb", "me"))
    if has_pair and has_ens:
        raise ScenarioError("give either an explicit pair (hb, he) or an "
                            "ensemble (ma, mb, me), not both")
    if not has_pair and not has_ens:
        raise ScenarioError("scenario needs a channel source: either an "
                            "explicit pair (hb, he) or an ensemble (ma, mb, me)")

    pair = ensemble = None
    if has_pair:
        if "hb" not in raw or "he" not in raw:
            raise ScenarioError("an explicit pair needs both 'hb' and 'he'")
        base = os.path.dirname(os.path.abspath(path))
        paths = []
        for key in ("hb", "he"):
            p = _field(raw, key, str, "a file path")
            if not os.path.isabs(p):
                p = os.path.join(base, p)
            if not os.path.exists(p):
                raise ScenarioError(f"field '{key}': file not found: {p}")
            paths.append(p)
        try:
            pair = load_channel_pair(*paths)
        except ValueError as exc:
            raise ScenarioError(f"field 'hb'/'he': {exc}") from None
    else:
        for key in ("ma", "mb", "me"):
            if key not in raw:
                raise ScenarioError(f"field '{key}': required for an ensemble")
        dims = {k: _field(raw, k, int, "a positive integer") for k in ("ma", "mb", "me")}
        trials = _field(raw, "trials", int, "a positive integer") if "trials" in raw else 500
        seed = _field(raw, "seed", int, "an integer") if "seed" in raw else 42
        try:
            ensemble = EnsembleSpec(dims["ma"], dims["mb"], dims["me"],
                                    trials=trials, seed=seed)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None

    cname = _field(raw, "constellation", str, "a name") if "constellation" in raw else None
    method = _field(raw, "method", str, "a method name") if "method" in raw else "dual"
    if method not in METHODS:
        raise ScenarioError(f"field 'method': unknown method {method!r}; "
                            f"pick from {METHODS}")

    power = None
    if "power" in raw and "power_db" in raw:
        raise ScenarioError("give either 'power' (linear) or 'power_db', not both")
    if "power" in raw:
        power = float(_field(raw, "power", (int, float), "a number"))
        if power < 0:
            raise ScenarioError("field 'power': must be nonnegative")
    elif "power_db" in raw:
        power = 10.0 ** (float(_field(raw, "power_db", (int, float), "a number")) / 10.0)

    solver = _solver_config(raw["solver"]) if "solver" in raw else SolverConfig()

    out = _field(raw, "out", str, "a file path") if "out" in raw else None
    fmt = _field(raw, "format", str, "'csv' or 'json'") if "format" in raw else None
    if fmt not in (None, "csv", "json"):
        raise ScenarioError(f"field 'format': expected 'csv' or 'json', got {fmt!r}")

    return Scenario(cname, method, pair, ensemble, power, solver, out, fmt)
