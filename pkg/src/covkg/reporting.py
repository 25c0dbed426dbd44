"""Run configuration and machine-readable verification reports.

A check record always satisfies: passed iff abs_diff <= tolerance.
Lower-bound assertions ("value must exceed threshold") are encoded in the
same shape with abs_diff = max(0, threshold - value) and tolerance equal
to the allowed slack (0 for strict), so one invariant covers every row.

Reports carry no timestamps; with a fixed config and seed the serialized
JSON is byte-identical between runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .lattice import ModeLattice, build_lattice

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    d: int = 1
    L: float = 2.0 * np.pi
    N: int = 32
    n_max: int = 7
    m: float = 1.0
    hbar: float = 1.0
    lam: float = 1.0
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    _KEYS = ("d", "L", "N", "n_max", "m", "hbar", "lam", "seed")

    def __post_init__(self):
        for name, value in self.tolerances.items():
            if not value >= 0.0:
                raise ValueError(f"tolerance {name!r} must be nonnegative")
        self.seed = int(self.seed)

    def lattice(self) -> ModeLattice:
        return build_lattice(self.d, self.L, self.N, self.n_max, self.m,
                             self.hbar)

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def to_dict(self) -> dict:
        data = {k: getattr(self, k) for k in self._KEYS}
        data["tolerances"] = dict(sorted(self.tolerances.items()))
        return data


def config_from_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a JSON object")
    allowed = set(RunConfig._KEYS) | {"tolerances"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**raw)


def parse_tol_overrides(items) -> dict:
    """--tol NAME=VALUE pairs into a tolerance map."""
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ValueError(f"bad tolerance override {item!r}, "
                             "expected NAME=VALUE")
        out[name] = float(value)
    return out


@dataclass(frozen=True)
class CheckRecord:
    name: str
    lhs: complex
    rhs: complex
    abs_diff: float
    tolerance: float
    passed: bool


def check(name: str, lhs, rhs, tolerance: float) -> CheckRecord:
    """Equality check: lhs and rhs must agree within tolerance."""
    diff = abs(complex(lhs) - complex(rhs))
    return CheckRecord(name=name, lhs=lhs, rhs=rhs, abs_diff=float(diff),
                       tolerance=float(tolerance),
                       passed=bool(diff <= tolerance))


def lower_bound_check(name: str, value: float, threshold: float,
                      slack: float = 0.0) -> CheckRecord:
    """Value must be at least threshold (minus slack)."""
    value = float(value)
    shortfall = max(0.0, threshold - value)
    return CheckRecord(name=name, lhs=value, rhs=float(threshold),
                       abs_diff=shortfall, tolerance=float(slack),
                       passed=bool(shortfall <= slack))


def _num(value):
    if isinstance(value, complex) or np.iscomplexobj(value):
        z = complex(value)
        if z.imag == 0.0:
            return float(z.real)
        return [z.real, z.imag]
    return float(value)


@dataclass
class Report:
    config: dict
    checks: list
    suite: str = "all"

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "config": self.config,
            "versions": {"artifact": __version__,
                         "numpy": np.__version__},
            "all_pass": self.all_pass,
            "checks": [
                {"name": c.name, "lhs": _num(c.lhs), "rhs": _num(c.rhs),
                 "abs_diff": _num(c.abs_diff),
                 "tolerance": _num(c.tolerance), "pass": c.passed}
                for c in sorted(self.checks, key=lambda c: c.name)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
