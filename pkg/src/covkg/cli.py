"""Command line front end.

Subcommands: verify (invariant suites), simulate (time series from Cauchy
data), brackets (bracket identity table), prequant (operator checks and
the translation spectrum), spec (resolved configuration).

Exit codes: 0 all checks passed, 1 at least one check failed,
2 usage or configuration error.  Reports carry no timestamps, so a fixed
config and seed reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import observables as obs
from . import prequant as pq
from .reporting import (
    SCHEMA_VERSION,
    Report,
    RunConfig,
    check,
    config_from_file,
    parse_tol_overrides,
)
from .solution import (
    field_energy,
    from_cauchy,
    leapfrog_evolve,
    random_solution,
    read_cauchy_csv,
    synthesize,
)
from .suites import ccr_residual, run_suite


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--lambda", dest="lam", type=float,
                     help="override the theta_lambda gauge parameter")
    sub.add_argument("--tol", action="append", metavar="NAME=VALUE",
                     help="override a named check tolerance (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covkg",
        description="verification tools for the covariant Klein-Gordon "
                    "field on a periodic box")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run an invariant suite")
    p_verify.add_argument("--suite", default="all",
                          choices=["msymp", "observables", "phase-space",
                                   "prequant", "all"])
    _add_common(p_verify)

    p_sim = sub.add_parser("simulate", help="emit conserved-quantity time series")
    p_sim.add_argument("--cauchy", help="Cauchy data CSV (index,phi0,pi0); "
                       "default: seeded random solution")
    p_sim.add_argument("--t-final", type=float, default=5.0)
    p_sim.add_argument("--n-out", type=int, default=21)
    p_sim.add_argument("--track", help="comma-separated mode indices to track "
                       "(default: three largest amplitudes)")
    p_sim.add_argument("--leapfrog-dt", type=float,
                       help="also evolve by leapfrog at this step and emit "
                       "its energy column")
    _add_common(p_sim)

    p_br = sub.add_parser("brackets", help="bracket identity table")
    _add_common(p_br)

    p_pq = sub.add_parser("prequant", help="operator checks and P spectrum")
    p_pq.add_argument("--fg", help="JSON file {\"f\": [...], \"g\": [...]} "
                      "with per-mode complex entries as [re, im]")
    p_pq.add_argument("--max-degree", type=int, default=2)
    p_pq.add_argument("--spectrum-out", help="CSV path for the monomial "
                      "spectrum of the time translation generator")
    _add_common(p_pq)

    p_spec = sub.add_parser("spec", help="print the resolved configuration")
    _add_common(p_spec)
    return parser


def _load_config(args) -> RunConfig:
    cfg = config_from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = int(args.seed)
    if getattr(args, "lam", None) is not None:
        cfg.lam = float(args.lam)
    cfg.tolerances.update(parse_tol_overrides(getattr(args, "tol", None)))
    for name, value in cfg.tolerances.items():
        if not value >= 0.0:
            raise ValueError(f"tolerance {name!r} must be nonnegative")
    if getattr(args, "out", None):
        cfg.out = args.out
    return cfg


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish_report(cfg: RunConfig, suite: str, records) -> int:
    report = Report(config=cfg.to_dict(), checks=records, suite=suite)
    _emit(report.to_json(), cfg.out)
    if cfg.out:
        n_fail = sum(not c.passed for c in records)
        print(f"{cfg.out}: {len(records)} checks, "
              + ("all passed" if n_fail == 0 else f"{n_fail} failed"))
    return 0 if report.all_pass else 1


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    return _finish_report(cfg, suite, run_suite(cfg, suite))


def _parse_track(arg, lat, sol):
    if arg:
        picks = [int(s) for s in arg.split(",") if s.strip() != ""]
        for k in picks:
            if not 0 <= k < lat.n_modes:
                raise ValueError(f"track index {k} out of range")
        return picks
    order = np.argsort(-np.abs(sol.u), kind="stable")
    return sorted(int(k) for k in order[:3])


def cmd_simulate(cfg: RunConfig, args) -> int:
    lat = cfg.lattice()
    if args.cauchy:
        phi0, pi0 = read_cauchy_csv(lat, args.cauchy)
        sol = from_cauchy(lat, phi0, pi0)
    else:
        sol = random_solution(lat, np.random.default_rng(cfg.seed))
    if args.n_out < 2:
        raise ValueError("n-out must be at least 2")
    if not args.t_final > 0:
        raise ValueError("t-final must be positive")
    ts = np.linspace(0.0, args.t_final, args.n_out)
    track = _parse_track(args.track, lat, sol)

    columns = (["t", "energy"]
               + [f"momentum_{i}" for i in range(1, lat.d + 1)]
               + [f"a_abs_{k}" for k in track])
    leap = None
    if args.leapfrog_dt is not None:
        columns.append("energy_leapfrog")
        phi, pi = synthesize(sol, 0.0), synthesize(sol, 0.0, (0,))
        leap = (phi, pi)

    lines = [f"# schema_version={SCHEMA_VERSION}", ",".join(columns)]
    for j, t in enumerate(ts):
        row = [t, obs.energy_integral(sol, t, cfg.lam)]
        row += [obs.momentum_integral(sol, i, t, cfg.lam)
                for i in range(1, lat.d + 1)]
        row += [abs(complex(obs.slice_integral(obs.AlphaK(k), sol, t)))
                for k in track]
        if leap is not None:
            if j > 0:
                span = ts[j] - ts[j - 1]
                steps = max(1, int(round(span / args.leapfrog_dt)))
                sd = leapfrog_evolve(lat, leap[0], leap[1],
                                     span / steps, steps)
                leap = (sd.phi, sd.p[0])
            row.append(field_energy(lat, leap[0], leap[1]))
        lines.append(",".join(repr(float(v)) for v in row))
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_brackets(cfg: RunConfig) -> int:
    lat = cfg.lattice()
    rng = np.random.default_rng([cfg.seed, 7])
    sol = random_solution(lat, rng)
    phi = random_solution(lat, rng, real_flag=False)
    psi = random_solution(lat, rng, real_flag=False)
    f = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    g = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    records = []

    b0 = obs.bracket_slice_integral(phi, psi, 0.0)
    drift = max(abs(obs.bracket_slice_integral(phi, psi, t) - b0)
                for t in (1.0, 2.5, 7.0))
    records.append(check("brackets.fphi_fpsi_t_independent", drift, 0.0,
                         cfg.tolerance("brackets.fphi_fpsi_t_independent", 1e-12)))
    records.append(check("brackets.antisymmetry",
                         abs(b0 + obs.bracket_slice_integral(psi, phi, 0.0)),
                         0.0, cfg.tolerance("brackets.antisymmetry", 0.0)))

    closed = 1j * np.sum(lat.w * f * g)
    grid = obs.bracket_slice_integral(obs.generator_alpha_f(lat, f),
                                      obs.generator_alpha_star_g(lat, g))
    records.append(check("brackets.a_f_astar_g_two_path", closed, grid,
                         cfg.tolerance("brackets.a_f_astar_g_two_path", 1e-10)))

    aa = obs.bracket_slice_integral(obs.generator_alpha_f(lat, f),
                                    obs.generator_alpha_f(lat, g))
    records.append(check("brackets.a_f_a_fprime_zero", aa, 0.0,
                         cfg.tolerance("brackets.a_f_a_fprime_zero", 1e-12)))

    k0 = lat.mode_index(np.zeros(lat.d, dtype=int))
    e0 = np.zeros(lat.n_modes)
    e0[k0] = 1.0
    pinned = obs.bracket_slice_integral(obs.generator_alpha_f(lat, e0),
                                        obs.generator_alpha_star_g(lat, e0))
    records.append(check("brackets.single_mode_pinned", pinned,
                         1j * lat.w[k0],
                         cfg.tolerance("brackets.single_mode_pinned", 1e-12)))

    for mu in range(lat.d + 1):
        via_omega, direct = obs.pmu_bracket_identity(mu, phi, sol)
        records.append(check(f"brackets.pmu_identity_mu{mu}", via_omega,
                             direct,
                             cfg.tolerance("brackets.pmu_identity", 1e-10)))
    return _finish_report(cfg, "brackets", records)


def _parse_complex_list(raw, n_modes: int, name: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n_modes:
        raise ValueError(f"{name} must be a list with one entry per mode "
                         f"({n_modes})")
    out = np.empty(n_modes, dtype=complex)
    for i, item in enumerate(raw):
        if isinstance(item, (int, float)):
            out[i] = complex(item)
        elif isinstance(item, list) and len(item) == 2:
            out[i] = complex(item[0], item[1])
        else:
            raise ValueError(f"{name}[{i}] must be a number or [re, im]")
    return out


def _alpha_label(alpha) -> str:
    return ";".join(f"{k}:{e}" for k, e in alpha)


def cmd_prequant(cfg: RunConfig, args) -> int:
    lat = cfg.lattice()
    rng = np.random.default_rng([cfg.seed, 11])
    if args.fg:
        with open(args.fg, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        f = _parse_complex_list(raw.get("f"), lat.n_modes, "f")
        g = _parse_complex_list(raw.get("g"), lat.n_modes, "g")
    else:
        f = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
        g = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    if args.max_degree < 0 or args.max_degree > 4:
        raise ValueError("max-degree must lie in 0..4")
    records = []

    monos = pq.monomials_up_to_degree(lat, args.max_degree)
    worst = max(ccr_residual(lat, f, g, m) for m in monos)
    records.append(check("prequant.ccr_monomials", worst, 0.0,
                         cfg.tolerance("prequant.ccr_monomials", 1e-12)))

    dyadic = (rng.integers(-8, 9, size=lat.n_modes)
              + 1j * rng.integers(-8, 9, size=lat.n_modes)) / 16.0
    dyadic2 = (rng.integers(-8, 9, size=lat.n_modes)
               + 1j * rng.integers(-8, 9, size=lat.n_modes)) / 16.0
    worst_aa = 0.0
    worst_ss = 0.0
    for mono in monos:
        state = pq.monomial(lat, dict(mono))
        aa = pq.commutator(lambda s: pq.op_a(dyadic, s),
                           lambda s: pq.op_a(dyadic2, s), state)
        ss = pq.commutator(lambda s: pq.op_a_star(f, s),
                           lambda s: pq.op_a_star(g, s), state)
        worst_aa = max(worst_aa, 0.0 if pq.is_zero_state(aa) else 1.0)
        worst_ss = max(worst_ss, 0.0 if pq.is_zero_state(ss) else 1.0)
    records.append(check("prequant.aa_exact_zero", worst_aa, 0.0, 0.0))
    records.append(check("prequant.astar_astar_exact_zero", worst_ss, 0.0,
                         0.0))

    zeta = np.zeros(lat.d + 1)
    zeta[0] = 1.0
    vac = pq.vacuum(lat)
    vac_ok = (pq.is_zero_state(pq.op_p(zeta, vac))
              and pq.is_zero_state(pq.op_a(f, vac)))
    records.append(check("prequant.vacuum_annihilated",
                         0.0 if vac_ok else 1.0, 0.0, 0.0))

    if args.spectrum_out:
        lines = [f"# schema_version={SCHEMA_VERSION}",
                 "multi_index,eigenvalue,energy"]
        for alpha in monos:
            eig = pq.p_eigenvalue(lat, alpha, zeta)
            energy = -eig + 0.0  # normalizes -0.0 for the vacuum row
            lines.append(f"{_alpha_label(alpha)},{eig!r},{energy!r}")
        with open(args.spectrum_out, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    return _finish_report(cfg, "prequant-cli", records)


def cmd_spec(cfg: RunConfig) -> int:
    data = cfg.to_dict()
    data["schema_version"] = SCHEMA_VERSION
    sys.stdout.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _load_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        if args.command == "simulate":
            return cmd_simulate(cfg, args)
        if args.command == "brackets":
            return cmd_brackets(cfg)
        if args.command == "prequant":
            return cmd_prequant(cfg, args)
        if args.command == "spec":
            return cmd_spec(cfg)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
