"""Command-line front end: build/load chain -> profile -> bounds -> ground truth.

Commands
--------
curvature     write the curvature profile of a chain
bound         evaluate tail bounds at chosen parameters
stationary    write the exact/iterated stationary distribution
verify        full pipeline with a PASS/FAIL dominance verdict
example-mmk   reproduce the queueing example end to end
example-ou    reproduce the Gaussian autoregression example end to end
example-jump  reproduce the drift-jump example end to end
sweep         epsilon sweep exposing the rho/curvature trade-off

Exit status: 0 all requested checks pass, 1 a bound was violated,
2 the theorems are inapplicable (no admissible parameters / rho <= 0),
3 invalid input.  Plot rendering is out of scope: every figure-equivalent
output is a documented CSV.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from . import equilibrium as eq
from . import jump_process as jp
from .chain_model import (MetricChain, build_discrete_ou_chain, build_mmk_chain,
                          check_epsilon_geodesic, load_chain)
from .curvature import curvature_profile
from .errors import (ChainFormatError, ChainValidationError, EmptyAnnulusError,
                     InadmissibleParamsError, InfeasibleSearchError,
                     NoAttractivePointError)

STRATEGY_MAP = {"paper": "paper_default", "grid": "grid", "convex": "alpha_convexity"}

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INAPPLICABLE = 2
EXIT_BAD_INPUT = 3


@dataclass
class RunConfig:
    command: str
    out_dir: Path
    fmt: str
    chain_file: Optional[str] = None
    n0: Optional[int] = None
    k: Optional[int] = None
    trunc: Optional[int] = None
    alpha: Optional[float] = None
    grid_step: float = 0.05
    grid_width: float = 10.0
    epsilon: Optional[float] = None
    origin: Optional[int] = None
    strategy: str = "paper"
    levels: Optional[str] = None
    epsilons: Optional[str] = None
    reference_level: Optional[float] = None
    seed: int = 0
    paths: int = 100_000
    horizon: float = 25.0
    dump_samples: bool = False


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_range(spec: str) -> np.ndarray:
    """Parse 'a:b:step' into an inclusive grid."""
    try:
        a, b, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise ChainFormatError(f"bad range {spec!r}, expected a:b:step") from exc
    if step <= 0 or b < a:
        raise ChainFormatError(f"bad range {spec!r}: need a <= b and step > 0")
    return np.arange(a, b + step * 1e-9, step)


def _auto_truncation(n0: int, k: int) -> int:
    """Grow the state space until the last 10 states carry < 1e-10 stationary mass."""
    trunc = k + 40
    while True:
        states = np.arange(1, trunc + 1)
        log_pi = np.concatenate([[0.0], np.cumsum(np.log(n0 / np.minimum(states, k)))])
        pi = np.exp(log_pi - log_pi.max())
        pi /= pi.sum()
        if pi[-10:].sum() < 1e-10:
            return trunc
        trunc *= 2


def _build_chain(cfg: RunConfig) -> MetricChain:
    if cfg.chain_file is not None:
        return load_chain(cfg.chain_file)
    if cfg.n0 is not None:
        if cfg.k is None:
            raise ChainFormatError("--n0 requires --k")
        trunc = cfg.trunc if cfg.trunc is not None else _auto_truncation(cfg.n0, cfg.k)
        return build_mmk_chain(cfg.n0, cfg.k, trunc)
    if cfg.alpha is not None:
        return build_discrete_ou_chain(cfg.alpha, cfg.grid_width, cfg.grid_step)
    raise ChainFormatError(
        "no chain source: give --chain FILE, or --n0/--k, or --alpha/--grid-width/--grid-step")


def _default_epsilon(cfg: RunConfig, chain: MetricChain) -> float:
    if cfg.epsilon is not None:
        return cfg.epsilon
    if cfg.n0 is not None:
        return float(max(1, min(round(np.sqrt(cfg.n0)), cfg.k - cfg.n0)))
    if chain.gaussian_variance is not None and cfg.alpha is not None:
        # scale that balances rho against d0 for the Gaussian autoregression
        return float((np.sqrt(2 * np.log(2) * cfg.alpha) + np.sqrt(8 / np.pi))
                     / cfg.alpha)
    if chain.coords is not None:
        steps = np.diff(np.sort(chain.coords))
        return float(steps[steps > 0].min())
    return float(np.min(chain.dist[chain.dist > 0]))


def _profile(cfg: RunConfig, chain: MetricChain):
    eps = _default_epsilon(cfg, chain)
    origin = cfg.origin if cfg.origin is not None else chain.origin_hint
    if origin is None:
        raise ChainFormatError("chain has no origin hint; pass --origin")
    rep = check_epsilon_geodesic(chain, eps)
    if not rep.is_geodesic:
        raise ChainValidationError(
            f"chain is not {eps}-geodesic (witness pair {rep.witness_failure}); "
            "increase --epsilon")
    s2_method = "gaussian_variance" if chain.gaussian_variance is not None \
        else "hoeffding_support"
    return curvature_profile(chain, eps, origin=origin, s2_method=s2_method)


def _stationary(chain: MetricChain):
    try:
        return eq.stationary_birth_death(chain)
    except ChainValidationError:
        return eq.stationary_power(chain, tol=1e-12)


def _default_levels(cfg, profile, chain, d0: float) -> np.ndarray:
    if cfg.levels:
        return _parse_range(cfg.levels)
    lmax = float(chain.dist[profile.origin].max())
    if lmax <= d0:
        raise InadmissibleParamsError(
            f"d0 = {d0:.6g} is beyond the chain's radius {lmax:.6g}; "
            "nothing to bound")
    return np.linspace(d0 + 1e-9, lmax, 80)


def _bound_curves(cfg, profile, chain):
    strategy = STRATEGY_MAP[cfg.strategy]
    params = bounds_mod.search_params(profile, strategy=strategy,
                                      reference_level=cfg.reference_level)
    levels = _default_levels(cfg, profile, chain, params.d0)
    princ = bounds_mod.bound_princ(profile, params, levels)
    t1_params = bounds_mod.theorem1_params(profile)
    curves = [princ]
    if float(levels.min()) > t1_params.d0:
        curves.append(bounds_mod.bound_theorem1(profile, levels))
    return params, levels, curves


def _write_tail_curves(path: Path, curves) -> None:
    """TailCurve export: long format, one row per (level, curve)."""
    rows = []
    for c in curves:
        for l, v in zip(c.levels, c.values):
            rows.append([l, v, min(v, 1.0), c.kind])
    _write_csv(path, ["l", "bound_raw", "bound_clamped", "kind"], rows)


def _comparison_rows(curves, tail):
    header = ["l"]
    for c in curves:
        header += [f"{c.kind}_raw", f"{c.kind}_clamped"]
    if tail is not None:
        header.append("empirical")
    rows = []
    for i, l in enumerate(curves[0].levels):
        row = [l]
        for c in curves:
            row += [c.values[i], min(c.values[i], 1.0)]
        if tail is not None:
            row.append(tail.values[i])
        rows.append(row)
    return header, rows


def cmd_curvature(cfg: RunConfig) -> int:
    chain = _build_chain(cfg)
    profile = _profile(cfg, chain)
    _write_json(cfg.out_dir / "profile.json", profile.as_dict())
    if cfg.fmt == "csv":
        env = profile.envelope
        _write_csv(cfg.out_dir / "envelope.csv", ["r", "K"],
                   list(zip(env.breakpoints, env.values)))
    print(f"profile: eps={profile.epsilon} rho={profile.rho:.12g} "
          f"j0={profile.j0:.12g} s2={profile.s2:.12g}")
    return EXIT_PASS


def cmd_bound(cfg: RunConfig) -> int:
    chain = _build_chain(cfg)
    profile = _profile(cfg, chain)
    params, levels, curves = _bound_curves(cfg, profile, chain)
    _write_json(cfg.out_dir / "params.json", params.as_dict())
    _write_tail_curves(cfg.out_dir / "bounds.csv", curves)
    print(f"params: alpha={params.alpha:.12g} d0={params.d0:.12g} "
          f"strategy={params.strategy}")
    return EXIT_PASS


def cmd_stationary(cfg: RunConfig) -> int:
    chain = _build_chain(cfg)
    result = _stationary(chain)
    _write_csv(cfg.out_dir / "stationary.csv", ["point", "mass"],
               list(zip(chain.points, result.distribution)))
    print(f"stationary: method={result.method} residual={result.residual:.3e}")
    return EXIT_PASS


def cmd_verify(cfg: RunConfig) -> int:
    chain = _build_chain(cfg)
    profile = _profile(cfg, chain)
    params, levels, curves = _bound_curves(cfg, profile, chain)
    result = _stationary(chain)
    tail = eq.empirical_tail(result, chain, profile.origin, levels)
    _write_json(cfg.out_dir / "profile.json", profile.as_dict())
    _write_json(cfg.out_dir / "params.json", params.as_dict())
    _write_csv(cfg.out_dir / "stationary.csv", ["point", "mass"],
               list(zip(chain.points, result.distribution)))
    _write_tail_curves(cfg.out_dir / "bounds.csv", curves)
    audit_ok = eq.truncation_audit(result) if chain.coords is not None else True
    dominated = all(bool(np.all(c.values + 1e-12 >= tail.values)) for c in curves)
    verdict = "PASS" if (dominated and audit_ok) else "FAIL"
    header, rows = _comparison_rows(curves, tail)
    _write_csv(cfg.out_dir / "comparison.csv",
               header + ["dominated"],
               [row + [str(bool(np.all([c.values[i] + 1e-12 >= tail.values[i]
                                        for c in curves])))]
                for i, row in enumerate(rows)])
    print(f"verdict: {verdict} (dominated={dominated}, truncation_audit={audit_ok})")
    return EXIT_PASS if verdict == "PASS" else EXIT_VIOLATION


def cmd_example_mmk(cfg: RunConfig) -> int:
    if cfg.n0 is None or cfg.k is None:
        raise ChainFormatError("example-mmk needs --n0 and --k")
    return cmd_verify(cfg)


def cmd_example_ou(cfg: RunConfig) -> int:
    if cfg.alpha is None:
        cfg.alpha = 0.5
    if cfg.epsilon is None:
        cfg.epsilon = 3.0
    return cmd_verify(cfg)


def cmd_example_jump(cfg: RunConfig) -> int:
    alpha = cfg.alpha if cfg.alpha is not None else 1.0
    config = jp.JumpProcessConfig(drift_alpha=alpha, horizon_T=cfg.horizon,
                                  n_paths=cfg.paths, seed=cfg.seed)
    samples = jp.simulate_paths(config)
    levels = _parse_range(cfg.levels) if cfg.levels else np.array([2.0, 3.0, 5.0, 8.0, 12.0])
    rows, dominated = jp.tail_comparison(samples, levels, alpha)
    _write_csv(cfg.out_dir / "jump_tail.csv",
               ["l", "empirical", "empirical_CI_high", "bound"],
               [[r["level"], r["empirical"], r["empirical_ci_high"], r["bound"]]
                for r in rows])
    if cfg.dump_samples:
        _write_csv(cfg.out_dir / "jump_samples.csv", ["X_T"],
                   [[v] for v in samples])
    mean = float(samples.mean())
    print(f"mean={mean:.6g} (stationary mean 1/alpha = {1 / alpha:.6g})")
    print(f"verdict: {'PASS' if dominated else 'FAIL'} (empirical tail vs bound)")
    return EXIT_PASS if dominated else EXIT_VIOLATION


def cmd_sweep(cfg: RunConfig) -> int:
    chain = _build_chain(cfg)
    origin = cfg.origin if cfg.origin is not None else chain.origin_hint
    if origin is None:
        raise ChainFormatError("chain has no origin hint; pass --origin")
    if not cfg.epsilons:
        raise ChainFormatError("sweep needs --epsilons a:b:step")
    eps_list = _parse_range(cfg.epsilons)
    ref = cfg.reference_level
    if ref is None:
        ref = 3.0 * float(np.median(eps_list)) + 2.0 * float(chain.dist[origin].max()) / 3.0
    s2_method = "gaussian_variance" if chain.gaussian_variance is not None \
        else "hoeffding_support"
    result = bounds_mod.epsilon_sweep(chain, origin, eps_list, ref,
                                      strategy=STRATEGY_MAP[cfg.strategy],
                                      s2_method=s2_method)
    _write_csv(cfg.out_dir / "sweep.csv",
               ["epsilon", "rho", "envelope_max", "envelope_support_end",
                "alpha", "d0", "bound_at_reference", "note"],
               [[r.epsilon, r.rho, r.envelope_max, r.envelope_support_end,
                 r.params.alpha if r.params else float("nan"),
                 r.params.d0 if r.params else float("nan"),
                 r.bound_at_reference, r.note] for r in result.rows])
    print(f"argmin epsilon: {result.argmin_epsilon} "
          f"(reference level {result.reference_level:.6g})")
    return EXIT_PASS


COMMANDS = {
    "curvature": cmd_curvature,
    "bound": cmd_bound,
    "stationary": cmd_stationary,
    "verify": cmd_verify,
    "example-mmk": cmd_example_mmk,
    "example-ou": cmd_example_ou,
    "example-jump": cmd_example_jump,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ricci-bounds",
        description="Coarse Ricci curvature and equilibrium concentration bounds "
                    "for finite Markov chains.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--chain", dest="chain_file", help="chain-spec JSON file")
    parser.add_argument("--n0", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--trunc", type=int)
    parser.add_argument("--alpha", type=float,
                        help="autoregression rate (example-ou) or drift rate (example-jump)")
    parser.add_argument("--grid-step", type=float, default=0.05)
    parser.add_argument("--grid-width", type=float, default=10.0)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--origin", type=int)
    parser.add_argument("--strategy", choices=sorted(STRATEGY_MAP), default="paper")
    parser.add_argument("--levels", help="level grid as a:b:step")
    parser.add_argument("--epsilons", help="sweep epsilon grid as a:b:step")
    parser.add_argument("--ref-level", dest="reference_level", type=float)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--paths", type=int, default=100_000)
    parser.add_argument("--horizon", type=float, default=25.0)
    parser.add_argument("--dump-samples", action="store_true")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    return parser


def run(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[cfg.command](cfg)
    except (InadmissibleParamsError, InfeasibleSearchError,
            NoAttractivePointError, EmptyAnnulusError) as exc:
        print(f"inapplicable: {exc}", file=sys.stderr)
        if getattr(exc, "report", None):
            _write_json(cfg.out_dir / "infeasibility_report.json",
                        {"error": str(exc), "report": exc.report})
        return EXIT_INAPPLICABLE
    except (ChainFormatError, ChainValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, out_dir=Path(args.out), fmt=args.fmt,
                    chain_file=args.chain_file, n0=args.n0, k=args.k,
                    trunc=args.trunc, alpha=args.alpha, grid_step=args.grid_step,
                    grid_width=args.grid_width, epsilon=args.epsilon,
                    origin=args.origin, strategy=args.strategy,
                    levels=args.levels, epsilons=args.epsilons,
                    reference_level=args.reference_level, seed=args.seed,
                    paths=args.paths, horizon=args.horizon,
                    dump_samples=args.dump_samples)
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()
