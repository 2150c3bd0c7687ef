"""Command-line front end: analyze games, run trajectories, sweep step sizes,
and run the full verification suite.

Exit codes: 0 ok, 1 config error, 2 inapplicable regime, 3 verification
failure. Identical config + seed gives byte-identical outputs. The env var
SADDLE_LAB_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import games as games_mod
from . import predict, spectral, verify
from .dynamics import (DEFAULT_BLOW_CAP, DEFAULT_STOP_TOL, Algo, IterateState,
                       StopReason, run, trajectory_to_csv)
from .games import BilinearGame
from .verify import InsufficientDataError

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_INAPPLICABLE = 2
EXIT_VERIFY_FAILED = 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    game: BilinearGame
    algo: Algo
    eta: float | None                  # scalar run
    eta_range: tuple[float, float, float] | None  # (start, stop, step) sweep
    init_spec: dict | None
    max_steps: int = 5000
    stop_tol: float = DEFAULT_STOP_TOL
    blow_cap: float = DEFAULT_BLOW_CAP
    record_stride: int | None = None
    description: str = ""
    seed: int | None = None

    def initial_state(self) -> IterateState:
        return _build_init(self.game, self.init_spec, self.seed)

    def etas(self) -> list[float]:
        if self.eta is not None:
            return [self.eta]
        start, stop, step = self.eta_range
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]


def _build_init(game: BilinearGame, spec: dict | None,
                seed: int | None) -> IterateState:
    n, p = game.n, game.p
    if spec is None:
        # generic deterministic default; prevs differ from the current pair
        return IterateState(np.ones(n), np.ones(p), np.zeros(n), np.zeros(p))
    if spec.get("random"):
        seed = spec.get("seed", seed)
        if seed is None:
            raise ConfigError("random init requires a seed")
        rng = np.random.default_rng(int(seed))
        x0 = rng.uniform(-1.0, 1.0, n)
        y0 = rng.uniform(-1.0, 1.0, p)
        return IterateState(x0, y0, rng.uniform(-1.0, 1.0, n),
                            rng.uniform(-1.0, 1.0, p))
    try:
        x0 = np.asarray(spec["x0"], dtype=float)
        y0 = np.asarray(spec["y0"], dtype=float)
    except KeyError as exc:
        raise ConfigError(f"init is missing {exc}") from exc
    x_prev = np.asarray(spec.get("x_prev", x0), dtype=float)
    y_prev = np.asarray(spec.get("y_prev", y0), dtype=float)
    return IterateState(x0, y0, x_prev, y_prev)


def parse_config(obj: dict, seed: int | None = None) -> ExperimentConfig:
    try:
        game = games_mod.game_from_json(obj["game"])
        algo = Algo(obj.get("algo", "OGDA"))
        eta_obj = obj["eta"]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    eta, eta_range = None, None
    if isinstance(eta_obj, dict):
        try:
            start = float(eta_obj["start"])
            stop = float(eta_obj["stop"])
            step = float(eta_obj["step"])
        except KeyError as exc:
            raise ConfigError(f"eta range is missing {exc}") from exc
        if step <= 0 or stop < start:
            raise ConfigError("eta range needs positive step and stop >= start")
        eta_range = (start, stop, step)
    else:
        eta = float(eta_obj)
        if eta <= 0:
            raise ConfigError("eta must be positive")
    return ExperimentConfig(
        name=str(obj.get("name", "experiment")),
        game=game, algo=algo, eta=eta, eta_range=eta_range,
        init_spec=obj.get("init"),
        max_steps=int(obj.get("max_steps", 5000)),
        stop_tol=float(obj.get("stop_tol", DEFAULT_STOP_TOL)),
        blow_cap=float(obj.get("blow_cap", DEFAULT_BLOW_CAP)),
        record_stride=obj.get("record_stride"),
        description=str(obj.get("description", "")),
        seed=obj.get("seed", seed))


# ---------------------------------------------------------------------------
# Presets reproducing the headline experiments
# ---------------------------------------------------------------------------


def _preset_matching_pennies(algo: str) -> list[dict]:
    return [{
        "name": f"matching-pennies-{algo.lower()}",
        "description": (f"matching pennies (1x1 coupling, saddle at the origin), "
                        f"{algo} with eta=0.3 from (1, 1)"),
        "game": {"A": {"rows": 1, "cols": 1, "data": [1.0]}, "B": None,
                 "b": [0.0], "c": [0.0], "zero_sum": True},
        "algo": algo,
        "eta": 0.3,
        "init": {"x0": [1.0], "y0": [1.0], "x_prev": [1.0], "y_prev": [1.0]},
        "max_steps": 2000,
    }]


def _preset_wgan_basic() -> list[dict]:
    game = {"A": {"rows": 2, "cols": 2, "data": [-1.0, 0.0, 0.0, -1.0]},
            "B": None, "b": [3.0, 4.0], "c": [0.0, 0.0], "zero_sum": True}
    init = {"x0": [0.0, 0.0], "y0": [0.0, 0.0]}
    runs = []
    for eta in (0.3, 0.03):
        runs.append({
            "name": f"wgan-basic-eta{eta}",
            "description": ("linear generator fitting a mean shift (3, 4): "
                            f"identity coupling zero-sum run at eta={eta}"),
            "game": game, "algo": "OGDA", "eta": eta, "init": init,
            "max_steps": 20000,
        })
    return runs


def _preset_wgan_dagger() -> list[dict]:
    eta_star, _ = spectral.optimal_eta(0.25, 1.0)
    zs_game = {"A": {"rows": 2, "cols": 2, "data": [1.0, 0.0, 0.0, 0.5]},
               "B": None, "b": [-1.0, -0.5], "c": [0.0, 0.0], "zero_sum": True}
    dag_game = {"A": {"rows": 2, "cols": 2, "data": [1.0, 0.0, 0.0, 0.5]},
                "B": {"rows": 2, "cols": 2, "data": [-1.0, 0.0, 0.0, -2.0]},
                "b": [-1.0, -0.5], "c": [0.0, 0.0],
                "e": [0.0, 0.0], "f": [0.0, 0.0], "zero_sum": False}
    init = {"x0": [1.0, 1.0], "y0": [0.0, 0.0]}
    return [
        {"name": "wgan-dagger-zerosum",
         "description": ("diag(1, 1/2) coupling, zero-sum baseline at its "
                         f"optimal step eta={eta_star:.6f}"),
         "game": zs_game, "algo": "OGDA", "eta": eta_star, "init": init,
         "max_steps": 20000},
        {"name": "wgan-dagger-accelerated",
         "description": ("same objective with the opponent coupling replaced by "
                         "minus the transposed pseudoinverse, eta=0.49"),
         "game": dag_game, "algo": "OGDA", "eta": 0.49, "init": init,
         "max_steps": 20000},
    ]


PRESETS = {
    "matching-pennies-ogda": lambda: _preset_matching_pennies("OGDA"),
    "matching-pennies-gda": lambda: _preset_matching_pennies("GDA"),
    "wgan-basic": _preset_wgan_basic,
    "wgan-dagger": _preset_wgan_dagger,
}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _json_dump(obj, path: Path | None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        path.write_text(text)
    return text


def _analysis_payload(cfg: ExperimentConfig, eta: float) -> dict:
    report = spectral.rate_report(cfg.game, eta, cfg.algo)
    pred = predict.predict_limit(cfg.game, cfg.algo, eta, cfg.initial_state())
    return {"report": report.to_json(), "limit": pred.to_json()}


def cmd_analyze(cfg: ExperimentConfig, out_dir: Path | None) -> int:
    if cfg.eta is None:
        raise ConfigError("analyze needs a scalar eta")
    payload = _analysis_payload(cfg, cfg.eta)
    target = out_dir / f"{cfg.name}.analysis.json" if out_dir else None
    text = _json_dump(payload, target)
    if target is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {target}")
    regime = payload["report"]["eta_regime"]
    return EXIT_OK if regime in ("Part2", "Part3a", "Part3b") else EXIT_INAPPLICABLE


def _run_one(cfg: ExperimentConfig, eta: float) -> dict:
    init = cfg.initial_state()
    traj = run(cfg.game, cfg.algo, eta, init, max_steps=cfg.max_steps,
               stop_tol=cfg.stop_tol, blow_cap=cfg.blow_cap,
               record_stride=cfg.record_stride)
    report = spectral.rate_report(cfg.game, eta, cfg.algo)
    pred = predict.predict_limit(cfg.game, cfg.algo, eta, init)
    outcome = verify.classify(traj, cfg.game)
    result = {
        "trajectory": traj,
        "init": init,
        "report": report,
        "prediction": pred,
        "outcome": outcome,
        "rate_fit": None,
        "bound": None,
    }
    if pred.valid and traj.stop_reason is not StopReason.DIVERGED:
        try:
            result["rate_fit"] = verify.estimate_rate(traj, pred)
        except InsufficientDataError:
            pass
        if report.applicable:
            try:
                dist = predict.distance_to_nash(cfg.game, init)
                result["bound"] = verify.check_bound(traj, report, dist, pred)
            except predict.EmptyNashSetError:
                pass
    return result


def _verification_json(result: dict) -> dict:
    fit = result["rate_fit"]
    bound = result["bound"]
    outcome = result["outcome"]
    return {
        "report": result["report"].to_json(),
        "limit": result["prediction"].to_json(),
        "stop_reason": result["trajectory"].stop_reason.value,
        "steps": result["trajectory"].times[-1],
        "classification": {
            "kind": outcome.kind.value,
            "growth_ratio": outcome.growth_ratio,
            "evidence": outcome.evidence,
        },
        "rate_fit": None if fit is None else {
            "fitted_ratio": fit.fitted_ratio, "window": list(fit.window),
            "r_squared": fit.r_squared, "floor_hit": fit.floor_hit},
        "bound": None if bound is None else {
            "ok": bound.ok, "worst_ratio": bound.worst_ratio,
            "max_violation": bound.max_violation,
            "lambda_used": bound.lambda_used,
            "constant_used": bound.constant_used,
            "fitted_constant": bound.fitted_constant},
    }


def cmd_run(configs: list[ExperimentConfig], out_dir: Path, fmt: str) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for cfg in configs:
        if cfg.eta is None:
            raise ConfigError("run needs a scalar eta (use sweep for ranges)")
        result = _run_one(cfg, cfg.eta)
        pred = result["prediction"]
        limit_pair = pred.pair() if pred.valid else None
        comments = []
        if cfg.description:
            comments.append(f"preset: {cfg.name} — {cfg.description}")
        comments.append(f"algo={cfg.algo.value} eta={cfg.eta!r} "
                        f"stop={result['trajectory'].stop_reason.value}")
        if fmt == "csv":
            traj_path = out_dir / f"{cfg.name}.csv"
            traj_path.write_text(trajectory_to_csv(
                result["trajectory"], cfg.game, limit=limit_pair,
                comments=tuple(comments)))
        else:
            traj_path = out_dir / f"{cfg.name}.trajectory.json"
            traj = result["trajectory"]
            _json_dump({
                "comments": comments,
                "times": traj.times,
                "x": [[float(v) for v in s.x] for s in traj.states],
                "y": [[float(v) for v in s.y] for s in traj.states],
            }, traj_path)
        _json_dump(_verification_json(result), out_dir / f"{cfg.name}.verify.json")
        print(f"wrote {traj_path}")
    return EXIT_OK


def _sweep_worker(cfg: ExperimentConfig, eta: float) -> dict:
    report = spectral.rate_report(cfg.game, eta, cfg.algo)
    row = {"eta": eta, "lambda_max": report.lambda_max,
           "applicable": report.applicable, "fitted_ratio": float("nan")}
    if not report.applicable:
        return row
    result = _run_one(cfg, eta)
    if result["rate_fit"] is not None:
        row["fitted_ratio"] = result["rate_fit"].fitted_ratio
    return row


def _max_workers() -> int:
    env = os.environ.get("SADDLE_LAB_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.eta_range is None:
        raise ConfigError("sweep needs an eta range {start, stop, step}")
    etas = cfg.etas()
    workers = _max_workers()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda e: _sweep_worker(cfg, e), etas))
    else:
        rows = [_sweep_worker(cfg, e) for e in etas]
    rows.sort(key=lambda r: r["eta"])
    usable = [r for r in rows if r["applicable"] and np.isfinite(r["fitted_ratio"])]
    if not usable:
        print("no eta in the requested range is applicable", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    best = min(usable, key=lambda r: r["fitted_ratio"])
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg.name}.sweep.csv"
    lines = []
    if cfg.description:
        lines.append(f"# {cfg.description}")
    lines.append(f"# empirical_argmin_eta={best['eta']!r}")
    lines.append("eta,fitted_ratio,lambda_max_closed_form")
    for r in usable:
        lines.append(",".join(format(v, ".17g") for v in
                              (r["eta"], r["fitted_ratio"], r["lambda_max"])))
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(seed: int, out_dir: Path | None) -> int:
    results = verify.run_all_suites(seed)
    payload = {"seed": seed,
               "all_passed": all(r.passed for r in results),
               "checks": [r.to_json() for r in results]}
    target = out_dir / "verification.json" if out_dir else None
    text = _json_dump(payload, target)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name} (measured={r.measured:.3e}, tol={r.tolerance:.0e})")
    if target is not None:
        print(f"wrote {target}")
    elif not sys.stdout.isatty():
        sys.stdout.write(text)
    return EXIT_OK if payload["all_passed"] else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _load_configs(args) -> list[ExperimentConfig]:
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; have {sorted(PRESETS)}")
        return [parse_config(obj, seed=args.seed) for obj in PRESETS[args.preset]()]
    if not getattr(args, "config", None):
        raise ConfigError("either --config or --preset is required")
    with open(args.config) as fh:
        obj = json.load(fh)
    items = obj if isinstance(obj, list) else [obj]
    return [parse_config(item, seed=args.seed) for item in items]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddle-lab",
        description="Optimistic gradient dynamics on bilinear games: "
                    "exact rates, limits, and verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset=False):
        p.add_argument("--config", help="JSON experiment config")
        if preset:
            p.add_argument("--preset", choices=sorted(PRESETS),
                           help="named built-in experiment")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for random initializations")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="trajectory output format")

    common(sub.add_parser("analyze", help="spectral report + limit prediction"))
    common(sub.add_parser("run", help="simulate and verify a trajectory"),
           preset=True)
    common(sub.add_parser("sweep", help="rate fits across a step-size range"))
    verify_p = sub.add_parser("verify", help="run every property suite")
    verify_p.add_argument("--seed", type=int, default=20240)
    verify_p.add_argument("--out-dir", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir) if args.out_dir else None
    try:
        if args.command == "verify":
            return cmd_verify(args.seed, out_dir)
        if args.command == "analyze":
            configs = _load_configs(args)
            if len(configs) != 1:
                raise ConfigError("analyze expects exactly one config")
            return cmd_analyze(configs[0], out_dir)
        if args.command == "run":
            return cmd_run(_load_configs(args), out_dir or Path("."), args.format)
        if args.command == "sweep":
            configs = _load_configs(args)
            if len(configs) != 1:
                raise ConfigError("sweep expects exactly one config")
            return cmd_sweep(configs[0], out_dir or Path("."))
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
