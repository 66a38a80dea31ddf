"""Command-line front end.

Subcommands::

    marketoqs run CONFIG [-o OUT] [--checkpoint-every K] [--method rk4|euler]
    marketoqs sweep CONFIG --param theta|nu|h --values 0,0.5,1 [-o OUT]
    marketoqs dump-distribution CONFIG [-o OUT]
    marketoqs self-check [--seed S] [--trials T]

Exit status: 0 on success, 2 for a bad config, 3 when a run breaks trace or
positivity.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import CHECKPOINT_FIELDS, IntegratorConfig, Method
from .hermcore import NumericalFailure
from .operators import (DissipatorSpec, EnvironmentState, LadderKernel, Model, PriceGrid,
                        UnsupportedEnvironment)
from .scenarios import SWEEP_FIELDS, InitialStateSpec, run_single, summarize

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "main",
           "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_KEYS = {"model", "N", "grid", "sigma2", "environment", "nu_u2", "nu_d2", "kernel", "theta",
         "width", "dt", "steps", "method", "checkpoint_every", "output", "seed"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dissipator: DissipatorSpec
    initial: InitialStateSpec
    integrator: IntegratorConfig
    output: str | None = None
    seed: int = 0


def _num(cfg: dict, key: str, default=None, kind=float):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required field {key!r}")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field {key!r} must be a number")
    if kind is int:
        if int(v) != v:
            raise ConfigError(f"field {key!r} must be an integer")
        return int(v)
    return float(v)


def _grid(cfg: dict, n: int) -> PriceGrid:
    g = cfg.get("grid", {})
    if not isinstance(g, dict) or set(g) - {"start", "stop"}:
        raise ConfigError("grid must be an object with 'start' and 'stop'")
    start = _num(g, "start", -0.5)
    stop = _num(g, "stop", 0.5)
    if not stop > start:
        raise ConfigError("grid stop must exceed start")
    return PriceGrid.uniform(n, start, (stop - start) / (n - 1))


def _kernel(raw) -> LadderKernel:
    if isinstance(raw, dict):
        if set(raw) != {"three_tap"}:
            raise ConfigError("kernel object must be {'three_tap': h}")
        return LadderKernel.three_tap(float(raw["three_tap"]))
    if not isinstance(raw, list) or not raw:
        raise ConfigError("kernel must be a list of taps or {'three_tap': h}")
    k = LadderKernel(np.array(raw, dtype=float))
    if not k.is_normalized:
        raise ConfigError("kernel taps must have unit squared sum")
    return k


def _environment(raw) -> EnvironmentState:
    if not isinstance(raw, dict):
        raise ConfigError("environment must be an object")
    kappa = _num(raw, "kappa", 1.0)
    if raw.get("maximally_mixed"):
        return EnvironmentState.maximally_mixed(_num(raw, "K", kind=int), kappa)
    if "r" not in raw:
        raise ConfigError("environment needs 'r' or 'maximally_mixed'")
    r = np.array(raw["r"], dtype=float)
    if "r_imag" in raw:
        r = r + 1j * np.array(raw["r_imag"], dtype=float)
    if "K" in raw and r.shape[0] != raw["K"]:
        raise ConfigError("environment K does not match r")
    return EnvironmentState(r, kappa)


def parse_config(cfg: dict) -> RunConfig:
    """Validate a decoded JSON config; raises :class:`ConfigError`."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    try:
        model = Model(cfg.get("model", "gaussian"))
        if ("sigma2" in cfg) == ("environment" in cfg):
            raise ConfigError("give exactly one of 'sigma2' or 'environment'")
        n = _num(cfg, "N", 1001, int)
        if n < 2:
            raise ConfigError("N must be at least 2")
        kernel = _kernel(cfg["kernel"]) if "kernel" in cfg else None
        if model is Model.NG2 and kernel is None:
            raise ConfigError("ng2 model needs 'kernel'")
        if model is not Model.NG2 and kernel is not None:
            raise ConfigError(f"{model.value} model takes no kernel")
        has_nu = "nu_u2" in cfg or "nu_d2" in cfg
        if model is not Model.NG1 and has_nu:
            raise ConfigError(f"{model.value} model takes no nu weights")
        if "environment" in cfg:
            if model is Model.NG1 and has_nu:
                raise ConfigError("nu weights come from the environment; do not set both")
            spec = DissipatorSpec.from_environment(_environment(cfg["environment"]), model, kernel)
        else:
            sigma2 = _num(cfg, "sigma2")
            if model is Model.NG1:
                spec = DissipatorSpec(model, sigma2, _num(cfg, "nu_u2"), _num(cfg, "nu_d2"))
            else:
                spec = DissipatorSpec(model, sigma2, kernel=kernel)
        init = InitialStateSpec(n, _num(cfg, "width", 0.005), _num(cfg, "theta", 1.0),
                                _grid(cfg, n))
        integ = IntegratorConfig(dt=_num(cfg, "dt", 1e-3),
                                 steps=_num(cfg, "steps", 1000, int),
                                 method=Method(cfg.get("method", "rk4")),
                                 checkpoint_every=_num(cfg, "checkpoint_every", 100, int))
        out = cfg.get("output")
        if out is not None and not isinstance(out, str):
            raise ConfigError("output must be a path string")
        return RunConfig(spec, init, integ, out, _num(cfg, "seed", 0, int))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write(path, header, rows):
    with _sink(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _apply_overrides(rc: RunConfig, args) -> RunConfig:
    integ = rc.integrator
    if getattr(args, "checkpoint_every", None) is not None:
        integ = replace(integ, checkpoint_every=args.checkpoint_every)
    if getattr(args, "method", None) is not None:
        integ = replace(integ, method=Method(args.method))
    out = args.output if getattr(args, "output", None) is not None else rc.output
    return replace(rc, integrator=integ, output=out)


def cmd_run(rc: RunConfig) -> int:
    _, traj, _ = run_single(rc.initial, rc.dissipator, rc.integrator)
    _write(rc.output, CHECKPOINT_FIELDS,
           ([getattr(cp, f) for f in CHECKPOINT_FIELDS] for cp in traj))
    return EXIT_OK


def _swept(rc: RunConfig, param: str, value: float) -> RunConfig:
    spec = rc.dissipator
    if param == "theta":
        return replace(rc, initial=replace(rc.initial, theta=value))
    if param == "nu":
        if spec.model is not Model.NG1:
            raise ConfigError("nu sweeps need the ng1 model")
        if not 0.0 <= value <= spec.sigma2:
            raise ConfigError(f"nu^2 {value} outside [0, sigma2]")
        return replace(rc, dissipator=DissipatorSpec.ng1(spec.sigma2, value))
    if spec.model is not Model.NG2:
        raise ConfigError("h sweeps need the ng2 model")
    return replace(rc, dissipator=DissipatorSpec.ng2(spec.sigma2, LadderKernel.three_tap(value)))


def cmd_sweep(rc: RunConfig, param: str, values) -> int:
    try:
        runs = [(v, _swept(rc, param, v)) for v in values]
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for v, r in runs:
        final, traj, runtime = run_single(r.initial, r.dissipator, r.integrator)
        rows.append(summarize(v, final, traj, runtime).as_tuple())
    _write(rc.output, SWEEP_FIELDS, rows)
    return EXIT_OK


def cmd_dump_distribution(rc: RunConfig) -> int:
    final, _, _ = run_single(rc.initial, rc.dissipator, rc.integrator)
    x = final.grid.values
    p = final.probabilities
    _write(rc.output, ("i", "x_i", "p_i"), ((i + 1, x[i], p[i]) for i in range(len(x))))
    return EXIT_OK


def cmd_self_check(seed: int, trials: int) -> int:
    from .oracle import self_check

    ok, lines = self_check(seed=seed, trials=trials)
    for line in lines:
        print(line)
    if not ok:
        print("self-check FAILED", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NUMERICAL


def _values(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {text!r}") from exc
    if not vals:
        raise ConfigError("--values is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="marketoqs",
                                 description="Open-system market density-matrix simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("-o", "--output", help="CSV destination (default: stdout)")
        p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
        p.add_argument("--method", choices=[m.value for m in Method])

    common(sub.add_parser("run", help="evolve one configuration, write its trajectory"))
    sw = sub.add_parser("sweep", help="repeat a run over one parameter")
    common(sw)
    sw.add_argument("--param", required=True, choices=["theta", "nu", "h"])
    sw.add_argument("--values", required=True, help="comma-separated values")
    common(sub.add_parser("dump-distribution", help="write the final price distribution"))
    sc = sub.add_parser("self-check", help="compare fast and reference dissipators")
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--trials", type=int, default=100)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "self-check":
            code = cmd_self_check(args.seed, args.trials)
        else:
            rc = _apply_overrides(load_config(args.config), args)
            if args.command == "run":
                code = cmd_run(rc)
            elif args.command == "sweep":
                code = cmd_sweep(rc, args.param, _values(args.values))
            else:
                code = cmd_dump_distribution(rc)
        sys.stdout.flush()
        return code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (ConfigError, UnsupportedEnvironment) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # e.g. an unstable Euler step: the config asked for something impossible
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
