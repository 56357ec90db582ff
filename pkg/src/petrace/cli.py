"""Batch front end: configure, run, diagnose and export.

Configs are flat ``section.key = value`` text files (``#`` comments, one
dot of nesting).  Every run writes the fully resolved configuration next
to its results, so re-running a resolved config reproduces the outputs
bit-identically.  Exit codes: 0 success, 2 configuration/validation
failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import initial_data, selfsim
from .diagnostics import check_initial_closeness, energy_report
from .errors import FitDegenerate, PetraceError, TimeStepUnderflow
from .fitting import estimate_T, fit_rates
from .params import FrameworkParams, alpha0, validate_params
from .trace import SolverConfig, Trajectory, run_to_blowup

MODES = ("simulate", "selfsim", "validate-params", "alpha0", "energies",
         "fit", "redecompose", "sweep")

# key -> (type tag, default); types: f float, i int, b bool, s string
REGISTRY = {
    "mode": ("s", "alpha0"),
    "solver.n": ("i", 1025),
    "solver.dt_safety": ("f", 0.5),
    "solver.blowup_cap": ("f", math.nan),       # nan: 1e6 * max|a0|
    "solver.dt_floor": ("f", 1e-15),
    "solver.upwind": ("b", False),
    "solver.t_max": ("f", math.inf),
    "solver.max_steps": ("i", 5_000_000),
    "solver.store_stride": ("i", 0),
    "solver.probe_z": ("s", "0,0.25,0.5"),
    "selfsim.s_end": ("f", math.nan),           # nan: s0 + 5
    "selfsim.ds_safety": ("f", 0.25),
    "selfsim.stride": ("i", 1),
    "params.sigma": ("i", 0),
    "params.alpha": ("f", 2.0),
    "params.gamma": ("f", 2.0),
    "params.k": ("f", 1.5),
    "params.eta0": ("i", 4),
    "params.h_a": ("f", 4.0 / 3.0),
    "params.h_c": ("f", 0.5),
    "params.l": ("f", 1.0),
    "params.eps_a": ("f", 0.6),
    "params.eps_c": ("f", 0.75),
    "params.M": ("f", 2.0),
    "params.N": ("f", 4.0),
    "params.N0": ("f", 3.0),
    "params.z_star": ("f", 4.0),
    "params.delta": ("f", 0.1),
    "init.lambda0": ("f", 1e-3),
    "init.nu0": ("f", math.nan),                # nan: 1/(2 log(1/lambda0))
    "init.sigma": ("i", 0),
    "init.kappa": ("f", 0.0),
    "init.family": ("s", "none"),
    "init.seed": ("i", 0),
    "init.n": ("i", 2049),
    "fit.trajectory": ("s", ""),
    "fit.tail_fraction": ("f", 0.25),
    "redecompose.lam": ("f", 0.01),
    "redecompose.nu": ("f", 0.1),
    "redecompose.atil0": ("f", 0.0),
    "sweep.param": ("s", ""),
    "sweep.values": ("s", ""),
    "sweep.mode": ("s", "simulate"),
}

_FILE_MODES = {"simulate", "selfsim", "energies", "fit", "sweep"}


class ConfigError(Exception):
    pass


def _parse_value(key, raw):
    kind = REGISTRY[key][0]
    raw = raw.strip()
    try:
        if kind == "f":
            return float(raw)
        if kind == "i":
            return int(raw)
        if kind == "b":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key} = {raw!r}") from exc


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def load_config(path: str | None, overrides: list[str]) -> dict:
    cfg = {k: v for k, (_, v) in REGISTRY.items()}
    pairs = []
    if path:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = stripped.split("=", 1)
            pairs.append((key.strip(), raw))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, raw = item.split("=", 1)
        pairs.append((key.strip(), raw))
    for key, raw in pairs:
        if key not in REGISTRY:
            raise ConfigError(f"unknown configuration key {key!r}")
        cfg[key] = _parse_value(key, raw)
    if cfg["mode"] not in MODES:
        raise ConfigError(f"unknown mode {cfg['mode']!r}")
    return cfg


def write_resolved(cfg: dict, outdir: Path):
    lines = [f"{k} = {_format_value(cfg[k])}" for k in sorted(cfg)]
    (outdir / "resolved.config").write_text("\n".join(lines) + "\n")


def _params_from(cfg) -> FrameworkParams:
    sigma = cfg["params.sigma"]
    common = dict(sigma=sigma, alpha=cfg["params.alpha"], h_a=cfg["params.h_a"],
                  eps_a=cfg["params.eps_a"], eps_c=cfg["params.eps_c"],
                  M=cfg["params.M"], N=cfg["params.N"], N0=cfg["params.N0"],
                  z_star=cfg["params.z_star"], delta=cfg["params.delta"])
    if sigma == 0:
        return FrameworkParams(gamma=cfg["params.gamma"], h_c=cfg["params.h_c"], **common)
    return FrameworkParams(k=cfg["params.k"], eta0=cfg["params.eta0"],
                           l=cfg["params.l"], **common)


def _spec_from(cfg) -> initial_data.InitialDataSpec:
    lam0 = cfg["init.lambda0"]
    nu0 = cfg["init.nu0"]
    if math.isnan(nu0):
        nu0 = 1.0 / (2.0 * math.log(1.0 / lam0))
    return initial_data.InitialDataSpec(
        lambda0=lam0, nu0=nu0, sigma=cfg["init.sigma"], kappa=cfg["init.kappa"],
        perturbation_family=cfg["init.family"], seed=cfg["init.seed"],
    )


def _solver_from(cfg) -> SolverConfig:
    cap = cfg["solver.blowup_cap"]
    probes = tuple(float(x) for x in cfg["solver.probe_z"].split(",") if x.strip())
    return SolverConfig(
        n=cfg["solver.n"], dt_safety=cfg["solver.dt_safety"],
        blowup_cap=None if math.isnan(cap) else cap,
        dt_floor=cfg["solver.dt_floor"], upwind=cfg["solver.upwind"],
        t_max=cfg["solver.t_max"], max_steps=cfg["solver.max_steps"],
        store_stride=cfg["solver.store_stride"], probe_Z=probes,
    )


def _emit(msg, quiet):
    if not quiet:
        print(msg)


# ---------------------------------------------------------------------------
# mode implementations
# ---------------------------------------------------------------------------

def _mode_alpha0(cfg, outdir, quiet):
    print(f"{alpha0():.17g}")
    return 0


def _mode_validate(cfg, outdir, quiet):
    verdict = validate_params(_params_from(cfg))
    payload = json.dumps(verdict.to_json(), indent=2, sort_keys=True)
    if outdir is not None:
        (outdir / "verdict.json").write_text(payload + "\n")
    else:
        print(payload)
    _emit(f"validate-params: {'pass' if verdict.passed else 'FAIL'} "
          f"({len(verdict.failed_lines())} failed lines)", quiet)
    return 0 if verdict.passed else 2


def _mode_simulate(cfg, outdir, quiet):
    spec = _spec_from(cfg)
    state = initial_data.build_profile_data(spec, cfg["init.n"])
    traj = run_to_blowup(state, _solver_from(cfg))
    traj.to_csv(outdir / "trajectory.csv")
    _emit(f"simulate: {len(traj.t)} samples, stop reason {traj.reason}", quiet)
    return 0


def _mode_selfsim(cfg, outdir, quiet):
    spec = _spec_from(cfg)
    state = initial_data.build_profile_data(spec, cfg["init.n"])
    s0 = spec.s0
    ss = selfsim.decompose(state.a, state.c, spec.sigma, s0)
    s_end = cfg["selfsim.s_end"]
    if math.isnan(s_end):
        s_end = s0 + 5.0
    params = _params_from(cfg)
    run_cfg = selfsim.SelfsimConfig(s_end=s_end, ds_safety=cfg["selfsim.ds_safety"],
                                    stride=cfg["selfsim.stride"], params=params)
    traj = selfsim.run_selfsim(ss, run_cfg)
    traj.to_csv(outdir / "trajectory.csv")
    _emit(f"selfsim: s in [{traj.s[0]:g}, {traj.s[-1]:g}], {len(traj.s)} samples", quiet)
    return 0


def _mode_energies(cfg, outdir, quiet):
    spec = _spec_from(cfg)
    state = initial_data.build_profile_data(spec, cfg["init.n"])
    ss = selfsim.decompose(state.a, state.c, spec.sigma, spec.s0)
    params = _params_from(cfg)
    rep = energy_report(ss, params)
    verdict = check_initial_closeness(ss, params)
    with open(outdir / "energies.csv", "w") as fh:
        fh.write("s,Ia2,Ea2,Ic2,Ec2,T_k_eta\n")
        fh.write(",".join(f"{x:.17g}" for x in
                          (rep.s, rep.Ia2, rep.Ea2, rep.Ic2, rep.Ec2, rep.T_k_eta)) + "\n")
    (outdir / "verdict.json").write_text(
        json.dumps(verdict.to_json(), indent=2, sort_keys=True) + "\n")
    _emit(f"energies: closeness {'pass' if verdict.passed else 'FAIL'}", quiet)
    return 0


def _load_trajectory_csv(path: Path) -> Trajectory:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    n = data.shape[0]
    return Trajectory(
        t=data[:, 0], max_a=data[:, 1], max_c=data[:, 2], mean_a=data[:, 3],
        dt=data[:, 4], a0=data[:, 1], aZ0=np.full(n, math.nan),
        drift_rate=np.zeros(n), probe_Z=(), probes=np.empty((n, 0)),
        reason="blowup",
    )


def _mode_fit(cfg, outdir, quiet):
    src = cfg["fit.trajectory"] or str(outdir / "trajectory.csv")
    traj = _load_trajectory_csv(Path(src))
    T_hat = estimate_T(traj, cfg["fit.tail_fraction"])
    fit = fit_rates(traj, T_hat, cfg["fit.tail_fraction"])
    (outdir / "fit.json").write_text(json.dumps(fit.to_json(), indent=2, sort_keys=True) + "\n")
    with open(outdir / "rates.csv", "w") as fh:
        fh.write("Z,exponent\n")
        for z, e in fit.pointwise:
            fh.write(f"{z:.17g},{e:.17g}\n")
    _emit(f"fit: T_hat={T_hat:.6g}, rate_a={fit.rate_a:.4f}", quiet)
    return 0


def _mode_redecompose(cfg, outdir, quiet):
    lam_bar, nu_bar = initial_data.redecompose(
        cfg["redecompose.lam"], cfg["redecompose.nu"], cfg["redecompose.atil0"])
    payload = json.dumps({"lam_bar": lam_bar, "nu_bar": nu_bar}, sort_keys=True)
    print(payload)
    if outdir is not None:
        (outdir / "redecompose.json").write_text(payload + "\n")
    return 0


def _mode_sweep(cfg, outdir, quiet):
    key = cfg["sweep.param"]
    if key not in REGISTRY:
        raise ConfigError(f"sweep.param {key!r} is not a known key")
    values = [v for v in cfg["sweep.values"].split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep.values is empty")
    sub_mode = cfg["sweep.mode"]
    if sub_mode not in MODES or sub_mode == "sweep":
        raise ConfigError(f"sweep.mode {sub_mode!r} invalid")

    def one(idx_value):
        idx, raw = idx_value
        sub = dict(cfg)
        sub[key] = _parse_value(key, raw)
        sub["mode"] = sub_mode
        subdir = outdir / f"sweep_{idx:03d}"
        subdir.mkdir(parents=True, exist_ok=True)
        write_resolved(sub, subdir)
        return _DISPATCH[sub_mode](sub, subdir, True)

    with ThreadPoolExecutor(max_workers=min(4, len(values))) as pool:
        codes = list(pool.map(one, enumerate(values)))
    _emit(f"sweep: {len(values)} runs over {key}", quiet)
    return max(codes)


_DISPATCH = {
    "alpha0": _mode_alpha0,
    "validate-params": _mode_validate,
    "simulate": _mode_simulate,
    "selfsim": _mode_selfsim,
    "energies": _mode_energies,
    "fit": _mode_fit,
    "redecompose": _mode_redecompose,
    "sweep": _mode_sweep,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="petrace", description=__doc__)
    ap.add_argument("mode", nargs="?", default=None,
                    help=f"one of {', '.join(MODES)} (overrides the config key)")
    ap.add_argument("--config", default=None, help="flat key=value config file")
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="key=value", help="override one config key (repeatable)")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config, args.overrides)
        if args.mode is not None:
            if args.mode not in MODES:
                raise ConfigError(f"unknown mode {args.mode!r}")
            cfg["mode"] = args.mode
        mode = cfg["mode"]
        outdir = None
        if args.out is not None:
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
        if mode in _FILE_MODES and outdir is None:
            raise ConfigError(f"mode {mode!r} writes files; --out is required")
        if outdir is not None:
            write_resolved(cfg, outdir)
        return _DISPATCH[mode](cfg, outdir, args.quiet)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TimeStepUnderflow, FitDegenerate) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (PetraceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
