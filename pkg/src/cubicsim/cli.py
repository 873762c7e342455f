"""Command-line front end.

Subcommands: simulate, reconstruct, scan, wigner, phase-sweep, photon-stats.
Each command resolves its configuration as defaults < JSON config file <
command-line flags, writes delimited data plus a manifest recording the fully
resolved configuration (so any output can be regenerated byte-identically),
and renders a matplotlib figure next to the data unless --no-plot is given.

Exit codes: 0 success, 2 configuration error, 3 numerical or convergence
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    cubic_unitary_label,
    islands,
    negativity,
    phase_fit,
    photon_statistics,
    photon_stats_to_csv,
    wigner,
    wigner_to_csv,
)
from .fock import DensityMatrix, StateVector, TruncationError
from .gaussian import SearchConfig, best_gaussian_fidelity, orbit_fidelity, unwind
from .measurement import (
    DEFAULT_ACCEPTANCE_RADIUS_SQ,
    SampleBatch,
    SamplingError,
    expected_acceptance,
    postselect,
    sample_heterodyne,
)
from .states import (
    coherent,
    cubic_phase_state,
    fock,
    perturbative_cubic,
    photon_added_coherent,
    vacuum,
)
from .tomography import (
    MaxLikOptions,
    maxlik_reconstruct,
    read_density_json,
    write_density_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number from {value!r}") from exc
    raise ConfigError(f"cannot parse complex number from {value!r}")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {exc.lineno} col {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return cfg


def _resolve(defaults: dict, cfg: dict, overrides: dict) -> dict:
    out = dict(defaults)
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    out.update(cfg)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _write_manifest(out_dir: Path, command: str, config: dict,
                    input_hashes: dict, outputs: list[str], extras: dict) -> Path:
    manifest = {
        "tool": "cubicsim",
        "version": __version__,
        "command": command,
        "config": _jsonable(config),
        "input_hashes": input_hashes,
        "outputs": sorted(outputs),
    }
    manifest.update(_jsonable(extras))
    path = out_dir / f"{command.replace('-', '_')}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _state_from_spec(spec: dict, dim: int):
    """Build a StateVector or DensityMatrix from a config state description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("state spec must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "vacuum":
            return vacuum(dim)
        if kind == "fock":
            return fock(int(spec["n"]), dim)
        if kind == "coherent":
            return coherent(_parse_complex(spec["alpha"]), dim)
        if kind == "pac":
            return photon_added_coherent(_parse_complex(spec["alpha"]),
                                         int(spec.get("k", 3)), dim)
        if kind == "cubic":
            return cubic_phase_state(float(spec["gamma"]),
                                     float(spec.get("theta", 0.0)), dim).state
        if kind == "perturbative":
            return perturbative_cubic(float(spec["gamma"]), dim)
        if kind == "density":
            return read_density_json(spec["path"])
    except KeyError as exc:
        raise ConfigError(f"state spec {kind!r} is missing field {exc}") from exc
    raise ConfigError(f"unknown state kind {spec['kind']!r}")


def _search_from(config_field) -> SearchConfig:
    if config_field is None:
        return SearchConfig()
    if not isinstance(config_field, dict):
        raise ConfigError("'search' must be an object of SearchConfig fields")
    try:
        return SearchConfig.from_dict(config_field)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad search config: {exc}") from exc


def _as_density(state_or_rho) -> DensityMatrix:
    if isinstance(state_or_rho, StateVector):
        return DensityMatrix.from_state(state_or_rho)
    return state_or_rho


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    defaults = {"alpha": None, "k": 3, "n": 100_000, "seed": 1,
                "postselect_seed": None, "dim": 64,
                "radius_sq": DEFAULT_ACCEPTANCE_RADIUS_SQ}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"alpha": args.alpha, "k": args.k, "n": args.n,
                    "seed": args.seed, "dim": args.dim})
    if cfg["alpha"] is None:
        raise ConfigError("simulate requires 'alpha'")
    alpha = _parse_complex(cfg["alpha"])
    if cfg["postselect_seed"] is None:
        cfg["postselect_seed"] = int(cfg["seed"]) + 1
    cfg["alpha"] = alpha

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = coherent(alpha, int(cfg["dim"]))
    batch = sample_heterodyne(state, int(cfg["n"]), int(cfg["seed"]))
    batch = postselect(batch, int(cfg["k"]), int(cfg["postselect_seed"]),
                       radius_sq=float(cfg["radius_sq"]))
    csv_path = out_dir / "samples.csv"
    batch.to_csv(csv_path)
    outputs = [csv_path.name]
    if not args.no_plot:
        from .plotting import plot_samples
        plot_samples(batch, out_dir / "simulate_samples.png")
        outputs.append("simulate_samples.png")
    extras = {
        "batch": batch.manifest(),
        "expected_acceptance": expected_acceptance(
            state, int(cfg["k"]), float(cfg["radius_sq"])),
    }
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    _write_manifest(out_dir, "simulate", cfg, hashes, outputs, extras)
    print(f"simulate: {batch.accepted.sum()} / {len(batch)} accepted "
          f"(rate {batch.acceptance_rate:.3e}) -> {csv_path}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    defaults = {"dim": 40, "tol": 1e-9, "max_iters": 2000, "bin_width": 0.1}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"dim": args.dim, "tol": args.tol,
                    "max_iters": args.max_iters, "bin_width": args.bin_width})
    samples_path = Path(args.samples)
    if not samples_path.exists():
        raise ConfigError(f"samples file not found: {samples_path}")
    batch = SampleBatch.from_csv(samples_path)
    if not batch.accepted.any():
        raise ConfigError("samples file contains no accepted rows")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    opts = MaxLikOptions(tol=float(cfg["tol"]), max_iters=int(cfg["max_iters"]),
                         bin_width=float(cfg["bin_width"]))
    result = maxlik_reconstruct(batch, dim=int(cfg["dim"]), opts=opts)
    density_path = out_dir / "density.json"
    write_density_json(result.rho, density_path)
    outputs = [density_path.name]
    if not args.no_plot:
        from .plotting import plot_populations
        plot_populations(np.diag(result.rho.mat).real, out_dir / "reconstruct_populations.png")
        outputs.append("reconstruct_populations.png")
    extras = {
        "iterations": result.iterations,
        "loglikelihood": result.loglikelihood,
        "converged": result.converged,
        "n_accepted": int(batch.accepted.sum()),
    }
    hashes = {str(samples_path): _sha256(samples_path)}
    if args.config:
        hashes[args.config] = _sha256(Path(args.config))
    _write_manifest(out_dir, "reconstruct", cfg, hashes, outputs, extras)
    status = "converged" if result.converged else "NOT converged"
    print(f"reconstruct: {result.iterations} iterations, {status} -> {density_path}")
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def _alphas_from_config(cfg: dict) -> list[complex]:
    if cfg.get("alphas"):
        return [_parse_complex(a) for a in cfg["alphas"]]
    grid = cfg.get("alpha_grid")
    if grid:
        try:
            res, ims = grid["re"], grid["im"]
            re_ax = np.arange(res[0], res[1] + 1e-12, res[2])
            im_ax = np.arange(ims[0], ims[1] + 1e-12, ims[2])
        except (KeyError, IndexError, TypeError) as exc:
            raise ConfigError("alpha_grid needs re: [start, stop, step] and "
                              "im: [start, stop, step]") from exc
        return [complex(r, i) for r in re_ax for i in im_ax]
    raise ConfigError("scan requires 'alphas' or 'alpha_grid'")


def cmd_scan(args) -> int:
    defaults = {"gamma": None, "k": 3, "dim": 64, "mode": "ideal",
                "alphas": None, "alpha_grid": None, "search": None,
                "n": 200_000, "seed": 1, "recon_dim": 40,
                "radius_sq": DEFAULT_ACCEPTANCE_RADIUS_SQ}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"gamma": args.gamma, "dim": args.dim, "seed": args.seed})
    if cfg["gamma"] is None:
        raise ConfigError("scan requires 'gamma'")
    if cfg["mode"] not in ("ideal", "full"):
        raise ConfigError("scan mode must be 'ideal' or 'full'")
    alphas = _alphas_from_config(cfg)
    search = _search_from(cfg["search"])
    gamma, dim, k = float(cfg["gamma"]), int(cfg["dim"]), int(cfg["k"])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, alpha in enumerate(alphas):
        if cfg["mode"] == "ideal":
            rho = _as_density(photon_added_coherent(alpha, k, dim))
        else:
            state = coherent(alpha, dim)
            batch = sample_heterodyne(state, int(cfg["n"]), int(cfg["seed"]) + 2 * i)
            batch = postselect(batch, k, int(cfg["seed"]) + 2 * i + 1,
                               radius_sq=float(cfg["radius_sq"]))
            result = maxlik_reconstruct(batch, dim=int(cfg["recon_dim"]))
            rho = result.rho
        fit = orbit_fidelity(rho, gamma, 0.0, search)
        rows.append((alpha.real, alpha.imag, fit.fidelity))
    baseline = best_gaussian_fidelity(gamma, 0.0,
                                      dim if cfg["mode"] == "ideal"
                                      else int(cfg["recon_dim"]), search)

    csv_path = out_dir / "scan.csv"
    np.savetxt(csv_path, np.asarray(rows), fmt="%.17g", delimiter=",",
               header="re_alpha,im_alpha,fidelity", comments="")
    outputs = [csv_path.name]
    if not args.no_plot:
        from .plotting import plot_scan
        arr = np.asarray(rows)
        plot_scan(arr[:, 0], arr[:, 1], arr[:, 2], baseline,
                  out_dir / "scan_fidelity.png")
        outputs.append("scan_fidelity.png")
    extras = {"gaussian_baseline": baseline,
              "search": search.to_dict(),
              "best": max(r[2] for r in rows)}
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    _write_manifest(out_dir, "scan", cfg, hashes, outputs, extras)
    print(f"scan: {len(rows)} points, best fidelity {extras['best']:.4f}, "
          f"gaussian baseline {baseline:.4f} -> {csv_path}")
    return EXIT_OK


def cmd_wigner(args) -> int:
    defaults = {"state": None, "dim": 64, "bound": 6.0, "step": 0.06}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"dim": args.dim, "bound": args.bound, "step": args.step,
                    "state": json.loads(args.state) if args.state else None})
    if cfg["state"] is None:
        raise ConfigError("wigner requires a 'state' spec")
    state = _state_from_spec(cfg["state"], int(cfg["dim"]))
    axis = np.arange(-float(cfg["bound"]), float(cfg["bound"]) + 1e-12,
                     float(cfg["step"]))
    grid = wigner(state, axis, axis)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "wigner.csv"
    wigner_to_csv(grid, csv_path)
    outputs = [csv_path.name]
    if not args.no_plot:
        from .plotting import plot_wigner
        plot_wigner(grid, out_dir / "wigner.png")
        outputs.append("wigner.png")
    neg = negativity(grid)
    extras = {"grid_mass": grid.total_mass(),
              "min_value": neg.min_value,
              "negative_volume": neg.negative_volume}
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    if isinstance(cfg["state"], dict) and cfg["state"].get("kind") == "density":
        p = Path(cfg["state"]["path"])
        hashes[str(p)] = _sha256(p)
    _write_manifest(out_dir, "wigner", cfg, hashes, outputs, extras)
    print(f"wigner: grid {grid.values.shape}, mass {extras['grid_mass']:.4f}, "
          f"min {neg.min_value:.4f} -> {csv_path}")
    return EXIT_OK


def cmd_phase_sweep(args) -> int:
    defaults = {"gamma": 0.4, "alpha_mag": 1.0, "k": 3, "dim": 64,
                "phases": [0.0, np.pi / 2, np.pi, 3 * np.pi / 2],
                "theta_step": np.pi / 8, "search": None}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"gamma": args.gamma, "dim": args.dim})
    search = _search_from(cfg["search"])
    gamma, dim, k = float(cfg["gamma"]), int(cfg["dim"]), int(cfg["k"])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, labels = [], []
    for phase in cfg["phases"]:
        alpha = float(cfg["alpha_mag"]) * np.exp(1j * float(phase))
        rho = _as_density(photon_added_coherent(alpha, k, dim))
        fit = phase_fit(rho, gamma, search, theta_step=float(cfg["theta_step"]))
        label = cubic_unitary_label(fit.theta, fit.sign)
        labels.append(label)
        rows.append((float(phase), fit.theta, fit.sign, fit.fidelity))
        print(f"phase-sweep: phase={float(phase):.4f} -> {label} "
              f"(theta={fit.theta:.4f}, sign={fit.sign:+d}, F={fit.fidelity:.4f})")

    csv_path = out_dir / "phase_sweep.csv"
    with csv_path.open("w") as fh:
        fh.write("phase,theta_best,sign,fidelity,label\n")
        for (phase, theta, sign, fid), label in zip(rows, labels):
            fh.write(f"{phase:.17g},{theta:.17g},{sign:d},{fid:.17g},{label}\n")
    outputs = [csv_path.name]
    if not args.no_plot:
        from .plotting import plot_phase_sweep
        arr = np.asarray([(r[0], r[3]) for r in rows])
        plot_phase_sweep(arr[:, 0], arr[:, 1], labels, out_dir / "phase_sweep.png")
        outputs.append("phase_sweep.png")
    extras = {"labels": labels, "search": search.to_dict()}
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    _write_manifest(out_dir, "phase-sweep", cfg, hashes, outputs, extras)
    return EXIT_OK


def cmd_photon_stats(args) -> int:
    defaults = {"state": None, "dim": 64, "n_max": 36, "unwind": False,
                "gamma": 0.4, "island_threshold": None, "search": None}
    cfg = _resolve(defaults, _load_config(args.config),
                   {"state": json.loads(args.state) if args.state else None,
                    "dim": args.dim, "n_max": args.n_max,
                    "unwind": True if args.unwind else None})
    if cfg["state"] is None:
        raise ConfigError("photon-stats requires a 'state' spec")
    state = _state_from_spec(cfg["state"], int(cfg["dim"]))
    rho = _as_density(state)
    extras: dict = {}
    if cfg["unwind"]:
        search = _search_from(cfg["search"])
        fit = orbit_fidelity(rho, float(cfg["gamma"]), 0.0, search)
        rho = unwind(rho, fit.params)
        extras["unwind_params"] = {
            "disp": fit.params.disp, "squeeze_r": fit.params.squeeze_r,
            "squeeze_phi": fit.params.squeeze_phi, "rot": fit.params.rot,
            "orbit_fidelity": fit.fidelity,
        }
    probs = photon_statistics(rho, int(cfg["n_max"]))
    thr = cfg["island_threshold"]
    isl = islands(probs, None if thr is None else float(thr) * probs.max())
    extras["islands"] = [list(i) for i in isl]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "photon_stats.csv"
    photon_stats_to_csv(probs, csv_path)
    outputs = [csv_path.name]
    if not args.no_plot:
        from .plotting import plot_photon_stats
        reference = None
        if cfg["unwind"]:
            ref_state = cubic_phase_state(float(cfg["gamma"]), 0.0,
                                          int(cfg["dim"])).state
            reference = photon_statistics(ref_state, int(cfg["n_max"]))
        plot_photon_stats(probs, isl, out_dir / "photon_stats.png", reference)
        outputs.append("photon_stats.png")
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    _write_manifest(out_dir, "photon-stats", cfg, hashes, outputs, extras)
    print(f"photon-stats: {len(isl)} islands {isl} -> {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--seed", type=int, help="RNG seed")
    sp.add_argument("--dim", type=int, help="Fock-space truncation")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--no-plot", action="store_true",
                    help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubicsim",
        description="Simulate, reconstruct and analyse photon-added coherent "
                    "states as cubic phase states")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="heterodyne sampling + postselection")
    _add_common(sp)
    sp.add_argument("--alpha", help="coherent amplitude, e.g. '-0.97j'")
    sp.add_argument("--k", type=int, help="photons to add")
    sp.add_argument("--n", type=int, help="raw sample count")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reconstruct", help="maximum-likelihood reconstruction")
    sp.add_argument("samples", help="samples CSV from 'simulate'")
    _add_common(sp)
    sp.add_argument("--tol", type=float, help="relative log-likelihood gain")
    sp.add_argument("--max-iters", type=int, dest="max_iters")
    sp.add_argument("--bin-width", type=float, dest="bin_width")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("scan", help="fidelity over coherent amplitudes")
    _add_common(sp)
    sp.add_argument("--gamma", type=float, help="cubic interaction strength")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("wigner", help="Wigner function on a grid")
    _add_common(sp)
    sp.add_argument("--state", help="state spec as inline JSON")
    sp.add_argument("--bound", type=float, help="grid half-width")
    sp.add_argument("--step", type=float, help="grid step")
    sp.set_defaults(func=cmd_wigner)

    sp = sub.add_parser("phase-sweep", help="cubic phase vs displacement phase")
    _add_common(sp)
    sp.add_argument("--gamma", type=float, help="cubic interaction strength")
    sp.set_defaults(func=cmd_phase_sweep)

    sp = sub.add_parser("photon-stats", help="photon-number distribution")
    _add_common(sp)
    sp.add_argument("--state", help="state spec as inline JSON")
    sp.add_argument("--n-max", type=int, dest="n_max")
    sp.add_argument("--unwind", action="store_true",
                    help="remove the orbit-optimal Gaussian first")
    sp.set_defaults(func=cmd_photon_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, SamplingError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
