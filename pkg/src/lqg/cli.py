"""Command-line front end.

One executable, one required ``--command``, flat JSON config files whose
keys mirror the long flag names (flags override file values). Every run
emits its data files plus a ``manifest.json`` with the full config echo, a
version string, wall time, and SHA-256 hashes of the emitted files. Runs
are pure functions of the config: identical configs produce byte-identical
output files.

Exit codes: 0 success, 2 invalid usage/config, 3 resource exhaustion,
1 unexpected failure. On any failure the files written so far by the run
are removed and a machine-readable error JSON is printed to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, LqgError
from .exponents import estimate_a_eps, kpz, parameter_triple, xi_to_gamma
from .experiments import annulus_event, ball_raster, confluence_stat, thick_point_map
from .field import custom_field, mollify, sample_discrete_gff
from .formats import (json_dumps, write_dist_bin, write_dist_csv,
                      write_field_bin, write_field_csv, write_measure_csv,
                      write_pgm, write_vertices_csv)
from .gmc import measure, moment_estimate, refinement_diagnostic
from .lfpp import (AnnulusSpec, Connectivity, across_distance,
                   around_distance, build_metric, crossing_distance,
                   distance_map, geodesic, metric_ball)

COMMANDS = ("sample", "metric", "ball", "exponent", "kpz", "gmc",
            "confluence", "thickpoints", "annulus-event")

_INT_KEYS = ("n", "replicates", "seed", "threads", "targets", "target_step")
_FLOAT_KEYS = ("spacing", "xi", "gamma", "delta0", "radius", "s", "t", "q")
_LIST_KEYS = ("epsilons", "radii")
_STR_KEYS = ("command", "out", "format", "connectivity")
ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _LIST_KEYS + _STR_KEYS


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    spacing: float | None = None
    xi: float | None = None
    gamma: float | None = None
    epsilons: list[float] | None = None
    replicates: int | None = None
    seed: int | None = None
    threads: int = 1
    out: str = "."
    format: str = "csv"
    connectivity: str = "king8"
    delta0: float | None = None
    radius: float | None = None
    radii: list[float] | None = None
    targets: int | None = None
    target_step: int = 20
    s: float | None = None
    t: float | None = None
    q: float | None = None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


def _parse_float_list(value) -> list[float]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        return [float(p) for p in parts]
    return [float(v) for v in value]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lqg",
        description="Liouville-metric desk experiments: field sampling, "
                    "first-passage metrics, chaos measures, exponents.")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--config", help="flat JSON config file; flags override it")
    for key in _INT_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", type=int, dest=key)
    for key in _FLOAT_KEYS:
        p.add_argument(f"--{key}", type=float, dest=key)
    for key in _LIST_KEYS:
        p.add_argument(f"--{key}", type=str, dest=key,
                       help="comma-separated list")
    p.add_argument("--out", type=str)
    p.add_argument("--format", choices=("csv", "pgm", "json", "bin"))
    p.add_argument("--connectivity", choices=("king8", "axis4"))
    return p


def parse_config(argv=None) -> RunConfig:
    """Merge config file and flags into a validated RunConfig."""
    args = _build_parser().parse_args(argv)
    merged: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}: {exc.msg}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key in loaded:
            if key not in ALL_KEYS:
                raise ConfigError(f"unknown config key: {key!r}")
        merged.update(loaded)
    for key in ALL_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    if "command" not in merged or merged["command"] is None:
        raise ConfigError("missing --command")
    if merged["command"] not in COMMANDS:
        raise ConfigError(f"unknown command {merged['command']!r}")
    for key in _LIST_KEYS:
        if merged.get(key) is not None:
            merged[key] = _parse_float_list(merged[key])
    for key in _INT_KEYS:
        if merged.get(key) is not None:
            merged[key] = int(merged[key])
    for key in _FLOAT_KEYS:
        if merged.get(key) is not None:
            merged[key] = float(merged[key])
    if "threads" not in merged:
        merged["threads"] = int(os.environ.get("LQG_THREADS", "1"))
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _require(cfg: RunConfig, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) is None:
            raise ConfigError(
                f"command {cfg.command!r} requires --{key.replace('_', '-')}")


def _positive(cfg: RunConfig, *keys: str) -> None:
    for key in keys:
        val = getattr(cfg, key)
        if val is not None and not (val > 0):
            raise ConfigError(f"--{key.replace('_', '-')} must be > 0, got {val}")


def _validate(cfg: RunConfig) -> None:
    """Check every numeric parameter against the target module's
    preconditions before any computation starts."""
    cmd = cfg.command
    if cfg.n is not None and cfg.n < 1:
        raise ConfigError(f"--n must be >= 1, got {cfg.n}")
    _positive(cfg, "spacing", "xi", "gamma", "radius", "s", "t")
    if cfg.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {cfg.threads}")
    needs_one_epsilon = cmd in ("metric", "ball", "gmc", "confluence",
                                "annulus-event")
    if needs_one_epsilon:
        _require(cfg, "n", "seed", "epsilons")
        if len(cfg.epsilons) != 1:
            raise ConfigError(f"command {cmd!r} takes exactly one value in "
                              "--epsilons")
        if cfg.epsilons[0] <= 0:
            raise ConfigError("--epsilons entries must be > 0")
    if cmd in ("metric", "ball", "exponent", "confluence", "annulus-event"):
        _require(cfg, "xi")
    if cmd == "sample":
        _require(cfg, "n", "seed")
    elif cmd == "exponent":
        _require(cfg, "n", "seed", "epsilons", "replicates")
        if cfg.replicates < 1 or cfg.replicates % 2 == 0:
            raise ConfigError("--replicates must be odd and >= 1")
        if any(e <= 0 for e in cfg.epsilons):
            raise ConfigError("--epsilons entries must be > 0")
    elif cmd == "kpz":
        _require(cfg, "delta0")
        if cfg.gamma is None and cfg.xi is None:
            raise ConfigError("command 'kpz' requires --gamma or --xi")
        if not (0.0 <= cfg.delta0 <= 2.0):
            raise ConfigError(f"--delta0 must be in [0, 2], got {cfg.delta0}")
    elif cmd == "gmc":
        _require(cfg, "gamma")
        if not (0.0 < cfg.gamma <= 2.0):
            raise ConfigError(f"--gamma must be in (0, 2], got {cfg.gamma}")
    elif cmd == "confluence":
        if cfg.s is not None and cfg.t is not None and not (cfg.t < cfg.s):
            raise ConfigError("--t must be smaller than --s")
    elif cmd == "thickpoints":
        _require(cfg, "n", "seed", "q", "radii")
        if any(not (0.0 < r < 1.0) for r in cfg.radii):
            raise ConfigError("--radii entries must lie in (0, 1)")
    elif cmd == "annulus-event":
        _require(cfg, "radius")


def version_string() -> str:
    base = __version__
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}+g{out.stdout.strip()}"
    except Exception:
        pass
    return base


class _Emitter:
    """Tracks files written by one run so failures leave no partial output."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def write_json(self, name: str, obj) -> None:
        self.path(name).write_text(json_dumps(obj) + "\n")

    def cleanup(self) -> None:
        for p in self.written:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass

    def hashes(self) -> dict[str, str]:
        out = {}
        for p in self.written:
            out[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        return out


def _default_spacing(cfg: RunConfig) -> float:
    if cfg.spacing is not None:
        return cfg.spacing
    if cfg.n < 2:
        return 1.0
    return 1.0 / (cfg.n - 1)


def _connectivity(cfg: RunConfig) -> Connectivity:
    return Connectivity.KING8 if cfg.connectivity == "king8" else Connectivity.AXIS4


def _metric_from_config(cfg: RunConfig):
    field = sample_discrete_gff(cfg.n, _default_spacing(cfg), cfg.seed)
    mol = mollify(field, cfg.epsilons[0])
    return build_metric(mol, cfg.xi, _connectivity(cfg))


def _cmd_sample(cfg: RunConfig, em: _Emitter) -> None:
    field = sample_discrete_gff(cfg.n, _default_spacing(cfg), cfg.seed)
    if cfg.format == "bin":
        write_field_bin(field, em.path("field.bin"))
    else:
        write_field_csv(field, em.path("field.csv"))


def _cmd_metric(cfg: RunConfig, em: _Emitter) -> None:
    metric = _metric_from_config(cfg)
    crossing = crossing_distance(metric)
    asfield = custom_field(np.asarray(metric.field.values), metric.spacing)
    if cfg.format == "bin":
        write_field_bin(asfield, em.path("mollified.bin"))
    else:
        write_field_csv(asfield, em.path("mollified.csv"))
    em.write_json("metric.json", {
        "n": cfg.n, "xi": cfg.xi, "epsilon": cfg.epsilons[0],
        "connectivity": cfg.connectivity, "seed": cfg.seed,
        "crossing_distance": crossing,
    })


def _cmd_ball(cfg: RunConfig, em: _Emitter) -> None:
    metric = _metric_from_config(cfg)
    center = (cfg.n // 2, cfg.n // 2)
    dmap = distance_map(metric, [center])
    finite = np.asarray(dmap.dist)[np.isfinite(dmap.dist)]
    radius = cfg.radius if cfg.radius is not None else 0.3 * float(finite.max())
    ball = metric_ball(dmap, radius)
    step = max(1, cfg.target_step)
    targets = [(i, j) for i in range(0, cfg.n, step)
               for j in range(0, cfg.n, step) if ball[i, j]]
    img = ball_raster(dmap, radius, targets)
    write_pgm(img, em.path("ball.pgm"))
    if cfg.format == "bin":
        write_dist_bin(dmap.dist, metric.spacing, em.path("dist.bin"))
    else:
        write_dist_csv(dmap.dist, metric.spacing, em.path("dist.csv"))
    if targets:
        farthest = max(targets, key=lambda t: dmap.dist[t])
        path = geodesic(dmap, farthest)
        write_vertices_csv(path.vertices, metric.spacing,
                           em.path("geodesic.csv"))
    em.write_json("ball.json", {
        "n": cfg.n, "xi": cfg.xi, "epsilon": cfg.epsilons[0], "seed": cfg.seed,
        "center": list(center), "radius": radius, "num_targets": len(targets),
    })


def _cmd_exponent(cfg: RunConfig, em: _Emitter) -> None:
    fit = estimate_a_eps(cfg.xi, cfg.epsilons, cfg.n, cfg.replicates, cfg.seed,
                         _connectivity(cfg), threads=cfg.threads)
    # wall time is recorded in the manifest; the report itself must be
    # byte-identical across reruns of one config
    em.write_json("exponent.json", {
        "xi": fit.xi,
        "samples": [{"epsilon": e, "median": m, "replicates": c}
                    for e, m, c in fit.samples],
        "slope": fit.slope, "q_hat": fit.q_hat,
        "stderr": None if math.isnan(fit.stderr) else fit.stderr,
    })
    with open(em.path("exponent.csv"), "w") as fh:
        fh.write("epsilon,median,replicates\n")
        for e, m, c in fit.samples:
            fh.write(f"{e:.17g},{m:.17g},{c}\n")


def _cmd_kpz(cfg: RunConfig, em: _Emitter) -> None:
    if cfg.gamma is not None:
        triple = parameter_triple(cfg.gamma)
    elif cfg.q is not None:
        triple = None
    else:
        triple = xi_to_gamma(cfg.xi)
    xi = cfg.xi if triple is None else triple.xi
    qv = cfg.q if triple is None else triple.q
    result = kpz(cfg.delta0, xi, qv)
    value = result.value
    print("inf" if value == float("inf") else f"{value:.6f}")
    em.write_json("kpz.json", {
        "delta0": cfg.delta0, "xi": xi, "q": qv,
        "gamma": None if triple is None else triple.gamma,
        "value": None if value == float("inf") else value,
        "infinite": value == float("inf"),
        "boundary_case": result.boundary,
    })


def _cmd_gmc(cfg: RunConfig, em: _Emitter) -> None:
    spacing = _default_spacing(cfg)
    field = sample_discrete_gff(cfg.n, spacing, cfg.seed)
    grid = measure(mollify(field, cfg.epsilons[0]), cfg.gamma)
    write_measure_csv(grid.cell_mass, spacing, em.path("measure.csv"))
    moment_table = []
    if cfg.replicates is not None and cfg.replicates >= 2:
        for p in (1.0, 2.0):
            rep = moment_estimate(cfg.gamma, p, cfg.n, cfg.epsilons[0],
                                  cfg.replicates, cfg.seed)
            moment_table.append({"p": p, "estimate": rep.estimate,
                                 "stderr": rep.stderr,
                                 "heavy_tail": rep.heavy_tail})
    em.write_json("gmc.json", {
        "gamma": cfg.gamma, "epsilon": cfg.epsilons[0], "n": cfg.n,
        "seed": cfg.seed, "total": grid.total,
        "max_cell": float(np.asarray(grid.cell_mass).max()),
        "moment_table": moment_table,
        "refinement": refinement_diagnostic(field, cfg.gamma, cfg.epsilons[0]),
    })


def _cmd_confluence(cfg: RunConfig, em: _Emitter) -> None:
    metric = _metric_from_config(cfg)
    center = (cfg.n // 2, cfg.n // 2)
    dmap = distance_map(metric, [center])
    dmax = float(np.asarray(dmap.dist)[np.isfinite(dmap.dist)].max())
    s_frac = cfg.s if cfg.s is not None else 0.3
    t_frac = cfg.t if cfg.t is not None else s_frac / 4.0
    targets = cfg.targets if cfg.targets is not None else 50
    report = confluence_stat(metric, center, s_frac * dmax, t_frac * dmax,
                             targets, cfg.seed)
    em.write_json("confluence.json", {
        "n": cfg.n, "xi": cfg.xi, "epsilon": cfg.epsilons[0], "seed": cfg.seed,
        "center": list(report.center), "s": report.s, "t": report.t,
        "num_targets": report.num_targets,
        "shared_prefix_fraction": report.shared_prefix_fraction,
        "distinct_exit_edges": report.distinct_exit_edges,
        "geodesic_tree": report.geodesic_tree,
        "trivial_pairs": report.trivial_pairs,
    })
    spacing = metric.spacing
    with open(em.path("confluence_prefix.csv"), "w") as fh:
        fh.write("target_x,target_y,prefix_length\n")
        for (r, c), plen in zip(report.targets, report.prefix_lengths):
            fh.write(f"{c * spacing:.17g},{r * spacing:.17g},{plen}\n")


def _cmd_thickpoints(cfg: RunConfig, em: _Emitter) -> None:
    field = sample_discrete_gff(cfg.n, _default_spacing(cfg), cfg.seed)
    tmap = thick_point_map(field, cfg.q, cfg.radii)
    img = np.where(tmap.flags, 0, 255).astype(np.uint8)
    write_pgm(img, em.path("thickpoints.pgm"))
    em.write_json("thickpoints.json", {
        "n": cfg.n, "seed": cfg.seed, "q_threshold": cfg.q,
        "radii": list(tmap.radii),
        "flagged_fraction": tmap.flagged_fraction,
        "flag_count": int(np.asarray(tmap.flags).sum()),
    })


def _cmd_annulus_event(cfg: RunConfig, em: _Emitter) -> None:
    metric = _metric_from_config(cfg)
    center = (cfg.n // 2, cfg.n // 2)
    around = around_distance(metric, AnnulusSpec(center, 2 * cfg.radius,
                                                 3 * cfg.radius))
    across = across_distance(metric, AnnulusSpec(center, cfg.radius,
                                                 2 * cfg.radius))
    em.write_json("annulus_event.json", {
        "n": cfg.n, "xi": cfg.xi, "epsilon": cfg.epsilons[0], "seed": cfg.seed,
        "center": list(center), "r": cfg.radius,
        "around": around, "across": across, "event": bool(around < across),
    })


_DISPATCH = {
    "sample": _cmd_sample,
    "metric": _cmd_metric,
    "ball": _cmd_ball,
    "exponent": _cmd_exponent,
    "kpz": _cmd_kpz,
    "gmc": _cmd_gmc,
    "confluence": _cmd_confluence,
    "thickpoints": _cmd_thickpoints,
    "annulus-event": _cmd_annulus_event,
}


def run(cfg: RunConfig) -> None:
    """Validate, execute, and emit the manifest. Raises on failure after
    removing any files already written."""
    _validate(cfg)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    em = _Emitter(out_dir)
    t0 = time.perf_counter()
    try:
        _DISPATCH[cfg.command](cfg, em)
        hashes = em.hashes()
    except BaseException:
        em.cleanup()
        raise
    manifest = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "version": version_string(),
        "wall_time_s": time.perf_counter() - t0,
        "outputs": hashes,
    }
    (out_dir / "manifest.json").write_text(json_dumps(manifest) + "\n")


def _error_json(exc: BaseException, code: int) -> str:
    return json_dumps({"error": type(exc).__name__, "message": str(exc),
                       "exit_code": code})


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(_build_parser().format_usage(), end="", file=sys.stderr)
        print(_error_json(exc, 2), file=sys.stderr)
        return 2
    try:
        run(cfg)
    except MemoryError as exc:
        print(_error_json(exc, 3), file=sys.stderr)
        return 3
    except (ConfigError, LqgError) as exc:
        print(_error_json(exc, 2), file=sys.stderr)
        return 2
    except Exception as exc:
        print(_error_json(exc, 1), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
