"""Configuration-driven experiment runner.

Configs are flat ``key = value`` text files (see ``parse_config``); every
effective value is echoed into the run manifest, alongside sha256 digests
of all data outputs.  Reruns of the same config byte-reproduce every
digest-listed file regardless of worker count.

Verbs: run, sweep, plot, validate.  Exit codes: 0 success, 2 validation
failure, 3 numerical halt (singularity / boundary), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import blob, diagnostics, pointvortex
from ._parallel import resolve_workers
from .cutoff import SmoothedLog, build_cutoffs
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalHaltError,
    SingularityError,
)
from .geometry import UnitDisk

OUTPUT_ROOT_ENV = "VORTEXBLOB_OUTPUT_ROOT"
CSV_HEADER_VERSION = 1
MANIFEST_NAME = "manifest.json"

SCENARIOS = ("point_vortex", "single_blob", "k_blob", "sweep")
MODES = ("cutoff", "exact_green")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    domain: str = "unit_disk"
    z0: Optional[tuple[float, float]] = None
    vortices: Optional[tuple[tuple[float, float, float], ...]] = None
    T: float = 5.0
    dt: float = 1e-3
    epsilon: Optional[float] = None
    epsilons: Optional[tuple[float, ...]] = None
    n_target: int = 1000
    record_every: int = 100
    mode: str = "cutoff"
    output_dir: str = "out"
    seed: int = 0  # reserved for randomized diagnostics; echoed for reproducibility
    workers: int = 0  # 0 = auto


_SCALAR_KEYS = {
    "scenario": str,
    "domain": str,
    "T": float,
    "dt": float,
    "epsilon": float,
    "n_target": int,
    "record_every": int,
    "mode": str,
    "output_dir": str,
    "seed": int,
    "workers": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key = value format.  Unknown keys are errors."""
    values: dict = {}
    vortices: dict[int, tuple[float, float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value': {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _SCALAR_KEYS:
            if key in values:
                raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = _SCALAR_KEYS[key](val)
            except ValueError as e:
                raise ConfigurationError(f"line {lineno}: bad value for {key}: {e}")
        elif key == "z0":
            values["z0"] = _parse_floats(val, 2, lineno)
        elif key == "epsilons":
            parts = [p for p in val.split(",") if p.strip()]
            values["epsilons"] = tuple(float(p) for p in parts)
        elif key.startswith("vortex_"):
            try:
                idx = int(key[len("vortex_"):])
            except ValueError:
                raise ConfigurationError(f"line {lineno}: bad vortex key {key!r}")
            if idx in vortices:
                raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
            vortices[idx] = _parse_floats(val, 3, lineno)
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
    if vortices:
        idxs = sorted(vortices)
        if idxs != list(range(1, len(idxs) + 1)):
            raise ConfigurationError(
                f"vortex keys must be vortex_1..vortex_k, got {idxs}"
            )
        values["vortices"] = tuple(vortices[i] for i in idxs)
    if "scenario" not in values:
        raise ConfigurationError("config is missing the 'scenario' key")
    return ExperimentConfig(**values)


def _parse_floats(val: str, n: int, lineno: int) -> tuple:
    parts = [p for p in val.split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigurationError(f"line {lineno}: expected {n} comma-separated numbers")
    return tuple(float(p) for p in parts)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg for valid configs."""
    lines = [f"scenario = {cfg.scenario}", f"domain = {cfg.domain}"]
    if cfg.z0 is not None:
        lines.append(f"z0 = {cfg.z0[0]!r}, {cfg.z0[1]!r}")
    if cfg.vortices is not None:
        for i, (x, y, a) in enumerate(cfg.vortices, 1):
            lines.append(f"vortex_{i} = {x!r}, {y!r}, {a!r}")
    lines.append(f"T = {cfg.T!r}")
    lines.append(f"dt = {cfg.dt!r}")
    if cfg.epsilon is not None:
        lines.append(f"epsilon = {cfg.epsilon!r}")
    if cfg.epsilons is not None:
        lines.append("epsilons = " + ", ".join(repr(e) for e in cfg.epsilons))
    lines.append(f"n_target = {cfg.n_target}")
    lines.append(f"record_every = {cfg.record_every}")
    lines.append(f"mode = {cfg.mode}")
    lines.append(f"output_dir = {cfg.output_dir}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"workers = {cfg.workers}")
    return "\n".join(lines) + "\n"


def config_echo(cfg: ExperimentConfig) -> dict:
    """All effective values, for the manifest."""
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        out[f.name] = v
    return out


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigurationError(f"scenario must be one of {SCENARIOS}, got {cfg.scenario!r}")
    if cfg.domain != "unit_disk":
        raise ConfigurationError(f"only domain = unit_disk is supported, got {cfg.domain!r}")
    if not (cfg.T > 0.0 and cfg.dt > 0.0):
        raise ConfigurationError(f"T and dt must be positive (T={cfg.T}, dt={cfg.dt})")
    if cfg.mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    if cfg.n_target < 16:
        raise ConfigurationError(f"n_target must be >= 16, got {cfg.n_target}")
    if cfg.record_every < 1:
        raise ConfigurationError(f"record_every must be >= 1, got {cfg.record_every}")
    if cfg.workers < 0:
        raise ConfigurationError(f"workers must be >= 0 (0 = auto), got {cfg.workers}")
    if cfg.seed < 0:
        raise ConfigurationError(f"seed must be >= 0, got {cfg.seed}")

    d = UnitDisk()
    if cfg.scenario == "point_vortex":
        if not cfg.vortices:
            raise ConfigurationError("point_vortex needs vortex_1 (.. vortex_k) entries")
    elif cfg.scenario in ("single_blob", "sweep"):
        if cfg.z0 is None:
            raise ConfigurationError(f"{cfg.scenario} needs z0")
        if not d.contains(np.asarray(cfg.z0)):
            raise ConfigurationError(f"z0 = {cfg.z0} is not interior to the unit disk")
        if cfg.scenario == "single_blob":
            if cfg.epsilon is None:
                raise ConfigurationError("single_blob needs epsilon")
            _check_blob_fits(d, cfg.z0, cfg.epsilon)
        else:
            if not cfg.epsilons:
                raise ConfigurationError("sweep needs an epsilons list")
            eps = cfg.epsilons
            if len(eps) >= 2 and not all(b < a for a, b in zip(eps, eps[1:])):
                raise ConfigurationError(f"epsilons must be strictly decreasing, got {eps}")
            for e in eps:
                _check_blob_fits(d, cfg.z0, e)
    elif cfg.scenario == "k_blob":
        if not cfg.vortices:
            raise ConfigurationError("k_blob needs vortex_1 (.. vortex_k) entries")
        if cfg.epsilon is None:
            raise ConfigurationError("k_blob needs epsilon")
        if cfg.mode != "cutoff":
            raise ConfigurationError("k_blob supports only mode = cutoff")
        for x, y, _ in cfg.vortices:
            _check_blob_fits(d, (x, y), cfg.epsilon)
    if cfg.vortices:
        for x, y, a in cfg.vortices:
            if not d.contains(np.asarray([x, y])):
                raise ConfigurationError(f"vortex at ({x}, {y}) is not interior")
            if a == 0.0:
                raise ConfigurationError("vortex strengths must be nonzero")
        pts = [(x, y) for x, y, _ in cfg.vortices]
        if len(set(pts)) != len(pts):
            raise ConfigurationError("vortex positions must be pairwise distinct")


def _check_blob_fits(d: UnitDisk, z0, eps: float) -> None:
    if not eps > 0.0:
        raise ConfigurationError(f"epsilon must be positive, got {eps}")
    if d.dist_to_boundary(np.asarray(z0)) <= eps:
        raise ConfigurationError(
            f"blob of radius {eps} at {z0} overlaps the domain boundary"
        )


class PipelineError(Exception):
    """Wraps a module error with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {cause}")


def resolve_output_dir(cfg: ExperimentConfig) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    p = Path(cfg.output_dir)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_diagnostics_csv(path: Path, diags) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("t,mx,my,I,R_supp,dist_ode,clearance\n")
        for d in diags:
            f.write(
                ",".join(
                    repr(float(v))
                    for v in (
                        d.t, d.center[0], d.center[1], d.inertia,
                        d.support_radius, d.dist_to_ode, d.boundary_clearance,
                    )
                )
                + "\n"
            )


def _write_particles_csv(path: Path, traj: blob.BlobTrajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("snapshot,t,blob_id,x,y,weight\n")
        for snap, (t, cloud) in enumerate(zip(traj.times, traj.clouds)):
            ts = repr(float(t))
            for j in range(cloud.n):
                f.write(
                    f"{snap},{ts},{int(cloud.blob_id[j])},"
                    f"{float(cloud.positions[j, 0])!r},{float(cloud.positions[j, 1])!r},"
                    f"{float(cloud.weights[j])!r}\n"
                )


def _write_events_csv(path: Path, traj: blob.BlobTrajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("t,kind,count\n")
        for ev in traj.events:
            f.write(f"{float(ev.time)!r},{ev.kind},{ev.count}\n")


@dataclass
class RunManifest:
    config: dict
    status: str = "complete"
    failed_stage: Optional[str] = None
    effective_workers: int = 1
    rho0: Optional[float] = None
    n_particles: Optional[int] = None
    l1_measured: Optional[float] = None
    l2_measured: Optional[float] = None
    event_counts: dict = field(default_factory=dict)
    members: list = field(default_factory=list)
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)
    csv_header_version: int = CSV_HEADER_VERSION
    schema_version: int = 1

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "csv_header_version": self.csv_header_version,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "config": self.config,
            "effective_workers": self.effective_workers,
            "rho0": self.rho0,
            "n_particles": self.n_particles,
            "l1_measured": self.l1_measured,
            "l2_measured": self.l2_measured,
            "event_counts": self.event_counts,
            "members": self.members,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        }

    def write(self, outdir: Path) -> Path:
        path = outdir / MANIFEST_NAME
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def _ode_for(cfg: ExperimentConfig, d: UnitDisk) -> pointvortex.OdeSolution:
    if cfg.scenario in ("single_blob", "sweep"):
        vc = pointvortex.VortexConfig(np.asarray([cfg.z0]), np.array([1.0]))
    else:
        pos = np.asarray([[x, y] for x, y, _ in cfg.vortices])
        st = np.asarray([a for _, _, a in cfg.vortices])
        vc = pointvortex.VortexConfig(pos, st)
    return pointvortex.integrate(d, vc, cfg.T, cfg.dt)


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute the configured pipeline and write all outputs + manifest.

    Pipeline order: integrate the point-vortex system, choose the safety
    radius from its trajectory, build the cutoffs, evolve the particle
    cloud, then measure.  On error a partial manifest naming the failed
    stage is still written (when the output directory exists), and the
    error is re-raised wrapped in PipelineError.
    """
    t_start = time.perf_counter()
    manifest = RunManifest(config=config_echo(cfg))
    stage = "validate"
    outdir: Optional[Path] = None
    try:
        validate_config(cfg)
        workers = resolve_workers(cfg.workers if cfg.workers > 0 else None)
        manifest.effective_workers = workers
        stage = "prepare-output"
        outdir = resolve_output_dir(cfg)
        outdir.mkdir(parents=True, exist_ok=True)
        d = UnitDisk()

        stage = "ode"
        ode = _ode_for(cfg, d)

        written: list[Path] = []
        if cfg.scenario == "point_vortex":
            stage = "write"
            ode.to_csv(outdir / "ode.csv")
            written.append(outdir / "ode.csv")
        else:
            stage = "rho0"
            rho0 = pointvortex.select_rho0(ode, d)
            manifest.rho0 = rho0
            stage = "cutoffs"
            cutoffs = build_cutoffs(d, rho0)
            smoothed = SmoothedLog(rho0)

            if cfg.scenario == "sweep":
                for eps in cfg.epsilons:
                    member_dir = outdir / f"eps_{eps!r}"
                    stage = f"blob(eps={eps!r})"
                    member_dir.mkdir(parents=True, exist_ok=True)
                    summary, files = _run_blob_member(
                        cfg, d, ode, cutoffs, smoothed, eps, member_dir, workers
                    )
                    manifest.members.append(summary)
                    written.extend(files)
                stage = "diagnostics"
                sweep = diagnostics.SweepResult.from_measurements(
                    list(cfg.epsilons),
                    [m["sup_center_err"] for m in manifest.members],
                    [m["max_support_radius"] for m in manifest.members],
                )
                stage = "write"
                sweep_path = outdir / "sweep.json"
                with open(sweep_path, "w", encoding="utf-8", newline="\n") as f:
                    json.dump(
                        {
                            "epsilons": list(map(float, sweep.epsilons)),
                            "sup_center_err": list(map(float, sweep.sup_center_err)),
                            "max_support_radius": list(map(float, sweep.max_support_radius)),
                            "fitted_center_slope": sweep.fitted_center_slope,
                            "fitted_support_slope": sweep.fitted_support_slope,
                        },
                        f, indent=2, sort_keys=True,
                    )
                    f.write("\n")
                written.append(sweep_path)
            else:
                eps = cfg.epsilon
                stage = "blob"
                summary, files = _run_blob_member(
                    cfg, d, ode, cutoffs, smoothed, eps, outdir, workers
                )
                manifest.n_particles = summary["n_particles"]
                manifest.l1_measured = summary["l1"]
                manifest.l2_measured = summary["l2"]
                manifest.event_counts = summary["events"]
                written.extend(files)

        stage = "digest"
        manifest.outputs = [
            {"path": str(p.relative_to(outdir)), "sha256": _sha256(p)}
            for p in sorted(written)
        ]
        manifest.wall_time_s = time.perf_counter() - t_start
        manifest.write(outdir)
        return manifest
    except Exception as e:
        manifest.status = "partial"
        manifest.failed_stage = stage
        manifest.wall_time_s = time.perf_counter() - t_start
        if outdir is not None and outdir.is_dir():
            manifest.write(outdir)
        raise PipelineError(stage, e) from e


def _run_blob_member(cfg, d, ode, cutoffs, smoothed, eps, outdir, workers):
    """One blob simulation (one epsilon) plus its diagnostics and files."""
    if cfg.scenario == "k_blob":
        clouds = [
            blob.make_initial_cloud(d, np.array([x, y]), eps, a, cfg.n_target)
            for x, y, a in cfg.vortices
        ]
        cloud0 = blob.merge_clouds(clouds)
        mode = blob.FieldMode.K_BLOB
    else:
        cloud0 = blob.make_initial_cloud(d, np.asarray(cfg.z0), eps, 1.0, cfg.n_target)
        mode = (
            blob.FieldMode.EXACT_GREEN
            if cfg.mode == "exact_green"
            else blob.FieldMode.SINGLE_BLOB
        )
    fld = blob.RegularizedField(domain=d, cutoffs=cutoffs, smoothed=smoothed, mode=mode)
    traj = blob.run(fld, cloud0, cfg.T, cfg.dt, record_every=cfg.record_every, workers=workers)

    files = []
    ode.to_csv(outdir / "ode.csv")
    files.append(outdir / "ode.csv")
    n_blobs = cloud0.blob_count
    sup_err = 0.0
    max_rsupp = 0.0
    for b in range(n_blobs):
        diags = diagnostics.snapshot_diagnostics(traj, d, ode=ode, blob=b, vortex=b)
        p = outdir / f"diagnostics_blob{b}.csv"
        _write_diagnostics_csv(p, diags)
        files.append(p)
        sup_err = max(sup_err, max(x.dist_to_ode for x in diags))
        max_rsupp = max(max_rsupp, max(x.support_radius for x in diags))
    _write_particles_csv(outdir / "particles.csv", traj)
    files.append(outdir / "particles.csv")
    _write_events_csv(outdir / "events.csv", traj)
    files.append(outdir / "events.csv")

    l1, l2 = diagnostics.measure_force_bounds(fld, traj, workers=workers)
    events = {"exit_domain": 0, "enter_inner_band": 0}
    for ev in traj.events:
        events[ev.kind] = events.get(ev.kind, 0) + ev.count
    summary = {
        "epsilon": eps,
        "dir": outdir.name,
        "n_particles": cloud0.n,
        "l1": l1,
        "l2": l2,
        "sup_center_err": sup_err,
        "max_support_radius": max_rsupp,
        "events": events,
    }
    return summary, files


def emit_plot_data(manifest_path) -> list:
    """Write gnuplot scripts and SVG figures next to a run's outputs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as f:
        man = json.load(f)
    outdir = manifest_path.parent
    missing = [
        str(outdir / o["path"]) for o in man["outputs"] if not (outdir / o["path"]).is_file()
    ]
    if missing:
        raise FileNotFoundError("missing run outputs: " + ", ".join(missing))

    scenario = man["config"]["scenario"]
    written = []
    if scenario == "sweep":
        with open(outdir / "sweep.json", "r", encoding="utf-8") as f:
            sweep = json.load(f)
        eps = np.asarray(sweep["epsilons"])
        ce = np.asarray(sweep["sup_center_err"])
        sr = np.asarray(sweep["max_support_radius"])
        if eps.size == 0:
            raise ConfigurationError("empty sweep: nothing to plot")
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(eps, ce, "o-", label=f"sup center err (slope {sweep['fitted_center_slope']:.2f})")
        ax.loglog(eps, sr, "s-", label=f"max support radius (slope {sweep['fitted_support_slope']:.2f})")
        ax.set_xlabel("epsilon")
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        p = outdir / "loglog.svg"
        fig.savefig(p)
        plt.close(fig)
        written.append(p)
        dat = outdir / "sweep.dat"
        with open(dat, "w", encoding="utf-8", newline="\n") as f:
            f.write("# epsilon sup_center_err max_support_radius\n")
            for row in zip(eps, ce, sr):
                f.write(" ".join(repr(float(v)) for v in row) + "\n")
        written.append(dat)
        gp = outdir / "plot_sweep.gnuplot"
        with open(gp, "w", encoding="utf-8", newline="\n") as f:
            f.write(
                "set logscale xy\nset xlabel 'epsilon'\nset key left top\n"
                "plot 'sweep.dat' u 1:2 w lp t 'sup center err', \\\n"
                "     'sweep.dat' u 1:3 w lp t 'max support radius'\n"
            )
        written.append(gp)
        return written

    ode = np.genfromtxt(outdir / "ode.csv", delimiter=",", names=True)
    if ode.shape == () or ode.size == 0:
        raise ConfigurationError("empty trajectory: nothing to plot")
    k = (len(ode.dtype.names) - 2) // 2

    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0, 2 * math.pi, 256)
    ax.plot(np.cos(th), np.sin(th), "k-", lw=1)
    for i in range(1, k + 1):
        ax.plot(ode[f"z{i}x"], ode[f"z{i}y"], "-", lw=1, label=f"vortex {i}")
    if scenario in ("single_blob", "k_blob"):
        parts = np.genfromtxt(outdir / "particles.csv", delimiter=",", names=True)
        if parts.shape == () or parts.size == 0:
            raise ConfigurationError("empty trajectory: nothing to plot")
        snaps = np.unique(parts["snapshot"]).astype(int)
        chosen = snaps[:: max(1, len(snaps) // 4)][:4]
        for s in chosen:
            sel = parts["snapshot"] == s
            ax.scatter(parts["x"][sel], parts["y"][sel], s=0.5, alpha=0.5)
        b = 0
        diag = np.genfromtxt(outdir / f"diagnostics_blob{b}.csv", delimiter=",", names=True)
        diag = np.atleast_1d(diag)
        for s in chosen:
            t = float(np.atleast_1d(parts["t"][parts["snapshot"] == s])[0])
            row = np.argmin(np.abs(diag["t"] - t))
            cx, cy, r = diag["mx"][row], diag["my"][row], diag["R_supp"][row]
            circle = plt.Circle((cx, cy), r, fill=False, color="red", lw=0.8)
            ax.add_patch(circle)
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    fig.tight_layout()
    p = outdir / "trajectory.svg"
    fig.savefig(p)
    plt.close(fig)
    written.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    if scenario == "point_vortex":
        ax.plot(ode["t"], ode["W"] - ode["W"][0], label="W(t) - W(0)")
        ax.set_xlabel("t")
        ax.legend()
    else:
        for b in range(k if scenario == "k_blob" else 1):
            diag = np.atleast_1d(
                np.genfromtxt(outdir / f"diagnostics_blob{b}.csv", delimiter=",", names=True)
            )
            ax.plot(diag["t"], diag["dist_ode"], label=f"blob {b}: |m - z|")
            ax.plot(diag["t"], diag["R_supp"], "--", label=f"blob {b}: support radius")
        ax.set_xlabel("t")
        ax.set_yscale("log")
        ax.legend(fontsize=7)
    fig.tight_layout()
    p = outdir / "timeseries.svg"
    fig.savefig(p)
    plt.close(fig)
    written.append(p)

    gp = outdir / "plot_timeseries.gnuplot"
    with open(gp, "w", encoding="utf-8", newline="\n") as f:
        f.write("set datafile separator ','\nset xlabel 't'\n")
        if scenario == "point_vortex":
            f.write(f"plot 'ode.csv' u 1:{2 * k + 2} every ::1 w l t 'W(t)'\n")
        else:
            f.write("set logscale y\nplot 'diagnostics_blob0.csv' u 1:6 every ::1 w l t '|m-z|'\n")
    written.append(gp)
    return written


def _exit_code_for(e: Exception) -> int:
    if isinstance(e, PipelineError):
        e = e.cause
    if isinstance(e, (NumericalHaltError, SingularityError)):
        return EXIT_NUMERICAL
    if isinstance(e, (ConfigurationError, DomainError, ValueError, NotImplementedError)):
        return EXIT_VALIDATION
    if isinstance(e, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def _load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vortexblob",
        description="Vortex-blob and point-vortex experiments in the unit disk",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_ in (
        ("run", "run the experiment described by a config file"),
        ("sweep", "run an epsilon-convergence sweep config"),
        ("validate", "validate a config file and echo effective values"),
    ):
        p = sub.add_parser(verb, help=help_)
        p.add_argument("config", help="path to a key = value config file")
    p = sub.add_parser("plot", help="emit plot scripts and figures for a finished run")
    p.add_argument("manifest", help="path to a run manifest (or its directory)")

    args = parser.parse_args(argv)
    try:
        if args.verb == "plot":
            written = emit_plot_data(args.manifest)
            for w in written:
                print(w)
            return EXIT_OK
        cfg = _load_config(args.config)
        if args.verb == "validate":
            validate_config(cfg)
            sys.stdout.write(serialize_config(cfg))
            print("ok")
            return EXIT_OK
        if args.verb == "sweep" and cfg.scenario != "sweep":
            raise ConfigurationError(
                f"'sweep' verb needs scenario = sweep, got {cfg.scenario!r}"
            )
        manifest = run_experiment(cfg)
        outdir = resolve_output_dir(cfg)
        print(f"complete: {outdir / MANIFEST_NAME} ({manifest.wall_time_s:.1f}s)")
        return EXIT_OK
    except Exception as e:
        stage = f" at stage {e.stage}" if isinstance(e, PipelineError) else ""
        cause = e.cause if isinstance(e, PipelineError) else e
        print(f"error{stage}: {cause}", file=sys.stderr)
        return _exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
