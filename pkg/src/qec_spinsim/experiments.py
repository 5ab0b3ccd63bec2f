"""Sweep orchestration: rebuild parameters per grid point, sample, emit CSVs.

Each grid point is an independent work item keyed by (master seed, point
index), so results are reproducible regardless of how many workers run them.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import noise
from .circuits import BsPrepProtocol, QecStepProtocol, SurfacePrepProtocol
from .codes import bs17_spec, surface17_spec
from .noise import NoiseParams, physical_baseline
from .sampler import ShotPolicy, estimate_logical_error, write_subset_ledger

EXPERIMENTS = ("qec-step", "surface-prep", "bs-prep")
SWEEP_VARS = ("t_int", "t_readout", "t2_star")
CSV_HEADER = ("sweep_value,p_l_lower,p_l_upper,std_err,"
              "baseline_bare,baseline_echo,sampled_mass,wall_s")

# readout duration ratio between the LD and ST qubit kept fixed in sweeps
LD_ST_READOUT_RATIO = 10.0
ECHO_GAIN = 10.0  # T2,echo / T2* (210 us vs 21 us at the reference point)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    code: str
    encoding: str
    sweep_var: str
    grid: tuple[float, ...]
    overrides: tuple[tuple[str, float], ...] = ()
    readout: str = "table"   # table | fallback | const:<p> | <curve.csv>
    seed: int = 0
    shots: str = "default"
    threshold: float = 1e-6

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.code not in ("surface17", "bs17"):
            raise ConfigError(f"unknown code {self.code!r}")
        if self.encoding not in noise.ENCODINGS:
            raise ConfigError(f"unknown encoding {self.encoding!r}")
        if self.experiment == "surface-prep" and self.code != "surface17":
            raise ConfigError("surface-prep runs on the surface17 code")
        if self.experiment == "bs-prep" and self.code != "bs17":
            raise ConfigError("bs-prep runs on the bs17 code")
        if self.sweep_var not in SWEEP_VARS:
            raise ConfigError(f"unknown sweep variable {self.sweep_var!r}")
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if self.sweep_var != "t2_star" and not all(map(math.isfinite, self.grid)):
            raise ConfigError("only t2_star sweeps admit the inf sentinel")
        for key, _ in self.overrides:
            _check_override_key(key)
        ShotPolicy.parse(self.shots)

    def hash(self) -> str:
        text = repr((self.experiment, self.code, self.encoding, self.sweep_var,
                     self.grid, self.overrides, self.readout, self.seed,
                     self.shots, self.threshold))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _check_override_key(key: str):
    prefix, _, name = key.partition(".")
    if not name:
        prefix, name = "", key
    if prefix not in ("", "ld", "st") or name not in noise._PARAM_FIELDS:
        raise ConfigError(f"unknown override key {key!r}")


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    p_l_lower: float
    p_l_upper: float
    std_err: float
    baseline_bare: float
    baseline_echo: float
    sampled_mass: float
    wall_s: float


def readout_model_from_spec(spec: str, params: NoiseParams):
    if spec == "table":
        return noise.ConstantReadout(params.ancilla.p_readout)
    if spec == "fallback":
        return noise.FallbackReadout()
    if spec.startswith("const:"):
        return noise.ConstantReadout(float(spec.split(":", 1)[1]))
    return noise.load_readout_curve(spec)


def point_params(config: ExperimentConfig, value: float) -> NoiseParams:
    """Noise parameters at one sweep point."""
    params = noise.table1_defaults(config.encoding)
    for key, val in config.overrides:
        params = noise.apply_override(params, key, val)
    params = noise.with_readout_model(params, readout_model_from_spec(config.readout, params))
    var = config.sweep_var
    if var == "t_int":
        if config.encoding == "hybrid":
            params = noise.apply_override(params, "st.t_int", value)
        else:
            # the LD readout tracks the ST axis at the fixed duration ratio
            st_readout = noise.ST_DEFAULTS["t_ramp"] + value
            params = noise.apply_override(params, "ld.t_ramp", 0.0)
            params = noise.apply_override(
                params, "ld.t_int", LD_ST_READOUT_RATIO * st_readout)
    elif var == "t_readout":
        ratio = 1.0 if config.encoding == "hybrid" else LD_ST_READOUT_RATIO
        prefix = "st" if config.encoding == "hybrid" else "ld"
        params = noise.apply_override(params, f"{prefix}.t_ramp", 0.0)
        params = noise.apply_override(params, f"{prefix}.t_int", ratio * value)
    elif var == "t2_star":
        if value <= 0:
            raise ConfigError("t2_star sweep values must be positive")
        params = noise.apply_override(params, "ld.t2_star", value)
        params = noise.apply_override(params, "st.t2_star", value / math.sqrt(2))
    return params


def make_protocol(config: ExperimentConfig, params: NoiseParams):
    if config.experiment == "qec-step":
        code = surface17_spec() if config.code == "surface17" else bs17_spec()
        return QecStepProtocol(code, params)
    if config.experiment == "surface-prep":
        return SurfacePrepProtocol(params)
    return BsPrepProtocol(params, bs17_spec())


def _baselines(config, protocol, params, value):
    if config.sweep_var == "t2_star":
        t2 = value
    else:
        t2 = params.data.t2_star
    # maximal-unrolling duration (two rounds for the QEC step)
    t_total = protocol.circuit.duration()
    if math.isinf(t2):
        return 0.0, 0.0
    return (physical_baseline(t_total, t2),
            physical_baseline(t_total, ECHO_GAIN * t2))


def run_point(config: ExperimentConfig, index: int, value: float,
              clock=time.perf_counter):
    t0 = clock()
    params = point_params(config, value)
    protocol = make_protocol(config, params)
    result = estimate_logical_error(
        protocol, seed=[config.seed, index], threshold=config.threshold,
        policy=ShotPolicy.parse(config.shots))
    bounds = result.bounds
    bare, echo = _baselines(config, protocol, params, value)
    row = SweepRow(value, bounds.lower, bounds.upper, bounds.std_err,
                   bare, echo, bounds.sampled_mass, clock() - t0)
    return row, result


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None,
                   workers: int | None = None, clock=time.perf_counter):
    """All grid points; returns (rows, manifest dict) and optionally writes files."""
    if workers is None:
        workers = int(os.environ.get("QEC_SPINSIM_WORKERS", "0") or 0) or (
            os.cpu_count() or 1)
    points = list(enumerate(config.grid))
    if workers > 1 and len(points) > 1 and clock is time.perf_counter:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, [(config, i, v) for i, v in points]))
    else:
        results = [run_point(config, i, v, clock) for i, v in points]
    rows = [r for r, _ in results]
    manifest = {
        "experiment": config.experiment,
        "code": config.code,
        "encoding": config.encoding,
        "sweep_var": config.sweep_var,
        "grid": ",".join(repr(v) for v in config.grid),
        "readout": config.readout,
        "seed": str(config.seed),
        "shots": config.shots,
        "threshold": repr(config.threshold),
        "config_hash": config.hash(),
        "version": _package_version(),
        "points": str(len(rows)),
    }
    for key, val in config.overrides:
        manifest[f"override.{key}"] = repr(val)
    for i, (_, result) in enumerate(results):
        manifest[f"point.{i}.subsets"] = str(len(result.estimates))
        manifest[f"point.{i}.shots"] = str(sum(e.shots for e in result.estimates))
        if not result.complete:
            manifest[f"point.{i}.partial"] = "True"  # time budget expired
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        emit_csv(rows, out_dir / "results.csv")
        emit_manifest(manifest, out_dir / "manifest.txt")
        for i, (_, result) in enumerate(results):
            write_subset_ledger(out_dir / f"subsets_{i:03d}.csv", result.estimates)
    return rows, manifest


def _point_task(args):
    config, index, value = args
    return run_point(config, index, value)


def t2_sweep(config: ExperimentConfig, **kwargs):
    """T2* sweep; grid may carry the math.inf sentinel (all idle errors off)."""
    if config.sweep_var != "t2_star":
        raise ConfigError("t2_sweep requires sweep_var == 't2_star'")
    return run_experiment(config, **kwargs)


def _package_version() -> str:
    from . import __version__
    return __version__


# -- CSV / manifest I/O --------------------------------------------------------

def emit_csv(rows, path):
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(repr(v) for v in (
            row.sweep_value, row.p_l_lower, row.p_l_upper, row.std_err,
            row.baseline_bare, row.baseline_echo, row.sampled_mass, row.wall_s)))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_csv(path) -> list[SweepRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or wrong header")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = [float(c) for c in line.split(",")]
        if len(cells) != 8:
            raise ValueError(f"{path}: malformed row {line!r}")
        rows.append(SweepRow(*cells))
    return rows


def emit_manifest(manifest: dict, path):
    lines = [f"{key} = {value}" for key, value in manifest.items()]
    Path(path).write_text("\n".join(lines) + "\n")
