"""The ``latticewave`` command: parameter sweeps written as CSV or JSON tables.

Every command expands its grids into independent points, evaluates them on a
bounded process pool (order preserved), and writes one table per output. A
point that raises a library error becomes a row of ``nan`` values plus a
warning record; the exit status is 0 when every point succeeded, 3 when some
failed and 1 when all failed or the configuration was rejected.

The comment lines heading a CSV file echo the version and the full resolved
configuration as JSON, followed by the per-point warnings. A table can
therefore be regenerated from its own header (see :func:`read_table`).
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .classical import (
    OscillatorSpec,
    average_work,
    macroscopic_damping,
    oscillator_trajectory,
    work_trace,
)
from .errors import LatticeWaveError
from .lattice import (
    LatticeSpec,
    band_edge,
    bloch_mode,
    bloch_vector,
    energy_velocity,
    group_velocity_fd,
    mode_at_frequency,
    power_flow,
)
from .quantum import absorption_rate
from .relativity import FrameBoost, moving_frame_spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["RunConfig", "SweepResult", "Violation", "validate", "resolve", "run", "write_table", "read_table", "main"]

COMMANDS = (
    "bands",
    "energy-velocity",
    "modes",
    "doppler-spectrum",
    "damping",
    "trajectory",
    "work-trace",
    "work-average",
    "absorption-rate",
    "figure",
)
FIGURES = ("1", "2", "3a", "3b", "3c", "3d", "4")
FORMATS = ("csv", "json")

EXIT_CLEAN, EXIT_FAILED, EXIT_PARTIAL = 0, 1, 3

GRID_FIELDS = ("V", "omega", "omega0", "t", "K")


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Everything that determines the output of one invocation.

    Grid fields (``V``, ``omega``, ``omega0``, ``t``, ``K``) are explicit
    lists. ``None`` means "use the command default"; :func:`resolve` fills
    those in, and the resolved form is what gets echoed into the output.
    """

    command: str
    figure: str | None = None
    alpha: float | None = None
    n: float | None = None
    kappa: float | None = None
    x0: float | None = None
    V: list | None = None
    omega: list | None = None
    omega0: list | None = None
    t: list | None = None
    K: list | None = None
    band: int | None = None
    bands: int | None = None
    m_range: list | None = None
    eta_levels: list | None = None
    harmonics: int | None = None
    max_band: int | None = None
    output: str | None = None
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, allow_nan=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Violation:
    """A configuration problem; ``severity`` is ``"error"`` or ``"warning"``."""

    field: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return self.message


@dataclass
class SweepResult:
    """One output table.

    Attributes
    ----------
    columns : dict
        Column name to list of floats, all of equal length.
    metadata : dict
        ``version``, ``config`` (the resolved :class:`RunConfig` as a dict)
        and ``warnings`` (one record per failed point).
    name : str
        Table suffix; empty unless a command emits several tables.
    """

    columns: dict
    metadata: dict
    name: str = ""
    points: int = 0

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def failed_points(self) -> int:
        return sum(1 for w in self.metadata.get("warnings", []) if "error" in w)


class UsageError(Exception):
    """Invalid command line or configuration."""


# --------------------------------------------------------------------------
# grids and defaults


def parse_grid(value) -> list:
    """Turn a grid description into a list of floats.

    Accepts a number, a list of numbers, ``"a,b,c"`` or ``"start:stop:num"``
    (inclusive, evenly spaced).
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must look like start:stop:num")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise ValueError(f"grid {text!r} needs at least one point")
        return [float(v) for v in np.linspace(start, stop, num)]
    return [float(v) for v in text.split(",") if v.strip()]


def _linspace(a, b, n) -> list:
    return [float(v) for v in np.linspace(a, b, n)]


def _band_grid(spec: LatticeSpec, band: int, n_uniform: int = 120, n_edge: int = 40) -> list:
    """Pass-band frequencies, dense toward both edges (where ``v`` varies fastest)."""
    lo = (band - 1) * np.pi
    hi = band_edge(spec, band)
    width = hi - lo
    start = 1e-3 if band == 1 else lo + 1e-5 * width
    body = np.linspace(start, hi, n_uniform + 1)[:-1]
    near = hi - width * np.geomspace(1e-2, 1e-8, n_edge)
    pts = np.unique(np.concatenate([body, near]))
    if band > 1:
        pts = np.unique(np.concatenate([pts, lo + width * np.geomspace(1e-5, 1e-2, n_edge)]))
    return [float(v) for v in pts]


def _figure1_omega(alpha: float) -> list:
    spec = LatticeSpec(alpha)
    pts = _linspace(1e-3, 2 * np.pi, 600) + _band_grid(spec, 1) + _band_grid(spec, 2)
    return sorted(set(pts))


_COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "bands": dict(alpha=1.0, omega=lambda c: _linspace(1e-3, 12.0, 1200)),
    "energy-velocity": dict(alpha=1.0, omega=lambda c: _band_grid(LatticeSpec(c.alpha), 1)),
    "modes": dict(alpha=1.0, bands=4, K=lambda c: _linspace(-np.pi + np.pi / 8, np.pi, 16)),
    "doppler-spectrum": dict(alpha=1.0, band=1, K=[1.0], V=[0.6], m_range=[-8, 8]),
    "damping": dict(alpha=1.0, kappa=1.0, omega0=[1.0], V=lambda c: _linspace(0.0, 0.95, 20)),
    "trajectory": dict(
        alpha=1.0, kappa=0.5, omega0=[1.0], V=[0.0, 0.3, 0.6, 0.75, 0.9], t=lambda c: _linspace(0.0, 60.0, 1201)
    ),
    "work-trace": dict(
        alpha=4.0, kappa=1.0, x0=0.0, omega=[1.0], V=[0.3], harmonics=32, t=lambda c: _linspace(0.0, np.pi, 401)
    ),
    "work-average": dict(alpha=4.0, kappa=1.0, x0=0.0, omega=[0.1], V=lambda c: _linspace(0.0, 0.9, 91)),
    "absorption-rate": dict(alpha=1.0, kappa=1.0, omega0=[1e-5], max_band=6, V=lambda c: _linspace(0.01, 0.99, 99)),
}

_FIGURE_DEFAULTS: dict[str, dict[str, Any]] = {
    "1": dict(alpha=1.0, omega=lambda c: _figure1_omega(c.alpha)),
    "2": dict(_COMMAND_DEFAULTS["trajectory"]),
    "3a": dict(_COMMAND_DEFAULTS["work-trace"], V=[0.0, 0.2, 0.4]),
    "3b": dict(_COMMAND_DEFAULTS["work-trace"], V=[0.6, 0.8]),
    "3c": dict(_COMMAND_DEFAULTS["work-average"], omega=[0.0005]),
    "3d": dict(_COMMAND_DEFAULTS["work-average"], omega=[0.1]),
    "4": dict(_COMMAND_DEFAULTS["absorption-rate"]),
}


def resolve(config: RunConfig) -> RunConfig:
    """Fill unset fields with the command (or figure) defaults."""
    if config.command == "figure":
        defaults = _FIGURE_DEFAULTS.get(str(config.figure), {})
    else:
        defaults = _COMMAND_DEFAULTS.get(config.command, {})
    out = dataclasses.replace(config)
    # scalars first: grid defaults may depend on them
    for key, value in sorted(defaults.items(), key=lambda kv: callable(kv[1])):
        if getattr(out, key) is None:
            setattr(out, key, value(out) if callable(value) else (list(value) if isinstance(value, list) else value))
    for key in GRID_FIELDS:
        if getattr(out, key) is not None:
            setattr(out, key, parse_grid(getattr(out, key)))
    return out


# --------------------------------------------------------------------------
# validation


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate(config: RunConfig) -> list[Violation]:
    """Every violated precondition of ``config`` (after :func:`resolve`).

    Errors block the run; warnings flag points that will be emitted as
    missing values.
    """
    out: list[Violation] = []
    err = lambda f, m: out.append(Violation(f, m))
    c = config
    if c.command not in COMMANDS:
        err("command", f"unknown command {c.command!r}")
        return out
    if c.command == "figure" and str(c.figure) not in FIGURES:
        err("figure", f"figure id must be one of {', '.join(FIGURES)}")
        return out
    if c.format not in FORMATS:
        err("format", "format must be csv or json")

    for name in GRID_FIELDS:
        grid = getattr(c, name)
        if grid is None:
            continue
        if len(grid) == 0:
            err(name, f"{name} grid must be non-empty")
            continue
        if not all(_finite(v) for v in grid):
            err(name, f"{name} grid must contain finite numbers")
            continue
        if any(b <= a for a, b in zip(grid, grid[1:])):
            err(name, f"{name} grid must be strictly increasing")

    if c.alpha is not None and not (_finite(c.alpha) and c.alpha >= 0):
        err("alpha", "alpha must be finite and non-negative")
    if c.n is not None and not (_finite(c.n) and c.n >= 1):
        err("n", "refractive index n must be >= 1")
    if c.kappa is not None and not _finite(c.kappa):
        err("kappa", "kappa must be a finite real number")
    if c.x0 is not None and not _finite(c.x0):
        err("x0", "x0 must be a finite real number")
    if c.V is not None and any(_finite(v) and not abs(v) < 1.0 for v in c.V):
        err("V", "V must satisfy |V|<1")
    if c.omega is not None and any(_finite(w) and not w > 0 for w in c.omega):
        err("omega", "omega must be positive")
    if c.omega0 is not None and any(_finite(w) and not w > 0 for w in c.omega0):
        err("omega0", "omega0 must be positive")
    if c.K is not None and any(_finite(K) and not (-np.pi < K <= np.pi) for K in c.K):
        err("K", "K must lie in (-pi, pi]")
    for name in ("band", "bands", "harmonics", "max_band"):
        v = getattr(c, name)
        if v is not None and not (isinstance(v, int) and not isinstance(v, bool) and v >= 1):
            err(name, f"{name} must be a positive integer")
    if c.m_range is not None:
        mr = c.m_range
        if not (len(mr) == 2 and all(isinstance(v, int) for v in mr) and mr[0] <= mr[1]):
            err("m_range", "m_range must be two increasing integers")
    if c.eta_levels is not None:
        eta = c.eta_levels
        if len(eta) < 2 or not all(_finite(e) and e > 0 for e in eta) or len(set(eta)) != len(eta):
            err("eta_levels", "eta_levels needs at least two distinct positive values")

    uses_work = c.command in ("work-average", "work-trace") or (c.command == "figure" and str(c.figure).startswith("3"))
    uses_rate = c.command == "absorption-rate" or (c.command == "figure" and str(c.figure) == "4")
    if (uses_work or uses_rate) and c.V is not None and any(_finite(v) and v < 0 for v in c.V):
        err("V", "V must be >= 0 (mirror the lattice for negative velocities)")

    macroscopic = c.command in ("damping", "trajectory") or (c.command == "figure" and str(c.figure) == "2")
    if macroscopic and c.V is not None and not any(v.field in ("alpha", "n") for v in out):
        n = _index(c)
        for v in c.V:
            if _finite(v) and min(abs(1 - n * v), abs(1 + n * v)) < 1e-12:
                out.append(
                    Violation("V", f"V={v!r} sits on the threshold 1/n: ThresholdSingular point will be skipped", "warning")
                )
    return out


def _index(c: RunConfig) -> float:
    return float(c.n) if c.n is not None else float(np.sqrt(1.0 + (c.alpha or 0.0)))


# --------------------------------------------------------------------------
# point evaluators (top level so worker processes can import them)


def _eval_bands(c: RunConfig, point):
    (omega,) = point
    K = bloch_vector(LatticeSpec(c.alpha), omega)
    band = int(np.floor(omega / np.pi)) + 1 if K.imag == 0.0 else 0
    return [(omega, band, K.real, K.imag)]


def _eval_energy_velocity(c: RunConfig, point):
    (omega,) = point
    spec = LatticeSpec(c.alpha)
    mode = mode_at_frequency(spec, omega)
    return [(omega, mode.band, mode.K, energy_velocity(mode), float(group_velocity_fd(spec, omega)))]


def _eval_modes(c: RunConfig, point):
    band, K = point
    mode = bloch_mode(LatticeSpec(c.alpha), int(band), K)
    return [(band, K, mode.k, mode.N.real, mode.N.imag, energy_velocity(mode), power_flow(mode))]


def _eval_doppler(c: RunConfig, point):
    K, V = point
    mode = bloch_mode(LatticeSpec(c.alpha), c.band, K)
    comps = moving_frame_spectrum(mode, FrameBoost(V), tuple(c.m_range), coverage=0.0)
    return [
        (K, V, comp.m, comp.omega_prime, comp.k_prime, comp.amplitude.real, comp.amplitude.imag, float(comp.omega_prime < 0))
        for comp in comps
    ]


def _eval_damping(c: RunConfig, point):
    omega0, V = point
    return [(omega0, V, macroscopic_damping(omega0, V, _index(c), c.kappa))]


def _eval_trajectory(c: RunConfig, point):
    omega0, V = point
    gamma_damp = macroscopic_damping(omega0, V, _index(c), c.kappa)
    X = oscillator_trajectory(OscillatorSpec(omega0, c.kappa, X0=1.0, Xdot0=0.0), gamma_damp, c.t)
    return [(omega0, V, t, x) for t, x in zip(c.t, X)]


def _trace(c: RunConfig, omega: float, V: float, t):
    osc = OscillatorSpec(omega, c.kappa, x0=c.x0)
    return work_trace(LatticeSpec(c.alpha), osc, FrameBoost(V), omega, t, eta_levels=c.eta_levels, harmonics=c.harmonics)


def _eval_work_trace(c: RunConfig, point):
    omega, V = point
    tr = _trace(c, omega, V, c.t)
    return [(omega, V, t, w, e) for t, w, e in zip(c.t, tr.samples[:, 1], tr.error)]


@functools.lru_cache(maxsize=32)
def _rest_peak(alpha: float, kappa: float, x0: float, omega: float, harmonics: int, eta_key) -> float:
    """Largest work over half a drive period with the lattice at rest."""
    c = RunConfig("work-trace", alpha=alpha, kappa=kappa, x0=x0, harmonics=harmonics, eta_levels=list(eta_key) if eta_key else None)
    t = np.linspace(0.0, np.pi / omega, 2001)
    return float(np.max(_trace(c, omega, 0.0, t).samples[:, 1]))


def _eval_figure_trace(c: RunConfig, point):
    omega, V = point
    peak = _rest_peak(c.alpha, c.kappa, c.x0, omega, c.harmonics, tuple(c.eta_levels) if c.eta_levels else None)
    tr = _trace(c, omega, V, c.t)
    return [(omega, V, t, w / peak, e / peak) for t, w, e in zip(c.t, tr.samples[:, 1], tr.error)]


@functools.lru_cache(maxsize=32)
def _rest_work(alpha: float, kappa: float, omega: float) -> float:
    return average_work(LatticeSpec(alpha), OscillatorSpec(omega, kappa), FrameBoost(0.0), omega)


def _eval_work_average(c: RunConfig, point):
    omega, V = point
    W = average_work(LatticeSpec(c.alpha), OscillatorSpec(omega, c.kappa, x0=c.x0), FrameBoost(V), omega)
    return [(omega, V, W, W / _rest_work(c.alpha, c.kappa, omega))]


def _eval_absorption(c: RunConfig, point):
    omega0, V = point
    r = absorption_rate(LatticeSpec(c.alpha), OscillatorSpec(omega0, c.kappa), FrameBoost(V), max_band=c.max_band)
    rows = [(omega0, V, r.rate, r.rate_oscillator_frame, r.rate_oscillator_frame / c.kappa**2, len(r.roots))]
    if r.excluded:
        note = f"{len(r.excluded)} grazing root(s) excluded: " + ", ".join(f"band {x.band} K={x.K_m!r}" for x in r.excluded)
        return rows, note
    return rows


_EVALUATORS: dict[str, Callable] = {
    "bands": _eval_bands,
    "energy-velocity": _eval_energy_velocity,
    "modes": _eval_modes,
    "doppler": _eval_doppler,
    "damping": _eval_damping,
    "trajectory": _eval_trajectory,
    "work-trace": _eval_work_trace,
    "figure-trace": _eval_figure_trace,
    "work-average": _eval_work_average,
    "absorption": _eval_absorption,
}


@dataclass(frozen=True)
class _Table:
    name: str
    columns: tuple
    evaluator: str
    points: tuple


def _product(a, b):
    return tuple((x, y) for x in a for y in b)


def _plan(c: RunConfig) -> list[_Table]:
    cmd = c.command if c.command != "figure" else f"figure-{c.figure}"
    one = lambda grid: tuple((v,) for v in grid)
    if cmd == "bands":
        return [_Table("", ("omega", "band", "K_re", "K_im"), "bands", one(c.omega))]
    if cmd == "energy-velocity":
        return [_Table("", ("omega", "band", "K", "v_energy", "v_group_fd"), "energy-velocity", one(c.omega))]
    if cmd == "figure-1":
        spec = LatticeSpec(c.alpha)
        in_band = tuple((w,) for w in c.omega if np.imag(bloch_vector(spec, w)) == 0.0)
        return [
            _Table("a", ("omega", "band", "K", "v_energy", "v_group_fd"), "energy-velocity", in_band),
            _Table("b", ("omega", "band", "K_re", "K_im"), "bands", one(c.omega)),
        ]
    if cmd == "modes":
        pts = _product([float(b) for b in range(1, c.bands + 1)], c.K)
        return [_Table("", ("band", "K", "k", "N_re", "N_im", "v_energy", "power_flow"), "modes", pts)]
    if cmd == "doppler-spectrum":
        cols = ("K", "V", "m", "omega_prime", "k_prime", "amplitude_re", "amplitude_im", "negative")
        return [_Table("", cols, "doppler", _product(c.K, c.V))]
    if cmd == "damping":
        return [_Table("", ("omega0", "V", "Gamma"), "damping", _product(c.omega0, c.V))]
    if cmd in ("trajectory", "figure-2"):
        return [_Table("", ("omega0", "V", "t", "X"), "trajectory", _product(c.omega0, c.V))]
    if cmd == "work-trace":
        return [_Table("", ("omega", "V", "t", "W", "W_error"), "work-trace", _product(c.omega, c.V))]
    if cmd in ("figure-3a", "figure-3b"):
        return [_Table("", ("omega", "V", "t", "W_over_Wm", "error_over_Wm"), "figure-trace", _product(c.omega, c.V))]
    if cmd in ("work-average", "figure-3c", "figure-3d"):
        return [_Table("", ("omega", "V", "W", "W_over_W0"), "work-average", _product(c.omega, c.V))]
    if cmd in ("absorption-rate", "figure-4"):
        cols = ("omega0", "V", "rate", "rate_oscillator_frame", "Gamma_prime_over_kappa2", "roots")
        return [_Table("", cols, "absorption", _product(c.omega0, c.V))]
    raise UsageError(f"nothing to run for {cmd!r}")


def _evaluate(task):
    """Run one point; library errors become a warning record instead of a row.

    An evaluator may return ``(rows, note)`` to attach a non-fatal warning.
    """
    evaluator, config_json, point = task
    c = RunConfig.from_json(config_json)
    try:
        rows = _EVALUATORS[evaluator](c, point)
        note = None
        if isinstance(rows, tuple):  # rows plus a non-fatal note
            rows, text = rows
            note = {"point": [float(p) for p in point], "warning": text}
        return [tuple(float(v) for v in row) for row in rows], note
    except (LatticeWaveError, ValueError, ArithmeticError) as exc:
        return None, {"point": [float(p) for p in point], "error": type(exc).__name__, "message": str(exc)}


def _pool_size(workers: int | None) -> int:
    env = os.environ.get("LATTICEWAVE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError("LATTICEWAVE_THREADS must be an integer") from None
    if workers is not None:
        return max(1, int(workers))
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# execution


def run(config: RunConfig, workers: int | None = None, write: bool = True) -> list[SweepResult]:
    """Validate, evaluate and (optionally) write every table of ``config``.

    Parameters
    ----------
    workers : int, optional
        Pool size; the environment variable ``LATTICEWAVE_THREADS`` takes
        precedence, and the default is the number of CPUs. Results do not
        depend on it.
    write : bool
        Write the tables to ``config.output`` (or standard output).

    Returns
    -------
    list of SweepResult
        One per table; only ``figure --id 1`` produces two.

    Raises
    ------
    UsageError
        If :func:`validate` reports an error.
    """
    c = resolve(config)
    problems = validate(c)
    errors = [p for p in problems if p.severity == "error"]
    if errors:
        raise UsageError("; ".join(f"{p.field}: {p.message}" for p in errors))
    notes = [{"field": p.field, "warning": p.message} for p in problems]
    tables = _plan(c)
    config_json = c.to_json()
    tasks = [(t.evaluator, config_json, p) for t in tables for p in t.points]
    size = min(_pool_size(workers), max(1, len(tasks)))
    if size == 1:
        outcomes = [_evaluate(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=size) as pool:
            outcomes = list(pool.map(_evaluate, tasks, chunksize=1))

    results = []
    pos = 0
    for table in tables:
        width = len(table.columns)
        rows, warnings = [], list(notes)
        for point in table.points:
            got, warning = outcomes[pos]
            pos += 1
            if warning is not None:
                warnings.append(warning)
            if got is None:
                rows.append(tuple(float(p) for p in point) + (math.nan,) * (width - len(point)))
            else:
                rows.extend(got)
        columns = {name: [row[i] for row in rows] for i, name in enumerate(table.columns)}
        meta = {"version": __version__, "config": dataclasses.asdict(c), "warnings": warnings}
        results.append(SweepResult(columns, meta, table.name, len(table.points)))
    if write:
        for result in results:
            write_table(result, _output_path(c.output, result.name, c.format), c.format)
    return results


def _output_path(output: str | None, name: str, fmt: str) -> Path | None:
    if output is None:
        return None
    path = Path(output)
    if not name:
        return path
    stem = path.with_suffix("") if path.suffix else path
    return stem.parent / f"{stem.name}_{name}.{fmt}"


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else "%.17g" % v


def format_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# latticewave v{result.metadata['version']}\n")
    buf.write("# " + json.dumps(result.metadata["config"], sort_keys=True) + "\n")
    buf.write("# warnings: " + json.dumps(result.metadata["warnings"], sort_keys=True) + "\n")
    names = list(result.columns)
    buf.write(",".join(names) + "\n")
    for i in range(result.n_rows):
        buf.write(",".join(_fmt(result.columns[n][i]) for n in names) + "\n")
    return buf.getvalue()


def format_json(result: SweepResult) -> str:
    cols = {k: [None if math.isnan(v) else v for v in vals] for k, vals in result.columns.items()}
    doc = {"latticewave": result.metadata["version"], **result.metadata, "columns": cols}
    doc.pop("version")
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_table(result: SweepResult, path: Path | None, fmt: str = "csv") -> None:
    text = format_csv(result) if fmt == "csv" else format_json(result)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_table(path) -> SweepResult:
    """Parse a CSV or JSON file written by :func:`write_table`."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        cols = {k: [math.nan if v is None else float(v) for v in vals] for k, vals in doc["columns"].items()}
        meta = {"version": doc["latticewave"], "config": doc["config"], "warnings": doc["warnings"]}
        return SweepResult(cols, meta)
    lines = text.splitlines()
    if not lines[0].startswith("# latticewave v"):
        raise ValueError("not a latticewave table")
    version = lines[0][len("# latticewave v") :]
    config = json.loads(lines[1][2:])
    warnings = json.loads(lines[2][len("# warnings: ") :])
    names = lines[3].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[4:] if line]
    cols = {n: [r[i] for r in rows] for i, n in enumerate(names)}
    return SweepResult(cols, {"version": version, "config": config, "warnings": warnings})


# --------------------------------------------------------------------------
# command line


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_OPTIONS = {
    "alpha": dict(type=float, help="polarizability per lattice constant"),
    "n": dict(type=float, help="refractive index (default sqrt(1+alpha))"),
    "kappa": dict(type=float, help="oscillator-field coupling"),
    "x0": dict(type=float, help="oscillator position in its own frame"),
    "V": dict(type=str, help="velocity grid: v | a,b,c | start:stop:num"),
    "omega": dict(type=str, help="frequency grid (same syntax as --V)"),
    "omega0": dict(type=str, help="oscillator frequency grid"),
    "t": dict(type=str, help="time grid"),
    "K": dict(type=str, help="Bloch vector grid in (-pi, pi]"),
    "band": dict(type=int, help="band index"),
    "bands": dict(type=int, help="number of bands"),
    "m_range": dict(type=int, nargs=2, metavar=("LO", "HI"), help="diffraction orders"),
    "eta_levels": dict(type=str, help="damping ladder for the zero-damping extrapolation"),
    "harmonics": dict(type=int, help="number of collision harmonics kept on each side"),
    "max_band": dict(type=int, help="highest band searched for resonances"),
}

_COMMAND_OPTIONS = {
    "bands": ("alpha", "omega"),
    "energy-velocity": ("alpha", "omega"),
    "modes": ("alpha", "bands", "K"),
    "doppler-spectrum": ("alpha", "band", "K", "V", "m_range"),
    "damping": ("alpha", "n", "kappa", "omega0", "V"),
    "trajectory": ("alpha", "n", "kappa", "omega0", "V", "t"),
    "work-trace": ("alpha", "kappa", "x0", "omega", "V", "t", "eta_levels", "harmonics"),
    "work-average": ("alpha", "kappa", "x0", "omega", "V"),
    "absorption-rate": ("alpha", "kappa", "omega0", "V", "max_band"),
    "figure": tuple(_OPTIONS),
}

_HELP = {
    "bands": "complex Bloch vector over a frequency grid",
    "energy-velocity": "energy-transport and finite-difference group velocity",
    "modes": "frequency and normalization of Bloch modes",
    "doppler-spectrum": "diffraction orders of a mode seen from a moving frame",
    "damping": "radiation damping in a uniform medium",
    "trajectory": "damped oscillator trajectories in a uniform medium",
    "work-trace": "work against the lattice over time",
    "work-average": "long-time average work against the lattice",
    "absorption-rate": "excitation rate of an oscillator moving through the lattice",
    "figure": "data for one of the reference figures (1, 2, 3a-3d, 4)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latticewave", description="Waves in a moving lattice of point scatterers.")
    parser.add_argument("--version", action="version", version=f"latticewave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=_HELP[cmd], argument_default=argparse.SUPPRESS)
        if cmd == "figure":
            p.add_argument("--id", dest="figure", required=True, choices=FIGURES)
        for name in _COMMAND_OPTIONS[cmd]:
            p.add_argument("--" + name.replace("_", "-"), dest=name, **_OPTIONS[name])
        p.add_argument("--config", help="TOML file with default values for any flag")
        p.add_argument("--output", "-o", help="output file (default: standard output)")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--workers", type=int, help="worker processes (LATTICEWAVE_THREADS overrides)")
    return parser


def _load_toml(path: str) -> dict:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return {k.replace("-", "_"): v for k, v in data.items()}


def config_from_args(argv: Sequence[str] | None = None) -> tuple[RunConfig, int | None]:
    """Build the configuration: command defaults < TOML file < flags."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    workers = ns.pop("workers", None)
    merged: dict[str, Any] = {}
    if "config" in ns:
        merged.update(_load_toml(ns.pop("config")))
        workers = merged.pop("workers", workers) if workers is None else workers
        merged.pop("command", None)
    merged.update(ns)
    if "eta_levels" in merged:
        merged["eta_levels"] = parse_grid(merged["eta_levels"])
    if "m_range" in merged:
        merged["m_range"] = [int(v) for v in merged["m_range"]]
    if "figure" in merged:
        merged["figure"] = str(merged["figure"])
    for key in GRID_FIELDS:
        if key in merged:
            merged[key] = parse_grid(merged[key])
    try:
        return RunConfig.from_dict({"command": command, **merged}), workers
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config, workers = config_from_args(argv)
        results = run(config, workers=workers)
    except UsageError as exc:
        print(f"latticewave: usage error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (OSError, tomllib.TOMLDecodeError, ValueError) as exc:
        print(f"latticewave: error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    failed = sum(r.failed_points for r in results)
    total = sum(r.points for r in results)
    if failed:
        print(f"latticewave: {failed} of {total} points failed", file=sys.stderr)
        return EXIT_FAILED if failed == total else EXIT_PARTIAL
    return EXIT_CLEAN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
