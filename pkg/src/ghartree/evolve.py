"""Strang split-step integrator with conservation monitoring and blow-up detection.

One step of size dt is

    u <- L(dt/2) N(dt) L(dt/2) u,

with L(t) = exp(-i|ξ|² t) in transform space and N(t) the exact phase
rotation u exp(i t V|u|^{p-2}) for the frozen potential V = |x|^{-b} * |u|^p.
Adjacent linear half steps are merged between records, so a step costs one
FFT pair plus one convolution.

Step sizes adapt to keep the nonlinear phase dt·max|V|u|^{p-2}| below
``phase_cap``; a step whose realised phase exceeds twice the cap is rejected
and repeated.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import _backend
from .checkpoint import write_checkpoint
from .eqparams import EquationParams
from .errors import InsufficientSamples, InvalidParams, PoisonedField
from .grid import ComplexField, fft_workers
from .observables import ObservableSet, grad_norm_sq, observe
from .riesz import DEFAULT_RULE, RieszKernel, riesz_convolve, riesz_kernel


class Status(str, enum.Enum):
    REACHED_T_END = "reached-t-end"
    BLOWUP = "blowup-detected"
    ABORTED_CONSERVATION = "aborted-conservation"
    ABORTED_BOUNDARY = "aborted-boundary"


@dataclass(frozen=True)
class EvolveConfig:
    """Time-stepping controls.

    ``record_stride`` counts nominal steps of size ``dt0`` between records,
    so records fall on the fixed lattice t = j · record_stride · dt0.
    """

    dt0: float = 1e-3
    t_end: float = 1.0
    dt_floor: float = 1e-6
    phase_cap: float = 0.1
    blowup_gradient_factor: float = 10.0
    record_stride: int = 10
    conservation_abort: float = 1e-4
    boundary_abort: float = 1e-4
    rule: str = DEFAULT_RULE
    checkpoint_every: int = 0
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.dt0 > self.dt_floor > 0):
            raise InvalidParams(f"need dt0 > dt_floor > 0, got dt0={self.dt0}, dt_floor={self.dt_floor}")
        if not (0 < self.phase_cap < math.pi):
            raise InvalidParams(f"phase_cap must lie in (0, pi), got {self.phase_cap}")
        if not (self.t_end > 0):
            raise InvalidParams(f"need t_end > 0, got {self.t_end}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidParams(f"record_stride must be a positive integer, got {self.record_stride}")
        if not (self.blowup_gradient_factor > 1):
            raise InvalidParams("blowup_gradient_factor must exceed 1")
        if not (self.conservation_abort > 0 and self.boundary_abort > 0):
            raise InvalidParams("abort thresholds must be positive")

    @property
    def record_dt(self) -> float:
        return self.record_stride * self.dt0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrajectoryRecord:
    params: EquationParams
    config: EvolveConfig
    times: list = field(default_factory=list)
    observables: list = field(default_factory=list)
    status: Status = Status.REACHED_T_END
    final: ComplexField | None = None
    steps: int = 0
    rejected: int = 0
    dt_min: float = math.inf
    message: str = ""

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(o, name) for o in self.observables])

    @property
    def grad_norm(self) -> np.ndarray:
        return np.sqrt(self.series("grad_norm_sq"))

    def summary(self) -> dict:
        first, last = self.observables[0], self.observables[-1]
        return {
            "status": self.status.value,
            "t_final": self.times[-1],
            "steps": self.steps,
            "rejected": self.rejected,
            "dt_min": self.dt_min,
            "grad_norm_ratio": math.sqrt(last.grad_norm_sq / first.grad_norm_sq) if first.grad_norm_sq > 0 else None,
            "mass_drift": abs(last.mass - first.mass) / first.mass if first.mass > 0 else 0.0,
            "energy_drift": abs(last.energy - first.energy) / abs(first.energy) if first.energy else None,
            "message": self.message,
        }


# -- sub-flows -------------------------------------------------------------------

def _propagate(values: np.ndarray, xi2: np.ndarray, dt: float) -> np.ndarray:
    if dt == 0:
        return values
    w = fft_workers()
    uh = sfft.fftn(values, workers=w, overwrite_x=False)
    uh *= np.exp(-1j * dt * xi2)
    return sfft.ifftn(uh, workers=w, overwrite_x=True)


def _grad_sq(values: np.ndarray, grid) -> float:
    return grad_norm_sq(ComplexField(grid, values))


def linear_step(u: ComplexField, dt: float) -> ComplexField:
    """Exact free flow exp(i dt Δ)."""
    u.check_finite()
    return ComplexField(u.grid, _propagate(u.values, u.grid.xi2, dt))


def _potential(values: np.ndarray, params: EquationParams, kernel: RieszKernel) -> np.ndarray:
    return riesz_convolve(kernel, _backend.abs_pow(values, params.p), boundary_warn=math.inf)


def nonlinear_step(u: ComplexField, dt: float, params: EquationParams, kernel: RieszKernel | None = None) -> ComplexField:
    """Phase rotation by the frozen potential; |u| is unchanged pointwise."""
    u.check_finite()
    kernel = kernel or riesz_kernel(u.grid, params.b)
    out = u.values.copy()
    if dt != 0:
        _backend.phase_rotate(out, _potential(out, params, kernel), params.p, dt)
    return ComplexField(u.grid, out)


def strang_step(u: ComplexField, dt: float, params: EquationParams, kernel: RieszKernel | None = None) -> ComplexField:
    half = linear_step(u, dt / 2)
    return linear_step(nonlinear_step(half, dt, params, kernel), dt / 2)


# -- driver ----------------------------------------------------------------------

class _CsvSink:
    def __init__(self, path, header_lines: list, N: int):
        self.fh = open(path, "w", newline="")
        for line in header_lines:
            self.fh.write(f"# {line}\n")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(ObservableSet.csv_header(N))

    def write(self, obs: ObservableSet):
        self.writer.writerow([repr(float(v)) for v in obs.csv_row()])
        self.fh.flush()

    def close(self):
        self.fh.close()


def config_hash(*parts) -> str:
    blob = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def evolve(
    u0: ComplexField,
    config: EvolveConfig,
    params: EquationParams,
    kernel: RieszKernel | None = None,
    t0: float = 0.0,
    csv_path=None,
    checkpoint_path=None,
    header: dict | None = None,
    reference: ObservableSet | None = None,
) -> TrajectoryRecord:
    """Integrate from ``t0`` to ``config.t_end``.

    Terminal outcomes are reported through ``record.status``; blow-up is a
    result, not an exception. ``reference`` supplies the initial observables
    when resuming, so drift and gradient growth stay measured from the
    original datum.
    """
    u0.check_finite()
    grid = u0.grid
    kernel = kernel or riesz_kernel(grid, params.b, config.rule)
    xi2 = grid.xi2
    rec = TrajectoryRecord(params=params, config=config)
    sink = None
    if csv_path is not None:
        from . import __version__

        h = config_hash(params.as_dict(), config.as_dict(), header or {})
        sink = _CsvSink(csv_path, [f"ghartree {__version__}", f"config_hash {h}", json.dumps(header or {}, sort_keys=True)], grid.N)

    u = u0.values.copy()
    t = float(t0)
    first = observe(ComplexField(grid, u), params, kernel, time=t)
    ref = reference or first
    rec.times.append(t)
    rec.observables.append(first)
    if sink:
        sink.write(first)
    grad0 = math.sqrt(ref.grad_norm_sq)

    rdt = config.record_dt
    j_rec = math.floor(t / rdt + 1e-9) + 1
    pending = 0.0  # owed linear time
    veff_max = None
    n_rec = 0
    status = Status.REACHED_T_END
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        while t < config.t_end - 1e-12 and rec.steps < config.max_steps:
            t_next = min(j_rec * rdt, config.t_end)
            dt = min(config.dt0, t_next - t)
            if veff_max:
                dt = min(dt, config.phase_cap / veff_max)
            dt = max(dt, min(config.dt_floor, t_next - t))
            saved = u
            while True:
                trial = _propagate(saved, xi2, pending + dt / 2)
                V = _potential(trial, params, kernel)
                trial = np.ascontiguousarray(trial)
                veff_max = _backend.phase_rotate(trial, V, params.p, dt)
                if dt * veff_max <= 2 * config.phase_cap or dt <= config.dt_floor:
                    break
                rec.rejected += 1
                dt = max(config.phase_cap / veff_max, config.dt_floor)
            u = trial
            pending = dt / 2
            t += dt
            rec.steps += 1
            rec.dt_min = min(rec.dt_min, dt)
            if not np.isfinite(veff_max):
                status = Status.ABORTED_CONSERVATION
                rec.message = "non-finite potential"
                break
            if dt < 4 * config.dt_floor:
                # the free flow leaves ‖∇u‖ unchanged, so the owed half step is irrelevant here
                gn = math.sqrt(_grad_sq(u, grid))
                if gn > config.blowup_gradient_factor * grad0:
                    u = _propagate(u, xi2, pending)
                    pending = 0.0
                    obs = observe(ComplexField(grid, u), params, kernel, time=t)
                    rec.times.append(t)
                    rec.observables.append(obs)
                    if sink:
                        sink.write(obs)
                    status = Status.BLOWUP
                    rec.message = f"grad norm grew {gn / grad0:.1f}x with dt={dt:.2e}"
                    break
            if t >= t_next - 1e-12:
                t = t_next if abs(t - t_next) < 1e-9 else t
                u = _propagate(u, xi2, pending)
                pending = 0.0
                j_rec += 1
                field_t = ComplexField(grid, u)
                try:
                    obs = observe(field_t, params, kernel, time=t)
                except PoisonedField:
                    status = Status.ABORTED_CONSERVATION
                    rec.message = "field became non-finite"
                    break
                rec.times.append(t)
                rec.observables.append(obs)
                n_rec += 1
                if sink:
                    sink.write(obs)
                if checkpoint_path and config.checkpoint_every and n_rec % config.checkpoint_every == 0:
                    write_checkpoint(checkpoint_path, field_t, _ckpt_meta(t, params, config, ref))
                if abs(obs.mass - ref.mass) > config.conservation_abort * ref.mass:
                    status = Status.ABORTED_CONSERVATION
                    rec.message = f"relative mass drift {abs(obs.mass - ref.mass) / ref.mass:.2e}"
                    break
                if field_t.boundary_fraction() > config.boundary_abort:
                    status = Status.ABORTED_BOUNDARY
                    rec.message = f"boundary mass fraction {field_t.boundary_fraction():.2e}"
                    break
    if pending:
        u = _propagate(u, xi2, pending)
    rec.status = status
    rec.final = ComplexField(grid, u)
    if sink:
        sink.close()
    if checkpoint_path:
        write_checkpoint(checkpoint_path, rec.final, _ckpt_meta(rec.times[-1], params, config, ref))
    return rec


def _ckpt_meta(t, params, config, ref):
    return {
        "time": t,
        "params": params.as_dict(),
        "config": config.as_dict(),
        "reference": ref.as_dict(),
    }


# -- virial check ---------------------------------------------------------------

@dataclass(frozen=True)
class VirialReport:
    times: np.ndarray
    rate_fd: np.ndarray
    rate_analytic: np.ndarray
    accel_fd: np.ndarray
    accel_analytic: np.ndarray
    accel_alt: np.ndarray
    rate_error: float
    accel_error: float
    forms_error: float
    truncation_estimate: float

    def as_dict(self) -> dict:
        return {
            "rate_error": self.rate_error,
            "accel_error": self.accel_error,
            "forms_error": self.forms_error,
            "truncation_estimate": self.truncation_estimate,
        }


def virial_consistency(record: TrajectoryRecord) -> VirialReport:
    """Compare centred differences of V(t) against V_t and V_tt observables.

    Errors are relative to the largest analytic magnitude on the interior
    samples. The truncation estimate is h²/12 · max|V''''| from fourth
    differences of the same samples.
    """
    t = np.asarray(record.times)
    if t.size < 5:
        raise InsufficientSamples(f"need at least 5 records, have {t.size}")
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, h[0]):
        raise InsufficientSamples("virial check needs uniformly spaced records")
    h = h[0]
    V = record.series("variance")
    Vt = record.series("variance_rate")
    acc = np.array([o.virial[0] for o in record.observables])
    alt = np.array([o.virial[1] for o in record.observables])
    rate_fd = (V[2:] - V[:-2]) / (2 * h)
    accel_fd = (V[2:] - 2 * V[1:-1] + V[:-2]) / h**2
    d4 = (V[4:] - 4 * V[3:-1] + 6 * V[2:-2] - 4 * V[1:-3] + V[:-4]) / h**4
    inner = slice(1, -1)
    scale_rate = max(np.max(np.abs(Vt[inner])), np.max(np.abs(rate_fd)), 1e-300)
    scale_acc = max(np.max(np.abs(acc[inner])), 1e-300)
    return VirialReport(
        times=t[inner],
        rate_fd=rate_fd,
        rate_analytic=Vt[inner],
        accel_fd=accel_fd,
        accel_analytic=acc[inner],
        accel_alt=alt[inner],
        rate_error=float(np.max(np.abs(rate_fd - Vt[inner])) / scale_rate),
        accel_error=float(np.max(np.abs(accel_fd - acc[inner])) / scale_acc),
        forms_error=float(np.max(np.abs(acc - alt)) / max(np.max(np.abs(acc)), 1e-300)),
        truncation_estimate=float(h**2 / 12 * np.max(np.abs(d4)) / scale_acc) if d4.size else math.nan,
    )


def dump_csv(record: TrajectoryRecord) -> str:
    """CSV text of a record, same schema as the streamed file."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ObservableSet.csv_header(record.params.N))
    for o in record.observables:
        w.writerow([repr(float(v)) for v in o.csv_row()])
    return buf.getvalue()
