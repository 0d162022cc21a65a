"""Parameter sweeps over detunings and interaction time."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .gaussian import DEFAULT_POLARITON_NOISE, build_model, evolve, excitations, minimal_variance, variances
from .params import PhysicalParams, derive_rates, predict_optimal_detuning, predict_optimal_time

AXES = ("delta_big", "delta_bar", "t")
OUTPUTS = ("min_var", "var_y_plus", "n_total", "t_star")


@dataclass(frozen=True)
class Axis:
    """One sweep axis. ``relative`` values are multiples of the axis' natural
    scale: Delta_opt for ``delta_big``, xi for ``delta_bar``, t* for ``t``."""

    name: str
    min: float
    max: float
    points: int
    log: bool = False
    relative: bool = False

    def __post_init__(self):
        if self.name not in AXES:
            raise ConfigError(f"axis {self.name!r}: must be one of {', '.join(AXES)}")
        if self.points < 2:
            raise ConfigError(f"axis {self.name}: needs at least 2 points")
        if not self.min < self.max:
            raise ConfigError(f"axis {self.name}: min must be below max")
        if self.log and self.min <= 0:
            raise ConfigError(f"axis {self.name}: log spacing needs positive bounds")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name:min:max:points[:flag,...]`` with flags ``log`` and ``rel``."""
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ConfigError(f"axis {text!r}: expected name:min:max:points[:flags]")
        flags = set(parts[4].split(",")) if len(parts) == 5 and parts[4] else set()
        unknown = flags - {"log", "rel"}
        if unknown:
            raise ConfigError(f"axis {text!r}: unknown flag(s) {', '.join(sorted(unknown))}")
        try:
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"axis {text!r}: {exc}") from exc
        return cls(parts[0], lo, hi, n, log="log" in flags, relative="rel" in flags)

    def values(self, scale: float = 1.0) -> np.ndarray:
        grid = np.geomspace(self.min, self.max, self.points) if self.log else np.linspace(self.min, self.max, self.points)
        return grid * scale if self.relative else grid


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    fixed: PhysicalParams
    axis2: Axis | None = None
    outputs: tuple[str, ...] = OUTPUTS
    polariton_noise: float = DEFAULT_POLARITON_NOISE
    dt: float | None = field(default=None)

    def __post_init__(self):
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown output(s): {', '.join(bad)}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ConfigError("the two axes must differ")

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    def axis_values(self, axis: Axis) -> np.ndarray:
        if not axis.relative:
            return axis.values()
        p = self.fixed
        if axis.name == "delta_big":
            scale = predict_optimal_detuning(p)
        elif axis.name == "delta_bar":
            scale = abs(derive_rates(p).xi)
        else:
            scale = predict_optimal_time(derive_rates(p))
        return axis.values(scale)

    def grid(self) -> list[dict[str, float]]:
        """Grid points in row order, last axis varying fastest."""
        values = [self.axis_values(a) for a in self.axes]
        names = [a.name for a in self.axes]
        if len(values) == 1:
            return [{names[0]: float(v)} for v in values[0]]
        return [{names[0]: float(u), names[1]: float(v)} for u in values[0] for v in values[1]]


def point_params(fixed: PhysicalParams, point: dict[str, float]) -> PhysicalParams:
    changes = {}
    if "delta_big" in point:
        changes["delta_big"] = point["delta_big"]
    if "delta_bar" in point:
        changes["delta1"] = fixed.delta1 + point["delta_bar"]
        changes["delta2"] = fixed.delta2 - point["delta_bar"]
    return fixed.replace(**changes) if changes else fixed


def evaluate_point(spec: SweepSpec, point: dict[str, float]) -> dict:
    """Evaluate one grid point; failures become NaN outputs with an error message.

    Without a ``t`` axis the state is evaluated at the predicted optimal time t*.
    """
    row = dict(point)
    row.update({o: math.nan for o in spec.outputs})
    row["error"] = ""
    try:
        p = point_params(spec.fixed, point)
        d = derive_rates(p)
        try:
            t_star = predict_optimal_time(d)
        except ValueError:
            if "t" not in point:
                raise
            t_star = math.nan
        t = point.get("t", t_star)
        m = build_model(p, d, polariton_noise=spec.polariton_noise)
        state = evolve(m, t, spec.dt, record_every=None)[-1]
        values = {
            "min_var": minimal_variance(state),
            "var_y_plus": variances(state)[0],
            "n_total": sum(excitations(state)),
            "t_star": t_star,
        }
        row.update({o: values[o] for o in spec.outputs})
    except Exception as exc:  # noqa: BLE001 - per-point failures are data
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Evaluate every grid point; rows come back in grid order."""
    points = spec.grid()
    if jobs <= 1:
        return [evaluate_point(spec, pt) for pt in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate, [(spec, pt) for pt in points], chunksize=max(1, len(points) // (4 * jobs))))


def columns(spec: SweepSpec) -> list[str]:
    return [a.name for a in spec.axes] + list(spec.outputs) + ["error"]
