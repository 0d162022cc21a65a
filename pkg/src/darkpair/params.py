"""Physical inputs, derived rates and closed-form squeezing predictions.

All quantities are dimensionless: rates, detunings and couplings are measured
in units of the excited-state coherence decay ``gamma_ag``, which is fixed to 1.
Times are therefore in units of ``1/gamma_ag``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError

DEFAULT_THRESHOLD = 10.0


@dataclass(frozen=True)
class PhysicalParams:
    """Experiment-level inputs of the pair-generation scheme.

    Attributes:
        n_atoms: number of atoms N (real-valued to allow scaling studies).
        g1, g2: single-atom vacuum couplings on the Stokes and EIT transitions.
        omega1, omega2: Rabi frequencies of the Raman drive and the EIT control.
        delta_big: single-photon detuning of the Raman drive.
        delta1, delta2: two-photon detunings of the b1 and b2 transitions.
        gamma_gb: bare ground-state coherence decay.
        kappa: cavity amplitude decay.
        gamma_ag: excited-state coherence decay; the unit, always 1.
    """

    n_atoms: float
    g1: float
    g2: float
    omega1: float
    omega2: float
    delta_big: float
    delta1: float
    delta2: float
    gamma_gb: float
    kappa: float
    gamma_ag: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{f.name}: expected a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f"{f.name}: must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        if self.gamma_ag != 1.0:
            raise ConfigError("gamma_ag: fixed to 1 (unit of all rates)")
        if self.n_atoms <= 0:
            raise ConfigError("n_atoms: must be positive")
        for name in ("g1", "g2", "gamma_gb"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be non-negative")
        # omega1 = 0 is the degenerate no-drive case and is kept usable
        if self.omega1 < 0:
            raise ConfigError("omega1: must be non-negative")
        if self.omega2 <= 0:
            raise ConfigError("omega2: must be positive")
        if self.kappa <= 0:
            raise ConfigError("kappa: must be positive")
        if self.delta_big == 0:
            raise ConfigError("delta_big: must be non-zero")

    def replace(self, **changes) -> "PhysicalParams":
        return PhysicalParams(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


REQUIRED_FIELDS = tuple(f.name for f in fields(PhysicalParams) if f.name != "gamma_ag")


def params_from_mapping(data: Mapping[str, Any], *, extra_keys: tuple[str, ...] = ()) -> PhysicalParams:
    """Build parameters from a mapping with exactly the ``PhysicalParams`` keys.

    Keys listed in ``extra_keys`` are tolerated and ignored (used for envelope
    fields such as ``schema_version``); anything else is rejected.
    """
    if not isinstance(data, Mapping):
        raise ConfigError("parameter document must be a JSON object")
    known = set(REQUIRED_FIELDS) | {"gamma_ag"}
    unknown = sorted(set(data) - known - set(extra_keys))
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED_FIELDS if k not in data]
    if missing:
        raise ConfigError(f"missing field(s): {', '.join(missing)}")
    return PhysicalParams(**{k: data[k] for k in known if k in data})


def load_params(path: str | Path, *, extra_keys: tuple[str, ...] = ()) -> PhysicalParams:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return params_from_mapping(data, extra_keys=extra_keys)


@dataclass(frozen=True)
class DerivedRates:
    """Rates derived from :class:`PhysicalParams` by adiabatic elimination.

    ``polariton_decay`` is the large-eta form ``gamma_l + kappa/eta``; the
    dynamical model uses the exact ``(kappa + eta*gamma_l)/(1 + eta)``.
    """

    xi: float
    gamma_l: float
    eta: float
    gamma_gb_bar: float
    light_shift: float
    polariton_decay: float
    cooperativity: float
    mixing_angle_cos2: float
    mixing_angle_sin2: float
    kappa_over_eta: float


def derive_rates(p: PhysicalParams) -> DerivedRates:
    g2n = p.g2 ** 2 * p.n_atoms
    total = g2n + p.omega2 ** 2
    xi = (p.omega1 * p.omega2 / p.delta_big) * p.g1 * math.sqrt(p.n_atoms) / math.sqrt(total)
    gamma_l = p.gamma_ag * p.omega1 ** 2 / p.delta_big ** 2
    eta = g2n / p.omega2 ** 2
    # eta = 0 (no atoms on the EIT transition) leaves the cavity leak undefined
    kappa_over_eta = p.kappa / eta if eta > 0 else math.inf
    return DerivedRates(
        xi=xi,
        gamma_l=gamma_l,
        eta=eta,
        gamma_gb_bar=p.gamma_gb + gamma_l,
        light_shift=p.omega1 ** 2 / p.delta_big,
        polariton_decay=gamma_l + kappa_over_eta,
        cooperativity=g2n / (p.gamma_ag * p.kappa),
        mixing_angle_cos2=p.omega2 ** 2 / total,
        mixing_angle_sin2=g2n / total,
        kappa_over_eta=kappa_over_eta,
    )


def _check_xi(d: DerivedRates):
    if not d.xi > 0:
        raise ValueError(f"pair coupling xi must be positive, got {d.xi!r}")


def predict_variance(d: DerivedRates, t):
    """Closed-form squeezed-quadrature variance for equal couplings.

    Accepts a scalar or numpy array of times. The expression is an expansion
    valid for ``xi*t > 1``; it is evaluated for any ``t >= 0``.
    """
    _check_xi(d)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    xi, gl, ke = d.xi, d.gamma_l, d.kappa_over_eta
    out = 0.5 * (
        np.exp(-2 * xi * t)
        + 2 * gl / xi
        + ke / xi
        + np.exp(2 * xi * t) * ((gl + ke) / (4 * xi)) ** 2
    )
    return float(out) if out.ndim == 0 else out


def optimal_time_variance(d: DerivedRates) -> float:
    """Variance reached at the optimal time, ``(5 gamma_l + 3 kappa/eta)/(4 xi)``."""
    _check_xi(d)
    return (5 * d.gamma_l + 3 * d.kappa_over_eta) / (4 * d.xi)


def predict_optimal_time(d: DerivedRates) -> float:
    """Interaction time t* of maximal squeezing: ``exp(-2 xi t*) = gamma_D/(4 xi)``."""
    _check_xi(d)
    loss = d.gamma_l + d.kappa_over_eta
    if loss <= 0:
        raise ValueError("t* unbounded: lossless model squeezes forever")
    ratio = loss / (4 * d.xi)
    if ratio >= 1:
        raise ValueError(f"no squeezing window: (gamma_L + kappa/eta)/(4 xi) = {ratio:.4g} >= 1")
    return -math.log(ratio) / (2 * d.xi)


def predict_optimal_detuning(p: PhysicalParams) -> float:
    """Single-photon detuning that minimises the squeezed variance at t*."""
    cooperativity = p.g2 ** 2 * p.n_atoms / (p.gamma_ag * p.kappa)
    return p.gamma_ag * math.sqrt(5 * p.omega1 ** 2 / (3 * p.omega2 ** 2) * cooperativity)


def predict_optimal_squeezing(p: PhysicalParams) -> float:
    """Best achievable variance ``sqrt(15/4)/sqrt(C)`` at the optimal detuning."""
    cooperativity = p.g2 ** 2 * p.n_atoms / (p.gamma_ag * p.kappa)
    return math.sqrt(15 / 4) / math.sqrt(cooperativity)


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    satisfied: bool
    ratio: float
    description: str


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple[RegimeCheck, ...]
    notes: tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.satisfied]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [asdict(c) for c in self.checks],
            "notes": list(self.notes),
        }


def regime_check(p: PhysicalParams, threshold: float = DEFAULT_THRESHOLD) -> RegimeReport:
    """Report whether ``p`` lies where the reduced two-mode model applies.

    Each check reports ``ratio`` = left side / right side of its inequality.
    Strong inequalities pass when ``ratio >= threshold``; the squeezing
    threshold ``g2^2 N >= 2 kappa gamma`` and the equal-coupling condition
    pass at ratio 1.
    """
    if not threshold > 1:
        raise ValueError("threshold must exceed 1")
    g2n = p.g2 ** 2 * p.n_atoms
    strong = [
        ("far_detuned", abs(p.delta_big) / p.gamma_ag, "|Delta| >> gamma_ag"),
        ("cooperativity", g2n / (p.gamma_ag * p.kappa), "g2^2 N / (gamma_ag kappa) >> 1"),
        ("slow_light", g2n / p.omega2 ** 2, "eta = g2^2 N / Omega2^2 >> 1"),
        ("eit_condition", p.omega2 ** 2 / (p.gamma_ag * p.kappa), "|Omega2|^2 >> gamma_ag kappa"),
    ]
    checks = [RegimeCheck(name, ratio >= threshold, ratio, desc) for name, ratio, desc in strong]
    ratio = g2n / (2 * p.kappa * p.gamma_ag)
    checks.append(RegimeCheck("squeezing_threshold", ratio >= 1, ratio, "g2^2 N >= 2 kappa gamma"))
    ratio = p.g2 / p.g1 if p.g1 > 0 else math.inf
    checks.append(
        RegimeCheck("equal_couplings", math.isclose(p.g1, p.g2, rel_tol=1e-12), ratio,
                    "g1 = g2 (closed-form variance applies)")
    )
    notes = ("squeezing_threshold reads the unsubscripted gamma as gamma_ag",)
    return RegimeReport(tuple(checks), notes)
