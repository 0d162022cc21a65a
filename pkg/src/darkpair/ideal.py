"""Lossless pair-generation dynamics: two-mode squeezed vacuum in closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAIL_TOLERANCE = 1e-12
MAX_CUTOFF = 10**6


@dataclass(frozen=True)
class IdealSqueezedState:
    """Pair-number amplitudes ``c_n = tanh(r)**n / cosh(r)`` up to ``n_max``."""

    r: float
    coefficients: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1

    @property
    def probabilities(self) -> np.ndarray:
        return self.coefficients ** 2

    @property
    def deficit(self) -> float:
        """Probability weight lost to truncation, ``tanh(r)**(2*(n_max+1))``."""
        if self.r == 0:
            return 0.0
        return math.exp(2 * (self.n_max + 1) * _log_tanh(self.r))

    def mean_pairs(self) -> float:
        return float(np.dot(np.arange(self.n_max + 1), self.probabilities))


def _log_cosh(r: float) -> float:
    return r + math.log1p(math.exp(-2 * r)) - math.log(2)


def _log_tanh(r: float) -> float:
    # log(1 - 2/(e^{2r} + 1)) without rounding tanh(r) to 1
    e = math.exp(-2 * r)
    return math.log1p(-2 * e / (1 + e))


def minimal_cutoff(r: float, tol: float = TAIL_TOLERANCE) -> int:
    """Smallest n with ``tanh(r)**(2n) < tol``.

    Raises ``ValueError`` when that n exceeds ``MAX_CUTOFF``.
    """
    if r == 0:
        return 0
    log_t = _log_tanh(r)
    n = math.log(tol) / (2 * log_t) if log_t < 0 else math.inf
    if n >= MAX_CUTOFF:
        raise ValueError(f"r={r:g}: a tail below {tol:g} needs more than {MAX_CUTOFF} levels")
    return int(math.floor(n)) + 1


def state_coefficients(r: float, n_max: int | None = None, *, check_tail: bool = True) -> IdealSqueezedState:
    """Amplitudes of the two-mode squeezed vacuum with squeezing parameter ``r``.

    If ``n_max`` is omitted the smallest cutoff with a tail below 1e-12 is
    used; an explicit cutoff that leaves a larger tail raises ``ValueError``
    unless ``check_tail`` is false, in which case the truncated amplitudes are
    returned and ``deficit`` reports the missing weight.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if n_max is None:
        n_max = minimal_cutoff(r)
    elif check_tail:
        needed = minimal_cutoff(r)
        if n_max < needed:
            raise ValueError(f"cutoff n_max={n_max} leaves tail above {TAIL_TOLERANCE:g}; use n_max >= {needed}")
    n = np.arange(n_max + 1)
    if r == 0:
        coeffs = (n == 0).astype(float)
    elif r > 20:
        # cosh overflows long before the amplitudes themselves underflow
        coeffs = np.exp(n * _log_tanh(r) - _log_cosh(r))
    else:
        coeffs = math.tanh(r) ** n / math.cosh(r)
    return IdealSqueezedState(float(r), coeffs)


def ideal_variances(r):
    """Variances ``(var_y_plus, var_x_plus)`` of the squeezed/anti-squeezed sum quadratures."""
    r = np.asarray(r, dtype=float)
    var_y, var_x = 0.5 * np.exp(-2 * r), 0.5 * np.exp(2 * r)
    if r.ndim == 0:
        return float(var_y), float(var_x)
    return var_y, var_x


def ideal_excitations(r):
    """Mean occupation of each mode, ``sinh(r)**2``."""
    out = np.sinh(np.asarray(r, dtype=float)) ** 2
    return float(out) if out.ndim == 0 else out
