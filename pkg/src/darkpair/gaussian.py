"""Two-mode Gaussian engine for the reduced polariton / spin-wave model.

The mode vector is ``(P_D, S1^dagger)``. Its complex drift is mapped onto the
real quadratures ``(X_D, Y_D, X_1, Y_1)`` with ``X = (a + a^dagger)/sqrt(2)``,
``Y = i(a - a^dagger)/sqrt(2)``, and the symmetrised covariance obeys

    dC/dt = A C + C A^T + D

Each dissipative term is an independent reservoir. An amplitude loss rate
``L`` corresponds to a jump operator ``sqrt(2L) a``, an amplitude gain rate
``G`` to ``sqrt(2G) a^dagger``; together they contribute ``-(L - G)`` to the
drift diagonal and ``(L + G)`` per quadrature to ``D``.

Internally the covariance is propagated in the sum/difference frame
``(X+, Y+, X-, Y-)`` where, in the lossless limit, the drift is diagonal. The
squeezed entries then keep full relative precision even at ``xi*t = 5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalGuardError, StepSizeError
from .params import DerivedRates, PhysicalParams, derive_rates, regime_check

# Reservoir occupation of the polariton loss channel. 1/2 doubles the
# polariton diffusion relative to a vacuum bath, which is what the closed-form
# variance's noise terms 2*gamma_L/xi + (kappa/eta)/xi require.
DEFAULT_POLARITON_NOISE = 0.5

STEP_FACTOR = 0.01
OCCUPATION_TOL = 1e-9
CORRELATION_COND_LIMIT = 1e10

_S = 1 / math.sqrt(2)
# (X_D, Y_D, X_1, Y_1) -> (X+, Y+, X-, Y-); symmetric and its own inverse
SUM_DIFF = np.array(
    [[_S, 0, _S, 0],
     [0, _S, 0, _S],
     [_S, 0, -_S, 0],
     [0, _S, 0, -_S]]
)
_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
SYMPLECTIC = np.kron(np.eye(2), _J2)


@dataclass(frozen=True)
class LinearModel:
    """Drift and reservoir decomposition of the reduced two-mode model.

    ``drift`` is written on ``(P_D, S1^dagger)`` in the convention of the
    reduced Langevin equations (coupling ``+i xi`` / ``-i xi``).
    ``gauge_phase`` is the constant rotation ``S1 -> exp(i*phase) S1``
    applied before realification so that ``Y+`` is the squeezed quadrature.
    """

    drift: np.ndarray
    loss_rates: tuple[float, float]
    gain_rates: tuple[float, float]
    gauge_phase: float = -math.pi / 2
    diffusion_scale: float = 1.0
    report: object = field(default=None, compare=False)

    def __post_init__(self):
        drift = np.array(self.drift, dtype=complex)
        if drift.shape != (2, 2):
            raise ValueError("drift must be 2x2")
        object.__setattr__(self, "drift", drift)
        for name in ("loss_rates", "gain_rates"):
            rates = tuple(float(x) for x in getattr(self, name))
            if len(rates) != 2 or any(not math.isfinite(x) or x < 0 for x in rates):
                raise ValueError(f"{name} must be two non-negative finite rates")
            object.__setattr__(self, name, rates)
        if self.diffusion_scale < 0:
            raise ValueError("diffusion_scale must be non-negative")
        for k in range(2):
            net = self.gain_rates[k] - self.loss_rates[k]
            scale = max(1.0, abs(net), self.loss_rates[k])
            if abs(drift[k, k].real - net) > 1e-12 * scale:
                raise ValueError(
                    f"mode {k}: Re(drift diagonal) {drift[k, k].real!r} != gain - loss {net!r}"
                )
        if abs(drift[1, 0] - np.conj(drift[0, 1])) > 1e-12 * max(1.0, abs(drift[0, 1])):
            raise ValueError("pair coupling must satisfy drift[1,0] = conj(drift[0,1])")

    @property
    def xi(self) -> float:
        return float((self.drift[0, 1] / 1j).real)

    def gauged_drift(self) -> np.ndarray:
        # S1 -> e^{i phi} S1 rescales S1^dagger by e^{-i phi}
        u = np.exp(-1j * self.gauge_phase)
        m = self.drift.copy()
        m[0, 1] /= u
        m[1, 0] *= u
        return m


def build_model(
    p: PhysicalParams,
    d: DerivedRates | None = None,
    *,
    polariton_noise: float = DEFAULT_POLARITON_NOISE,
) -> LinearModel:
    """Assemble the reduced drift and reservoir rates from physical inputs.

    The polariton loss channel couples to a reservoir of mean occupation
    ``polariton_noise``: its loss rate is ``(1 + n) * Gamma`` and its gain rate
    ``n * Gamma`` with ``Gamma = (kappa + eta*gamma_L)/(1 + eta)``; ``n = 0``
    is a vacuum bath. The spin wave loses at ``gamma_L`` and gains at
    ``(g2/g1)^2 gamma_L``.
    """
    if d is None:
        d = derive_rates(p)
    if not d.eta > 0:
        raise ValueError("eta = 0: no slow-light polariton")
    if p.g1 == 0:
        raise ValueError("g1 = 0: spin-wave gain (g2/g1)^2 gamma_L undefined")
    if polariton_noise < 0:
        raise ValueError("polariton_noise must be non-negative")
    eta = d.eta
    decay = (p.kappa + eta * (d.gamma_l + 1j * p.delta2)) / (1 + eta)
    gain_s = (p.g2 / p.g1) ** 2 * d.gamma_l
    drift = np.array(
        [[-decay, 1j * d.xi],
         [-1j * d.xi, gain_s - d.gamma_l - 1j * p.delta1]]
    )
    loss_p = decay.real * (1 + polariton_noise)
    gain_p = decay.real * polariton_noise
    # fold rounding of (1+n)G - nG back into the drift so the decomposition is exact
    drift[0, 0] = complex(gain_p - loss_p, drift[0, 0].imag)
    drift[1, 1] = complex(gain_s - d.gamma_l, drift[1, 1].imag)
    phase = -math.pi / 2 if d.xi >= 0 else math.pi / 2
    return LinearModel(drift, (loss_p, d.gamma_l), (gain_p, gain_s), phase,
                       report=regime_check(p))


def real_drift(m: LinearModel) -> np.ndarray:
    """Real 4x4 drift on ``(X_D, Y_D, X_1, Y_1)`` in the squeezing gauge."""
    M = m.gauged_drift()
    # z = (a, a^dagger, b, b^dagger), with the mode vector (a, b^dagger)
    L = np.zeros((4, 4), dtype=complex)
    L[0, 0], L[0, 3] = M[0, 0], M[0, 1]
    L[1, 1], L[1, 2] = np.conj(M[0, 0]), np.conj(M[0, 1])
    L[3, 0], L[3, 3] = M[1, 0], M[1, 1]
    L[2, 1], L[2, 2] = np.conj(M[1, 0]), np.conj(M[1, 1])
    T1 = np.array([[_S, _S], [1j * _S, -1j * _S]])
    T = np.kron(np.eye(2), T1)
    A = T @ L @ np.linalg.inv(T)
    if np.abs(A.imag).max() > 1e-12 * max(1.0, np.abs(A).max()):
        raise NumericalGuardError("realified drift is not real")
    return A.real


def diffusion_matrix(m: LinearModel) -> np.ndarray:
    """Quadrature diffusion ``D`` in the mode basis ``(X_D, Y_D, X_1, Y_1)``."""
    per_mode = [l + g for l, g in zip(m.loss_rates, m.gain_rates)]
    return m.diffusion_scale * np.kron(np.diag(per_mode), np.eye(2))


def commutator_source(m: LinearModel) -> np.ndarray:
    """Noise contribution to the evolution of the quadrature commutator matrix.

    With ``K_ij = -i <[q_i, q_j]>`` the commutators obey
    ``dK/dt = A K + K A^T + N``; for a mode with loss ``L`` and gain ``G``,
    ``N`` is ``-2(L - G) J`` on that mode's block.
    """
    net = [l - g for l, g in zip(m.loss_rates, m.gain_rates)]
    return np.kron(np.diag([-2 * x for x in net]), _J2)


def stability_bound(m: LinearModel) -> tuple[float, str]:
    """Fastest rate in the model and its name."""
    M = m.drift
    rates = {
        "pair coupling xi": abs(m.xi),
        "polariton loss": m.loss_rates[0],
        "polariton gain": m.gain_rates[0],
        "polariton detuning": abs(M[0, 0].imag),
        "spin-wave loss": m.loss_rates[1],
        "spin-wave gain": m.gain_rates[1],
        "spin-wave detuning": abs(M[1, 1].imag),
    }
    name = max(rates, key=rates.get)
    return rates[name], name


def max_step(m: LinearModel) -> float:
    rate, _ = stability_bound(m)
    return math.inf if rate == 0 else STEP_FACTOR / rate


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of the two-mode state at ``time``.

    ``mean`` and ``cov`` are on ``(X_D, Y_D, X_1, Y_1)``; ``cov_pm`` is the
    same covariance on ``(X+, Y+, X-, Y-)``. ``commutators`` holds
    ``<[a, a^dagger]>`` for the polariton and spin-wave modes.
    """

    mean: np.ndarray
    cov: np.ndarray
    time: float
    cov_pm: np.ndarray
    commutators: tuple[float, float] = (1.0, 1.0)

    @classmethod
    def vacuum(cls, time: float = 0.0) -> "GaussianState":
        return cls(np.zeros(4), 0.5 * np.eye(4), time, 0.5 * np.eye(4))

    @classmethod
    def from_cov(cls, mean, cov, time=0.0, commutators=(1.0, 1.0)) -> "GaussianState":
        cov = np.asarray(cov, dtype=float)
        return cls(np.asarray(mean, dtype=float), cov, time, SUM_DIFF @ cov @ SUM_DIFF, commutators)


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_times(t_final: float, dt: float) -> np.ndarray:
    n_full = int(math.floor(t_final / dt))
    times = np.arange(n_full + 1) * dt
    if t_final - times[-1] > 1e-9 * dt:
        times = np.append(times, t_final)
    else:
        times[-1] = t_final
    return times


def evolve(m: LinearModel, t_final: float, dt: float | None = None, *, record_every: int | None = 1) -> list[GaussianState]:
    """Integrate the moment equations from vacuum with classical RK4.

    Returns every ``record_every``-th state, always including ``t = 0`` and
    ``t_final`` (``record_every=None`` keeps only those two).
    ``dt`` defaults to the stability bound ``0.01 / (fastest rate)``; a larger
    explicit ``dt`` raises :class:`StepSizeError`.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    bound = max_step(m)
    if dt is None:
        dt = bound if math.isfinite(bound) else max(t_final, 1.0)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > bound * (1 + 1e-12):
        rate, name = stability_bound(m)
        raise StepSizeError(f"dt={dt:g} exceeds {STEP_FACTOR:g}/{name} = {bound:g} (rate {rate:g})")

    R = SUM_DIFF
    A = R @ real_drift(m) @ R
    D = R @ diffusion_matrix(m) @ R
    N = R @ commutator_source(m) @ R
    At = A.T
    f_mean = lambda x: A @ x
    f_cov = lambda c: A @ c + c @ At + D
    f_comm = lambda k: A @ k + k @ At + N

    mean = np.zeros(4)
    cov = 0.5 * np.eye(4)
    comm = R @ (-SYMPLECTIC) @ R

    times = step_times(t_final, dt) if t_final > 0 else np.array([0.0])
    states = [_make_state(mean, cov, comm, 0.0)]
    last = len(times) - 1
    for k in range(1, len(times)):
        h = times[k] - times[k - 1]
        mean = _rk4(f_mean, mean, h)
        cov = _rk4(f_cov, cov, h)
        cov = 0.5 * (cov + cov.T)
        comm = _rk4(f_comm, comm, h)
        if k == last or (record_every and k % record_every == 0):
            states.append(_make_state(mean, cov, comm, float(times[k])))
    return states


def _make_state(mean_pm, cov_pm, comm_pm, t) -> GaussianState:
    R = SUM_DIFF
    comm = R @ comm_pm @ R
    return GaussianState(
        mean=R @ mean_pm,
        cov=R @ cov_pm @ R,
        time=t,
        cov_pm=cov_pm.copy(),
        commutators=(float(-comm[0, 1]), float(-comm[2, 3])),
    )


def variances(s: GaussianState) -> tuple[float, float, float, float]:
    """Variances ``(y_plus, y_minus, x_plus, x_minus)`` of the sum/difference quadratures."""
    c = s.cov_pm
    return float(c[1, 1]), float(c[3, 3]), float(c[0, 0]), float(c[2, 2])


def minimal_variance(s: GaussianState) -> float:
    """Smallest variance over all normalised joint quadratures.

    Computed as ``1 / lambda_max(cov^-1)`` with the inverse taken on the
    diagonally rescaled covariance. A plain eigensolver has absolute error
    ``eps * |cov|``, which swamps the squeezed eigenvalue once the
    anti-squeezed variances grow large; the rescaled form keeps relative
    accuracy as long as the correlation matrix is well conditioned.
    """
    c = s.cov_pm
    diag = np.diag(c)
    if not np.all(diag > 0):
        raise NumericalGuardError(f"non-positive variance on the diagonal at t={s.time:g}")
    scale = 1 / np.sqrt(diag)
    corr = c * np.outer(scale, scale)
    if np.linalg.cond(corr) > CORRELATION_COND_LIMIT:
        raise NumericalGuardError(f"covariance too ill-conditioned for a minimal variance at t={s.time:g}")
    inverse = np.linalg.inv(corr) * np.outer(scale, scale)
    return float(1 / np.linalg.eigvalsh(inverse)[-1])


def excitations(s: GaussianState) -> tuple[float, float]:
    """Mean occupations ``(n_polariton, n_spinwave)``."""
    second = s.cov + np.outer(s.mean, s.mean)
    n = tuple(float((second[i, i] + second[i + 1, i + 1] - 1) / 2) for i in (0, 2))
    if min(n) < -OCCUPATION_TOL:
        raise NumericalGuardError(f"negative occupation {min(n):.3g} at t={s.time:g}")
    return n


def uncertainty_eigenvalue(s: GaussianState) -> float:
    """Smallest eigenvalue of ``cov + (i/2) Omega``; non-negative for physical states."""
    return float(np.linalg.eigvalsh(s.cov + 0.5j * SYMPLECTIC)[0])


def bosonic_fraction(s: GaussianState, n_atoms: float) -> float:
    """Largest mode occupation relative to the atom number."""
    return max(excitations(s)) / n_atoms
