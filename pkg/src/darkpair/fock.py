"""Brute-force master-equation oracle on a truncated two-mode Fock basis.

The Hamiltonian and jump operators are read off the same :class:`LinearModel`
the Gaussian engine uses (same phase gauge, same reservoir rates), so the two
can be compared moment by moment. Mode order is polariton (x) spin wave.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import OracleGuardError
from .gaussian import GaussianState, LinearModel

TRUNCATION_TOL = 1e-6
TRACE_TOL = 1e-6
QUADRATURE_NAMES = ("X_D", "Y_D", "X_1", "Y_1")


def mode_operators(cutoff: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Annihilation operators of the polariton and spin-wave modes."""
    a1 = sp.diags(np.sqrt(np.arange(1, cutoff + 1)), 1, shape=(cutoff + 1, cutoff + 1), format="csr")
    eye = sp.identity(cutoff + 1, format="csr")
    return sp.kron(a1, eye, format="csr"), sp.kron(eye, a1, format="csr")


def quadrature_operators(cutoff: int) -> list[sp.csr_matrix]:
    s = 1 / math.sqrt(2)
    ops = []
    for a in mode_operators(cutoff):
        ad = a.T.tocsr()
        ops += [s * (a + ad), 1j * s * (a - ad)]
    return [q.tocsr() for q in ops]


@dataclass
class FockState:
    cutoff: int
    rho: np.ndarray
    time: float = 0.0

    @classmethod
    def basis(cls, cutoff: int, n_polariton: int = 0, n_spinwave: int = 0) -> "FockState":
        dim = (cutoff + 1) ** 2
        rho = np.zeros((dim, dim), dtype=complex)
        k = n_polariton * (cutoff + 1) + n_spinwave
        rho[k, k] = 1.0
        return cls(cutoff, rho)

    def populations(self) -> np.ndarray:
        """Joint number distribution ``P[n_polariton, n_spinwave]``."""
        n = self.cutoff + 1
        return np.real(np.diag(self.rho)).reshape(n, n)

    def top_population(self) -> tuple[float, float]:
        pops = self.populations()
        return float(pops[-1, :].sum()), float(pops[:, -1].sum())

    def trace(self) -> float:
        return float(np.trace(self.rho).real)


@dataclass
class FockSeries:
    """Recorded oracle states plus truncation diagnostics."""

    states: list[FockState]
    max_top_population: float
    max_trace_drift: float
    flagged: bool = field(init=False)

    def __post_init__(self):
        self.flagged = self.max_top_population >= TRUNCATION_TOL

    def __getitem__(self, k):
        return self.states[k]

    def __len__(self):
        return len(self.states)


def hamiltonian_and_jumps(m: LinearModel, cutoff: int):
    """Sparse Hamiltonian and jump operators reproducing the model drift."""
    a, b = mode_operators(cutoff)
    ad, bd = a.T.tocsr(), b.T.tocsr()
    M = m.gauged_drift()
    # da/dt = -i w_a a - i lam b^dag, db/dt = -i w_b b - i lam a^dag
    w_a = -M[0, 0].imag
    w_b = M[1, 1].imag
    lam = 1j * M[0, 1]
    H = w_a * (ad @ a) + w_b * (bd @ b) + lam * (ad @ bd) + np.conj(lam) * (a @ b)
    jumps = []
    for op, loss, gain in ((a, *_rates(m, 0)), (b, *_rates(m, 1))):
        if loss > 0:
            jumps.append(math.sqrt(2 * loss) * op)
        if gain > 0:
            jumps.append(math.sqrt(2 * gain) * op.T.tocsr())
    return H.tocsr(), jumps


def _rates(m: LinearModel, k: int) -> tuple[float, float]:
    return m.loss_rates[k], m.gain_rates[k]


def liouvillian(m: LinearModel, cutoff: int):
    """Return ``rho -> d rho/dt`` for the Lindblad equation of ``m``."""
    H, jumps = hamiltonian_and_jumps(m, cutoff)
    h_eff = H.astype(complex)
    for J in jumps:
        h_eff = h_eff - 0.5j * (J.T.conj() @ J)
    h_eff = h_eff.tocsr()

    def rhs(rho):
        x = -1j * (h_eff @ rho)
        out = x + x.conj().T
        for J in jumps:
            out += J @ (J @ rho.conj().T).conj().T
        return out

    return rhs


def oracle_evolve(
    m: LinearModel,
    t_final: float,
    dt: float,
    cutoff: int,
    *,
    record_every: int | None = None,
    initial: FockState | None = None,
) -> FockSeries:
    """Integrate the master equation with fixed-step RK4.

    Only the initial and final states are kept unless ``record_every`` is
    given. Raises :class:`OracleGuardError` when the cutoff is too small for
    the expected pair number or when the trace drifts by more than 1e-6.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if not dt > 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    expected = math.sinh(abs(m.xi) * t_final) ** 2
    if expected > cutoff / 6:
        raise OracleGuardError(
            f"cutoff {cutoff} too small: expected occupation sinh^2(xi t) = {expected:.3g} > cutoff/6"
        )
    rhs = liouvillian(m, cutoff)
    state = initial if initial is not None else FockState.basis(cutoff)
    rho = state.rho.astype(complex)

    n_full = int(math.floor(t_final / dt))
    steps = [dt] * n_full
    if t_final - n_full * dt > 1e-9 * dt:
        steps.append(t_final - n_full * dt)

    states = [FockState(cutoff, rho.copy(), 0.0)]
    top = max(states[0].top_population())
    drift = 0.0
    t = 0.0
    for k, h in enumerate(steps, start=1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_final if k == len(steps) else k * dt
        current = FockState(cutoff, rho, t)
        drift = max(drift, abs(current.trace() - 1))
        if drift > TRACE_TOL:
            raise OracleGuardError(f"trace drift {drift:.3g} at t={t:g}")
        top = max(top, *current.top_population())
        if k == len(steps) or (record_every and k % record_every == 0):
            states.append(FockState(cutoff, rho.copy(), t))
    return FockSeries(states, top, drift)


def _expect(op, rho) -> complex:
    return complex((op @ rho).trace())


def _padded(f: FockState, extra: int = 2) -> tuple[int, np.ndarray]:
    """Embed ``rho`` in a basis with ``extra`` more levels per mode.

    Products of up to ``2*extra`` quadratures then have exact matrix elements
    between the retained states; the truncated operators would not.
    """
    n, big = f.cutoff + 1, f.cutoff + 1 + extra
    out = np.zeros((big, big, big, big), dtype=complex)
    out[:n, :n, :n, :n] = f.rho.reshape(n, n, n, n)
    return f.cutoff + extra, out.reshape(big * big, big * big)


def moments(f: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature means and symmetrised covariance on ``(X_D, Y_D, X_1, Y_1)``."""
    cutoff, rho = _padded(f, 1)
    q = quadrature_operators(cutoff)
    mean = np.array([_expect(Q, rho).real for Q in q])
    cov = np.empty((4, 4))
    for i, j in itertools.combinations_with_replacement(range(4), 2):
        sym = 0.5 * (q[i] @ q[j] + q[j] @ q[i])
        cov[i, j] = cov[j, i] = _expect(sym, rho).real - mean[i] * mean[j]
    return mean, cov


def cumulant_directions() -> np.ndarray:
    """Unit vectors with entries in {-1, 0, 1}, one per sign class (40 total)."""
    dirs = []
    for v in itertools.product((-1, 0, 1), repeat=4):
        v = np.array(v, dtype=float)
        nz = np.flatnonzero(v)
        if len(nz) and v[nz[0]] > 0:
            dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def fourth_cumulants(f: FockState) -> np.ndarray:
    """Fourth cumulant of ``u . q`` for every direction of :func:`cumulant_directions`.

    These directions determine the full symmetric fourth-cumulant tensor; all
    entries vanish for a Gaussian state.
    """
    cutoff, rho = _padded(f, 2)
    q = quadrature_operators(cutoff)
    out = []
    for u in cumulant_directions():
        Q = sum(c * op for c, op in zip(u, q) if c)
        x = rho
        m = []
        for _ in range(4):
            x = Q @ x
            m.append(complex(np.trace(x)).real)
        m1, m2, m3, m4 = m
        out.append(m4 - 4 * m3 * m1 - 3 * m2 ** 2 + 12 * m2 * m1 ** 2 - 6 * m1 ** 4)
    return np.array(out)


def _moment_names() -> list[str]:
    names = [f"mean_{n}" for n in QUADRATURE_NAMES]
    names += [
        f"cov_{QUADRATURE_NAMES[i]}_{QUADRATURE_NAMES[j]}"
        for i, j in itertools.combinations_with_replacement(range(4), 2)
    ]
    return names


def compare_moments(
    engine: GaussianState,
    oracle: FockState,
    *,
    abs_tol: float = 1e-4,
    rel_tol: float = 1e-3,
    cumulant_tol: float = 1e-4,
) -> dict:
    """Compare the 14 independent first/second moments of engine and oracle.

    A moment passes when ``|engine - oracle| <= max(abs_tol, rel_tol*|engine|)``.
    The report is JSON-serialisable.
    """
    mean, cov = moments(oracle)
    eng = list(engine.mean) + [engine.cov[i, j] for i, j in itertools.combinations_with_replacement(range(4), 2)]
    orc = list(mean) + [cov[i, j] for i, j in itertools.combinations_with_replacement(range(4), 2)]
    entries = []
    for name, e, o in zip(_moment_names(), eng, orc):
        dev = abs(e - o)
        tol = max(abs_tol, rel_tol * abs(e))
        entries.append({
            "moment": name,
            "engine": float(e),
            "oracle": float(o),
            "abs_dev": float(dev),
            "rel_dev": float(dev / abs(e)) if e != 0 else (0.0 if dev == 0 else math.inf),
            "pass": bool(dev <= tol),
        })
    kappa4 = fourth_cumulants(oracle)
    max_k4 = float(np.abs(kappa4).max())
    top = oracle.top_population()
    return {
        "time": float(engine.time),
        "cutoff": oracle.cutoff,
        "moments": entries,
        "failed_moments": [e["moment"] for e in entries if not e["pass"]],
        "max_fourth_cumulant": max_k4,
        "gaussianity_pass": max_k4 < cumulant_tol,
        "top_population": list(top),
        "truncation_healthy": max(top) < TRUNCATION_TOL,
        "pass": all(e["pass"] for e in entries) and max_k4 < cumulant_tol,
    }
