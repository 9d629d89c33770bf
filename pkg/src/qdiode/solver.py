"""Steady states (SVD null space) and RK4 time evolution of the density matrix."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import eigh

from .errors import DegenerateSteadyStateError, InfeasibleSteadyStateError, StepSizeError
from .liouvillian import Generator, unvectorize, vectorize

NULL_RTOL = 1e-10
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SteadySolution:
    """Stationary state.

    ``rho`` is the double-precision density matrix.  ``rho_precise`` is the
    same state after iterative refinement in extended precision; heat
    bookkeeping uses it so that the first law holds far below the double
    rounding floor of the currents.
    """

    rho: np.ndarray
    residual: float
    nullspace_dim: int
    rho_precise: np.ndarray | None = None


def _superop(gen) -> np.ndarray:
    return gen.superoperator if isinstance(gen, Generator) else np.asarray(gen)


def _normalize(v: np.ndarray) -> np.ndarray:
    rho = unvectorize(v)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _refine(s_ext: np.ndarray, rho: np.ndarray, u, sv, vh, sweeps: int = 3) -> np.ndarray:
    """Newton-style refinement of a null vector with extended-precision residuals.

    Corrections come from the double SVD pseudo-inverse restricted to the
    non-null singular directions.
    """
    keep = slice(0, sv.size - 1)
    v = vectorize(rho).astype(np.clongdouble)
    for _ in range(sweeps):
        r = (s_ext @ v).astype(complex)
        if not np.any(r):
            break
        delta = vh[keep].conj().T @ ((u[:, keep].conj().T @ r) / sv[keep])
        v = v - delta.astype(np.clongdouble)
    return _normalize(v)


def steady_state(gen: Generator, refine: bool = True) -> SteadySolution:
    """Unique stationary state from the right singular vectors of the generator.

    Singular values below ``1e-10 * max`` count as null.  Degenerate null
    spaces are reported, never resolved.
    """
    s = _superop(gen)
    u, sv, vh = np.linalg.svd(s)
    cutoff = NULL_RTOL * sv[0] if sv[0] > 0 else 0.0
    null = vh[sv <= cutoff].conj() if sv[0] > 0 else vh.conj()
    dim = null.shape[0]
    if dim != 1:
        raise DegenerateSteadyStateError(
            f"steady state is not unique: null space dimension {dim}",
            null_vectors=[unvectorize(v) for v in null],
            nullspace_dim=dim,
            residual=float(max((np.linalg.norm(s @ v) for v in null), default=np.nan)),
        )
    rho = unvectorize(null[0])
    tr = np.trace(rho)
    if abs(tr) < 1e-12:  # null vector has unit norm
        raise InfeasibleSteadyStateError("null vector is traceless")
    rho = _normalize(vectorize(rho / tr))
    precise = None
    if refine:
        s_ext = gen.extended() if isinstance(gen, Generator) else s.astype(np.clongdouble)
        precise = _refine(s_ext, rho, u, sv, vh)
        rho = precise.astype(complex)
    residual = float(np.linalg.norm(s @ vectorize(rho)))
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -POSITIVITY_TOL:
        raise InfeasibleSteadyStateError(
            f"stationary vector is not positive (min eigenvalue {lowest:.3e})", residual=residual
        )
    return SteadySolution(rho, residual, dim, precise)


def _mp_matvec(rows, v):
    return [mpmath.fdot(row, v) for row in rows]


def _mp_matrix(a: np.ndarray) -> list:
    return [[mpmath.mpc(complex(x)) for x in row] for row in a]


def refine_multiprecision(gen: Generator, sol: SteadySolution, dps: int = 40, sweeps: int = 4):
    """Steady state refined in ``dps``-digit arithmetic, as a column-stacked list of ``mpc``.

    Fallback for points where even extended precision leaves the heat
    currents unresolved (equilibrium, decoupled qubits): residuals are formed
    from the exact double entries of each bath's part, corrections come from
    the double SVD.  Returns ``(vector, per_bath_rows)`` evaluated under the
    same working precision, which stays in effect only inside the call.
    """
    u, sv, vh = np.linalg.svd(gen.superoperator)
    keep = slice(0, sv.size - 1)
    with mpmath.workdps(dps):
        parts = {b: _mp_matrix(gen.per_bath[b]) for b in ("L", "R")}
        if gen.coherent:
            from .liouvillian import commutator_superoperator

            parts["H"] = _mp_matrix(commutator_superoperator(gen.hamiltonian))
        start = sol.rho_precise if sol.rho_precise is not None else sol.rho
        v = [mpmath.mpc(complex(x)) for x in vectorize(start.astype(complex))]
        for _ in range(sweeps):
            r = [sum(t) for t in zip(*(_mp_matvec(rows, v) for rows in parts.values()))]
            rr = np.array([complex(x) for x in r])
            if not np.any(rr):
                break
            delta = vh[keep].conj().T @ ((u[:, keep].conj().T @ rr) / sv[keep])
            v = [a - mpmath.mpc(complex(d)) for a, d in zip(v, delta)]
        n = int(round(len(v) ** 0.5))
        # Hermitize and renormalize (column-stacked index j*n + i holds rho[i, j])
        v = [(v[j * n + i] + mpmath.conj(v[i * n + j])) / 2 for j in range(n) for i in range(n)]
        tr = mpmath.fsum(v[k * n + k] for k in range(n)).real
        v = [x / tr for x in v]
        currents = {}
        h = [mpmath.mpc(complex(x)) for x in vectorize(gen.hamiltonian.T)]
        for b in ("L", "R"):
            currents[b] = mpmath.fdot(h, _mp_matvec(parts[b], v))
        return v, currents


def max_entry(gen) -> float:
    return float(np.max(np.abs(_superop(gen))))


def rk4_step_matrix(s: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear system ``v' = S v``."""
    a = dt * s
    a2 = a @ a
    a3 = a2 @ a
    return np.eye(s.shape[0]) + a + a2 / 2 + a3 / 6 + a3 @ a / 24


def evolve(gen: Generator, rho0: np.ndarray, t_final: float, dt: float | None = None) -> np.ndarray:
    """Fixed-step RK4 from ``rho0`` to ``t_final``.

    The generator is time independent, so ``n`` RK4 steps equal the ``n``-th
    power of the one-step matrix; that power is taken by repeated squaring,
    which makes very long horizons cheap.  The last step is shortened so the
    endpoint is hit exactly.

    Guard: ``dt * max|S_ij| < 0.1``; default ``dt = 0.01 / max|S_ij|``.
    """
    s = _superop(gen)
    scale = max_entry(s)
    if dt is None:
        dt = 0.01 / scale if scale > 0 else max(t_final, 1.0)
    if dt <= 0:
        raise StepSizeError(f"dt must be positive, got {dt}")
    if dt * scale >= 0.1:
        raise StepSizeError(f"dt * max|S| = {dt * scale:.3g} violates the 0.1 stability guard")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")

    v = vectorize(np.asarray(rho0, dtype=complex))
    n = int(np.floor(t_final / dt))
    rest = t_final - n * dt
    step = rk4_step_matrix(s, dt)
    while n:
        if n & 1:
            v = step @ v
        n >>= 1
        if n:
            step = step @ step
    if rest > 1e-15 * max(t_final, 1.0):
        v = rk4_step_matrix(s, rest) @ v
    return unvectorize(v)


def gibbs(hamiltonian: np.ndarray, temperature: float) -> np.ndarray:
    """``exp(-H/T)/Z``."""
    if not temperature > 0:
        raise ValueError(f"Gibbs state needs T > 0, got {temperature}")
    h = np.asarray(hamiltonian, dtype=complex)
    w, v = eigh(h)
    p = np.exp(-(w - w.min()) / temperature)
    p /= p.sum()
    return (v * p) @ v.conj().T


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a) - np.asarray(b)
    d = 0.5 * (d + d.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(d))))


def relaxation_gap(gen) -> float:
    """Smallest nonzero decay rate ``min |Re lambda|`` of the generator."""
    lam = np.linalg.eigvals(_superop(gen))
    mag = np.abs(lam)
    nz = lam[mag > NULL_RTOL * max(mag.max(), 1e-300)]
    return float(np.min(np.abs(nz.real))) if nz.size else 0.0
