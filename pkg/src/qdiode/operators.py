"""Two-qubit operator algebra, bare/dressed Hamiltonians and the dressed eigensystem.

Basis ordering is |++>, |+->, |-+>, |--> (left qubit major, excited state first),
so ``sigma_z = diag(1, -1)`` and ``sigma_minus`` maps index 0 to index 1.

The dressing unitary is ``U = exp(-i theta/2 sz_L sy_R)`` and dressed operators
are ``U sigma U^dagger``.  With this choice the bare Hamiltonian is, as an
operator identity, ``(w_L/2) sz~_L + (Omega/2) sz~_R``, and ``U^dagger H U`` is
diagonal.  The dressed right-qubit inversion comes out as

    sz~_R = cos(theta) sz_R + sin(theta) sz_L sx_R

which is the sign required by the other five transformed Paulis (the Pauli
algebra fixes ``sz~ = -i sx~ sy~``).  The eigenvectors are ``U |k>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .errors import DegenerateAngleError

SITES = ("L", "R")
AXES = ("x", "y", "z")

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}
_I2 = np.eye(2, dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def pauli(axis: str) -> np.ndarray:
    """Single-qubit Pauli or ladder matrix; ``axis`` in x, y, z, plus, minus."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def embed(op: np.ndarray, site: str) -> np.ndarray:
    """Lift a 2x2 operator onto the left (``op (x) I``) or right (``I (x) op``) qubit."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    if site == "L":
        return np.kron(op, _I2)
    if site == "R":
        return np.kron(_I2, op)
    raise ValueError(f"unknown site {site!r}")


_BARE = {(s, a): _frozen(embed(_PAULI[a], s)) for s in SITES for a in ("x", "y", "z", "plus", "minus")}


def _bare(site: str, axis: str) -> np.ndarray:
    return _BARE[site, axis]


@dataclass(frozen=True)
class SystemSpec:
    """Qubit frequencies and the anisotropic coupling (hbar = 1)."""

    omega_l: float
    omega_r: float
    g: float

    def __post_init__(self):
        for name in ("omega_l", "omega_r", "g"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.omega_l == 0 and self.omega_r == 0 and self.g == 0:
            raise ValueError("omega_l, omega_r and g cannot all be zero")

    @property
    def omega_big(self) -> float:
        return float(np.hypot(self.omega_r, 2.0 * self.g))

    @property
    def theta(self) -> float:
        return mixing_angle(self.omega_r, self.g)


def bare_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """``(w_L/2) sz_L + (w_R/2) sz_R + g sz_L sx_R`` in the product basis."""
    return (
        0.5 * spec.omega_l * _bare("L", "z")
        + 0.5 * spec.omega_r * _bare("R", "z")
        + spec.g * _bare("L", "z") @ _bare("R", "x")
    )


def mixing_angle(omega_r: float, g: float) -> float:
    """Angle with ``sin = 2g/Omega`` and ``cos = omega_r/Omega``.

    Lies in [0, pi/2] for nonnegative inputs; atan2 covers the other quadrants.
    """
    if omega_r == 0 and g == 0:
        raise DegenerateAngleError("mixing angle undefined for omega_r = g = 0")
    return float(np.arctan2(2.0 * g, omega_r))


def dressing_unitary(theta: float) -> np.ndarray:
    """``exp(-i theta/2 sz_L sy_R)``.

    The generator squares to the identity, so the exponential is
    ``cos(theta/2) I - i sin(theta/2) sz_L sy_R``.
    """
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    k = _bare("L", "z") @ _bare("R", "y")
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * k


def dressed_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """Diagonal dressed Hamiltonian ``diag(w_1, w_2, w_3, w_4)``."""
    wl, om = spec.omega_l, spec.omega_big
    return np.diag([0.5 * (wl + om), 0.5 * (wl - om), 0.5 * (-wl + om), 0.5 * (-wl - om)]).astype(complex)


OperatorSource = Callable[[str, str], np.ndarray]


def transform_sigma(site: str, axis: str, theta: float, ops: OperatorSource = _bare) -> np.ndarray:
    """Closed-form transformed Pauli built from the operators supplied by ``ops``.

    With the default (bare Paulis) this is the dressed operator.  Feeding the
    dressed operators back in with ``-theta`` recovers the bare ones.
    """
    c, s = np.cos(theta), np.sin(theta)
    if site == "L":
        if axis == "x":
            return c * ops("L", "x") + s * ops("L", "y") @ ops("R", "y")
        if axis == "y":
            return c * ops("L", "y") - s * ops("L", "x") @ ops("R", "y")
        if axis == "z":
            return ops("L", "z").copy()
    elif site == "R":
        if axis == "x":
            return c * ops("R", "x") - s * ops("L", "z") @ ops("R", "z")
        if axis == "y":
            return ops("R", "y").copy()
        if axis == "z":
            return c * ops("R", "z") + s * ops("L", "z") @ ops("R", "x")
    raise ValueError(f"invalid site/axis {site!r}/{axis!r}")


def dressed_sigma(site: str, axis: str, theta: float) -> np.ndarray:
    return transform_sigma(site, axis, theta)


def ladder(site: str, sign: str, theta: float) -> np.ndarray:
    """Dressed ladder ``(sx~ +/- i sy~)/2`` in the bare product basis."""
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    x = dressed_sigma(site, "x", theta)
    y = dressed_sigma(site, "y", theta)
    return 0.5 * (x + 1j * y) if sign == "+" else 0.5 * (x - 1j * y)


@lru_cache(maxsize=4096)
def dressed_ladders(theta: float) -> Mapping[str, np.ndarray]:
    """Cached read-only ladders keyed ``Lm, Lp, Rm, Rp``."""
    return {
        "Lm": _frozen(ladder("L", "-", theta)),
        "Lp": _frozen(ladder("L", "+", theta)),
        "Rm": _frozen(ladder("R", "-", theta)),
        "Rp": _frozen(ladder("R", "+", theta)),
    }


@dataclass(frozen=True)
class DressedFrame:
    theta: float
    omega_big: float
    unitary: np.ndarray
    eigenstates: np.ndarray  # columns |1>..|4> in the bare basis
    eigenvalues: np.ndarray
    transition_freqs: dict = field(default_factory=dict)

    def state(self, k: int) -> np.ndarray:
        """Eigenvector ``|k>`` for k in 1..4."""
        return self.eigenstates[:, k - 1]


def eigensystem(spec: SystemSpec) -> DressedFrame:
    """Dressed eigenbasis from the closed-form cos/sin(theta/2) coefficients."""
    theta = mixing_angle(spec.omega_r, spec.g)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    # rows: |++>, |+->, |-+>, |-->
    states = np.array(
        [
            [c, -s, 0, 0],
            [s, c, 0, 0],
            [0, 0, c, s],
            [0, 0, -s, c],
        ],
        dtype=complex,
    )
    wl, om = spec.omega_l, spec.omega_big
    eigenvalues = np.real(np.diag(dressed_hamiltonian(spec))).copy()
    freqs = {
        "13": wl,
        "24": wl,
        "14": wl + om,
        "23": wl - om,
        "12": om,
        "34": om,
    }
    return DressedFrame(
        theta=theta,
        omega_big=om,
        unitary=dressing_unitary(theta),
        eigenstates=states,
        eigenvalues=eigenvalues,
        transition_freqs=freqs,
    )
