"""Global master-equation generator built from dressed-channel dissipators.

Density matrices are column-stacked: ``vec(rho) = rho.reshape(-1, order="F")``,
so ``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .operators import SystemSpec, bare_hamiltonian, dressed_ladders, mixing_angle
from .spectrum import BathSpec, response

BATHS = ("L", "R")
_I4 = np.eye(4, dtype=complex)


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape((n, n), order="F")


def dissipator(jump: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``A rho A^+ - (A^+ A rho + rho A^+ A)/2``."""
    jump = np.asarray(jump)
    rho = np.asarray(rho)
    if jump.shape != rho.shape or jump.ndim != 2 or jump.shape[0] != jump.shape[1]:
        raise ValueError(f"shape mismatch: jump {jump.shape}, rho {rho.shape}")
    ad = jump.conj().T
    ada = ad @ jump
    return jump @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


def dissipator_superoperator(jump: np.ndarray) -> np.ndarray:
    jump = np.asarray(jump, dtype=complex)
    n = jump.shape[0]
    eye = np.eye(n, dtype=complex)
    ada = jump.conj().T @ jump
    return np.kron(jump.conj(), jump) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye)


def commutator_superoperator(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> -i [H, rho]``."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0], dtype=complex)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


class Channel(NamedTuple):
    jump: np.ndarray
    weight: float
    qubit: str
    bath: str
    frequency: float  # energy removed from the system by one jump
    name: str


# (name, jump key(s), frequency label, sign, trig factor)
_LEFT_TEMPLATE = (
    ("L-", ("Lm",), "wl", +1, "cos"),
    ("L+", ("Lp",), "wl", -1, "cos"),
    ("L-R+", ("Lm", "Rp"), "w23", +1, "sin"),
    ("L+R-", ("Lp", "Rm"), "w23", -1, "sin"),
    ("L-R-", ("Lm", "Rm"), "w14", +1, "sin"),
    ("L+R+", ("Lp", "Rp"), "w14", -1, "sin"),
)
_RIGHT_TEMPLATE = (
    ("R-", ("Rm",), "om", +1, "cos"),
    ("R+", ("Rp",), "om", -1, "cos"),
)
CHANNEL_NAMES = tuple(t[0] for t in _LEFT_TEMPLATE + _RIGHT_TEMPLATE)


def _jump(theta: float, keys) -> np.ndarray:
    lad = dressed_ladders(theta)
    out = lad[keys[0]]
    for k in keys[1:]:
        out = out @ lad[k]
    return out


@lru_cache(maxsize=4096)
def _unit_superoperators(theta: float) -> np.ndarray:
    """Stack of the eight unweighted dissipator superoperators, order ``CHANNEL_NAMES``."""
    stack = np.array([dissipator_superoperator(_jump(theta, t[1])) for t in _LEFT_TEMPLATE + _RIGHT_TEMPLATE])
    stack.setflags(write=False)
    return stack


def _frequencies(spec: SystemSpec) -> dict:
    om = spec.omega_big
    return {"wl": spec.omega_l, "om": om, "w23": spec.omega_l - om, "w14": spec.omega_l + om}


def _channels(spec, baths, bath, template, qubit):
    theta = mixing_angle(spec.omega_r, spec.g)
    # ratios rather than cos/sin of theta so both limits (g = 0, w_R = 0) are exact zeros
    om2 = spec.omega_r ** 2 + 4.0 * spec.g ** 2
    trig = {"cos": spec.omega_r ** 2 / om2, "sin": 4.0 * spec.g ** 2 / om2}
    freqs = _frequencies(spec)
    kappa = baths.kappa(qubit, bath)
    temp = baths.temperature(bath)
    out = []
    for name, keys, label, sign, t in template:
        w = sign * freqs[label]
        weight = response(kappa, w, temp, baths.kind) * trig[t]
        out.append(Channel(_jump(theta, keys), float(weight), qubit, bath, float(w), name))
    return out


def left_qubit_channels(spec: SystemSpec, baths: BathSpec, bath: str) -> list:
    """Six channels through which bath ``bath`` acts on the left qubit."""
    return _channels(spec, baths, bath, _LEFT_TEMPLATE, "L")


def right_qubit_channels(spec: SystemSpec, baths: BathSpec, bath: str) -> list:
    """Two channels through which bath ``bath`` acts on the right qubit."""
    return _channels(spec, baths, bath, _RIGHT_TEMPLATE, "R")


@dataclass(frozen=True)
class Generator:
    """Assembled generator plus the per-bath pieces used for heat bookkeeping.

    ``hamiltonian`` is the system Hamiltonian in the same (bare product)
    representation the superoperator acts in; heat currents are measured
    against it.
    """

    superoperator: np.ndarray
    per_bath: dict
    channels: dict
    spec: SystemSpec
    baths: BathSpec
    hamiltonian: np.ndarray
    coherent: bool = False
    pruned: bool = False
    diagnostics: tuple = field(default=())

    def apply(self, rho: np.ndarray, bath: str | None = None) -> np.ndarray:
        s = self.superoperator if bath is None else self.per_bath[bath]
        return unvectorize(s @ vectorize(rho))

    def extended(self, bath: str | None = None) -> np.ndarray:
        """Generator (or one bath's part) in extended precision.

        The full generator is re-summed from the per-bath parts so that
        ``extended("L") + extended("R")`` (plus the coherent term) is exactly
        what the refined steady state annihilates.
        """
        if bath is not None:
            return self.per_bath[bath].astype(np.clongdouble)
        total = self.per_bath["L"].astype(np.clongdouble) + self.per_bath["R"].astype(np.clongdouble)
        if self.coherent:
            total = total + commutator_superoperator(self.hamiltonian).astype(np.clongdouble)
        return total


def assemble(spec: SystemSpec, baths: BathSpec, *, coherent: bool = False, prune: bool = False) -> Generator:
    """Sum of ``L_Lj + L_Rj`` over both baths ``j``.

    ``coherent=True`` adds ``-i[H, .]`` (Schroedinger picture); by default the
    generator is the purely dissipative interaction-picture one.  ``prune``
    drops channels with weight below 1e-15 from the superoperator sums only;
    the channel lists always keep all eight per bath.
    """
    theta = mixing_angle(spec.omega_r, spec.g)
    units = _unit_superoperators(theta)
    per_bath, channels = {}, {}
    for bath in BATHS:
        chans = left_qubit_channels(spec, baths, bath) + right_qubit_channels(spec, baths, bath)
        weights = np.array([c.weight for c in chans])
        if np.any(weights < 0):
            raise AssertionError("negative channel weight")
        if prune:
            weights = np.where(weights < 1e-15, 0.0, weights)
        per_bath[bath] = (weights @ units.reshape(len(weights), -1)).reshape(16, 16)
        per_bath[bath].setflags(write=False)
        channels[bath] = chans
    total = per_bath["L"] + per_bath["R"]
    h = bare_hamiltonian(spec)
    if coherent:
        total = total + commutator_superoperator(h)
    total.setflags(write=False)

    diagnostics = []
    w23 = spec.omega_l - spec.omega_big
    if abs(w23) < 10 * baths.max_kappa:
        diagnostics.append("near_degenerate_w23")
    return Generator(total, per_bath, channels, spec, baths, h, coherent, prune, tuple(diagnostics))
