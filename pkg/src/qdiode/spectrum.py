"""Thermal occupations and bath spectral responses (k_B = hbar = 1)."""
from __future__ import annotations

import math
from dataclasses import dataclass

KINDS = ("flat", "ohmic")


@dataclass(frozen=True)
class BathSpec:
    """Bath temperatures, spectral kind and qubit-bath rates.

    ``kappa_ij`` couples qubit ``i`` to bath ``j``; the local configuration has
    ``kappa_lr = kappa_rl = 0``.
    """

    t_left: float
    t_right: float
    kappa_ll: float
    kappa_rr: float
    kappa_lr: float = 0.0
    kappa_rl: float = 0.0
    kind: str = "flat"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown spectral kind {self.kind!r}")
        for name in ("t_left", "t_right", "kappa_ll", "kappa_rr", "kappa_lr", "kappa_rl"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    def kappa(self, qubit: str, bath: str) -> float:
        return getattr(self, f"kappa_{qubit.lower()}{bath.lower()}")

    def temperature(self, bath: str) -> float:
        return self.t_left if bath == "L" else self.t_right

    @property
    def is_local(self) -> bool:
        return self.kappa_lr == 0 and self.kappa_rl == 0

    @property
    def max_kappa(self) -> float:
        return max(self.kappa_ll, self.kappa_rr, self.kappa_lr, self.kappa_rl)

    def swapped(self) -> "BathSpec":
        """Same couplings with the two bath temperatures exchanged."""
        return BathSpec(self.t_right, self.t_left, self.kappa_ll, self.kappa_rr,
                        self.kappa_lr, self.kappa_rl, self.kind)


def mean_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation ``1/(exp(omega/T) - 1)``; exactly 0 at T = 0."""
    if not omega > 0:
        raise ValueError(f"occupation needs omega > 0, got {omega}")
    if temperature < 0:
        raise ValueError(f"negative temperature {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def rate(kappa_base: float, omega: float, kind: str) -> float:
    """Flat: ``kappa``; Ohmic: ``kappa * omega``."""
    if kind == "flat":
        return kappa_base
    if kind == "ohmic":
        return kappa_base * omega
    raise ValueError(f"unknown spectral kind {kind!r}")


def _absorption(kappa_base: float, w: float, temperature: float, kind: str) -> float:
    """``kappa(w) * n(w)``, formed so that tiny ``w`` gives no 0 * inf."""
    if temperature == 0:
        return 0.0
    x = w / temperature
    if x > 700.0:
        return rate(kappa_base, w, kind) * math.exp(-x)
    if x == 0:  # w/T underflowed; x/expm1(x) -> 1
        return kappa_base * temperature if kind == "ohmic" else math.inf
    if kind == "ohmic":
        return kappa_base * temperature * (x / math.expm1(x))
    return rate(kappa_base, w, kind) / math.expm1(x)


def response(kappa_base: float, omega: float, temperature: float, kind: str) -> float:
    """Spectral response G(omega): emission for omega > 0, absorption for omega < 0, 0 at 0."""
    if omega == 0 or kappa_base == 0:
        return 0.0
    if temperature < 0:
        raise ValueError(f"negative temperature {temperature}")
    w = abs(omega)
    a = _absorption(kappa_base, w, temperature, kind)
    return rate(kappa_base, w, kind) + a if omega > 0 else a
