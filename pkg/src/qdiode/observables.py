"""Heat currents, rectification and thermodynamic diagnostics.

Three routes to the right-bath current are provided and cross-checked in the
tests:

* ``heat_current``: ``Tr[L_bath(rho) H]`` with the per-bath generator.
* ``heat_current_dressed_form``: populations of the dressed qubits
  (``A = 1 - sz~_L``, ``B = 1 + sz~_L``, ``C = 1 - sz~_R``, ``D = 1 + sz~_R``).
* ``heat_current_bare_form``: the right current in bare expectation values,
  ``-k Omega cos^2/2 [1 + (2n+1)(cos <sz_R> + s sin <sz_L sx_R>)]``.

Sign of the ``sin`` term: with ``sz~_R = cos sz_R + sin sz_L sx_R`` the bare form
agrees with the trace formula only for ``s = +1`` (``BARE_FORM_SIN_SIGN``);
``s = -1`` misses by O(kappa) whenever ``<sz_L sx_R>`` is nonzero (see
``tests/test_observables.py::test_bare_form_sign_is_resolved``).

The frequencies attached to the global terms of the dressed forms are
``w_1 = Omega - w_L`` (flip-flop, i.e. ``-w_23``) and ``w_2 = w_L + Omega``
(``w_14``), as confirmed against the generator trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, UndefinedRectificationError, UnsupportedConfigurationError
from .liouvillian import Generator, unvectorize, vectorize
from .solver import SteadySolution, refine_multiprecision
from .operators import SystemSpec, dressed_sigma, embed, mixing_angle, pauli
from .spectrum import BathSpec, mean_occupation, rate, response

BARE_FORM_SIN_SIGN = +1.0
IMAG_TOL = 1e-10
FIRST_LAW_RTOL = 1e-10


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise ConsistencyError(f"{what} has imaginary part {z.imag:.3e}")
    return float(z.real)


def _expect(rho, op) -> complex:
    return complex(np.trace(rho @ op))


def _state(rho):
    if isinstance(rho, SteadySolution):
        return rho.rho_precise if rho.rho_precise is not None else rho.rho
    return np.asarray(rho)


def heat_current(gen: Generator, rho, bath: str) -> float:
    """Energy flowing from ``bath`` into the system, ``Tr[L_bath(rho) H]``.

    ``rho`` may be a matrix or a ``SteadySolution``; the trace is always
    evaluated in extended precision.
    """
    v = vectorize(_state(rho)).astype(np.clongdouble)
    out = unvectorize(gen.extended(bath) @ v)
    z = np.trace(out @ gen.hamiltonian.astype(np.clongdouble))
    return _real(complex(z), f"J_{bath}")


def _require_local(baths: BathSpec):
    if not baths.is_local:
        raise UnsupportedConfigurationError("closed-form currents assume local baths (kappa_lr = kappa_rl = 0)")


def _dressed_populations(rho, theta):
    eye = np.eye(4)
    zl = dressed_sigma("L", "z", theta)
    zr = dressed_sigma("R", "z", theta)
    a, b, c, d = eye - zl, eye + zl, eye - zr, eye + zr
    e = lambda op: _real(_expect(rho, op), "dressed expectation")
    return {
        "A": e(a), "B": e(b), "C": e(c), "D": e(d),
        "AC": e(a @ c), "AD": e(a @ d), "BC": e(b @ c), "BD": e(b @ d),
        "A_zR": e(a @ zr), "B_zR": e(b @ zr), "C_zL": e(c @ zl), "D_zL": e(d @ zl),
    }


def _local_rates(spec: SystemSpec, baths: BathSpec):
    om = spec.omega_big
    w1 = om - spec.omega_l
    w2 = spec.omega_l + om
    kl, tl = baths.kappa_ll, baths.t_left
    kr, tr = baths.kappa_rr, baths.t_right
    gl = lambda w: response(kl, w, tl, baths.kind)
    gr = lambda w: response(kr, w, tr, baths.kind)
    return om, w1, w2, gl, gr


def heat_current_dressed_form(rho: np.ndarray, spec: SystemSpec, baths: BathSpec) -> tuple:
    """``(J_L, J_R)`` from dressed-qubit populations and correlations."""
    _require_local(baths)
    theta = mixing_angle(spec.omega_r, spec.g)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    om, w1, w2, gl, gr = _local_rates(spec, baths)
    wl = spec.omega_l
    p = _dressed_populations(rho, theta)
    j_left = 0.5 * wl * c2 * (gl(-wl) * p["A"] - gl(wl) * p["B"]) + 0.25 * s2 * (
        w1 * gl(-w1) * p["BC"]
        - w1 * gl(w1) * p["AD"]
        - w2 * gl(w2) * p["BD"]
        + w2 * gl(-w2) * p["AC"]
    )
    j_right = 0.5 * om * c2 * (gr(-om) * p["C"] - gr(om) * p["D"])
    return j_left, j_right


def heat_current_bare_form(rho: np.ndarray, spec: SystemSpec, baths: BathSpec,
                           sin_sign: float = BARE_FORM_SIN_SIGN) -> float:
    """Right-bath current written with bare ``<sz_R>`` and ``<sz_L sx_R>``."""
    _require_local(baths)
    theta = mixing_angle(spec.omega_r, spec.g)
    om = spec.omega_big
    if om == 0 or baths.kappa_rr == 0:
        return 0.0
    k = rate(baths.kappa_rr, om, baths.kind)
    n = mean_occupation(om, baths.t_right)
    zr = _real(_expect(rho, embed(pauli("z"), "R")), "<sz_R>")
    zx = _real(_expect(rho, embed(pauli("z"), "L") @ embed(pauli("x"), "R")), "<sz_L sx_R>")
    c = math.cos(theta)
    s = math.sin(theta)
    return -0.5 * k * om * c * c * (1.0 + (2.0 * n + 1.0) * (c * zr + sin_sign * s * zx))


def dynamics_rhs(rho: np.ndarray, spec: SystemSpec, baths: BathSpec) -> tuple:
    """Time derivatives of ``<sz~_L>``, ``<sz~_R>`` and ``<sz~_L sz~_R>``.

    In the correlation equation the right-bath terms pair absorption with ``C``
    and emission with ``D``.
    """
    _require_local(baths)
    theta = mixing_angle(spec.omega_r, spec.g)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    om, w1, w2, gl, gr = _local_rates(spec, baths)
    wl = spec.omega_l
    p = _dressed_populations(rho, theta)
    d_zl = c2 * (gl(-wl) * p["A"] - gl(wl) * p["B"]) + 0.5 * s2 * (
        gl(w1) * p["AD"] - gl(-w1) * p["BC"] + gl(-w2) * p["AC"] - gl(w2) * p["BD"]
    )
    d_zr = c2 * (gr(-om) * p["C"] - gr(om) * p["D"]) + 0.5 * s2 * (
        -gl(w1) * p["AD"] + gl(-w1) * p["BC"] + gl(-w2) * p["AC"] - gl(w2) * p["BD"]
    )
    d_zz = c2 * (
        gl(-wl) * p["A_zR"] - gl(wl) * p["B_zR"] + gr(-om) * p["C_zL"] - gr(om) * p["D_zL"]
    )
    return d_zl, d_zr, d_zz


def entropy_production(j_left: float, j_right: float, t_left: float, t_right: float) -> float:
    """``-J_L/T_L - J_R/T_R``."""
    if not (t_left > 0 and t_right > 0):
        raise ValueError("entropy production needs positive temperatures")
    return -j_left / t_left - j_right / t_right


def rectification(j_forward: float, j_backward: float) -> float:
    """``|J_f + J_b| / max(|J_f|, |J_b|)``.

    Both zero is 0/0; currents of the same sign mean the heat did not flow
    from hot to cold in one of the runs, and the ratio is not a rectification.
    """
    big = max(abs(j_forward), abs(j_backward))
    if big == 0:
        raise UndefinedRectificationError("both currents vanish")
    if (j_forward > 0 and j_backward > 0) or (j_forward < 0 and j_backward < 0):
        raise UndefinedRectificationError("forward and backward currents have the same sign")
    return abs(j_forward + j_backward) / big


@dataclass(frozen=True)
class HeatReport:
    j_left: float
    j_right: float
    first_law_residual: float
    entropy_production: float | None


def _certified(jl: float, jr: float) -> bool:
    return abs(jl + jr) <= FIRST_LAW_RTOL * max(1e-12, abs(jl), abs(jr))


def heat_report(gen: Generator, rho) -> HeatReport:
    """Both currents, the first-law residual and the entropy production.

    Given a ``SteadySolution`` whose extended-precision currents do not
    resolve the first law (typically currents far below the rounding floor,
    at equilibrium or for decoupled qubits), the state is refined and the
    currents re-evaluated in multiprecision before reporting.
    """
    jl = heat_current(gen, rho, "L")
    jr = heat_current(gen, rho, "R")
    residual = abs(jl + jr)
    if isinstance(rho, SteadySolution) and not _certified(jl, jr):
        _, cur = refine_multiprecision(gen, rho)
        jl = _real(complex(cur["L"]), "J_L")
        jr = _real(complex(cur["R"]), "J_R")
        residual = float(abs(cur["L"] + cur["R"]))
    b = gen.baths
    sigma = entropy_production(jl, jr, b.t_left, b.t_right) if b.t_left > 0 and b.t_right > 0 else None
    return HeatReport(jl, jr, residual, sigma)


@dataclass(frozen=True)
class RectificationResult:
    j_forward: float  # J_R with the right bath hot
    j_backward: float  # J_R with the left bath hot
    r: float | None
