"""Acceptance suite: exact-law checks on random draws plus the map-level checks.

Each check returns a ``CheckResult``; ``run_all`` evaluates them in order and
shares one ``Ledger`` so the second-law check can see every steady state the
other checks produced.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .liouvillian import assemble
from .observables import (
    heat_current_bare_form,
    heat_current_dressed_form,
    heat_report,
)
from .operators import SystemSpec, bare_hamiltonian
from .solver import evolve, gibbs, relaxation_gap, steady_state, trace_distance
from .spectrum import KINDS, BathSpec, response
from .sweep import Axis, preset, render, run

SEED = 20240611
# parameter ranges for random draws
OMEGA_RANGE = (0.1, 5.0)
G_RANGE = (0.0, 3.0)
T_RANGE = (0.05, 20.0)
KAPPA_RANGE = (1e-3, 0.1)


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d}. {self.title}: {self.detail} ({self.seconds:.2f} s)"


@dataclass
class Ledger:
    """Shared state across checks: entropy production minima and cached maps."""

    min_sigma: float = math.inf
    sigma_count: int = 0
    maps: dict = field(default_factory=dict)

    def note_sigma(self, sigma):
        if sigma is None or not math.isfinite(sigma):
            return
        self.sigma_count += 1
        self.min_sigma = min(self.min_sigma, sigma)

    def note_rows(self, rows):
        for row in rows:
            self.note_sigma(row.entropy_production)

    def solve(self, system, baths):
        gen = assemble(system, baths)
        sol = steady_state(gen)
        rep = heat_report(gen, sol)
        self.note_sigma(rep.entropy_production)
        return gen, sol, rep

    def sweep(self, key, spec):
        if key not in self.maps:
            rows = run(spec)
            self.note_rows(rows)
            self.maps[key] = rows
        return self.maps[key]


def _draw(rng, local: bool):
    wl, wr = rng.uniform(*OMEGA_RANGE, size=2)
    g = rng.uniform(*G_RANGE)
    tl, tr = rng.uniform(*T_RANGE, size=2)
    kl, kr = rng.uniform(*KAPPA_RANGE, size=2)
    if local:
        baths = BathSpec(tl, tr, kl, kr)
    else:
        klr, krl = rng.uniform(*KAPPA_RANGE, size=2)
        baths = BathSpec(tl, tr, kl, kr, klr, krl)
    return SystemSpec(float(wl), float(wr), float(g)), baths


def _bath(t_l, t_r, kappa=0.01, cross=0.0, kind="flat"):
    return BathSpec(t_l, t_r, kappa, kappa, cross, cross, kind)


def _r_values(rows):
    return np.array([np.nan if r.r is None else r.r for r in rows])


def _peak_jr(rows):
    return max(abs(r.j_right) for r in rows if r.j_right is not None)


# -- checks --------------------------------------------------------------------

def check_first_law(ledger, draws=100):
    rng = np.random.default_rng(SEED + 1)
    t0 = time.perf_counter()
    worst = 0.0
    bad = 0
    for i in range(draws):
        system, baths = _draw(rng, local=bool(i % 2))
        _, _, rep = ledger.solve(system, baths)
        ratio = rep.first_law_residual / max(1e-12, abs(rep.j_left))
        worst = max(worst, ratio)
        bad += ratio > 1e-10
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 5.0
    return ok, f"{draws} draws, {bad} violations, worst |J_L+J_R|/max(1e-12,|J_L|) = {worst:.2e}, {elapsed:.2f} s (< 5 s)"


def check_equilibrium(ledger):
    temps = np.geomspace(0.05, 20.0, 20)
    pairs = [(0.01, 1.0), (0.1, 1.0), (0.5, 1.0), (1.0, 1.0), (2.0, 1.0),
             (1.0, 0.3), (1.0, 2.5), (0.25, 4.0), (3.0, 0.5), (0.8, 0.1)]
    worst_j = worst_d = 0.0
    for g, w in pairs:
        system = SystemSpec(1.0, w, g)
        h = bare_hamiltonian(system)
        for t in temps:
            _, sol, rep = ledger.solve(system, _bath(float(t), float(t)))
            worst_j = max(worst_j, abs(rep.j_right))
            worst_d = max(worst_d, trace_distance(sol.rho, gibbs(h, float(t))))
    ok = worst_j <= 1e-10 and worst_d <= 1e-8
    return ok, f"200 points, max |J_R| = {worst_j:.2e} (<= 1e-10), max trace distance = {worst_d:.2e} (<= 1e-8)"


def check_decoupling(ledger):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(20):
        wl, wr = rng.uniform(*OMEGA_RANGE, size=2)
        tl, tr = rng.uniform(*T_RANGE, size=2)
        _, _, rep = ledger.solve(SystemSpec(float(wl), float(wr), 0.0), _bath(float(tl), float(tr)))
        worst = max(worst, abs(rep.j_right))
    return worst <= 1e-12, f"20 temperature pairs, max |J_R| = {worst:.2e} (<= 1e-12)"


def check_formulations(ledger, draws=50):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(draws):
        system, baths = _draw(rng, local=True)
        _, sol, rep = ledger.solve(system, baths)
        jl_d, jr_d = heat_current_dressed_form(sol.rho, system, baths)
        jr_b = heat_current_bare_form(sol.rho, system, baths)
        diffs = (abs(rep.j_left - jl_d), abs(rep.j_right - jr_d), abs(rep.j_right - jr_b), abs(jr_d - jr_b))
        worst = max(worst, *diffs)
    return worst <= 1e-10, f"{draws} local draws, max pairwise difference = {worst:.2e} (<= 1e-10)"


def check_oracle(ledger, draws=50):
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for i in range(draws):
        system, baths = _draw(rng, local=bool(i % 2))
        gen, sol, _ = ledger.solve(system, baths)
        rho_t = evolve(gen, np.eye(4) / 4, 100.0 / relaxation_gap(gen))
        worst = max(worst, trace_distance(rho_t, sol.rho))
    return worst <= 1e-6, f"{draws} draws, max trace distance null space vs RK4 = {worst:.2e} (<= 1e-6)"


def check_kms(ledger):
    worst = 0.0
    for kind in KINDS:
        for w in np.linspace(0.1, 10.0, 60):
            for t in np.linspace(0.1, 20.0, 60):
                up = response(0.01, float(w), float(t), kind)
                down = response(0.01, -float(w), float(t), kind)
                target = math.exp(w / t)
                worst = max(worst, abs(up / down - target) / target)
    return worst <= 1e-12, f"flat and ohmic, 60x60 grid, max relative KMS error = {worst:.2e} (<= 1e-12)"


def _fig4d_window(grid):
    spec = preset("fig4d", grid)
    return replace(spec, axes=(Axis("t_l", 0.5, 10.0, grid), Axis("t_r", 0.5, 10.0, grid)))


def check_fig4d_region(ledger, grid=101):
    t0 = time.perf_counter()
    rows = ledger.sweep(("fig4d-window", grid), _fig4d_window(grid))
    elapsed = time.perf_counter() - t0
    r = _r_values(rows)
    frac = float(np.mean((r >= 0.45) & (r <= 0.75)))
    ok = frac >= 0.40 and elapsed < 30.0
    return ok, (f"fraction of T_L,T_R in [0.5,10] with R in [0.45,0.75] = {frac:.3f} (>= 0.40), "
                f"max R = {np.nanmax(r):.3f}, {elapsed:.1f} s (< 30 s)")


def check_fig4c_corner(ledger, grid=101):
    spec = preset("fig4c", grid)
    rows = ledger.sweep(("fig4c", grid), spec)
    r = _r_values(rows)
    k = int(np.nanargmax(r))
    tl, tr = rows[k].params["t_l"], rows[k].params["t_r"]
    span = spec.axes[0].max - spec.axes[0].min
    large = abs(tl - tr) >= 0.5 * span
    ok = r[k] >= 0.9 and large
    return ok, f"max R = {r[k]:.3f} (>= 0.9) at T_L = {tl:.3g}, T_R = {tr:.3g}, |dT| >= half the range: {large}"


def check_detuned(ledger, grid=51):
    """Peak |J_R| at w_L = w_R = 1 versus w_L = 1, w_R = 0.05, for both fig4 couplings."""
    parts = []
    ok = True
    for name in ("fig4a", "fig4b"):
        spec = preset(name, grid)
        resonant = _peak_jr(ledger.sweep((name, grid), spec))
        detuned_spec = replace(spec, system=SystemSpec(1.0, 0.05, spec.system.g))
        detuned = _peak_jr(ledger.sweep((name + "-detuned", grid), detuned_spec))
        ratio = resonant / detuned
        ok &= ratio > 50.0
        parts.append(f"g = {spec.system.g:g}: ratio {ratio:.1f}")
    return ok, "peak |J_R| resonant/detuned " + ", ".join(parts) + " (> 50)"


def check_overlap(ledger, grid=41):
    peaks = {}
    for name in ("fig6a", "fig6b", "fig6c"):
        rows = ledger.sweep((name, grid), preset(name, grid))
        peaks[name] = float(np.nanmax(_r_values(rows)))
    ok = (abs(peaks["fig6a"] - 0.9) <= 0.1 and abs(peaks["fig6b"] - 0.45) <= 0.1 and peaks["fig6c"] <= 0.05)
    return ok, (f"peak R local = {peaks['fig6a']:.3f} (0.9 +/- 0.1), cross 0.005 = {peaks['fig6b']:.3f} "
                f"(0.45 +/- 0.1), all equal = {peaks['fig6c']:.2e} (<= 0.05)")


def check_ohmic(ledger, grid=101):
    flat = ledger.sweep(("fig4d", grid), preset("fig4d", grid))
    ohmic = ledger.sweep(("fig4d-ohmic", grid), preset("fig4d", grid).with_spectrum("ohmic"))
    pf, po = _peak_jr(flat), _peak_jr(ohmic)
    af = float(np.mean(_r_values(flat) >= 0.5))
    ao = float(np.mean(_r_values(ohmic) >= 0.5))
    ok = po < pf and ao > af
    return ok, (f"peak |J_R| ohmic {po:.4g} vs flat {pf:.4g} (ohmic smaller: {po < pf}); "
                f"area R >= 0.5 ohmic {ao:.3f} vs flat {af:.3f} (ohmic larger: {ao > af})")


def check_second_law(ledger):
    if ledger.sigma_count == 0:
        for n, _, fn in CHECKS[:11]:
            fn(ledger)
    ok = ledger.min_sigma >= -1e-10
    return ok, f"{ledger.sigma_count} steady states, min entropy production = {ledger.min_sigma:.2e} (>= -1e-10)"


def check_determinism(ledger, grid=101):
    spec = preset("fig4d", grid)
    first = render(ledger.sweep(("fig4d", grid), spec), "csv", spec.axes)
    second = render(run(spec), "csv", spec.axes)
    same = first.encode("utf-8") == second.encode("utf-8")
    return same, f"two fig4d runs at {grid}x{grid}: byte-identical CSV = {same}"


CHECKS = (
    (1, "first law", check_first_law),
    (2, "equilibrium null current", check_equilibrium),
    (3, "decoupling", check_decoupling),
    (4, "formulation equivalence", check_formulations),
    (5, "null space vs RK4", check_oracle),
    (6, "KMS detailed balance", check_kms),
    (7, "fig4d rectification region", check_fig4d_region),
    (8, "fig4c near-perfect diode corner", check_fig4c_corner),
    (9, "resonant vs detuned current", check_detuned),
    (10, "overlapping-bath degradation", check_overlap),
    (11, "ohmic vs flat", check_ohmic),
    (12, "second law", check_second_law),
    (13, "determinism", check_determinism),
)


def run_check(number: int, ledger: Ledger | None = None) -> CheckResult:
    ledger = ledger or Ledger()
    for n, title, fn in CHECKS:
        if n == number:
            t0 = time.perf_counter()
            ok, detail = fn(ledger)
            return CheckResult(n, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(f"no check numbered {number}")


def run_all(numbers=None, echo=None) -> list:
    """Run the selected checks (all by default) in order; ``echo`` gets each line as it finishes."""
    ledger = Ledger()
    wanted = [n for n, _, _ in CHECKS] if numbers is None else sorted(set(numbers))
    results = []
    for n in wanted:
        res = run_check(n, ledger)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
