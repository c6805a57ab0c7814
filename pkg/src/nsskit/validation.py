"""Cross-oracle validation suites.

Each suite checks one independent consistency between solution routes:
the linear-limit resonance condition, the reflection parity of the
boundary functionals, agreement between the Runge-Kutta and the
integral-equation solvers, and agreement between the exact Newton
solver and the first-order locus.  The suites are what the ``validate``
command runs; they are deliberately small and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import perturbation
from .integrator import picard_solve, integrate
from .model import Kerr, PotentialSpec, ProblemConfig, WaveState
from .nss import NegativeAmplitude, NoConvergence, solve_nss
from .scattering import jost_left, jost_right
from .integrator import IntegrationError


@dataclass(frozen=True)
class SuiteReport:
    name: str
    passed: bool
    detail: str


def linear_lss_suite(ode_tol: float) -> SuiteReport:
    """gamma = 0, spike strength 2ik: the left residual must vanish."""
    worst = 0.0
    for a in (0.2, 1.0 / 3.0, 0.5, 0.7):
        for k in (1.0, math.pi / 2.0, 2.0, 5.0):
            config = ProblemConfig(PotentialSpec.delta(2j * k, a), gamma=0.0, ode_tol=ode_tol)
            resid = abs(jost_left(config, k, 1.0).f_minus) / k
            worst = max(worst, resid)
    return SuiteReport("linear_lss", worst <= 1e-8, f"max normalized residual {worst:.3e}")


def parity_suite(ode_tol: float) -> SuiteReport:
    """Mirroring the spike position maps F- to -G+ exactly."""
    worst = 0.0
    cases = [
        (1.3, 0.3, complex(0.2, 2.5), 0.6, 0.8),
        (2.7, 0.25, complex(-0.1, 5.2), -0.4, 1.1),
        (4.1, 0.45, complex(0.05, 8.0), 0.9, 0.5),
        (0.9, 0.6, complex(0.3, 1.9), 0.2, 1.4),
    ]
    for k, a, z, gamma, amp in cases:
        left = jost_left(
            ProblemConfig(PotentialSpec.delta(z, a), gamma=gamma, ode_tol=ode_tol), k, amp
        )
        right = jost_right(
            ProblemConfig(PotentialSpec.delta(z, 1.0 - a), gamma=gamma, ode_tol=ode_tol), k, amp
        )
        scale = abs(left.f_minus) + k * abs(amp)
        worst = max(worst, abs(right.g_plus + left.f_minus) / scale)
    return SuiteReport("parity", worst <= 1e-9, f"max mirrored mismatch {worst:.3e}")


def picard_rk_suite(ode_tol: float) -> SuiteReport:
    """Order-2 integral-equation iterate vs Runge-Kutta at x = 1."""
    rng = np.random.default_rng(20250809)
    worst = 0.0
    for _ in range(6):
        k = float(rng.uniform(0.8, 8.0))
        amp = complex(rng.uniform(0.3, 1.5), rng.uniform(-0.5, 0.5))
        ratio = float(rng.uniform(1e-5, 1e-3))
        gamma = float(rng.choice((-1.0, 1.0))) * ratio * k * k / abs(amp) ** 2
        config = ProblemConfig(PotentialSpec.zero(), gamma=gamma, profile=Kerr(), ode_tol=ode_tol)
        initial = WaveState(0.0, amp, -1j * k * amp)
        rk = integrate(config, k, 0.0, 1.0, initial).final
        pic = picard_solve(config, k, initial, orders=2)(1.0)
        scale = abs(rk.psi) + abs(rk.dpsi) / k
        diff = (abs(rk.psi - pic.psi) + abs(rk.dpsi - pic.dpsi) / k) / scale
        worst = max(worst, diff)
    return SuiteReport("picard_rk", worst <= 1e-6, f"max relative mismatch {worst:.3e}")


def perturbative_suite(ode_tol: float) -> SuiteReport:
    """Exact Newton solutions track the first-order locus at r = 1e-4."""
    rng = np.random.default_rng(11)
    r = 1e-4
    worst_s = 0.0
    worst_gf = 0.0
    found = 0
    while found < 8:
        k = float(rng.uniform(1.0, 25.0))
        a = float(rng.uniform(0.15, 0.85))
        valid, _ = perturbation.first_order_validity(k, a, r)
        if not valid:
            continue
        found += 1
        gf = perturbation.gamma_f_of_k(k, a, r)
        s = perturbation.strength_im_of_k(k, a, r)
        gamma = math.copysign(1.0, gf)
        try:
            point = solve_nss(
                a, r, gamma, Kerr(), k, s, math.sqrt(abs(gf)), ode_tol=ode_tol
            )
        except (NoConvergence, NegativeAmplitude, IntegrationError) as exc:
            return SuiteReport("perturbative", False, f"solver failed at k={k:.4g}: {exc}")
        worst_s = max(worst_s, abs(point.strength_im - s))
        worst_gf = max(worst_gf, abs(point.gamma_f - gf) / k)
    passed = worst_s <= 1e-6 and worst_gf <= 1e-6
    return SuiteReport(
        "perturbative", passed, f"max |ds| {worst_s:.3e}, max |dgf|/k {worst_gf:.3e}"
    )


SUITES = (linear_lss_suite, parity_suite, picard_rk_suite, perturbative_suite)


def run_all(ode_tol: float) -> list[SuiteReport]:
    return [suite(ode_tol) for suite in SUITES]
