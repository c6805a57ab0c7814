"""Jost solutions on the unit interval and reflection/transmission data.

The left Jost solution equals ``amp * exp(-i k x)`` for x <= 0 and is
continued through [0, 1] by integrating the nonlinear equation with
initial data psi(0) = amp, psi'(0) = -i k amp.  The right Jost solution
equals ``amp * exp(i k (x - 1))`` for x >= 1 and is continued backward
from x = 1.  Their boundary functionals

    F+-(k) = psi'(1) +- i k psi(1)      (left solution)
    G+-(k) = psi'(0) +- i k psi(0)      (right solution)

encode everything scattering: the plane-wave tails outside [0, 1] are
linear combinations weighted by F/G, the four reflection/transmission
amplitudes are ratios of them, and a zero of F- (or G+) means the
solution is purely outgoing on both sides -- a zero-width resonance.
Only the interval data is stored; the tails are reconstructed on
demand by :func:`left_tail` / :func:`right_tail`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .integrator import integrate
from .model import ProblemConfig, WaveState

DIVERGENCE_FACTOR = 1e-12


class DivergentAmplitude(RuntimeError):
    """A reflection/transmission denominator is numerically zero.

    This is not a failure of the computation: a vanishing F- or G+ is
    the defining condition of a (nonlinear) spectral singularity, where
    the scattering amplitudes genuinely diverge.  Carries the magnitude
    of the offending denominator.

    Note the trigger threshold is far below the integration noise floor
    (about ode_tol * k * |amp|), so at default tolerances an exact
    resonance still yields finite, noise-dominated amplitudes; compare
    |F-|/(k |amp|) against ode_tol to detect near-resonances.
    """

    def __init__(self, side: str, magnitude: float):
        super().__init__(f"{side} denominator magnitude {magnitude:.3e}: at a resonance")
        self.side = side
        self.magnitude = magnitude


@dataclass(frozen=True)
class JostLeft:
    """Left Jost solution summary: boundary data at x = 1.

    ``f_plus``/``f_minus`` are recomputable as dpsi_end +- i k psi_end;
    they are stored for convenience and kept exactly consistent.
    """

    k: float
    amp: complex
    psi_end: complex
    dpsi_end: complex
    f_plus: complex
    f_minus: complex


@dataclass(frozen=True)
class JostRight:
    """Right Jost solution summary: boundary data at x = 0."""

    k: float
    amp: complex
    psi_start: complex
    dpsi_start: complex
    g_plus: complex
    g_minus: complex


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Reflection and transmission amplitudes for both incidence sides."""

    r_left: complex
    t_left: complex
    r_right: complex
    t_right: complex


def _check_k_amp(k: float, amp: complex) -> None:
    if not (math.isfinite(k) and k > 0.0):
        raise ValueError("k must be positive and finite")
    if amp == 0:
        raise ValueError("boundary amplitude must be nonzero")


def jost_left(config: ProblemConfig, k: float, amp: complex) -> JostLeft:
    """Continue the left Jost solution across [0, 1].

    ``amp`` is the boundary value at x = 0 (the incoming-from-the-right
    plane wave has unit coefficient in these conventions).
    """
    _check_k_amp(k, amp)
    initial = WaveState(0.0, amp, -1j * k * amp)
    final = integrate(config, k, 0.0, 1.0, initial).final
    return JostLeft(
        k=k,
        amp=amp,
        psi_end=final.psi,
        dpsi_end=final.dpsi,
        f_plus=final.dpsi + 1j * k * final.psi,
        f_minus=final.dpsi - 1j * k * final.psi,
    )


def jost_right(config: ProblemConfig, k: float, amp: complex) -> JostRight:
    """Continue the right Jost solution backward across [0, 1].

    ``amp`` is the boundary value at x = 1.
    """
    _check_k_amp(k, amp)
    initial = WaveState(1.0, amp, 1j * k * amp)
    final = integrate(config, k, 1.0, 0.0, initial).final
    return JostRight(
        k=k,
        amp=amp,
        psi_start=final.psi,
        dpsi_start=final.dpsi,
        g_plus=final.dpsi + 1j * k * final.psi,
        g_minus=final.dpsi - 1j * k * final.psi,
    )


def rt_amplitudes(left: JostLeft, right: JostRight) -> ScatteringAmplitudes:
    """Combine the two Jost summaries into the four R/T amplitudes.

    Left incidence divides by G+, right incidence by F-; when either
    denominator is below ``DIVERGENCE_FACTOR * k * |amp|`` the state is
    a spectral singularity and :class:`DivergentAmplitude` is raised.
    For nonzero coupling the amplitudes depend on the boundary
    amplitudes; in the linear limit they drop out.
    """
    if left.k != right.k:
        raise ValueError("left and right Jost data must share the same k")
    k = left.k
    if abs(right.g_plus) < DIVERGENCE_FACTOR * k * abs(right.amp):
        raise DivergentAmplitude("left-incidence (G+)", abs(right.g_plus))
    if abs(left.f_minus) < DIVERGENCE_FACTOR * k * abs(left.amp):
        raise DivergentAmplitude("right-incidence (F-)", abs(left.f_minus))
    phase = cmath.exp(-1j * k)
    return ScatteringAmplitudes(
        r_left=-right.g_minus / right.g_plus,
        t_left=2j * k * phase * right.amp / right.g_plus,
        r_right=-phase * phase * left.f_plus / left.f_minus,
        t_right=-2j * k * phase * left.amp / left.f_minus,
    )


def left_tail(jost: JostLeft, x: float) -> complex:
    """Evaluate the left Jost solution outside the interval.

    For x <= 0 this is the defining plane wave; for x >= 1 the tail is
    the F-weighted combination of outgoing and incoming waves.
    """
    k = jost.k
    if x <= 0.0:
        return jost.amp * cmath.exp(-1j * k * x)
    if x >= 1.0:
        return (
            cmath.exp(1j * k * (x - 1.0)) * jost.f_plus
            - cmath.exp(-1j * k * (x - 1.0)) * jost.f_minus
        ) / (2j * k)
    raise ValueError("tail is defined outside (0,1); the interior lives in the integrator")


def right_tail(jost: JostRight, x: float) -> complex:
    """Evaluate the right Jost solution outside the interval."""
    k = jost.k
    if x >= 1.0:
        return jost.amp * cmath.exp(1j * k * (x - 1.0))
    if x <= 0.0:
        return (
            cmath.exp(1j * k * x) * jost.g_plus - cmath.exp(-1j * k * x) * jost.g_minus
        ) / (2j * k)
    raise ValueError("tail is defined outside (0,1); the interior lives in the integrator")
