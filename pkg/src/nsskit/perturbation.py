"""First-order formulas for resonances of the complex delta spike.

For a spike of complex strength z = r + i*s at position a inside the
unit interval, expanding the purely-outgoing condition F-(k) = 0 to
first order in the coupling gives a closed-form resonance locus:

    z      = 2ik * (1 + gamma_f * A / (4 k^2)),     A = e^{2ik(1-a)} + e^{2ika} - 2,
    gamma_f = -k r / (sin k * cos[k(1-2a)]),
    s       = 2k - r * (cos k * cos[k(1-2a)] - 1) / (sin k * cos[k(1-2a)]),

where gamma_f is the coupling times the profile evaluated at the
boundary amplitude.  The boundary value of the constrained solution is

    psi(1) = e^{ik(1-2a)} * amp * (1 + gamma_f * B / (4 k^2)),
    B = e^{2ik(1-a)} - e^{2ika} + 2ik(2a-1),

exact in the linear limit (where z = 2ik and the continuation across
the spike is elementary plane-wave matching).

These formulas seed the exact Newton solver and provide its
independent validation oracle.  They degenerate on a lattice of
wavenumbers where the denominator sin k * cos[k(1-2a)] vanishes
(:func:`asymptotes`), and they are trustworthy only while |r| is a
small fraction of k times that denominator (:func:`first_order_validity`).
Everything here is even under the reflection a -> 1 - a.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

# quantification of "much smaller than": first-order formulas are
# accepted while |r| <= VALIDITY_FACTOR * k * |sin k * cos[k(1-2a)]|
VALIDITY_FACTOR = 1e-2
# below this denominator magnitude the formulas are refused outright
DENOMINATOR_CUTOFF = 1e-6

TOO_CLOSE_TO_ASYMPTOTE = "too_close_to_asymptote"
R_NOT_SMALL = "r_not_small"


class AsymptoteProximity(ValueError):
    """The first-order denominator is vanishingly small at this k."""


@dataclass(frozen=True)
class PerturbativeNss:
    """One first-order resonance prediction, with its trust assessment."""

    k: float
    position: float
    strength_re: float
    gamma_f: float
    strength_im: float
    valid: bool
    violation: Optional[str] = None


def _check(k: float, position: float) -> None:
    if not (math.isfinite(k) and k > 0.0):
        raise ValueError("k must be positive and finite")
    if not 0.0 < position < 1.0:
        raise ValueError("position must lie strictly inside (0,1)")


def strength_coeff(k: float, position: float) -> complex:
    """Coefficient A of the first-order spike-strength correction."""
    _check(k, position)
    return cmath.exp(2j * k * (1.0 - position)) + cmath.exp(2j * k * position) - 2.0


def edge_coeff(k: float, position: float) -> complex:
    """Coefficient B of the first-order boundary-value correction."""
    _check(k, position)
    return (
        cmath.exp(2j * k * (1.0 - position))
        - cmath.exp(2j * k * position)
        + 2j * k * (2.0 * position - 1.0)
    )


def strength_first_order(k: float, position: float, gamma_f: float) -> complex:
    """Spike strength z supporting a resonance, to first order."""
    a_coeff = strength_coeff(k, position)
    return 2j * k * (1.0 + gamma_f * a_coeff / (4.0 * k * k))


def psi_end_first_order(k: float, position: float, gamma_f: float, amp: complex) -> complex:
    """Boundary value psi(1) of the resonance-constrained solution.

    Valid for the solution obeying the outgoing conditions (spike
    strength from :func:`strength_first_order`); for a generic strength
    the first-order boundary value differs.
    """
    b_coeff = edge_coeff(k, position)
    return cmath.exp(1j * k * (1.0 - 2.0 * position)) * amp * (
        1.0 + gamma_f * b_coeff / (4.0 * k * k)
    )


def _denominator(k: float, position: float) -> float:
    return math.sin(k) * math.cos(k * (1.0 - 2.0 * position))


def gamma_f_of_k(k: float, position: float, strength_re: float) -> float:
    """Nonlinear coupling gamma * f(amp) required for a resonance at k."""
    _check(k, position)
    den = _denominator(k, position)
    if abs(den) < DENOMINATOR_CUTOFF:
        raise AsymptoteProximity(f"denominator {den:.3e} at k={k:.6g}")
    return -k * strength_re / den


def strength_im_of_k(k: float, position: float, strength_re: float) -> float:
    """Imaginary part of the spike strength at the resonance (about 2k)."""
    _check(k, position)
    den = _denominator(k, position)
    if abs(den) < DENOMINATOR_CUTOFF:
        raise AsymptoteProximity(f"denominator {den:.3e} at k={k:.6g}")
    num = math.cos(k) * math.cos(k * (1.0 - 2.0 * position)) - 1.0
    return 2.0 * k - (num / den) * strength_re


def asymptotes(position: float, k_max: float) -> np.ndarray:
    """Wavenumbers where the first-order locus blows up, within (0, k_max].

    Two families: integer multiples of pi (for every position), and
    pi*(m + 1/2)/(1 - 2a) for off-center spikes.  Coincident members
    (e.g. a = 1/4, where the second family lands on odd multiples of
    pi) are merged within 1e-12 relative.
    """
    if not 0.0 < position < 1.0:
        raise ValueError("position must lie strictly inside (0,1)")
    if not k_max > 0.0:
        raise ValueError("k_max must be positive")
    values = [math.pi * m for m in range(1, int(math.floor(k_max / math.pi)) + 1)]
    half_width = 1.0 - 2.0 * position
    if half_width != 0.0:
        # pick the integer range giving positive wavenumbers
        step = math.pi / half_width
        m = 0 if step > 0 else -1
        while True:
            k = (m + 0.5) * step
            if not 0.0 < k <= k_max:
                break
            values.append(k)
            m += 1 if step > 0 else -1
    values.sort()
    merged: list[float] = []
    for v in values:
        if merged and abs(v - merged[-1]) <= 1e-12 * max(1.0, abs(v)):
            continue
        merged.append(v)
    return np.array(merged)


def first_order_validity(k: float, position: float, strength_re: float) -> tuple[bool, float]:
    """Whether the first-order locus is trustworthy at (k, position, r).

    Returns ``(valid, margin)`` with margin = |r| / (k * |denominator|);
    valid means the margin is at most :data:`VALIDITY_FACTOR`.
    """
    _check(k, position)
    den = abs(_denominator(k, position))
    if den == 0.0:
        return False, math.inf
    margin = abs(strength_re) / (k * den)
    return margin <= VALIDITY_FACTOR, margin


def perturbative_nss(k: float, position: float, strength_re: float) -> PerturbativeNss:
    """Assemble the full first-order prediction record at (k, position, r)."""
    _check(k, position)
    den = _denominator(k, position)
    if abs(den) < DENOMINATOR_CUTOFF:
        return PerturbativeNss(
            k=k,
            position=position,
            strength_re=strength_re,
            gamma_f=math.nan,
            strength_im=math.nan,
            valid=False,
            violation=TOO_CLOSE_TO_ASYMPTOTE,
        )
    valid, _margin = first_order_validity(k, position, strength_re)
    return PerturbativeNss(
        k=k,
        position=position,
        strength_re=strength_re,
        gamma_f=gamma_f_of_k(k, position, strength_re),
        strength_im=strength_im_of_k(k, position, strength_re),
        valid=valid,
        violation=None if valid else R_NOT_SMALL,
    )
