"""Locating amplitude-dependent zero-width resonances of the delta spike.

A resonance at wavenumber k is a zero of the boundary functional F-(k)
of the left Jost solution (or G+(k) of the right one).  With the real
part r of the spike strength fixed -- it plays the role of the
experimental dial -- the unknowns are the imaginary part s of the
strength and the boundary amplitude: for a fixed coupling sign, the
nonlinearity must supply exactly the gain mismatch that r introduces.
:func:`solve_nss` runs a damped Newton iteration on (s, amplitude)
from a first-order seed; :func:`sweep_k` charts a whole wavenumber
grid, classifying each point as converged, sign-forbidden (gap), or
excluded near the first-order asymptotes; and
:func:`nonlinearity_threshold` finds the minimum nonlinear response
below which no resonance exists above the critical wavenumber.

Phase covariance (for amplitude-only profiles) lets the amplitude be
taken real and positive throughout without loss of generality.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import perturbation
from .integrator import IntegrationError
from .model import DEFAULT_MAX_STEPS, DEFAULT_ODE_TOL, PotentialSpec, ProblemConfig
from .scattering import jost_left, jost_right

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
MAX_NEWTON_ITERS = 25
MAX_DAMPINGS = 30
FD_RELATIVE_STEP = 1e-6

# hard exclusion around first-order asymptotes, in units of k/pi
GUARD_BAND = 1e-3
# drop grid points whose first-order s drifts from 2k by more than this
# relative amount: beyond it the seed (and the charted curve) leaves the
# near-resonance regime the sweep is meant to describe
S_DRIFT_LIMIT = 8e-4
# expansion parameter of the first-order inversion near an asymptote;
# it scales like r / denominator^2, and empirically the resonance
# branch folds away (no exact solution exists) once it reaches ~0.3,
# so the sweep stays an order of magnitude below that
CURVATURE_LIMIT = 5e-2

CONVERGED = "converged"
GAP = "gap"
GUARD = "guard"
INVALID = "invalid"
FAILED = "failed"


class NoConvergence(RuntimeError):
    """Newton failed to reach the residual tolerance."""

    def __init__(self, iters: int, last_residual: float):
        super().__init__(f"no convergence after {iters} iterations (residual {last_residual:.3e})")
        self.iters = iters
        self.last_residual = last_residual


class NegativeAmplitude(RuntimeError):
    """Newton got trapped at the amplitude > 0 domain boundary."""


@dataclass(frozen=True)
class NssPoint:
    """A located resonance.

    ``residual`` is the scale-free |F-| / (k * amplitude) at the
    solution (|G+| for the right side); ``gamma_f`` is the coupling
    times the profile value at the located amplitude.
    """

    k: float
    position: float
    strength_re: float
    strength_im: float
    gamma_f: float
    amplitude: float
    residual: float
    side: str
    newton_iters: int


@dataclass(frozen=True)
class SweepEntry:
    """Per-grid-point annotation produced by :func:`sweep_k`."""

    k_over_pi: float
    status: str
    point: Optional[NssPoint] = None
    gamma_f_seed: Optional[float] = None
    strength_im_seed: Optional[float] = None
    note: str = ""


@dataclass(frozen=True)
class SweepResult:
    """Ordered sweep output: points, asymptotes, gaps, per-k entries."""

    points: tuple[NssPoint, ...]
    asymptotes: tuple[float, ...]
    gaps: tuple[tuple[float, float], ...]
    entries: tuple[SweepEntry, ...]


def nss_residual(config: ProblemConfig, k: float, amp: complex, side: str = "left") -> complex:
    """Outgoing-condition residual: F-(k) for the left Jost solution.

    The left solution satisfies the outgoing condition at x = 0 by
    construction, so the remaining condition is F- = 0 at x = 1.  For
    ``side="right"`` the roles flip and the residual is G+(k).
    """
    if side == "left":
        return jost_left(config, k, amp).f_minus
    if side == "right":
        return jost_right(config, k, amp).g_plus
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _residual_pair(
    position: float,
    strength_re: float,
    gamma: float,
    profile,
    k: float,
    side: str,
    ode_tol: float,
    max_steps: int,
    s: float,
    amp: float,
) -> tuple[complex, float]:
    config = ProblemConfig(
        potential=PotentialSpec.delta(complex(strength_re, s), position),
        gamma=gamma,
        profile=profile,
        ode_tol=ode_tol,
        max_steps=max_steps,
    )
    value = nss_residual(config, k, amp, side)
    return value, abs(value) / (k * amp)


def solve_nss(
    position: float,
    strength_re: float,
    gamma: float,
    profile,
    k: float,
    strength_im_guess: float,
    amplitude_guess: float,
    side: str = "left",
    ode_tol: float = DEFAULT_ODE_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    residual_tol: float = RESIDUAL_TOL,
    multi_start: int = 0,
) -> NssPoint:
    """Newton-solve the exact resonance condition at fixed (k, r, gamma).

    Unknowns are the imaginary strength part and the (real positive)
    boundary amplitude; the 2x2 Jacobian of (Re F-, Im F-) is built by
    central finite differences.  Steps are damped Levenberg-style: the
    first trial is the exact Newton step, and while the scale-free
    residual fails to decrease the normal equations are re-solved with
    an escalating diagonal shift, which both shortens the step and
    rotates it toward steepest descent (near the first-order
    asymptotes the two Jacobian columns become nearly parallel and a
    plain shortened Newton step points nowhere useful).  Convergence
    means residual <= ``residual_tol``.

    ``multi_start > 0`` reruns the iteration from that many perturbed
    seeds and logs a warning if a distinct solution basin shows up.
    """
    if not (math.isfinite(k) and k > 0.0):
        raise ValueError("k must be positive and finite")
    if not amplitude_guess > 0.0:
        raise ValueError("amplitude guess must be positive")

    def run(s0: float, a0: float) -> NssPoint:
        s, amp = s0, a0
        value, resid = _residual_pair(
            position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s, amp
        )
        iters = 0
        while resid > residual_tol:
            if iters >= MAX_NEWTON_ITERS:
                raise NoConvergence(iters, resid)
            iters += 1
            hs = FD_RELATIVE_STEP * max(abs(s), 1e-3)
            ha = FD_RELATIVE_STEP * max(abs(amp), 1e-6)
            f_sp, _ = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s + hs, amp
            )
            f_sm, _ = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s - hs, amp
            )
            f_ap, _ = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s, amp + ha
            )
            f_am, _ = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s, amp - ha
            )
            d_s = (f_sp - f_sm) / (2.0 * hs)
            d_a = (f_ap - f_am) / (2.0 * ha)
            # normal equations of the real 2x2 system J*(ds,da) = -value
            g_ss = d_s.real * d_s.real + d_s.imag * d_s.imag
            g_aa = d_a.real * d_a.real + d_a.imag * d_a.imag
            g_sa = d_s.real * d_a.real + d_s.imag * d_a.imag
            b_s = -(d_s.real * value.real + d_s.imag * value.imag)
            b_a = -(d_a.real * value.real + d_a.imag * value.imag)
            if not (math.isfinite(g_ss) and math.isfinite(g_aa) and g_ss > 0.0 and g_aa > 0.0):
                raise NoConvergence(iters, resid)

            lam = 0.0
            hit_boundary = False
            improved = False
            for _ in range(MAX_DAMPINGS):
                det = (g_ss + lam * g_ss) * (g_aa + lam * g_aa) - g_sa * g_sa
                if det <= 0.0:
                    lam = max(4.0 * lam, 1e-8)
                    continue
                ds = (b_s * (g_aa + lam * g_aa) - g_sa * b_a) / det
                da = ((g_ss + lam * g_ss) * b_a - g_sa * b_s) / det
                s_try = s + ds
                amp_try = amp + da
                if amp_try <= 0.0:
                    hit_boundary = True
                    lam = max(4.0 * lam, 1e-8)
                    continue
                v_try, r_try = _residual_pair(
                    position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s_try, amp_try
                )
                if r_try < resid:
                    s, amp, value, resid = s_try, amp_try, v_try, r_try
                    improved = True
                    break
                lam = max(4.0 * lam, 1e-8)
            if not improved:
                if hit_boundary:
                    raise NegativeAmplitude(
                        f"Newton trapped at amplitude > 0 boundary (amp={amp:.3e})"
                    )
                raise NoConvergence(iters, resid)
        return NssPoint(
            k=k,
            position=position,
            strength_re=strength_re,
            strength_im=s,
            gamma_f=gamma * float(profile(amp)),
            amplitude=amp,
            residual=resid,
            side=side,
            newton_iters=iters,
        )

    point = run(strength_im_guess, amplitude_guess)
    if multi_start > 0:
        spreads = [(1.0 + 0.02 * (i + 1), 1.0 + 0.5 * (i + 1)) for i in range(multi_start)]
        for fs, fa in spreads:
            try:
                other = run(strength_im_guess * fs, amplitude_guess * fa)
            except (NoConvergence, NegativeAmplitude, IntegrationError):
                continue
            if (
                abs(other.strength_im - point.strength_im) > 1e-6 * max(1.0, abs(point.strength_im))
                or abs(other.amplitude - point.amplitude) > 1e-6 * max(1.0, point.amplitude)
            ):
                logger.warning(
                    "second resonance basin at k=%.6g: (s=%.9g, amp=%.9g) besides (s=%.9g, amp=%.9g)",
                    k,
                    other.strength_im,
                    other.amplitude,
                    point.strength_im,
                    point.amplitude,
                )
    return point


# ---------------------------------------------------------------------------
# sweeping a wavenumber grid
# ---------------------------------------------------------------------------


def _classify(
    position: float,
    strength_re: float,
    gamma: float,
    profile,
    k: float,
    asymptote_positions: np.ndarray,
) -> SweepEntry:
    """Seed-level classification of one grid point (no solving yet)."""
    u = k / math.pi
    if asymptote_positions.size and np.min(np.abs(asymptote_positions / math.pi - u)) <= GUARD_BAND:
        return SweepEntry(u, GUARD, note="within asymptote guard band")
    try:
        gf_seed = perturbation.gamma_f_of_k(k, position, strength_re)
        s_seed = perturbation.strength_im_of_k(k, position, strength_re)
    except perturbation.AsymptoteProximity:
        return SweepEntry(u, GUARD, note="first-order denominator underflow")
    valid, margin = perturbation.first_order_validity(k, position, strength_re)
    if not valid:
        return SweepEntry(u, INVALID, gamma_f_seed=gf_seed, strength_im_seed=s_seed,
                          note=f"first-order validity margin {margin:.2e}")
    if abs(s_seed - 2.0 * k) > S_DRIFT_LIMIT * 2.0 * k:
        return SweepEntry(u, INVALID, gamma_f_seed=gf_seed, strength_im_seed=s_seed,
                          note="first-order s drifts from 2k beyond the sweep regime")
    den = math.sin(k) * math.cos(k * (1.0 - 2.0 * position))
    if abs(strength_re) / (den * den) > CURVATURE_LIMIT:
        return SweepEntry(u, INVALID, gamma_f_seed=gf_seed, strength_im_seed=s_seed,
                          note="next-order correction too large this close to an asymptote")
    f_target = gf_seed / gamma
    if f_target <= 0.0:
        # the profile cannot supply a response of this sign: spectral gap
        return SweepEntry(u, GAP, gamma_f_seed=gf_seed, strength_im_seed=s_seed)
    return SweepEntry(u, "solve", gamma_f_seed=gf_seed, strength_im_seed=s_seed)


def _solve_chunk(args) -> list[SweepEntry]:
    (
        position,
        strength_re,
        gamma,
        profile,
        k_values,
        side,
        seed_mode,
        ode_tol,
        max_steps,
        asymptote_positions,
    ) = args
    entries: list[SweepEntry] = []
    prev: Optional[NssPoint] = None
    for k in k_values:
        entry = _classify(position, strength_re, gamma, profile, k, asymptote_positions)
        if entry.status != "solve":
            entries.append(entry)
            if entry.status in (GUARD, INVALID):
                prev = None
            continue
        u = k / math.pi
        gf_seed = entry.gamma_f_seed
        s_seed = entry.strength_im_seed
        amp_seed = profile.amplitude_for(gf_seed / gamma)
        s0, a0 = s_seed, amp_seed
        if seed_mode == "continuation" and prev is not None:
            # take whichever candidate seed already has the smaller residual
            _, r_prev = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps,
                prev.strength_im, prev.amplitude,
            )
            _, r_pert = _residual_pair(
                position, strength_re, gamma, profile, k, side, ode_tol, max_steps, s0, a0
            )
            if r_prev < r_pert:
                s0, a0 = prev.strength_im, prev.amplitude
        try:
            point = solve_nss(
                position, strength_re, gamma, profile, k, s0, a0,
                side=side, ode_tol=ode_tol, max_steps=max_steps,
            )
            entries.append(SweepEntry(u, CONVERGED, point=point,
                                      gamma_f_seed=gf_seed, strength_im_seed=s_seed))
            prev = point
        except (NoConvergence, NegativeAmplitude, IntegrationError) as exc:
            entries.append(SweepEntry(u, FAILED, gamma_f_seed=gf_seed,
                                      strength_im_seed=s_seed, note=str(exc)))
            prev = None
    return entries


def sweep_k(
    position: float,
    strength_re: float,
    gamma: float,
    profile,
    k_grid: Sequence[float],
    side: str = "left",
    seed_mode: str = "perturbative",
    jobs: int = 1,
    ode_tol: float = DEFAULT_ODE_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> SweepResult:
    """Chart resonances over a strictly increasing wavenumber grid.

    Each grid point is seeded from the first-order formulas and solved
    exactly, or recorded as a gap when the required nonlinear response
    has the wrong sign for the profile, or excluded near the
    first-order asymptotes (hard guard band plus the validity and
    s-drift gates; see module notes).  ``seed_mode="continuation"``
    reuses the previous converged point as the Newton seed when its
    residual beats the perturbative seed's.  ``jobs > 1`` distributes
    grid chunks over a process pool (profile must be picklable).
    Failures are annotated per point, never raised.
    """
    k_values = np.asarray(list(k_grid), dtype=float)
    if k_values.size == 0:
        raise ValueError("k_grid must not be empty")
    if not (np.all(np.diff(k_values) > 0.0) and k_values[0] > 0.0):
        raise ValueError("k_grid must be strictly increasing and positive")
    if gamma == 0.0:
        raise ValueError("sweep requires a nonzero coupling")
    if seed_mode not in ("perturbative", "continuation"):
        raise ValueError(f"unknown seed_mode {seed_mode!r}")
    profile.amplitude_for  # early attribute check: profile must be invertible

    asymptote_positions = perturbation.asymptotes(position, float(k_values[-1]) * (1.0 + 1e-12))

    if jobs > 1:
        chunks = np.array_split(k_values, min(jobs * 4, len(k_values)))
        payloads = [
            (position, strength_re, gamma, profile, chunk, side, seed_mode,
             ode_tol, max_steps, asymptote_positions)
            for chunk in chunks
            if chunk.size
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_solve_chunk, payloads))
        entries = [e for part in parts for e in part]
    else:
        entries = _solve_chunk(
            (position, strength_re, gamma, profile, k_values, side, seed_mode,
             ode_tol, max_steps, asymptote_positions)
        )

    points = tuple(e.point for e in entries if e.status == CONVERGED)
    gaps: list[tuple[float, float]] = []
    run_start: Optional[float] = None
    last_u: Optional[float] = None
    for e in entries:
        if e.status == GAP:
            if run_start is None:
                run_start = e.k_over_pi
            last_u = e.k_over_pi
        else:
            if run_start is not None:
                gaps.append((run_start, last_u))
                run_start = None
    if run_start is not None:
        gaps.append((run_start, last_u))
    return SweepResult(
        points=points,
        asymptotes=tuple(float(v) for v in asymptote_positions),
        gaps=tuple(gaps),
        entries=tuple(entries),
    )


# ---------------------------------------------------------------------------
# nonlinearity threshold
# ---------------------------------------------------------------------------

GRID_STEP = math.pi / 2000.0
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ThresholdResult:
    """Minimum |gamma_f| supporting a resonance above the critical k."""

    value: float
    k_at_min: float


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-11) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def critical_k(position: float) -> float:
    """Wavenumber above which the threshold statement applies."""
    if not 0.0 < position < 1.0:
        raise ValueError("position must lie strictly inside (0,1)")
    half_width = abs(1.0 - 2.0 * position)
    if half_width == 0.0:
        return math.pi
    return math.pi / (2.0 * half_width)


def nonlinearity_threshold(
    position: float,
    strength_re: float,
    k_min: Optional[float] = None,
) -> ThresholdResult:
    """Minimize |k r / (sin k cos[k(1-2a)])| over wavenumbers above k_min.

    The default lower cutoff is the critical wavenumber of the
    position; a caller-supplied ``k_min`` may only raise it.  A dense
    grid scan (step pi/2000) brackets the minimum, which is then
    refined by golden section.  The scan stops once the envelope lower
    bound k*|r| exceeds the best value found, so the result is the
    global minimum on the half-line, bounded below by k_min*|r|.
    """
    r = abs(strength_re)
    if r == 0.0:
        raise ValueError("strength_re must be nonzero")
    k_lo = critical_k(position)
    if k_min is not None:
        k_lo = max(k_lo, float(k_min))

    def objective(k: float) -> float:
        den = abs(math.sin(k) * math.cos(k * (1.0 - 2.0 * position)))
        if den == 0.0:
            return math.inf
        return k * r / den

    best_k = math.nan
    best_val = math.inf
    k = k_lo + GRID_STEP
    while True:
        val = objective(k)
        if val < best_val:
            best_val, best_k = val, k
        if k * r > best_val:
            break
        k += GRID_STEP
    k_star = _golden_min(objective, best_k - GRID_STEP, best_k + GRID_STEP)
    return ThresholdResult(value=objective(k_star), k_at_min=k_star)
