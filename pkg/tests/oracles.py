"""Independent reference solutions used by the tests.

Everything here is derived by hand from elementary plane-wave matching
or from closed-form linear solutions, with no code shared with the
package internals; these are the oracles the numerical routes are
checked against.
"""

import cmath
import math


def linear_delta_jost_left(k, z, a, amp):
    """gamma = 0 left Jost data for a delta of strength z at position a.

    Plane-wave matching: psi = amp*e^{-ikx} for x < a; the derivative
    jump psi'(a+) = psi'(a-) + z*psi(a) fixes the outgoing/incoming
    coefficients alpha, beta of psi = alpha*e^{ikx} + beta*e^{-ikx} for
    x > a.  Returns (psi(1), psi'(1), F+, F-).
    """
    alpha = amp * cmath.exp(-2j * k * a) * z / (2j * k)
    beta = amp * (2j * k - z) / (2j * k)
    e_p = cmath.exp(1j * k)
    e_m = cmath.exp(-1j * k)
    psi1 = alpha * e_p + beta * e_m
    dpsi1 = 1j * k * (alpha * e_p - beta * e_m)
    f_plus = amp * z * cmath.exp(1j * k * (1.0 - 2.0 * a))
    f_minus = amp * (z - 2j * k) * e_m
    return psi1, dpsi1, f_plus, f_minus


def linear_delta_jost_right(k, z, a, amp):
    """gamma = 0 right Jost data: psi = amp*e^{ik(x-1)} for x > a.

    Returns (psi(0), psi'(0), G+, G-).
    """
    alpha = amp * cmath.exp(-1j * k) * (2j * k - z) / (2j * k)
    beta = amp * cmath.exp(1j * k * (2.0 * a - 1.0)) * z / (2j * k)
    psi0 = alpha + beta
    dpsi0 = 1j * k * (alpha - beta)
    g_plus = amp * cmath.exp(-1j * k) * (2j * k - z)
    g_minus = -amp * z * cmath.exp(1j * k * (2.0 * a - 1.0))
    return psi0, dpsi0, g_plus, g_minus


def linear_delta_amplitudes(k, z, a):
    """gamma = 0 reflection/transmission of the lone delta spike."""
    den = 2j * k - z
    t = 2j * k / den
    r_left = z * cmath.exp(2j * k * a) / den
    r_right = z * cmath.exp(-2j * k * a) / den
    return r_left, t, r_right, t


def constant_profile_state(k, gamma, c, x0, psi0, dpsi0, x):
    """Exact solution when the profile is constant: shifted wavenumber.

    With f = c the equation is linear, psi'' = (gamma*c - k^2) psi, so
    the solution is trigonometric in k_eff = sqrt(k^2 - gamma*c)
    (complex square root when the shift overturns the sign).
    """
    keff = cmath.sqrt(k * k - gamma * c)
    ph = keff * (x - x0)
    if keff == 0:
        return psi0 + dpsi0 * (x - x0), dpsi0
    psi = psi0 * cmath.cos(ph) + dpsi0 * cmath.sin(ph) / keff
    dpsi = -keff * psi0 * cmath.sin(ph) + dpsi0 * cmath.cos(ph)
    return psi, dpsi


def picard_first_order_constant(eps, x):
    """Order-1 iterate for k=1, f=1, psi0 = e^{-ix}, coupling eps.

    The correction integral has the closed form
    int_0^x sin(x-y) e^{-iy} dy = (sin x - x e^{-ix}) / (2i).
    """
    return cmath.exp(-1j * x) + eps * (cmath.sin(x) - x * cmath.exp(-1j * x)) / 2j


def free_first_order_psi_end(k, gamma_f, amp):
    """First order in the coupling for NO spike: left Jost value at 1.

    From one Volterra iteration of psi0 = amp*e^{-iky}:
    psi(1) = amp*e^{-ik} * (1 + gamma_f*(1 - e^{2ik} + 2ik)/(4k^2)).
    """
    coeff = (1.0 - cmath.exp(2j * k) + 2j * k) / (4.0 * k * k)
    return amp * cmath.exp(-1j * k) * (1.0 + gamma_f * coeff)


def probability_current(psi, dpsi):
    """j = Im(conj(psi) * psi'); conserved where the potential is real."""
    return (psi.conjugate() * dpsi).imag


def kerr_energy(k, gamma, psi, dpsi):
    """|psi'|^2 + k^2 |psi|^2 - gamma |psi|^4 / 2; constant for real gamma."""
    u = abs(psi) ** 2
    return abs(dpsi) ** 2 + k * k * u - gamma * u * u / 2.0


def threshold_grid_oracle(position, r, k_lo, k_hi, step=math.pi / 20000.0):
    """Dense grid scan of |k r / (sin k cos[k(1-2a)])| on [k_lo, k_hi]."""
    best_val = math.inf
    best_k = math.nan
    k = k_lo
    while k <= k_hi:
        den = abs(math.sin(k) * math.cos(k * (1.0 - 2.0 * position)))
        if den > 0.0:
            val = k * abs(r) / den
            if val < best_val:
                best_val, best_k = val, k
        k += step
    return best_val, best_k
