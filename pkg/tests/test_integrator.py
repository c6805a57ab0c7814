"""Integration routes against closed-form solutions and conservation laws."""

import io
import math

import numpy as np
import pytest

from nsskit import (
    Constant,
    CustomProfile,
    IntegrationError,
    Kerr,
    NonConvergent,
    PotentialSpec,
    ProblemConfig,
    StepLimitExceeded,
    WaveState,
    apply_delta_jump,
    integrate,
    picard_solve,
    rhs,
    write_trajectory,
)

from oracles import (
    constant_profile_state,
    kerr_energy,
    linear_delta_jost_left,
    picard_first_order_constant,
    probability_current,
)


def free_config(gamma=0.0, profile=None, **kw):
    return ProblemConfig(PotentialSpec.zero(), gamma=gamma, profile=profile or Kerr(), **kw)


class TestRhs:
    def test_free_oscillator(self):
        d1, d2 = rhs(free_config(), 1.0, WaveState(0.3, 1.0, 0.0))
        assert d1 == 0.0
        assert d2 == -1.0

    def test_kerr_direct_substitution(self):
        d1, d2 = rhs(free_config(gamma=2.0), 1.0, WaveState(0.0, 1.0, 0.5j))
        assert d1 == 0.5j
        assert d2 == pytest.approx((2.0 * 1.0 - 1.0) * 1.0)

    def test_kerr_cancellation(self):
        _, d2 = rhs(free_config(gamma=1.0), 2.0, WaveState(0.1, 2j, 0.0))
        assert d2 == pytest.approx(0.0)

    def test_refuses_spike_position(self):
        config = ProblemConfig(PotentialSpec.delta(1j, 0.5), gamma=0.0)
        with pytest.raises(ValueError, match="delta"):
            rhs(config, 1.0, WaveState(0.5, 1.0, 0.0))


class TestDeltaJump:
    def test_forward(self):
        out = apply_delta_jump(2j, WaveState(0.5, 1.0, 0.0), +1)
        assert out.psi == 1.0
        assert out.dpsi == 2j

    def test_backward_inverts(self):
        out = apply_delta_jump(2j, WaveState(0.5, 1.0, 2j), -1)
        assert out.dpsi == 0.0

    def test_zero_strength_identity(self):
        state = WaveState(0.25, 1 - 1j, 3j)
        out = apply_delta_jump(0j, state, +1)
        assert out == state

    def test_direction_validated(self):
        with pytest.raises(ValueError):
            apply_delta_jump(1j, WaveState(0.5, 1.0, 0.0), 0)


class TestIntegrate:
    def test_plane_wave(self):
        k = math.pi
        res = integrate(free_config(), k, 0.0, 1.0, WaveState(0.0, 1.0, -1j * k))
        assert res.final.x == 1.0
        assert res.final.psi == pytest.approx(-1.0, abs=5e-11)
        assert res.final.dpsi == pytest.approx(1j * math.pi, abs=5e-10)

    def test_linear_resonance_residual(self):
        # strength 2ik makes the continued wave purely outgoing
        k = 1.0
        config = ProblemConfig(PotentialSpec.delta(2j * k, 0.5), gamma=0.0)
        res = integrate(config, k, 0.0, 1.0, WaveState(0.0, 1.0, -1j * k))
        f_minus = res.final.dpsi - 1j * k * res.final.psi
        assert abs(f_minus) <= 1e-8 * k

    def test_small_kerr_matches_first_order_picard(self):
        k, gamma = 2.0, 1e-3
        config = free_config(gamma=gamma)
        initial = WaveState(0.0, 1.0, -2j)
        res = integrate(config, k, 0.0, 1.0, initial)
        pic = picard_solve(config, k, initial, orders=1)(1.0)
        assert abs(res.final.psi - pic.psi) <= 1e-5

    @pytest.mark.parametrize("gamma,c", [(0.8, 1.7), (-1.2, 0.9), (2.0, 3.0)])
    def test_constant_profile_exact(self, gamma, c):
        # constant profile keeps the equation linear: exact oracle
        k = 2.3
        config = free_config(gamma=gamma, profile=Constant(c))
        initial = WaveState(0.0, 0.7 - 0.2j, 0.1 + 1j)
        res = integrate(config, k, 0.0, 1.0, initial)
        psi, dpsi = constant_profile_state(k, gamma, c, 0.0, initial.psi, initial.dpsi, 1.0)
        assert res.final.psi == pytest.approx(psi, rel=1e-8)
        assert res.final.dpsi == pytest.approx(dpsi, rel=1e-8)

    def test_linear_delta_oracle(self, rng):
        for _ in range(10):
            k = float(rng.uniform(0.5, 8.0))
            a = float(rng.uniform(0.1, 0.9))
            z = complex(rng.normal(), rng.normal()) * 2.0
            amp = complex(rng.normal(), rng.normal())
            if abs(amp) < 0.1:
                amp += 0.5
            config = ProblemConfig(PotentialSpec.delta(z, a), gamma=0.0)
            res = integrate(config, k, 0.0, 1.0, WaveState(0.0, amp, -1j * k * amp))
            psi1, dpsi1, _, _ = linear_delta_jost_left(k, z, a, amp)
            scale = abs(psi1) + abs(dpsi1) / k
            assert abs(res.final.psi - psi1) / scale < 1e-9
            assert abs(res.final.dpsi - dpsi1) / (k * scale) < 1e-9

    def test_backward_reversibility(self, rng):
        for _ in range(5):
            k = float(rng.uniform(0.5, 6.0))
            config = ProblemConfig(
                PotentialSpec.delta(complex(rng.normal(), rng.normal()), 0.37),
                gamma=float(rng.uniform(-1.0, 1.0)),
            )
            initial = WaveState(0.0, 1.0, -1j * k)
            fwd = integrate(config, k, 0.0, 1.0, initial)
            back = integrate(config, k, 1.0, 0.0, fwd.final)
            tol = 100.0 * config.ode_tol
            scale = abs(initial.psi) + abs(initial.dpsi) / k
            assert abs(back.final.psi - initial.psi) / scale < tol
            assert abs(back.final.dpsi - initial.dpsi) / (k * scale) < tol

    def test_est_error_bounded_by_tolerance(self):
        res = integrate(free_config(), 20.0, 0.0, 1.0, WaveState(0.0, 1.0, -20j))
        assert 0.0 < res.est_error <= 1e-10

    def test_tolerance_convergence(self, rng):
        # halving the tolerance moves psi(1) by no more than the
        # coarser run's accumulated error estimate
        for _ in range(5):
            k = float(rng.uniform(1.0, 9.0))
            gamma = float(rng.uniform(-0.5, 0.5))
            coarse_cfg = free_config(gamma=gamma, ode_tol=1e-8)
            fine_cfg = free_config(gamma=gamma, ode_tol=5e-9)
            initial = WaveState(0.0, 1.0, -1j * k)
            coarse = integrate(coarse_cfg, k, 0.0, 1.0, initial)
            fine = integrate(fine_cfg, k, 0.0, 1.0, initial)
            scale = abs(coarse.final.psi) + abs(coarse.final.dpsi) / k
            assert abs(coarse.final.psi - fine.final.psi) / scale <= coarse.est_error

    def test_current_conserved_and_jumps(self, rng):
        # j = Im(conj(psi) psi') is flat away from the spike and jumps
        # by Im(z)|psi(a)|^2 across it, for real coupling
        for _ in range(8):
            k = float(rng.uniform(0.8, 6.0))
            a = float(rng.uniform(0.15, 0.85))
            z = complex(rng.normal(), rng.normal()) * 1.5
            gamma = float(rng.uniform(-1.0, 1.0))
            amp = 1.0 + 0.3 * float(rng.normal())
            config = ProblemConfig(PotentialSpec.delta(z, a), gamma=gamma)
            res = integrate(
                config, k, 0.0, 1.0, WaveState(0.0, amp, -1j * k * amp), want_trajectory=True
            )
            states = res.trajectory
            at_spike = [i for i, s in enumerate(states) if s.x == a]
            assert len(at_spike) == 2
            pre, post = states[at_spike[0]], states[at_spike[1]]
            peak = max(abs(s.psi) for s in states) ** 2
            j = [probability_current(s.psi, s.dpsi) for s in states]
            seg1 = j[: at_spike[0] + 1]
            seg2 = j[at_spike[1]:]
            assert max(seg1) - min(seg1) <= 1e-8 * peak
            assert max(seg2) - min(seg2) <= 1e-8 * peak
            jump = j[at_spike[1]] - j[at_spike[0]]
            assert jump == pytest.approx(z.imag * abs(pre.psi) ** 2, abs=1e-8 * peak)

    def test_kerr_energy_invariant(self, rng):
        # |psi'|^2 - k^2|psi|^2 + gamma |psi|^4/2 is a first integral
        for _ in range(5):
            k = float(rng.uniform(1.0, 5.0))
            gamma = float(rng.uniform(-2.0, 2.0))
            res = integrate(
                free_config(gamma=gamma), k, 0.0, 1.0,
                WaveState(0.0, 1.0 + 0.4j, -1j * k), want_trajectory=True,
            )
            energies = [kerr_energy(k, gamma, s.psi, s.dpsi) for s in res.trajectory]
            scale = max(abs(e) for e in energies) + k * k
            assert max(energies) - min(energies) <= 1e-8 * scale

    def test_step_limit(self):
        config = free_config(ode_tol=1e-12, max_steps=10)
        with pytest.raises(StepLimitExceeded):
            integrate(config, 30.0, 0.0, 1.0, WaveState(0.0, 1.0, -30j))

    def test_blow_up_reported(self):
        # strong defocusing response grows super-exponentially
        config = free_config(gamma=1e4, max_steps=30000)
        with pytest.raises(IntegrationError):
            integrate(config, 1.0, 0.0, 1.0, WaveState(0.0, 1.0, 0.0))

    def test_zero_length_run(self):
        initial = WaveState(0.3, 1.0, 2j)
        res = integrate(free_config(), 1.0, 0.3, 0.3, initial)
        assert res.final == initial
        assert res.steps_taken == 0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            integrate(free_config(), -1.0, 0.0, 1.0, WaveState(0.0, 1.0, 0.0))
        with pytest.raises(ValueError):
            integrate(free_config(), 1.0, 0.0, 1.5, WaveState(0.0, 1.0, 0.0))
        with pytest.raises(ValueError):
            integrate(free_config(), 1.0, 0.2, 0.8, WaveState(0.0, 1.0, 0.0))

    def test_custom_profile_python_path(self):
        # saturable response has no compiled fast path; same contract
        sat = CustomProfile(lambda amp: amp * amp / (1.0 + amp * amp))
        config = free_config(gamma=0.3, profile=sat)
        res = integrate(config, 2.0, 0.0, 1.0, WaveState(0.0, 1.0, -2j))
        assert res.est_error <= 1e-10
        # cross-check against the order-2 integral-equation route
        pic = picard_solve(config, 2.0, WaveState(0.0, 1.0, -2j), orders=2)(1.0)
        assert abs(res.final.psi - pic.psi) <= 1e-5


class TestTrajectory:
    def test_rows_and_csv(self):
        config = ProblemConfig(PotentialSpec.delta(1j, 0.5), gamma=0.0)
        res = integrate(config, 1.0, 0.0, 1.0, WaveState(0.0, 1.0, -1j), want_trajectory=True)
        assert res.trajectory[0].x == 0.0
        assert res.trajectory[-1].x == 1.0
        buf = io.StringIO()
        write_trajectory(res, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "x,re_psi,im_psi,re_dpsi,im_dpsi"
        assert len(lines) == len(res.trajectory) + 1
        # round-trippable floats
        x, re_psi, *_ = lines[1].split(",")
        assert float(x) == res.trajectory[0].x
        assert float(re_psi) == res.trajectory[0].psi.real

    def test_no_trajectory_by_default(self):
        res = integrate(free_config(), 1.0, 0.0, 1.0, WaveState(0.0, 1.0, -1j))
        assert res.trajectory is None
        with pytest.raises(ValueError):
            write_trajectory(res, io.StringIO())


class TestPicard:
    def test_zero_coupling_returns_free_solution(self):
        k = 1.7
        sol = picard_solve(free_config(), k, WaveState(0.0, 1.0, -1j * k), orders=3)
        for x in (0.0, 0.3, 1.0):
            expect = complex(math.cos(k * x), -math.sin(k * x))
            got = sol(x)
            assert got.psi == pytest.approx(expect, rel=1e-12)

    def test_first_order_constant_closed_form(self):
        # k=1, f=1, psi0=e^{-ix}: the order-1 correction integrates in
        # closed form (frozen in the oracle module)
        eps = 0.05
        config = free_config(gamma=eps, profile=Constant(1.0))
        sol = picard_solve(config, 1.0, WaveState(0.0, 1.0, -1j), orders=1)
        for x in (0.25, 0.5, 1.0):
            assert sol(x).psi == pytest.approx(picard_first_order_constant(eps, x), rel=1e-9)

    def test_small_coupling_first_order_form(self):
        # psi(1) = e^{-ik} amp (1 + O(gamma)) with the documented coefficient
        k, gamma, amp = 2.0, 1e-4, 1.0
        from oracles import free_first_order_psi_end

        config = free_config(gamma=gamma, profile=Kerr())
        got = picard_solve(config, k, WaveState(0.0, amp, -1j * k * amp), orders=1)(1.0)
        expect = free_first_order_psi_end(k, gamma * amp * amp, amp)
        assert abs(got.psi - expect) <= 1e-9

    def test_agrees_with_rk_at_order_two(self, rng):
        for _ in range(6):
            k = float(rng.uniform(0.7, 10.0))
            amp = complex(rng.uniform(0.3, 1.5), rng.uniform(-0.4, 0.4))
            ratio = 10.0 ** float(rng.uniform(-6.0, -3.0))
            gamma = float(rng.choice((-1.0, 1.0))) * ratio * k * k / abs(amp) ** 2
            config = free_config(gamma=gamma)
            initial = WaveState(0.0, amp, -1j * k * amp)
            rk = integrate(config, k, 0.0, 1.0, initial).final
            pic = picard_solve(config, k, initial, orders=2)(1.0)
            scale = abs(rk.psi) + abs(rk.dpsi) / k
            assert (abs(rk.psi - pic.psi) + abs(rk.dpsi - pic.dpsi) / k) / scale <= 1e-6

    def test_interior_start_and_both_directions(self):
        k, gamma = 1.3, 1e-3
        config = free_config(gamma=gamma)
        mid = integrate(config, k, 0.0, 0.5, WaveState(0.0, 1.0, -1j * k)).final
        sol = picard_solve(config, k, mid, orders=2)
        left = sol(0.0)
        assert abs(left.psi - 1.0) <= 1e-6
        right = sol(1.0)
        full = integrate(config, k, 0.0, 1.0, WaveState(0.0, 1.0, -1j * k)).final
        assert abs(right.psi - full.psi) <= 1e-6

    def test_rejects_delta_config(self):
        config = ProblemConfig(PotentialSpec.delta(1j, 0.5), gamma=0.1)
        with pytest.raises(ValueError, match="zero potential"):
            picard_solve(config, 1.0, WaveState(0.0, 1.0, -1j), orders=1)

    def test_rejects_bad_orders(self):
        with pytest.raises(ValueError):
            picard_solve(free_config(), 1.0, WaveState(0.0, 1.0, -1j), orders=0)

    def test_divergence_detected(self):
        # coupling far beyond the contraction regime blows the iterates up
        config = free_config(gamma=4e3)
        with pytest.raises(NonConvergent):
            picard_solve(config, 1.0, WaveState(0.0, 1.0, -1j), orders=4)
