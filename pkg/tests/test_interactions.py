import math

import numpy as np
import pytest

from rpflab.config_space import AnnulusSequence, Configuration, Window
from rpflab.interactions import (CompensatorSequence, DomainError, PotentialPair,
                                 block_interaction, c6x, c6y,
                                 compensated_hamiltonian, hamiltonian,
                                 lipschitz_bound, lipschitz_ratio,
                                 lipschitz_ratio_grid_sup, log_potential,
                                 pair_dot, power_gap_grid_sup, power_gap_sup,
                                 taylor_tail)
from rpflab.rng import stream

ANN = AnnulusSequence.default(8)
CONST0 = CompensatorSequence.constant(0.0)


class TestLogPotential:
    def test_unit_gap(self):
        assert log_potential(0.0, 1.0, 2.0) == 0.0

    def test_symmetry(self):
        rng = stream(21, 0)
        for _ in range(30):
            x, y = rng.uniform(-4, 4, 2)
            assert log_potential(x, y, 1.5) == log_potential(y, x, 1.5)

    def test_value(self):
        assert log_potential(0.0, 0.5, 2.0) == pytest.approx(2 * math.log(2), rel=1e-12)

    def test_collision_sentinel(self):
        assert log_potential(1.0, 1.0, 2.0) == math.inf


class TestHamiltonian:
    PP = PotentialPair.log_gas(2.0, phi=lambda p: p.real**2)

    def test_empty(self):
        assert hamiltonian(self.PP, Window.ball(2, ANN), Configuration()) == 0.0

    def test_single_point(self):
        c = Configuration.from_reals([0.5])
        assert hamiltonian(self.PP, Window.ball(1, ANN), c) == pytest.approx(0.25)

    def test_two_points_hand_expansion(self):
        c = Configuration.from_reals([0.25, -0.5])
        expect = 0.25**2 + 0.5**2 + log_potential(0.25, -0.5, 2.0)
        assert hamiltonian(self.PP, Window.ball(1, ANN), c) == pytest.approx(expect)

    def test_window_restriction(self):
        c = Configuration.from_reals([0.5, 3.0])
        assert hamiltonian(self.PP, Window.ball(1, ANN), c) == pytest.approx(0.25)

    def test_decomposition_identity(self):
        # energy over a big ball = inner ball + annulus + cross block
        rng = stream(21, 1)
        for _ in range(25):
            pts = rng.uniform(-4.9, 4.9, size=int(rng.integers(2, 10)))
            c = Configuration.from_reals(pts)
            whole = hamiltonian(self.PP, Window.ball(5, ANN), c)
            inner = hamiltonian(self.PP, Window.ball(2, ANN), c)
            ring = hamiltonian(self.PP, Window.annulus(2, 5, ANN), c)
            cross = block_interaction(c, c, ANN, (0, 2, 2, 5), self.PP)
            assert whole == pytest.approx(inner + ring + cross, rel=1e-10, abs=1e-10)


class TestBlockInteraction:
    PP = PotentialPair.log_gas(2.0)

    def test_equal_compensators_noop(self):
        comp = CompensatorSequence.constant(3.7)
        x = Configuration.from_reals([1.5])
        y = Configuration.from_reals([4.5])
        plain = block_interaction(x, y, ANN, (1, 2, 4, 5), self.PP)
        comped = block_interaction(x, y, ANN, (1, 2, 4, 5), self.PP, comp,
                                   compensated=True)
        assert plain == comped

    def test_empty_x_block(self):
        y = Configuration.from_reals([4.5])
        assert block_interaction(Configuration(), y, ANN, (1, 2, 4, 5), self.PP) == 0.0

    def test_single_pair(self):
        comp = CompensatorSequence(m_inf=0.0, values=(0, 0, 0, 1.0, 3.0))
        x = Configuration.from_reals([1.5])
        y = Configuration.from_reals([4.5])
        got = block_interaction(x, y, ANN, (1, 2, 4, 5), self.PP, comp,
                                compensated=True)
        expect = log_potential(1.5, 4.5, 2.0) + 1.5 * (1.0 - 3.0)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_block_validation(self):
        with pytest.raises(ValueError):
            block_interaction(Configuration(), Configuration(), ANN,
                              (2, 2, 3, 4), self.PP)

    def test_compensation_telescoping(self):
        # tilt by (m_t, m_u) plus tilt by (m_u, m_v) = tilt by (m_t, m_v)
        # plus the plain interaction counted once more
        rng = stream(21, 2)
        comp = CompensatorSequence(m_inf=0.0, values=tuple(
            complex(rng.normal(), rng.normal()) for _ in range(8)))
        for _ in range(20):
            x = Configuration.from_reals(rng.uniform(-1.9, 1.9, 3))
            y = Configuration.from_reals(
                np.concatenate([rng.uniform(3, 8, 4), -rng.uniform(3, 8, 2)]))

            def tilted(t, u):
                plain = block_interaction(x, y, ANN, (0, 2, 3, 8), self.PP)
                diff = comp.m_at(t) - comp.m_at(u)
                sx = sum(p for p in x.points if abs(p) < 2)
                return plain + pair_dot(diff, sx)

            lhs = tilted(4, 5) + tilted(5, 6)
            rhs = tilted(4, 6) + block_interaction(x, y, ANN, (0, 2, 3, 8), self.PP)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


class TestCompensatedHamiltonian:
    def test_zero_compensator_reduces(self):
        pp = PotentialPair.log_gas(2.0, phi=lambda p: p.real**2)
        c = Configuration.from_reals([0.3, -0.7])
        w = Window.ball(1, ANN)
        assert compensated_hamiltonian(pp, CONST0, w, c) == hamiltonian(pp, w, c)

    def test_single_point_tilt(self):
        pp = PotentialPair.log_gas(2.0, phi=lambda p: 5.0)
        comp = CompensatorSequence.constant(2.0)
        c = Configuration.from_reals([0.4])
        got = compensated_hamiltonian(pp, comp, Window.ball(1, ANN), c)
        assert got == pytest.approx(5.0 - 0.4 * 2.0)

    @pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
    def test_softedge_tilt_is_bounded(self, beta):
        # the linear coefficient of the expanded soft-edge confinement is
        # beta * n^(1/3); tilting by exactly that leaves (beta/4) n^(-1/3) x^2
        from rpflab.ensembles import confinement
        xs = np.linspace(-3, 3, 41)
        sup_prev = math.inf
        for n in (10, 100, 1000, 10000):
            m = beta * n ** (1.0 / 3.0)
            tilted = [confinement(beta, n, "softedge", x) - m * x for x in xs]
            expect = [(beta / 4.0) * n ** (-1.0 / 3.0) * x * x for x in xs]
            assert np.allclose(tilted, expect, rtol=1e-8, atol=1e-8)
            sup = max(abs(t) for t in tilted)
            assert sup <= sup_prev
            sup_prev = sup

    def test_wrong_tilt_diverges(self):
        # dropping the beta prefactor leaves a linear term that blows up in n
        from rpflab.ensembles import confinement
        beta, x = 2.0, 1.0
        sups = [abs(confinement(beta, n, "softedge", x) - n ** (1.0 / 3.0) * x)
                for n in (10, 1000, 100000)]
        assert sups[0] < sups[1] < sups[2]
        assert sups[2] > 10.0


class TestTaylorTail:
    def test_zero_point(self):
        y = Configuration.from_reals([2.0, -3.0])
        value, bound = taylor_tail(0.0, y, 2.0, 10)
        assert value == 0.0 and bound == 0.0

    def test_geometric_identity(self):
        y = Configuration.from_reals([1.0])
        value, bound = taylor_tail(0.5, y, 2.0, 200)
        assert value == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_remainder_honored_at_L20(self):
        y = Configuration.from_reals([1.0])
        value, bound = taylor_tail(0.5, y, 2.0, 20)
        assert abs(value - 2 * math.log(2)) <= bound

    def test_remainder_honored_random(self):
        rng = stream(21, 3)
        for _ in range(300):
            k = int(rng.integers(1, 7))
            x = complex(rng.uniform(-0.85, 0.85), 0)
            mods = rng.uniform(max(abs(x) / 0.9, 1e-3), 6.0, k)
            signs = np.where(rng.random(k) < 0.5, -1, 1)
            y = Configuration.from_reals(mods * signs)
            beta = float(rng.uniform(0.5, 4.0))
            L = int(rng.integers(10, 80))
            value, bound = taylor_tail(x, y, beta, L)
            direct = sum(log_potential(x, p, beta) - log_potential(0.0, p, beta)
                         for p in y.points)
            assert abs(value - direct) <= bound + 1e-12

    def test_domain_error(self):
        with pytest.raises(DomainError):
            taylor_tail(1.5, Configuration.from_reals([1.0]), 2.0, 10)


class TestLipschitz:
    def test_ratio_empty_equal_comps(self):
        assert lipschitz_ratio(0.2, -0.3, Configuration(), 1, 4, ANN, CONST0, 2.0) == 0.0

    def test_ratio_empty_constant_difference(self):
        comp = CompensatorSequence(m_inf=0.0, values=(2.5, 0, 0, 1.5))
        # m_1 - m_4 = 1.0, real line: ratio is exactly |1.0|
        for x, w in ((0.2, -0.3), (0.9, 0.85)):
            got = lipschitz_ratio(x, w, Configuration(), 1, 4, ANN, comp, 2.0)
            assert got == pytest.approx(1.0, rel=1e-12)

    def test_ratio_single_y_direct(self):
        y = Configuration.from_reals([2.5])
        beta = 2.0
        got = lipschitz_ratio(0.1, -0.1, y, 1, 4, ANN, CONST0, beta)
        direct = abs(log_potential(0.1, 2.5, beta) - log_potential(-0.1, 2.5, beta)) / 0.2
        assert got == pytest.approx(direct, rel=1e-12)

    def test_ratio_matches_taylor_tail(self):
        y = Configuration.from_reals([3.0, -4.0])
        beta = 2.0
        x, w = 0.4, -0.2
        vx, bx = taylor_tail(x, y, beta, 400)
        vw, bw = taylor_tail(w, y, beta, 400)
        # expansion gives Psi(x)-Psi(w) (tilt-free); compare with zero comps
        got = lipschitz_ratio(x, w, y, 1, 5, ANN, CONST0, beta)
        assert got == pytest.approx(abs(vx - vw) / abs(x - w), abs=1e-9)

    def test_requires_distinct_window_points(self):
        with pytest.raises(ValueError):
            lipschitz_ratio(0.1, 0.1, Configuration(), 1, 2, ANN, CONST0, 2.0)
        with pytest.raises(DomainError):
            lipschitz_ratio(1.4, 0.0, Configuration(), 1, 2, ANN, CONST0, 2.0)

    def test_power_gap_closed_form(self):
        # grid refinement converges to radius^(l-1) from below
        for ell, radius in ((2, 1.0), (2, 3.0), (3, 2.0), (5, 1.5)):
            grid = power_gap_grid_sup(ell, radius)
            closed = power_gap_sup(ell, radius)
            assert grid <= closed + 1e-12
            assert grid >= 0.97 * closed

    def test_c6x_example(self):
        # ell0 = 3 on the interval (-b, b): the order-2 factor
        # sup |x+w|/2 = b dominates, so c6x = beta * b
        for b in (1.0, 2.0, 4.0):
            assert c6x(2.0, b, 3) == pytest.approx(2.0 * b)

    def test_c6y_value(self):
        assert c6y(2.0, 4.0) == pytest.approx(0.5)

    def test_bound_empty(self):
        assert lipschitz_bound(Configuration(), 1, 4, ANN, CONST0, 2.0, 3) == 0.0

    def test_bound_domain_error(self):
        with pytest.raises(DomainError):
            lipschitz_bound(Configuration.from_reals([0.5]), 1, 4, ANN, CONST0, 2.0, 3)
        with pytest.raises(DomainError):
            lipschitz_bound(Configuration.from_reals([1.0]), 1, 4, ANN, CONST0, 2.0, 3)

    def test_bound_dominates_grid_sup(self):
        rng = stream(21, 7)
        for trial in range(200):
            k = int(rng.integers(0, 10))
            mods = rng.uniform(2.0, 9.0, k)
            signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
            y = Configuration.from_reals(mods * signs)
            comp = CompensatorSequence(
                m_inf=complex(rng.normal()),
                values=tuple(complex(rng.normal()) for _ in range(8)))
            sup = lipschitz_ratio_grid_sup(y, 1, 5, ANN, comp, 2.0, grid=50)
            bound = lipschitz_bound(y, 1, 5, ANN, comp, 2.0, 3)
            assert sup <= bound + 1e-9, (trial, sup, bound)

    def test_bound_dominates_complex_points(self):
        rng = stream(21, 8)
        for _ in range(50):
            k = int(rng.integers(1, 6))
            mods = rng.uniform(2.0, 6.0, k)
            args = rng.uniform(0, 2 * math.pi, k)
            y = Configuration(mods * np.exp(1j * args))
            comp = CompensatorSequence(
                m_inf=complex(rng.normal(), rng.normal()),
                values=tuple(complex(rng.normal(), rng.normal()) for _ in range(8)))
            sup = lipschitz_ratio_grid_sup(y, 1, 4, ANN, comp, 2.0, grid=40)
            bound = lipschitz_bound(y, 1, 4, ANN, comp, 2.0, 3)
            assert sup <= bound + 1e-9

    def test_multipoint_window_difference(self):
        # m points in the window, envelope k: the compensated interaction
        # moves by at most m * k * diam when the window content is replaced
        rng = stream(21, 9)
        pp = PotentialPair.log_gas(2.0)
        comp = CompensatorSequence.constant(1.3)
        for _ in range(50):
            m = int(rng.integers(1, 4))
            y = Configuration.from_reals(
                rng.uniform(2.0, 8.0, 5) * np.where(rng.random(5) < 0.5, -1, 1))
            k_env = lipschitz_bound(y, 1, 5, ANN, comp, 2.0, 3)
            xa = Configuration.from_reals(rng.uniform(-0.99, 0.99, m))
            xb = Configuration.from_reals(rng.uniform(-0.99, 0.99, m))
            va = block_interaction(xa, y, ANN, (0, 1, 1, 5), pp, comp, True)
            vb = block_interaction(xb, y, ANN, (0, 1, 1, 5), pp, comp, True)
            diam = 2.0 * ANN.radius(1)
            assert abs(va - vb) <= m * k_env * diam + 1e-9
