import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _helpers import assert_same_multiset
from smoothgames.dynamics import MethodConfig, exact_linear_operator
from smoothgames.errors import DegenerateEigenvalueError, HypothesisError, OutOfRangeError
from smoothgames.games import AlphaGame, BilinearGame, KappaAlphaGame
from smoothgames.spectral import Spectrum, eigenvalues, poly_roots
from smoothgames.theory import (alt_convergence_rate, benefit_interval, best_step_size, char_poly_alt,
                                char_poly_sim, momentum_eigenvalues, momentum_radius, optimal_momentum,
                                polyak_momentum, rho_derivative_at_zero, sim_divergence_bound)


def grid_best_eta(eigs, n=100_000, hi=None):
    eigs = np.asarray(eigs, dtype=complex)
    if hi is None:
        hi = 2.0 * np.max(eigs.real / np.abs(eigs) ** 2)
    grid = np.linspace(hi / n, hi, n)
    vals = np.max(np.abs(1 - np.multiply.outer(grid, eigs)) ** 2, axis=1)
    k = int(np.argmin(vals))
    return grid[k], vals[k], grid[1] - grid[0]


def random_spectrum(rng, size):
    # conjugate pairs and real values with positive real part
    out = []
    while len(out) < size:
        re = rng.uniform(0.05, 3.0)
        if len(out) + 2 <= size and rng.random() < 0.6:
            im = rng.uniform(-3, 3)
            out += [complex(re, im), complex(re, -im)]
        else:
            out.append(complex(re, 0.0))
    return out


def rho_sq(lam, eta, beta):
    return momentum_eigenvalues(lam, eta, beta).rho


class TestBestStepSize:
    def test_single_real(self):
        rep = best_step_size([1.0])
        assert rep.eta_best == 1.0 and rep.rho_best == 0.0

    def test_two_real(self):
        rep = best_step_size([1.0, 2.0])
        assert rep.eta_best == pytest.approx(2 / 3, abs=1e-12)
        assert rep.rho_best == pytest.approx(1 / 3, abs=1e-12)
        eta, _, cell = grid_best_eta([1.0, 2.0])
        assert abs(eta - rep.eta_best) <= cell

    def test_single_complex(self):
        rep = best_step_size(Spectrum.from_values([1 + 1j]))
        assert rep.eta_best == pytest.approx(0.5, abs=1e-15)
        assert rep.rho_best**2 == pytest.approx(0.5, abs=1e-15)
        assert rep.lower_bound_rho_sq == pytest.approx(math.sin(math.pi / 4) ** 2)

    def test_rejects_non_positive_real_part(self):
        with pytest.raises(HypothesisError):
            best_step_size([1.0, 1j])
        with pytest.raises(ValueError):
            best_step_size([])

    def test_lambda_one_tie_rule(self):
        # equal Re(1/lam): the larger |lam| comes first
        rep = best_step_size([1.0, 1 + 1j, 1 - 1j])
        assert rep.eta_lower == pytest.approx(0.5)

    def test_bound_chain_on_seeded_spectra(self):
        rng = np.random.default_rng(100)
        for _ in range(100):
            eigs = random_spectrum(rng, rng.integers(1, 9))
            rep = best_step_size(eigs)
            assert rep.eta_lower - 1e-8 <= rep.eta_best <= rep.eta_upper + 1e-8
            assert rep.lower_bound_rho_sq - 1e-8 <= rep.rho_best**2 <= rep.upper_bound_rho_sq + 1e-8
            eta, val, cell = grid_best_eta(eigs)
            assert abs(eta - rep.eta_best) <= cell
            assert rep.rho_best**2 <= val + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.01, 10), st.floats(-10, 10)), min_size=1, max_size=6))
    def test_optimality_against_perturbation(self, parts):
        eigs = np.array([complex(r, i) for r, i in parts])
        rep = best_step_size(eigs)
        f = lambda eta: np.max(np.abs(1 - eta * eigs) ** 2)  # noqa: E731
        best = f(rep.eta_best)
        assert best == pytest.approx(rep.rho_best**2, abs=1e-12)
        for eta in rep.eta_best * np.array([0.9, 0.99, 0.999, 1.001, 1.01, 1.1]):
            assert f(eta) >= best - 1e-12


class TestMomentumEigenvalues:
    def test_zero_momentum(self):
        lam, eta = 0.7 + 0.2j, 0.9
        me = momentum_eigenvalues(lam, eta, 0.0)
        assert me.mu_plus == pytest.approx(1 - eta * lam)
        assert me.mu_minus == 0

    def test_figure_parameters_against_companion(self):
        for lam in (0.8 + 0.6j, 0.8 - 0.6j):
            me = momentum_eigenvalues(lam, 1.55, -0.25)
            s = 1 - 1.55 * lam - 0.25
            block = np.array([[s, 0.25], [1, 0]])
            assert_same_multiset([me.mu_plus, me.mu_minus], np.linalg.eigvals(block), 1e-10)

    def test_taylor_first_order(self):
        lam, eta, beta = 0.8 + 0.6j, 0.5, 1e-4
        me = momentum_eigenvalues(lam, eta, beta)
        approx = 1 - eta * lam - beta * eta * lam / (1 - eta * lam)
        assert abs(me.mu_plus - approx) <= 1e-6

    def test_degenerate(self):
        # 1 - eta*lam + beta = 0 with lam = 1, eta = 1.5, beta = 0.5
        me = momentum_eigenvalues(1.0, 1.5, 0.5)
        assert me.discriminant is None
        assert me.mu_plus == pytest.approx(math.sqrt(0.5) * 1j)
        assert me.mu_minus == pytest.approx(-math.sqrt(0.5) * 1j)
        assert me.mu_plus * me.mu_minus == pytest.approx(0.5)

    def test_negative_real_discriminant_branch(self):
        # real lam and s with 4 beta > s^2 gives a negative real discriminant
        me = momentum_eigenvalues(1.0, 0.5, 0.5)
        assert me.discriminant.imag == 0 and me.discriminant.real < 0
        sq = (2 * me.mu_plus / (1 - 0.5 + 0.5)) - 1
        assert sq.real == pytest.approx(0, abs=1e-15)
        assert sq.imag == pytest.approx(math.sqrt(-me.discriminant.real))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            momentum_eigenvalues(complex(np.nan, 0), 0.1, 0.1)

    def test_root_identities_seeded(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            eta, beta = rng.uniform(0, 2), rng.uniform(-1, 1)
            me = momentum_eigenvalues(lam, eta, beta)
            assert abs(me.mu_plus * me.mu_minus - beta) <= 1e-10
            assert abs(me.mu_plus + me.mu_minus - (1 - eta * lam + beta)) <= 1e-10
            assert me.rho == max(abs(me.mu_plus) ** 2, abs(me.mu_minus) ** 2)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2), st.floats(-1, 1))
    def test_branch(self, re, im, eta, beta):
        lam = complex(re, im)
        me = momentum_eigenvalues(lam, eta, beta)
        if me.discriminant is None:
            return
        s = 1 - eta * lam + beta
        sq = (me.mu_plus - me.mu_minus) / s
        assert sq.real >= -1e-9
        disc = me.discriminant
        if disc.imag == 0 and disc.real < 0:
            assert sq.imag > 0
            assert sq.imag == pytest.approx(math.sqrt(-disc.real), rel=1e-9)
        else:
            assert abs(sq - cmath.sqrt(disc)) <= 1e-9 * max(1, abs(sq))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.1, 3), st.floats(0.01, 2), st.floats(0.01, 1))
    def test_negative_real_discriminant_uses_upper_branch(self, lam, eta, beta):
        me = momentum_eigenvalues(lam, eta, beta)
        if me.discriminant is None or me.discriminant.real >= 0:
            return
        s = 1 - eta * lam + beta
        sq = (me.mu_plus - me.mu_minus) / s
        assert sq.imag == pytest.approx(math.sqrt(-me.discriminant.real), rel=1e-9)

    def test_vectorised_radius_matches_scalar(self):
        rng = np.random.default_rng(5)
        lams = [0.4 + 0.3j, 0.4 - 0.3j, 1.2]
        etas = rng.uniform(0, 2, 30)
        betas = rng.uniform(-1, 1, 30)
        rad = momentum_radius(lams, etas, betas)
        for e, b, r in zip(etas, betas, rad):
            assert r == pytest.approx(max(momentum_eigenvalues(l, e, b).radius for l in lams), rel=1e-9)

    def test_figure_parameters_radius_values(self):
        # at eta = 1.55 this momentum enlarges the radius of 0.8 +- 0.6i; the update operator agrees
        lams = [0.8 + 0.6j, 0.8 - 0.6j]
        with_momentum = max(momentum_eigenvalues(l, 1.55, -0.25).radius for l in lams)
        assert with_momentum == pytest.approx(0.9907750506563, abs=1e-12)
        assert max(abs(1 - 1.55 * l) for l in lams) == pytest.approx(0.9604686356149, abs=1e-12)
        m = exact_linear_operator(AlphaGame(0.4, [[1.0]]), MethodConfig.uniform("simultaneous", 1.55, -0.25))
        assert eigenvalues(m).spectral_radius == pytest.approx(with_momentum, abs=1e-10)

    def test_figure_parameters_optimised_circles(self):
        # optimised over the step size, beta = -0.25 shrinks the circle from |sin psi| = 0.6 to 0.5
        lams = [0.8 + 0.6j, 0.8 - 0.6j]
        etas = np.linspace(1e-3, 2, 20_000)
        plain = momentum_radius(lams, etas, 0.0).min()
        negative = momentum_radius(lams, etas, -0.25).min()
        assert plain == pytest.approx(0.6, abs=1e-6)
        assert negative == pytest.approx(0.5, abs=1e-4)
        helps = etas[momentum_radius(lams, etas, -0.25) < momentum_radius(lams, etas, 0.0)]
        assert 0.7 < helps.min() and helps.max() < 1.45


class TestBenefitInterval:
    def test_complex(self):
        iv = benefit_interval(1 + 1j)
        r = math.sqrt(2)
        assert iv.lower == pytest.approx((r - 1) / r)
        assert iv.upper == pytest.approx((r + 1) / r)
        assert not iv.empty

    def test_real_is_empty(self):
        iv = benefit_interval(3.0)
        assert iv.empty and iv.lower == iv.upper == pytest.approx(1 / 3)
        assert not iv.contains(1 / 3)

    def test_wide_angle_contains_bracket(self):
        lam = cmath.rect(2.0, math.pi / 3)
        iv = benefit_interval(lam)
        inv = (1 / lam).real
        assert iv.lower <= inv and 2 * inv <= iv.upper

    def test_matches_modulus_form(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            lam = complex(rng.uniform(0.1, 3), rng.uniform(-3, 3))
            iv = benefit_interval(lam)
            r, im = abs(lam), abs(lam.imag)
            assert iv.lower == pytest.approx((r - im) / (r * lam.real))
            assert iv.upper == pytest.approx((r + im) / (r * lam.real))

    def test_rejects_left_half_plane(self):
        with pytest.raises(HypothesisError):
            benefit_interval(-1 + 1j)


class TestRhoDerivative:
    def test_at_inverse_real_part(self):
        assert rho_derivative_at_zero(1 + 1j, 0.5) == pytest.approx(2 * 1 * 0.5)

    def test_real_small_step(self):
        assert rho_derivative_at_zero(1.0, 0.5) == pytest.approx(-1.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateEigenvalueError):
            rho_derivative_at_zero(2.0, 0.5)

    def test_matches_finite_differences_and_interval(self):
        rng = np.random.default_rng(20)
        h = 1e-6
        for _ in range(20):
            lam = complex(rng.uniform(0.1, 2), rng.uniform(-2, 2))
            iv = benefit_interval(lam)
            for eta in rng.uniform(0.01, 1.2 * iv.upper, 20):
                closed = rho_derivative_at_zero(lam, eta)
                fd = (rho_sq(lam, eta, h) - rho_sq(lam, eta, -h)) / (2 * h)
                assert abs(fd - closed) <= 1e-3 * max(1.0, abs(closed))
                assert (closed > 0) == iv.contains(eta)

    def test_real_eigenvalue_nonpositive_below_inverse(self):
        for lam in (0.3, 1.0, 4.0):
            assert benefit_interval(lam).empty
            for eta in np.linspace(0.01, 0.99, 20) / lam:
                assert rho_derivative_at_zero(lam, eta) <= 0


class TestCharPolys:
    def test_sim_zero_momentum(self):
        p = char_poly_sim(1.0, 1.0, 1.0, 0.0, 0.0)
        np.testing.assert_allclose(np.real(p.coefficients), [0, 0, 2, -2, 1])
        assert poly_roots(p).spectral_radius == pytest.approx(math.sqrt(2))

    def test_decoupled(self):
        p = char_poly_sim(1.0, 0.0, 1.0, 0.3, -0.4)
        assert_same_multiset(poly_roots(p), [1, 1, 0.3, -0.4], 1e-7)
        q = char_poly_alt(2.0, 0.5, 0.0, 0.3, -0.4)
        assert_same_multiset(poly_roots(q), [1, 1, 0.3, -0.4], 1e-7)

    def test_alt_zero_momentum_unit_circle(self):
        for a in np.linspace(0.1, 4.0, 15):
            roots = [z for z in poly_roots(char_poly_alt(a, 1.0, 1.0, 0.0, 0.0)) if abs(z) > 1e-6]
            assert len(roots) == 2
            np.testing.assert_allclose(np.abs(roots), 1.0, atol=1e-10)

    def test_alt_negative_momentum_special_case(self):
        # x [(x - 1)^2 (x + 1/2) + eta^2 lam x^2]
        p = char_poly_alt(1.0, 1.0, 1.0, -0.5, 0.0)
        q = np.convolve(np.convolve([-1, 1], [-1, 1]), [0.5, 1])  # (x-1)^2 (x+1/2), ascending
        q = np.concatenate([[0.0], q + np.array([0, 0, 1.0, 0])])
        np.testing.assert_allclose(np.real(p.coefficients), q, atol=1e-15)

    def test_alt_negative_momentum_magnitude(self):
        # the largest root magnitude is 0.87218 (the real root of the cubic factor is -0.65730)
        roots = poly_roots(char_poly_alt(1.0, 1.0, 1.0, -0.5, 0.0))
        assert roots.spectral_radius == pytest.approx(0.8721753570, abs=1e-9)
        assert roots.spectral_radius > math.sqrt(0.75)

    def test_sim_grid_never_contracts(self):
        for eta in np.arange(1, 21) * 0.05:
            for beta in np.arange(-20, 1) * 0.05:
                rho = poly_roots(char_poly_sim(1.0, eta, eta, beta, beta)).spectral_radius
                assert rho >= 1 - 1e-10

    def test_alt_grid_wedge(self):
        for eta in np.arange(1, 21) * 0.05:
            for beta in np.arange(-20, 21) * 0.05:
                rho = poly_roots(char_poly_alt(1.0, eta, eta, beta, beta)).spectral_radius
                if eta / 2 - 1 < beta < -1e-12:
                    assert rho < 1
                elif beta > 1e-12:
                    assert rho > 1

    def test_operator_cross_check(self):
        rng = np.random.default_rng(30)
        for _ in range(10):
            e1, e2 = rng.uniform(0.1, 1, 2)
            b1, b2 = rng.uniform(-0.8, 0.8, 2)
            for scheme, poly in (("simultaneous", char_poly_sim), ("alternating", char_poly_alt)):
                m = exact_linear_operator(BilinearGame([[1.3]]), MethodConfig(scheme, e1, e2, b1, b2))
                nonzero = [z for z in poly_roots(poly(1.69, e1, e2, b1, b2)) if abs(z) > 1e-6]
                op = [z for z in eigenvalues(m) if abs(z) > 1e-6]
                assert_same_multiset(nonzero, op, 1e-8)


class TestRates:
    def test_sim_bound(self):
        assert sim_divergence_bound(0.0, 0.5, 1.0) == pytest.approx(1.25)
        assert sim_divergence_bound(0.1, 0.0, 1.0) == pytest.approx(1.21)
        assert sim_divergence_bound(-1 / 16, 0.5, 1.0) == pytest.approx(1.0625)

    def test_sim_bound_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            sim_divergence_bound(-0.1, 0.5, 1.0)

    def test_alt_rate(self):
        assert alt_convergence_rate(1.0, 1.0, 1.0) == pytest.approx(0.75)
        assert alt_convergence_rate(0.5, 1.0, 2.0) == pytest.approx(15 / 16)
        # eta * sigma_min <= 1 keeps the second term at least 3/4
        assert alt_convergence_rate(0.5, 2.0, 2.0) == pytest.approx(0.75)

    def test_alt_rate_hypothesis(self):
        with pytest.raises(HypothesisError):
            alt_convergence_rate(1.0, 1.0, 2.0)
        with pytest.raises(HypothesisError):
            alt_convergence_rate(0.0, 1.0, 1.0)


class TestOptimalMomentum:
    ETAS = np.round(np.arange(1, 401) * 0.005, 12)
    BETAS = np.round(np.arange(-100, 101) * 0.01, 12)

    def test_cooperative_unit_condition(self):
        res = optimal_momentum(KappaAlphaGame.from_kappa(1.0, 1.0), self.ETAS, self.BETAS)
        assert abs(res.beta_opt) <= 0.01
        assert res.eta_opt == pytest.approx(0.5)
        assert res.rho_opt == pytest.approx(0.0, abs=1e-12)

    def test_adversarial_prefers_negative(self):
        res = optimal_momentum(KappaAlphaGame.from_kappa(0.1, 10.0), self.ETAS, self.BETAS)
        assert res.beta_opt < 0

    @pytest.mark.parametrize("kappa", [10.0, 100.0])
    def test_polyak_limit(self, kappa):
        res = optimal_momentum(KappaAlphaGame.from_kappa(1.0, kappa), self.ETAS, self.BETAS)
        assert abs(res.beta_opt - polyak_momentum(kappa)) <= 0.01

    def test_matches_brute_force(self):
        game = KappaAlphaGame.from_kappa(0.6, 5.0)
        etas = np.linspace(0.05, 1.5, 30)
        betas = np.linspace(-0.6, 0.6, 25)
        res = optimal_momentum(game, etas, betas)
        lams = list(game.jacobian_eigenvalues())
        best = min(
            (max(momentum_eigenvalues(l, e, b).radius for l in lams), abs(b), e, b)
            for e in etas for b in betas
        )
        assert res.rho_opt == pytest.approx(best[0], rel=1e-9)
        assert res.beta_opt == best[3] and res.eta_opt == best[2]

    def test_tie_break(self):
        # beta has no effect when every eigenvalue equals 1/eta exactly and beta = 0 is on the grid
        res = optimal_momentum(KappaAlphaGame.from_kappa(1.0, 1.0), [0.5], [-0.1, 0.0, 0.1])
        assert res.beta_opt == 0.0

    def test_unpacks(self):
        beta, eta, rho = optimal_momentum(KappaAlphaGame.from_kappa(1.0, 1.0), [0.5], [0.0])
        assert (beta, eta, rho) == (0.0, 0.5, 0.0)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            optimal_momentum(KappaAlphaGame.from_kappa(1.0, 1.0), [], [0.0])
