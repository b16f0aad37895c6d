import numpy as np
import pytest
from numpy.testing import assert_allclose

from copeq.bernstein import CapacityError, make_grid, weight_table
from copeq.estimators import (
    CopulaEvaluator,
    bernstein_copula_eval_naive,
    empirical_copula_eval,
    pseudo_observations,
    stieltjes_cell_masses,
)
from copeq.samplers import RngStream, sample_clayton


class IndependenceStub:
    """Product-copula surface for mass/statistic tests."""

    dim = 2

    def evaluate(self, points):
        return np.asarray(points).prod(axis=1)


def random_evaluator(seed, n=8, d=2, m=4):
    gen = np.random.default_rng(seed)
    data = gen.normal(size=(n, d))
    return CopulaEvaluator.from_data(data, m)


class TestPseudoObservations:
    def test_simple_ranks(self):
        data = np.column_stack([[3.1, 1.2, 2.5], [10.0, 20.0, 30.0]])
        pseudo = pseudo_observations(data)
        assert_allclose(pseudo[:, 0], [1.0, 1 / 3, 2 / 3])
        assert_allclose(pseudo[:, 1], [1 / 3, 2 / 3, 1.0])

    def test_ties_take_maximal_rank(self):
        data = np.column_stack([[5.0, 5.0, 7.0], [1.0, 2.0, 3.0]])
        pseudo = pseudo_observations(data)
        assert_allclose(pseudo[:, 0], [2 / 3, 2 / 3, 1.0])

    def test_single_row_rejected(self):
        with pytest.raises(ValueError):
            pseudo_observations(np.array([[9.0, 1.0]]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            pseudo_observations(np.array([[1.0, np.nan], [2.0, 3.0]]))

    def test_entries_are_rank_multiples(self):
        gen = np.random.default_rng(3)
        data = gen.normal(size=(17, 3))
        pseudo = pseudo_observations(data)
        assert np.all(pseudo > 0) and np.all(pseudo <= 1)
        for col in range(3):
            assert_allclose(
                np.sort(pseudo[:, col]), np.arange(1, 18) / 17, atol=1e-15
            )


class TestEmpiricalCopula:
    pseudo = np.array([[0.5, 1.0], [1.0, 0.5]])

    def test_no_row_dominated(self):
        assert empirical_copula_eval(self.pseudo, np.array([0.5, 0.5])) == 0.0

    def test_all_rows_counted(self):
        assert empirical_copula_eval(self.pseudo, np.array([1.0, 1.0])) == 1.0

    def test_half_counted(self):
        assert empirical_copula_eval(self.pseudo, np.array([0.5, 1.0])) == 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            empirical_copula_eval(self.pseudo, np.array([0.5, 0.5, 0.5]))


class TestBernsteinEvaluator:
    def test_single_observation_product_form(self):
        # one pseudo-row at (1, 1) with m=1 gives exactly u1*u2
        ev = CopulaEvaluator(np.array([[1.0, 1.0]]), order=1)
        gen = np.random.default_rng(0)
        for _ in range(5):
            u = gen.uniform(size=2)
            assert ev.evaluate(u) == pytest.approx(u.prod(), abs=1e-14)

    def test_zero_coordinate_gives_zero_exactly(self):
        ev = random_evaluator(1, n=7, d=3, m=5)
        assert ev.evaluate(np.array([0.0, 0.4, 0.9])) == 0.0
        assert ev.evaluate(np.array([0.3, 0.0, 0.2])) == 0.0

    def test_all_ones_gives_one_exactly(self):
        for seed in range(3):
            ev = random_evaluator(seed, n=6, d=2, m=4)
            assert ev.evaluate(np.array([1.0, 1.0])) == 1.0

    def test_ceil_indices_in_range(self):
        ev = random_evaluator(2, n=9, d=2, m=6)
        assert ev.ceil_indices.min() >= 1
        assert ev.ceil_indices.max() <= 6

    def test_fast_matches_naive_on_fixed_instance(self):
        ev = random_evaluator(11, n=6, d=2, m=4)
        u = np.array([0.37, 0.81])
        assert ev.evaluate(u) == pytest.approx(
            bernstein_copula_eval_naive(ev, u), abs=1e-12
        )

    def test_fast_matches_naive_random_instances(self):
        gen = np.random.default_rng(123)
        for _ in range(30):
            n = int(gen.integers(2, 11))
            d = int(gen.integers(2, 4))
            m = int(gen.integers(1, 7))
            ev = CopulaEvaluator.from_data(gen.normal(size=(n, d)), m)
            for _ in range(5):
                u = gen.uniform(size=d)
                assert ev.evaluate(u) == pytest.approx(
                    bernstein_copula_eval_naive(ev, u), abs=1e-12
                )

    def test_naive_unit_corner_and_product(self):
        ev = CopulaEvaluator(np.array([[1.0, 1.0]]), order=1)
        assert bernstein_copula_eval_naive(ev, np.array([0.5, 0.5])) == pytest.approx(
            0.25, abs=1e-14
        )
        ev2 = random_evaluator(5, n=5, d=2, m=3)
        assert bernstein_copula_eval_naive(ev2, np.array([1.0, 1.0])) == pytest.approx(
            1.0, abs=1e-14
        )

    def test_naive_capacity_guard(self):
        ev = random_evaluator(6, n=4, d=3, m=5)
        with pytest.raises(CapacityError):
            bernstein_copula_eval_naive(ev, np.array([0.5, 0.5, 0.5]), max_terms=100)

    def test_monotone_along_each_axis(self):
        ev = random_evaluator(8, n=10, d=2, m=5)
        mesh = np.linspace(0.0, 1.0, 50)
        for axis in range(2):
            pts = np.full((50, 2), 0.6)
            pts[:, axis] = mesh
            values = ev.evaluate(pts)
            assert np.all(np.diff(values) >= -1e-15)

    def test_empirical_lipschitz_with_rank_slack(self):
        gen = np.random.default_rng(9)
        n, d = 25, 2
        ev = CopulaEvaluator.from_data(gen.normal(size=(n, d)))
        for _ in range(50):
            u, v = gen.uniform(size=d), gen.uniform(size=d)
            gap = abs(ev.evaluate(u) - ev.evaluate(v))
            assert gap <= np.abs(u - v).sum() + d / n + 1e-12


class TestPartialDerivative:
    def test_product_copula_derivative(self):
        ev = CopulaEvaluator(np.array([[1.0, 1.0, 1.0]]), order=1)
        u = np.array([0.3, 0.6, 0.9])
        assert ev.partial_derivative(u, 0) == pytest.approx(0.6 * 0.9, abs=1e-14)

    def test_matches_central_finite_difference(self):
        ev = random_evaluator(21, n=8, d=2, m=5)
        u = np.array([0.4, 0.6])
        step = 1e-5
        for axis in range(2):
            hi = u.copy()
            lo = u.copy()
            hi[axis] += step
            lo[axis] -= step
            fd = (ev.evaluate(hi) - ev.evaluate(lo)) / (2 * step)
            assert ev.partial_derivative(u, axis) == pytest.approx(fd, abs=1e-6)

    def test_one_dimensional_reduction_at_unit_margin(self):
        # with u2 = 1 the derivative along axis 0 is the smoothed first
        # margin's density-like sum, computable directly
        ev = random_evaluator(22, n=9, d=2, m=6)
        u1 = 0.45
        direct = (
            6
            * weight_table(5, np.array([u1]))[0][ev.ceil_indices[:, 0] - 1]
        ).mean()
        assert ev.partial_derivative(np.array([u1, 1.0]), 0) == pytest.approx(
            direct, abs=1e-12
        )

    def test_nonnegative_and_bounded(self):
        ev = random_evaluator(23, n=12, d=2, m=7)
        gen = np.random.default_rng(0)
        for _ in range(20):
            u = gen.uniform(size=2)
            for axis in range(2):
                val = ev.partial_derivative(u, axis)
                bound = 7 * weight_table(6, np.array([u[axis]]))[0].max()
                assert 0.0 <= val <= bound + 1e-12

    def test_axis_out_of_range(self):
        ev = random_evaluator(24)
        with pytest.raises(ValueError):
            ev.partial_derivative(np.array([0.5, 0.5]), 2)

    def test_empirical_mode_has_no_closed_form(self):
        ev = CopulaEvaluator(np.array([[0.5, 1.0], [1.0, 0.5]]))
        with pytest.raises(ValueError):
            ev.partial_derivative(np.array([0.5, 0.5]), 0)


class TestStieltjesCellMasses:
    def test_single_cell_normalization(self):
        ev = random_evaluator(31, n=10, d=2, m=4)
        masses = stieltjes_cell_masses(ev, make_grid(2, 1))
        assert masses.shape == (1,)
        assert masses[0] == pytest.approx(1.0, abs=1e-12)

    def test_independence_stub_quarters(self):
        masses = stieltjes_cell_masses(IndependenceStub(), make_grid(2, 2))
        assert_allclose(masses, [0.25, 0.25, 0.25, 0.25], atol=1e-14)

    def test_masses_sum_to_one(self):
        ev = random_evaluator(32, n=10, d=2, m=4)
        masses = stieltjes_cell_masses(ev, make_grid(2, 5))
        assert masses.sum() == pytest.approx(1.0, abs=1e-10)

    def test_empirical_masses_are_cell_counts(self):
        gen = np.random.default_rng(5)
        data = gen.normal(size=(30, 2))
        ev = CopulaEvaluator.from_data(data)
        g = 4
        masses = stieltjes_cell_masses(ev, make_grid(2, g))
        pseudo = ev.pseudo
        expected = np.zeros(g * g)
        for row in pseudo:
            cells = np.minimum((np.ceil(row * g) - 1).astype(int), g - 1)
            expected[cells[0] * g + cells[1]] += 1 / 30
        assert_allclose(masses, expected, atol=1e-12)

    def test_bernstein_masses_nonnegative_in_practice(self):
        # each observation contributes a product of one-dimensional CDFs,
        # so inclusion-exclusion masses stay nonnegative up to rounding
        ev = random_evaluator(33, n=12, d=3, m=5)
        masses = stieltjes_cell_masses(ev, make_grid(3, 4))
        assert masses.min() > -1e-12


def test_uniform_consistency_error_shrinks_with_sample_size():
    # under independence the sup-grid error at n=2000 (m=400) should be
    # at most half the error at n=200 (m=40), averaged over 20 seeds
    grid = make_grid(2, 20)
    truth = grid.points.prod(axis=1)

    def average_sup_error(n):
        errors = []
        for seed in range(20):
            sample = RngStream(1000 + seed).split(0).generator().uniform(size=(n, 2))
            ev = CopulaEvaluator.from_data(sample, n // 5)
            surface = ev.evaluate(grid.points)
            errors.append(np.abs(surface - truth).max())
        return np.mean(errors)

    assert average_sup_error(2000) <= 0.5 * average_sup_error(200)


def test_rank_invariance_of_pseudo_observations():
    gen = np.random.default_rng(77)
    data = gen.normal(size=(40, 3))
    transformed = np.column_stack(
        [np.exp(data[:, 0]), np.arctan(data[:, 1]), data[:, 2] ** 3]
    )
    assert np.array_equal(pseudo_observations(data), pseudo_observations(transformed))
