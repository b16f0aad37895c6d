import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from copeq.bernstein import (
    CapacityError,
    bernstein_weights,
    binomial_survival,
    make_grid,
    survival_table,
    weight_table,
)


def test_weights_symmetric_binomial():
    assert_allclose(bernstein_weights(2, 0.5), [0.25, 0.5, 0.25], rtol=1e-12)


def test_weights_bernoulli():
    assert_allclose(bernstein_weights(1, 0.3), [0.7, 0.3], rtol=1e-12)


def test_weights_degenerate_endpoints():
    assert bernstein_weights(5, 0.0).tolist() == [1, 0, 0, 0, 0, 0]
    assert bernstein_weights(5, 1.0).tolist() == [0, 0, 0, 0, 0, 1]


def test_weights_match_binomial_formula():
    for m in (1, 3, 7, 19):
        for u in (0.1, 0.37, 0.5, 0.93):
            expected = [
                math.comb(m, k) * u**k * (1 - u) ** (m - k) for k in range(m + 1)
            ]
            assert_allclose(bernstein_weights(m, u), expected, rtol=1e-11)


def test_weights_domain_errors():
    with pytest.raises(ValueError):
        bernstein_weights(2, -0.1)
    with pytest.raises(ValueError):
        bernstein_weights(2, 1.1)
    with pytest.raises(ValueError):
        bernstein_weights(0, 0.5)


@pytest.mark.parametrize("m", [1, 2, 5, 17, 60, 200])
def test_weights_sum_to_one_on_fine_mesh(m):
    mesh = np.linspace(0.0, 1.0, 101)
    table = weight_table(m, mesh)
    assert_allclose(table.sum(axis=1), np.ones(mesh.size), atol=1e-12)
    assert np.all(table >= 0.0)
    assert np.all(table <= 1.0)


def test_weights_stable_at_extreme_degree():
    table = weight_table(10_000, np.array([0.003, 0.25, 0.5, 0.997]))
    assert_allclose(table.sum(axis=1), np.ones(4), atol=1e-12)
    assert np.all(table >= 0.0)


def test_survival_examples():
    assert binomial_survival(2, 0.5, 1) == pytest.approx(0.75, abs=1e-12)
    assert binomial_survival(3, 0.2, 0) == 1.0
    assert binomial_survival(4, 1.0, 4) == 1.0
    assert binomial_survival(3, 0.4, 4) == 0.0


def test_survival_threshold_out_of_range():
    with pytest.raises(ValueError):
        binomial_survival(3, 0.5, -1)
    with pytest.raises(ValueError):
        binomial_survival(3, 0.5, 5)


def test_survival_matches_weight_suffix_sums():
    for m in (1, 4, 11, 40):
        u = np.linspace(0.0, 1.0, 23)
        table = survival_table(m, u)
        weights = weight_table(m, u)
        for k in range(m + 2):
            assert_allclose(table[:, k], weights[:, k:].sum(axis=1), atol=1e-12)
        assert np.all(np.diff(table, axis=1) <= 1e-15)


def test_grid_one_dimensional_midpoints():
    grid = make_grid(1, 2)
    assert_allclose(grid.points[:, 0], [0.25, 0.75])
    assert grid.cell_volume == 0.5


def test_grid_two_by_two():
    grid = make_grid(2, 2)
    expected = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
    assert [tuple(p) for p in grid.points] == expected


def test_grid_default_study_resolution():
    grid = make_grid(2, 20)
    assert grid.size == 400
    assert grid.cell_volume == pytest.approx(1 / 400)


@pytest.mark.parametrize("d,g", [(1, 7), (2, 5), (3, 4)])
def test_grid_count_interior_and_order(d, g):
    grid = make_grid(d, g)
    assert grid.size == g**d
    assert np.all(grid.points > 0.0) and np.all(grid.points < 1.0)
    assert grid.cell_volume * grid.size == pytest.approx(1.0, abs=1e-12)
    # lexicographic in axis indices, last axis fastest
    reference = np.array(
        [
            [(j + 0.5) / g for j in combo]
            for combo in itertools.product(range(g), repeat=d)
        ]
    )
    assert_allclose(grid.points, reference)
    assert np.array_equal(
        grid.axis_indices,
        np.array(list(itertools.product(range(g), repeat=d))),
    )


def test_grid_capacity_error_names_sizes():
    with pytest.raises(CapacityError, match="d=4") as exc:
        make_grid(4, 100)
    assert "g=100" in str(exc.value)


def test_grid_domain_errors():
    with pytest.raises(ValueError):
        make_grid(0, 5)
    with pytest.raises(ValueError):
        make_grid(2, 0)
