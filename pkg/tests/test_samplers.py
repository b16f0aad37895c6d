import numpy as np
import pytest
from numpy.testing import assert_allclose

from copeq.samplers import (
    CopulaModel,
    RngStream,
    clayton_theta_from_tau,
    gaussian_rho_from_tau,
    sample_clayton,
    sample_gaussian,
    sample_kendall_tau,
    sample_model,
)


def brute_force_kendall(data):
    """All-pairs concordance count; the independent oracle."""
    n = len(data)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            sx = np.sign(data[i, 0] - data[j, 0])
            sy = np.sign(data[i, 1] - data[j, 1])
            prod = sx * sy
            if prod > 0:
                concordant += 1
            elif prod < 0:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


class TestRngStream:
    def test_same_path_reproduces(self):
        a = RngStream(11).split(3, 1).generator().uniform(size=5)
        b = RngStream(11).split(3, 1).generator().uniform(size=5)
        assert np.array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = RngStream(11).split(0).generator().uniform(size=5)
        b = RngStream(11).split(1).generator().uniform(size=5)
        assert not np.array_equal(a, b)

    def test_derived_seed_stable(self):
        assert RngStream(5).split(2).derive_seed() == RngStream(5).split(2).derive_seed()


class TestKendallTau:
    def test_perfectly_concordant(self):
        assert sample_kendall_tau(np.array([[1, 1], [2, 2], [3, 3]])) == 1.0

    def test_perfectly_discordant(self):
        assert sample_kendall_tau(np.array([[1, 3], [2, 2], [3, 1]])) == -1.0

    def test_small_mixed_case(self):
        data = np.array([[1, 2], [2, 1], [3, 3]])
        assert sample_kendall_tau(data) == pytest.approx(1 / 3, abs=1e-12)
        assert sample_kendall_tau(data) == pytest.approx(brute_force_kendall(data))

    def test_matches_brute_force_without_ties(self):
        gen = np.random.default_rng(0)
        data = gen.normal(size=(60, 2))
        assert sample_kendall_tau(data) == pytest.approx(
            brute_force_kendall(data), abs=1e-12
        )

    def test_matches_brute_force_with_ties(self):
        gen = np.random.default_rng(1)
        data = gen.integers(0, 5, size=(80, 2)).astype(float)
        assert sample_kendall_tau(data) == pytest.approx(
            brute_force_kendall(data), abs=1e-12
        )

    def test_constant_column_gives_zero(self):
        data = np.column_stack([np.ones(10), np.arange(10.0)])
        assert sample_kendall_tau(data) == 0.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            sample_kendall_tau(np.array([[1.0, 2.0]]))


class TestConversions:
    def test_clayton_theta_values(self):
        assert clayton_theta_from_tau(0.5) == 2.0
        assert clayton_theta_from_tau(0.0) == 0.0
        assert clayton_theta_from_tau(0.2) == pytest.approx(0.5)

    def test_clayton_theta_domain(self):
        with pytest.raises(ValueError):
            clayton_theta_from_tau(1.0)
        with pytest.raises(ValueError):
            clayton_theta_from_tau(-0.1)

    def test_gaussian_rho_values(self):
        assert gaussian_rho_from_tau(0.5) == pytest.approx(0.7071067811865476)
        assert gaussian_rho_from_tau(0.0) == 0.0
        assert gaussian_rho_from_tau(1 / 3) == pytest.approx(0.5)

    def test_gaussian_rho_domain(self):
        with pytest.raises(ValueError):
            gaussian_rho_from_tau(1.0)
        with pytest.raises(ValueError):
            gaussian_rho_from_tau(-1.0)


class TestClaytonSampler:
    def test_negative_theta_rejected(self):
        with pytest.raises(ValueError):
            sample_clayton(10, 2, -0.5, RngStream(0))

    def test_determinism(self):
        a = sample_clayton(5, 3, 1.0, RngStream(7).split(2))
        b = sample_clayton(5, 3, 1.0, RngStream(7).split(2))
        assert np.array_equal(a, b)

    def test_kendall_tau_at_theta_two(self):
        # theta = 2 corresponds to population tau 0.5
        sample = sample_clayton(100_000, 2, 2.0, RngStream(42).split(0))
        assert sample_kendall_tau(sample) == pytest.approx(0.5, abs=0.01)

    def test_independence_at_theta_zero(self):
        sample = sample_clayton(10_000, 2, 0.0, RngStream(42).split(1))
        assert sample_kendall_tau(sample) == pytest.approx(0.0, abs=0.03)

    def test_kendall_tau_at_tau_point_two(self):
        theta = clayton_theta_from_tau(0.2)
        sample = sample_clayton(100_000, 2, theta, RngStream(42).split(2))
        assert sample_kendall_tau(sample) == pytest.approx(0.2, abs=0.01)

    def test_margins_uniform(self):
        sample = sample_clayton(100_000, 2, 2.0, RngStream(9).split(0))
        for col in range(2):
            ordered = np.sort(sample[:, col])
            ecdf = np.arange(1, ordered.size + 1) / ordered.size
            assert np.abs(ecdf - ordered).max() < 0.01


class TestGaussianSampler:
    def test_not_positive_definite_rejected(self):
        with pytest.raises(ValueError, match="rho=-0.6"):
            sample_gaussian(10, 3, -0.6, RngStream(0))

    def test_determinism(self):
        a = sample_gaussian(3, 3, 0.3, RngStream(5).split(1))
        b = sample_gaussian(3, 3, 0.3, RngStream(5).split(1))
        assert np.array_equal(a, b)

    def test_kendall_tau_at_rho_for_tau_half(self):
        rho = gaussian_rho_from_tau(0.5)
        sample = sample_gaussian(100_000, 2, rho, RngStream(42).split(3))
        assert sample_kendall_tau(sample) == pytest.approx(0.5, abs=0.01)

    def test_independence_at_rho_zero(self):
        sample = sample_gaussian(10_000, 2, 0.0, RngStream(42).split(4))
        assert sample_kendall_tau(sample) == pytest.approx(0.0, abs=0.03)


class TestCopulaModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            CopulaModel("frank", 2, 1.0)
        with pytest.raises(ValueError):
            CopulaModel("clayton", 2, -1.0)
        with pytest.raises(ValueError):
            CopulaModel("gaussian", 3, -0.7)

    def test_sample_model_dispatch(self):
        rng = RngStream(3).split(0)
        clayton = sample_model(CopulaModel("clayton", 2, 1.0), 8, rng)
        assert clayton.shape == (8, 2)
        gauss = sample_model(CopulaModel("gaussian", 3, 0.2), 8, rng)
        assert gauss.shape == (8, 3)
        indep = sample_model(CopulaModel("independence", 2), 8, rng)
        assert indep.shape == (8, 2)
        assert np.all((indep > 0) & (indep < 1))
