"""Classical MDS and the Jacobi eigendecomposition behind it."""

import numpy as np
import pytest

import treealgebra as ta
from treealgebra.mds import classical_mds, jacobi_eigh, mds_stress, pairwise_distances


class TestJacobi:
    def test_matches_numpy_on_random_symmetric(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 12))
            m = rng.normal(size=(n, n))
            a = (m + m.T) / 2
            evals, evecs = jacobi_eigh(a)
            ref = np.sort(np.linalg.eigvalsh(a))[::-1]
            assert np.allclose(evals, ref, atol=1e-10)
            # eigenvector columns reconstruct the matrix
            assert np.allclose(evecs @ np.diag(evals) @ evecs.T, a, atol=1e-10)
            assert np.allclose(evecs.T @ evecs, np.eye(n), atol=1e-10)

    def test_zero_matrix(self):
        evals, evecs = jacobi_eigh(np.zeros((3, 3)))
        assert (evals == 0.0).all()
        assert (evecs == np.eye(3)).all()


class TestClassicalMDS:
    def test_equilateral_triangle(self):
        dist = np.ones((3, 3)) - np.eye(3)
        coords = classical_mds(dist, 2)
        recovered = pairwise_distances(coords)
        assert np.allclose(recovered, dist, atol=1e-9)

    def test_known_configuration_roundtrip(self, rng):
        # expected distances derived from the generating configuration
        config = rng.normal(size=(4, 2)) * 3.0
        dist = pairwise_distances(config)
        coords = classical_mds(dist, 2)
        assert np.allclose(pairwise_distances(coords), dist, atol=1e-6)

    def test_zero_matrix_gives_zero_coordinates(self):
        coords = classical_mds(np.zeros((2, 2)), 1)
        assert coords.shape == (2, 1)
        assert (coords == 0.0).all()

    def test_excess_dims_padded_with_zeros(self):
        dist = np.ones((3, 3)) - np.eye(3)
        coords = classical_mds(dist, 3)
        assert coords.shape == (3, 3)
        assert (coords[:, 2] == 0.0).all()
        assert np.allclose(pairwise_distances(coords), dist, atol=1e-9)

    def test_rejects_asymmetric_input(self):
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ta.DomainError):
            classical_mds(bad, 1)

    def test_rejects_nonzero_diagonal(self):
        bad = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ta.DomainError):
            classical_mds(bad, 1)

    def test_stress_zero_for_exact_embedding(self, rng):
        config = rng.normal(size=(6, 3))
        dist = pairwise_distances(config)
        coords = classical_mds(dist, 3)
        assert mds_stress(dist, coords) <= 1e-12

    def test_stress_positive_for_non_euclidean(self):
        # a 4-point star metric does not embed exactly in one dimension
        dist = np.array(
            [
                [0.0, 2.0, 2.0, 2.0],
                [2.0, 0.0, 2.0, 2.0],
                [2.0, 2.0, 0.0, 2.0],
                [2.0, 2.0, 2.0, 0.0],
            ]
        )
        coords = classical_mds(dist, 1)
        stress = mds_stress(dist, coords)
        assert np.isfinite(stress) and stress > 0.0


class TestTreeDistancePipeline:
    def test_distances_from_trees_embed(self, stump4, stump6, stump_y5, uniform):
        D = ta.distance_matrix([stump4, stump6, stump_y5], uniform)
        coords = classical_mds(D, 2)
        assert np.isfinite(mds_stress(D, coords))
