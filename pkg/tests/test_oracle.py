"""The brute-force references themselves: grid exactness, Monte Carlo
behavior, equivalence checking, and the fuzzer."""

import numpy as np
import pytest

import treealgebra as ta
from treealgebra.oracle import CellGrid, sample_points
from treealgebra.trees import Scalar, TupleValue, route


class TestGridIntegral:
    def test_raw_value_matches_hand_computation(self, stump4, uniform):
        # cells (0,4] and (4,10] carry masses 0.4 and 0.6
        assert ta.grid_integral([stump4], "raw-value", uniform) == pytest.approx(
            0.6, abs=1e-15
        )

    def test_squared_difference_of_shifted_stumps(self, stump4, stump6, uniform):
        # three cells; the difference is 1 exactly on (4, 6]
        assert ta.grid_integral(
            [stump4, stump6], "squared-difference", uniform
        ) == pytest.approx(0.2, abs=1e-15)

    def test_zero_tree_self_product(self, make_constant, uniform):
        zero = make_constant(0.0)
        assert ta.grid_integral([zero, zero], "product", uniform) == 0.0

    def test_weighted_sum_then_square(self, stump4, stump6, uniform):
        got = ta.grid_integral(
            [stump4, stump6], "weighted-sum-then-square", uniform, weights=[1.0, -1.0]
        )
        assert got == pytest.approx(0.2, abs=1e-15)

    def test_refining_the_grid_never_changes_the_result(self, rng, uniform):
        for _ in range(10):
            schema = ta.random_schema(rng, max_features=3)
            t1 = ta.random_tree(schema, rng, 8)
            t2 = ta.random_tree(schema, rng, 8)
            base = ta.grid_integral([t1, t2], "squared-difference", uniform)
            grid = CellGrid.from_trees(schema, [t1, t2])
            extra = [
                [rng.uniform(f.low, f.high) for _ in range(3)]
                if isinstance(f, ta.NumericFeature)
                else []
                for f in schema.features
            ]
            refined = CellGrid.from_trees(schema, [t1, t2], extra_breakpoints=extra)
            assert refined.n_cells > grid.n_cells
            reps = refined.representatives()
            from treealgebra.trees import evaluate_batch

            d = evaluate_batch(t1, reps) - evaluate_batch(t2, reps)
            refined_value = float((d * d) @ refined.masses(uniform))
            assert abs(refined_value - base) <= 1e-12

    def test_empirical_masses_respect_boundaries(self, d2, stump4):
        # a point exactly on a threshold belongs to the left cell
        emp = ta.Empirical.from_rows(d2, [(4.0, 5.0), (9.0, 5.0)])
        grid = CellGrid.from_trees(d2, [stump4])
        masses = grid.masses(emp)
        assert masses.sum() == pytest.approx(1.0, abs=1e-15)
        assert ta.grid_integral([stump4], "raw-value", emp) == pytest.approx(
            0.5, abs=1e-15
        )

    def test_hyperplane_trees_rejected(self, d2, uniform):
        b = ta.TreeBuilder(d2)
        left, right = b.split_node(b.add_root(), ta.Hyperplane((1.0, 1.0), 10.0))
        b.set_value(left, Scalar(0.0))
        b.set_value(right, Scalar(1.0))
        with pytest.raises(ta.UnsupportedGeometryError):
            ta.grid_integral([b.build()], "raw-value", uniform)


class TestMonteCarlo:
    def test_matches_grid_within_four_standard_errors(self, stump4, stump6, uniform):
        exact = ta.grid_integral([stump4, stump6], "squared-difference", uniform)
        est, se = ta.monte_carlo_integral(
            [stump4, stump6], "squared-difference", uniform, 100_000, seed=11
        )
        assert abs(est - exact) <= 4 * se

    def test_constant_zero_integrand(self, make_constant, uniform):
        zero = make_constant(0.0)
        est, se = ta.monte_carlo_integral([zero], "raw-value", uniform, 1000, seed=0)
        assert est == 0.0 and se == 0.0

    def test_seed_determinism(self, stump4, uniform):
        a = ta.monte_carlo_integral([stump4], "raw-value", uniform, 5000, seed=123)
        b = ta.monte_carlo_integral([stump4], "raw-value", uniform, 5000, seed=123)
        assert a == b

    def test_error_shrinks_like_root_n(self, stump4, stump6, uniform):
        _, se_small = ta.monte_carlo_integral(
            [stump4, stump6], "squared-difference", uniform, 1000, seed=5
        )
        _, se_big = ta.monte_carlo_integral(
            [stump4, stump6], "squared-difference", uniform, 100_000, seed=5
        )
        ratio = se_small / se_big
        assert 5.0 <= ratio <= 20.0  # ideal is 10

    def test_minimum_sample_count(self, stump4, uniform):
        with pytest.raises(ta.DomainError):
            ta.monte_carlo_integral([stump4], "raw-value", uniform, 50, seed=0)

    def test_empirical_resampling(self, d2, stump4):
        emp = ta.Empirical.from_rows(d2, [(1, 1), (9, 9)], weights=[0.25, 0.75])
        est, se = ta.monte_carlo_integral([stump4], "raw-value", emp, 50_000, seed=2)
        assert abs(est - 0.75) <= 4 * se


class TestPointwiseEquivalence:
    def test_combined_pair_passes(self, stump4, stump_y5):
        combined = ta.combine_pair(stump4, stump_y5)
        assert ta.pointwise_equivalence(combined, [stump4, stump_y5], 10_000, seed=0) is None

    def test_corrupted_leaf_is_reported(self, stump4, stump_y5, d2):
        combined = ta.combine_pair(stump4, stump_y5)
        # corrupt the leaf that covers a known interior point
        target = route(combined, d2.encode_point((2.0, 2.0)))
        nodes = dict(combined.nodes)
        node = nodes[target]
        bad = TupleValue((Scalar(42.0), node.value.values[1]), node.value.source_ids)
        nodes[target] = type(node)(node.parent, node.split, node.left, node.right, bad)
        corrupted = ta.Tree(d2, nodes, combined.root)
        counterexample = ta.pointwise_equivalence(corrupted, [stump4, stump_y5], 10_000, seed=0)
        assert counterexample is not None
        assert counterexample.combined_value.values[0] == Scalar(42.0)
        assert counterexample.expected_values[0] == Scalar(0.0)

    def test_fuzzed_multiway_combination(self, rng):
        schema = ta.random_schema(rng, max_features=5)
        trees = [ta.random_tree(schema, rng, int(rng.integers(1, 15))) for _ in range(5)]
        combined = ta.combine_many(trees)
        assert ta.pointwise_equivalence(combined, trees, 5000, seed=7) is None


class TestFuzzer:
    def test_trees_validate_clean(self, rng):
        for _ in range(30):
            schema = ta.random_schema(rng)
            tree = ta.random_tree(schema, rng, int(rng.integers(1, 60)))
            assert ta.validate(tree) == []

    def test_split_count_honored(self, rng):
        schema = ta.random_schema(rng, max_features=6)
        tree = ta.random_tree(schema, rng, 30)
        assert tree.n_nodes == 61

    def test_depth_cap(self, rng):
        schema = ta.random_schema(rng, max_features=3)
        tree = ta.random_tree(schema, rng, 40, max_depth=4)
        for leaf in tree.leaf_ids():
            depth = 0
            nid = leaf
            while tree.nodes[nid].parent is not None:
                nid = tree.nodes[nid].parent
                depth += 1
            assert depth <= 4

    def test_class_prob_leaves(self, rng):
        schema = ta.random_schema(rng, max_features=3, class_labels=("a", "b", "c"))
        tree = ta.random_tree(schema, rng, 10, leaf_kind="class_probs")
        assert ta.validate(tree) == []

    def test_sample_points_stay_in_domain(self, rng, uniform):
        schema = ta.random_schema(rng, max_features=6)
        X = sample_points(schema, uniform, 1000, rng)
        for j, f in enumerate(schema.features):
            if isinstance(f, ta.NumericFeature):
                assert (X[:, j] >= f.low).all() and (X[:, j] <= f.high).all()
            else:
                assert set(np.unique(X[:, j])) <= set(map(float, range(len(f.levels))))
