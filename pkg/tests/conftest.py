import numpy as np
import pytest

from treealgebra import (
    FeatureSchema,
    NumericFeature,
    NumericThreshold,
    Scalar,
    TreeBuilder,
    UniformBox,
)


@pytest.fixture
def d2():
    """The two-feature box [0,10] x [0,10] used by the worked examples."""
    return FeatureSchema((NumericFeature("x1", 0, 10), NumericFeature("x2", 0, 10)))


@pytest.fixture
def make_stump(d2):
    def _make(feature, threshold, low=0.0, high=1.0, schema=None):
        b = TreeBuilder(schema or d2)
        root = b.add_root()
        left, right = b.split_node(root, NumericThreshold(feature, threshold))
        b.set_value(left, Scalar(low))
        b.set_value(right, Scalar(high))
        return b.build()

    return _make


@pytest.fixture
def make_constant(d2):
    def _make(value, schema=None):
        b = TreeBuilder(schema or d2)
        b.set_value(b.add_root(), Scalar(value))
        return b.build()

    return _make


@pytest.fixture
def stump4(make_stump):
    return make_stump(0, 4.0)


@pytest.fixture
def stump6(make_stump):
    return make_stump(0, 6.0)


@pytest.fixture
def stump_y5(make_stump):
    return make_stump(1, 5.0)


@pytest.fixture
def uniform():
    return UniformBox()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
