"""Exact algebra on decision-tree functions.

Combine several trees into one, form affine combinations, and compute exact
L2 norms, distances, means, variances, covariances, correlations, and
forest-to-forest distances under uniform or empirical measures.
"""

from .combine import (
    CombineBudget,
    affine_combination,
    collect,
    combine_many,
    combine_pair,
    simplify,
)
from .errors import (
    BudgetExceededError,
    DegenerateCorrelationError,
    DomainError,
    LeafKindError,
    ParseError,
    SchemaError,
    TreeAlgebraError,
    UnboundedProblemError,
    UnknownNodeError,
    UnsupportedGeometryError,
    ValidationError,
)
from .geometry import (
    Empirical,
    HyperplaneTestResult,
    PairClassification,
    PartitionOutcome,
    UniformBox,
    classify_split_pair,
    hyperplane_intersects_polyhedron,
    region_measure,
    split_partitions_region,
)
from .io import ForestFile, import_external_forest, load_forest, save_forest, save_tree
from .mds import classical_mds, mds_stress
from .measures import (
    TreeStatistics,
    distance_matrix,
    forest_distance,
    tree_correlation,
    tree_covariance,
    tree_distance,
    tree_inner_product,
    tree_mean,
    tree_statistics,
    tree_variance,
)
from .oracle import (
    CellGrid,
    grid_integral,
    monte_carlo_integral,
    pointwise_equivalence,
    random_forest,
    random_schema,
    random_tree,
)
from .trees import (
    CategoricalFeature,
    CategoricalSubset,
    ClassProbs,
    FeatureSchema,
    Hyperplane,
    Interval,
    Node,
    NumericFeature,
    NumericThreshold,
    Region,
    Scalar,
    Side,
    Tree,
    TreeBuilder,
    TupleValue,
    evaluate,
    evaluate_batch,
    node_region,
    validate,
)

__version__ = "0.1.0"
