"""Combining trees: subtree extraction, product trees, affine sums.

``combine_pair`` overlays two recursive partitions into one tree whose
tuple-valued leaves carry both source values; ``combine_many`` folds that
over a list; ``affine_combination`` collapses the tuples into weighted sums.
The recursion works region by region: when both splits genuinely cut the
working region it always splits by the first tree's condition and routes the
second tree into whichever children its condition still cuts (a fixed
tie-break that makes the output deterministic and keeps the call count
within ``n1 * n2``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence


from .errors import DomainError, LeafKindError, SchemaError
from .geometry import (
    PartitionOutcome,
    same_partition_in_region,
    split_partitions_region,
)
from .trees import (
    ClassProbs,
    Interval,
    LeafValue,
    Region,
    Scalar,
    Side,
    Tree,
    TreeBuilder,
    TupleValue,
    leaf_kind_of,
    node_region,
)

__all__ = [
    "CombineBudget",
    "collect",
    "combine_pair",
    "combine_many",
    "affine_combination",
    "simplify",
]

_SPLITS = PartitionOutcome.SPLITS_REGION
_IN_LEFT = PartitionOutcome.REGION_IN_LEFT


@dataclass
class CombineBudget:
    """Guard against the multiplicative blow-up of combined trees.

    ``max_nodes`` caps the size of any produced tree (the blow-up can be
    exponential in the number of combined trees, so hitting the cap is a
    clean reported failure instead of memory exhaustion). ``calls_made``
    counts the recursive combine and collect steps, which lets tests assert
    the ``n1 * n2`` cost bound.
    """

    max_nodes: int = 10_000_000
    calls_made: int = 0


def _check_region_nonempty(region: Region) -> None:
    for cons in region.constraints:
        if isinstance(cons, frozenset) and not cons:
            raise DomainError("empty region")
    if region.half_spaces:
        from . import simplex

        a, b = region.lp_rows()
        if not simplex.feasible(a, b):
            raise DomainError("empty region")


def _collect_into(builder, w, region, tree, v, budget, value_fn):
    stack = [(w, region, v)]
    while stack:
        w, region, v = stack.pop()
        budget.calls_made += 1
        node = tree.nodes[v]
        if node.left is None:
            builder.set_value(w, value_fn(node.value))
            continue
        outcome = split_partitions_region(node.split, region)
        if outcome is _SPLITS:
            lw, rw = builder.split_node(w, node.split)
            stack.append((rw, region.try_refine(node.split, Side.RIGHT), node.right))
            stack.append((lw, region.try_refine(node.split, Side.LEFT), node.left))
        elif outcome is _IN_LEFT:
            stack.append((w, region, node.left))
        else:
            stack.append((w, region, node.right))


def collect(source: Tree, region: Region, budget: Optional[CombineBudget] = None) -> Tree:
    """Extract a tree equivalent to ``source`` over ``region``.

    The result uses only split conditions from source nodes whose regions
    intersect the given region: splits that cut the region are copied,
    splits that miss it are skipped. The returned tree is defined on the
    whole domain but agrees with ``source`` everywhere inside ``region``.
    """
    if region.schema != source.schema:
        raise SchemaError("region schema differs from tree schema")
    _check_region_nonempty(region)
    budget = budget if budget is not None else CombineBudget()
    builder = TreeBuilder(source.schema, budget.max_nodes)
    w0 = builder.add_root()
    _collect_into(builder, w0, region, source, source.root, budget, lambda v: v)
    return builder.build()


def _region_subset(inner: Region, outer: Region) -> bool:
    """Axis-aligned containment test (debug instrumentation only)."""
    for ci, co in zip(inner.constraints, outer.constraints):
        if isinstance(ci, Interval):
            lo_ok = ci.low > co.low or (
                ci.low == co.low and (co.low_closed or not ci.low_closed)
            )
            hi_ok = ci.high < co.high or (
                ci.high == co.high and (co.high_closed or not ci.high_closed)
            )
            if not (lo_ok and hi_ok):
                return False
        elif not ci <= co:
            return False
    return True


def _combine(
    t1: Tree,
    t2: Tree,
    budget: CombineBudget,
    pair_fn: Callable[[LeafValue, LeafValue], LeafValue],
    debug_containment: bool = False,
) -> Tree:
    schema = t1.schema
    builder = TreeBuilder(schema, budget.max_nodes)
    w0 = builder.add_root()
    region_cache_1: dict[int, Region] = {}
    region_cache_2: dict[int, Region] = {}
    stack = [(t1.root, t2.root, w0, Region.full(schema))]
    while stack:
        u, v, w, region = stack.pop()
        budget.calls_made += 1
        if debug_containment:
            for tree, nid, cache in ((t1, u, region_cache_1), (t2, v, region_cache_2)):
                if nid not in cache:
                    cache[nid] = node_region(tree, nid)
                if not _region_subset(region, cache[nid]):
                    raise AssertionError(
                        f"working region escaped the region of node {nid}"
                    )
        nu = t1.nodes[u]
        nv = t2.nodes[v]
        if nu.left is None and nv.left is None:
            builder.set_value(w, pair_fn(nu.value, nv.value))
            continue
        if nu.left is None:
            _collect_into(
                builder, w, region, t2, v, budget,
                lambda fv, a=nu.value: pair_fn(a, fv),
            )
            continue
        if nv.left is None:
            _collect_into(
                builder, w, region, t1, u, budget,
                lambda fu, b=nv.value: pair_fn(fu, b),
            )
            continue
        cu, cv = nu.split, nv.split
        pu = split_partitions_region(cu, region)
        pv = split_partitions_region(cv, region)
        if pu is not _SPLITS or pv is not _SPLITS:
            # at least one condition misses the working region: descend into
            # whichever children contain it without adding a node. (The case
            # where both conditions cut the region never reaches this branch;
            # it is handled below.)
            u2 = u if pu is _SPLITS else (nu.left if pu is _IN_LEFT else nu.right)
            v2 = v if pv is _SPLITS else (nv.left if pv is _IN_LEFT else nv.right)
            stack.append((u2, v2, w, region))
            continue
        ident = same_partition_in_region(cu, cv, region)
        lw, rw = builder.split_node(w, cu)
        left_region = region.try_refine(cu, Side.LEFT)
        right_region = region.try_refine(cu, Side.RIGHT)
        if ident == "same":
            stack.append((nu.right, nv.right, rw, right_region))
            stack.append((nu.left, nv.left, lw, left_region))
            continue
        if ident == "swapped":
            stack.append((nu.right, nv.left, rw, right_region))
            stack.append((nu.left, nv.right, lw, left_region))
            continue
        # crossing or parallel splits: split by the first tree's condition;
        # each child keeps the second tree's node if its condition still cuts
        # the child region and otherwise descends to the matching daughter
        for child_u, child_w, child_region in (
            (nu.right, rw, right_region),
            (nu.left, lw, left_region),
        ):
            pvc = split_partitions_region(cv, child_region)
            if pvc is _SPLITS:
                child_v = v
            elif pvc is _IN_LEFT:
                child_v = nv.left
            else:
                child_v = nv.right
            stack.append((child_u, child_v, child_w, child_region))
    return builder.build()


def _require_schema_and_kind(trees: Sequence[Tree]) -> str:
    schema = trees[0].schema
    for t in trees[1:]:
        if t.schema != schema:
            raise SchemaError("trees use different schemas")
    kinds = {leaf_kind_of(t) for t in trees}
    if len(kinds) > 1:
        raise LeafKindError(f"trees mix leaf kinds {sorted(kinds)}")
    kind = kinds.pop()
    if kind == "tuple":
        raise LeafKindError("input trees must have scalar or class_probs leaves")
    return kind


def combine_pair(
    t1: Tree,
    t2: Tree,
    budget: Optional[CombineBudget] = None,
    *,
    debug_containment: bool = False,
) -> Tree:
    """Overlay two trees into one tree with pair-valued leaves.

    For every in-domain point the result evaluates to the pair of the source
    evaluations. Hyperplane splits are supported; note that two hyperplanes
    that coincide only up to a scale factor are not recognized as identical,
    so the overlay may assign points exactly on their shared boundary (a
    measure-zero set) the value from the wrong side of the second tree.
    """
    _require_schema_and_kind([t1, t2])
    budget = budget if budget is not None else CombineBudget()
    return _combine(
        t1,
        t2,
        budget,
        lambda a, b: TupleValue((a, b), (0, 1)),
        debug_containment=debug_containment,
    )


def _map_leaves(tree: Tree, fn: Callable[[LeafValue], LeafValue]) -> Tree:
    nodes = {
        i: (replace(n, value=fn(n.value)) if n.left is None else n)
        for i, n in tree.nodes.items()
    }
    return Tree(tree.schema, nodes, tree.root)


def combine_many(trees: Sequence[Tree], budget: Optional[CombineBudget] = None) -> Tree:
    """Left fold of :func:`combine_pair` with flattened tuple leaves.

    Each leaf of the result holds one value per input tree, in input order,
    with source ids recording the positions so weights align.
    """
    if not trees:
        raise DomainError("combine_many needs at least one tree")
    _require_schema_and_kind(trees)
    budget = budget if budget is not None else CombineBudget()
    result = _map_leaves(trees[0], lambda v: TupleValue((v,), (0,)))
    for m in range(1, len(trees)):
        result = _combine(
            result,
            trees[m],
            budget,
            lambda a, b, m=m: TupleValue(a.values + (b,), a.source_ids + (m,)),
        )
    return result


def _collapse_tuple(tv: TupleValue, weights: Sequence[float]) -> LeafValue:
    first = tv.values[0]
    if isinstance(first, Scalar):
        acc = weights[0] * first.value
        for w, val in zip(weights[1:], tv.values[1:]):
            acc = acc + w * val.value
        return Scalar(acc)
    n = len(first.probs)
    out = []
    for s in range(n):
        acc = weights[0] * first.probs[s]
        for w, val in zip(weights[1:], tv.values[1:]):
            acc = acc + w * val.probs[s]
        out.append(acc)
    return ClassProbs(tuple(out))


def affine_combination(
    trees: Sequence[Tree],
    weights: Sequence[float],
    budget: Optional[CombineBudget] = None,
) -> Tree:
    """A single tree representing the weighted sum of the input trees.

    Combines the trees, then replaces each tuple leaf by the weighted sum of
    its entries, accumulated left to right so that every leaf uses the exact
    same float summation order. For class-probability trees the sum is
    componentwise; with weights that are not a convex combination the
    resulting vectors can leave the probability simplex, which ``validate``
    then reports.
    """
    if len(weights) != len(trees):
        raise DomainError(
            f"{len(weights)} weights for {len(trees)} trees"
        )
    ws = [float(w) for w in weights]
    combined = combine_many(trees, budget)
    return _map_leaves(combined, lambda tv: _collapse_tuple(tv, ws))


def simplify(tree: Tree) -> Tree:
    """Merge sibling leaves carrying exactly equal values, repeatedly.

    The represented function is unchanged; only redundant structure is
    dropped. Disabled by default everywhere (call it explicitly).
    """
    order = []
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        order.append(nid)
        node = tree.nodes[nid]
        if node.left is not None:
            stack.append(node.left)
            stack.append(node.right)
    constant: dict[int, Optional[LeafValue]] = {}
    for nid in reversed(order):
        node = tree.nodes[nid]
        if node.left is None:
            constant[nid] = node.value
        else:
            lv = constant[node.left]
            rv = constant[node.right]
            constant[nid] = lv if (lv is not None and lv == rv) else None
    builder = TreeBuilder(tree.schema)
    new_root = builder.add_root()
    stack2 = [(tree.root, new_root)]
    while stack2:
        old, new = stack2.pop()
        node = tree.nodes[old]
        if constant[old] is not None or node.left is None:
            builder.set_value(new, constant[old] if constant[old] is not None else node.value)
            continue
        lw, rw = builder.split_node(new, node.split)
        stack2.append((node.right, rw))
        stack2.append((node.left, lw))
    return builder.build()
