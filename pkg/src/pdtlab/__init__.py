"""Exact spectral and parity-query complexity of Boolean functions."""
from ._accel import USE_NUMBA, backend_name
from .core import (
    INFINITY,
    N_MAX,
    BooleanFunction,
    Coset,
    Dependent,
    ImplicitFunction,
    build_named,
    coset_insert,
    eval_fn,
    from_description,
    nu2,
    ones_in_binary,
    restrict,
)
from .pdt import (
    Leaf,
    Node,
    Output,
    ParityDecisionTree,
    Query,
    QueryOracle,
    Strategy,
    eval_tree,
    materialize,
    run_strategy,
    verify_tree,
)
from .spectral import anf, deg2, granularity, sparsity, support, wht

__version__ = "0.1.0"
