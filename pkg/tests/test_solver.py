import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdtlab.core import BooleanFunction, Coset, build_named, ones_in_binary, restrict
from pdtlab.pdt import Leaf, Node, ParityDecisionTree, eval_tree, verify_tree
from pdtlab.solver import (
    NotApplicable,
    Refuted,
    adversary_refute,
    bound_profile,
    check_refutation,
    exact_depth,
    is_symmetric,
    max_subspace_dim,
    naive_depth,
    parity_certificate,
    sparsity_bound,
)
from pdtlab.strategies import thr3_strategy
from pdtlab.pdt import materialize


def rand_fn(n, seed):
    return BooleanFunction(n, np.random.default_rng(seed).integers(0, 2, 1 << n))


def brute_certificate(f):
    """max over x of the least number of constraints pinning f on a coset through x."""
    n = f.n
    masks = range(1, 1 << n)
    per_x = []
    for x in range(1 << n):
        for r in range(n + 1):
            found = False
            for combo in itertools.combinations(masks, r):
                c = Coset.from_constraints(n, [(m, bin(m & x).count("1") & 1) for m in combo])
                if c.rank != r:
                    continue
                vals = f.table[c.points()]
                if vals.min() == vals.max():
                    found = True
                    break
            if found:
                per_x.append(r)
                break
    return max(per_x), per_x


# ---------------------------------------------------------------- exact depth


@pytest.mark.parametrize(
    "name,expected",
    [("maj:3", 2), ("and:3", 3), ("thr:5,2", 4), ("const:4,1", 0), ("parity:5", 1), ("or:4", 4)],
)
def test_exact_depth_examples(name, expected):
    from pdtlab.core import from_description

    f = from_description(name)
    rep = exact_depth(f)
    assert rep.is_exact and rep.exact_depth == expected
    assert verify_tree(rep.witness, f).ok and rep.witness.depth() == expected


def test_exact_depth_closes_by_bounds_for_majority():
    for n in range(1, 8):
        rep = exact_depth(build_named("maj", n))
        assert rep.exact_depth == n - ones_in_binary(n) + 1
        assert rep.nodes_expanded == 0  # incumbent meets gran + 1


def test_budget_gives_interval():
    f = build_named("maj", 6)
    rep = exact_depth(f, max_nodes=3, incumbent=False)
    assert not rep.is_exact
    assert rep.lower <= rep.upper
    true = exact_depth(f).exact_depth
    assert rep.lower <= true <= rep.upper
    d = rep.to_json()
    assert "interval" in d and "exact_depth" not in d


def test_solve_report_json():
    rep = exact_depth(build_named("thr", 5, 2))
    d = json.loads(rep.dumps())
    assert set(d) == {"n", "function_id", "exact_depth", "bounds", "nodes_expanded", "memo_hits", "wall_ms"}
    assert set(d["bounds"]) == {"spar", "deg2", "gran", "cert"}
    assert d["function_id"] == "thr:5,2" and d["exact_depth"] == 4


def test_all_three_variable_functions_match_naive():
    for code in range(256):
        f = BooleanFunction(3, [(code >> j) & 1 for j in range(8)])
        assert exact_depth(f).exact_depth == naive_depth(f), code


def test_naive_depth_small_cases():
    assert naive_depth(build_named("and", 2)) == 2
    assert naive_depth(build_named("parity", 3)) == 1
    assert naive_depth(build_named("const", 2, -1)) == 0


@given(st.integers(2, 5), st.integers(0, 2**32))
def test_depth_at_least_every_bound(n, seed):
    f = rand_fn(n, seed)
    rep = exact_depth(f)
    prof = bound_profile(f, with_certificate=True)
    assert rep.exact_depth >= prof.best_lower
    assert prof.cert_bound <= rep.exact_depth
    assert verify_tree(rep.witness, f).ok and rep.witness.depth() == rep.exact_depth


@given(st.integers(2, 4), st.integers(0, 2**32))
def test_memo_and_plain_search_agree(n, seed):
    f = rand_fn(n, seed)
    a = exact_depth(f).exact_depth
    b = exact_depth(f, memo=False, incumbent=False).exact_depth
    assert a == b


@given(st.integers(2, 5), st.integers(0, 2**32), st.lists(st.tuples(st.integers(1, 31), st.integers(0, 1)), max_size=4))
def test_restriction_never_increases_depth(n, seed, cons):
    f = rand_fn(n, seed)
    full = (1 << n) - 1
    c = Coset.from_constraints(n, [(m & full, b) for m, b in cons if m & full])
    if c is None:
        return
    g, _ = restrict(f, c)
    assert exact_depth(g).exact_depth <= exact_depth(f).exact_depth


def test_gran_bound_tight_on_families():
    for name in ("maj", "parity", "and"):
        for n in range(1, 7):
            f = build_named(name, n)
            assert exact_depth(f).exact_depth == bound_profile(f).gran_bound
    f = build_named("rmaj", 1)
    assert exact_depth(f).exact_depth == bound_profile(f).gran_bound == 2


# ---------------------------------------------------------------- bounds


def test_bound_profile_examples():
    p = bound_profile(build_named("maj", 5))
    assert (p.gran_bound, p.sparsity_bound, p.deg2_bound) == (4, 2, 4)
    assert bound_profile(build_named("thr", 10, 3)).gran_bound == 8
    assert materialize(thr3_strategy(10)).depth() == 9
    p = bound_profile(build_named("parity", 7))
    assert p.gran_bound == 1 == exact_depth(build_named("parity", 7)).exact_depth
    assert bound_profile(build_named("const", 3, 1)).gran_bound == 0


@pytest.mark.parametrize("spar,expected", [(1, 0), (2, 1), (4, 1), (5, 2), (16, 2), (17, 3), (64, 3), (65, 4)])
def test_sparsity_bound(spar, expected):
    import math

    assert sparsity_bound(spar) == expected == math.ceil(math.log2(spar) / 2)


# ---------------------------------------------------------------- adversary


def all_depth1_trees(n):
    for m in range(1, 1 << n):
        for a, b in itertools.product((-1, 1), repeat=2):
            yield ParityDecisionTree.from_nested(Node(m, Leaf(a), Leaf(b)), n)


def test_adversary_refutes_every_depth1_tree_for_maj3():
    f = build_named("maj", 3)
    for t in all_depth1_trees(3):
        ref = adversary_refute(f, t)
        assert isinstance(ref, Refuted)
        assert check_refutation(f, t, ref)
        assert eval_tree(t, ref.wrong) != f(ref.wrong)
        assert f(ref.x_true) == -1 and f(ref.x_false) == 1


def test_adversary_not_applicable_on_deep_enough_trees():
    f = build_named("maj", 3)
    assert isinstance(adversary_refute(f, exact_depth(f).witness), NotApplicable)
    assert isinstance(adversary_refute(build_named("const", 3, 1), ParityDecisionTree.leaf(1, 3)), NotApplicable)


@pytest.mark.parametrize("name", ["maj:5", "maj:3", "and:3", "thr:5,2", "maj:6"])
def test_adversary_on_truncated_optimal_trees(name):
    from pdtlab.core import from_description
    from pdtlab.spectral import granularity, wht

    f = from_description(name)
    g = granularity(wht(f))
    t = exact_depth(f).witness
    for fill in (-1, 1):
        cut = t.truncate(g, fill)
        ref = adversary_refute(f, cut)
        assert isinstance(ref, Refuted) and check_refutation(f, cut, ref)
        # independent confirmation on the raw tree
        assert eval_tree(cut, ref.wrong) != f(ref.wrong)


@given(st.integers(2, 6), st.integers(0, 2**32))
def test_adversary_refutes_random_shallow_trees(n, seed):
    from pdtlab.pdt import random_tree
    from pdtlab.spectral import granularity, wht

    rng = np.random.default_rng(seed)
    f = rand_fn(n, seed)
    g = granularity(wht(f))
    if f.is_constant():
        return
    t = random_tree(n, g, rng, leaf_prob=0.1)
    ref = adversary_refute(f, t)
    assert isinstance(ref, Refuted) and check_refutation(f, t, ref)


def test_check_refutation_rejects_forged_evidence():
    f = build_named("maj", 3)
    t = next(all_depth1_trees(3))
    ref = adversary_refute(f, t)
    forged = Refuted(ref.path, ref.leaf, ref.label, ref.x_true, ref.x_false,
                     ref.x_true if ref.wrong == ref.x_false else ref.x_false, ref.character)
    assert not check_refutation(f, t, forged)


# ---------------------------------------------------------------- certificate


def test_certificate_examples():
    for n in range(1, 6):
        assert parity_certificate(build_named("and", n)).value == n
        assert parity_certificate(build_named("parity", n)).value == 1
    assert parity_certificate(build_named("maj", 3)).value == 2 == brute_certificate(build_named("maj", 3))[0]


@given(st.integers(1, 4), st.integers(0, 2**32))
def test_certificate_matches_brute_force(n, seed):
    f = rand_fn(n, seed)
    rep = parity_certificate(f)
    value, per_x = brute_certificate(f)
    assert rep.value == value
    assert rep.per_x.tolist() == per_x


def test_symmetric_shortcut_agrees():
    f = build_named("thr", 6, 3)
    assert is_symmetric(f) and not is_symmetric(build_named("ip", 4))
    rep = parity_certificate(f)
    assert rep.symmetric
    zero_sets = [f.table[np.arange(64) ^ x] == f.table[x] for x in range(64)]
    direct = [6 - max_subspace_dim(z)[0] for z in zero_sets]
    assert rep.per_x.tolist() == direct


def test_certificate_budget_gives_intervals():
    f = rand_fn(8, 5)
    rep = parity_certificate(f, budget=1)
    assert rep.lower <= rep.upper
    full = parity_certificate(f)
    assert rep.lower <= full.value <= rep.upper
    assert (rep.per_x_lower <= full.per_x).all() and (full.per_x <= rep.per_x_upper).all()
