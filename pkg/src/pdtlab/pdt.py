"""Parity decision trees and interactive query strategies.

Edge convention: every internal node has ``child0`` (taken when the queried
parity is 0) and ``child1`` (parity 1). Under the +-1 labelling of edges a
parity bit b corresponds to the label (-1)^b.

Trees are stored as flat arrays in preorder with the root at index 0, so
they can be evaluated on every input by a compiled kernel.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from . import kernels
from .core import BooleanFunction, Coset, Dependent

EXHAUSTIVE_MAX_N = 20
LEAFWISE_BATCH = 1 << 20


class TreeError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class NondeterministicStrategy(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# nested (hand-built) form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Node:
    mask: int
    child0: "TreeNode"
    child1: "TreeNode"


TreeNode = Union[Leaf, Node]


# ---------------------------------------------------------------------------
# flat tree
# ---------------------------------------------------------------------------


class TreeBuilder:
    """Preorder allocator: reserve a slot, build the children, then fill it."""

    def __init__(self):
        self.masks: list[int] = []
        self.child0: list[int] = []
        self.child1: list[int] = []
        self.labels: list[int] = []

    def reserve(self) -> int:
        self.masks.append(0)
        self.child0.append(-1)
        self.child1.append(-1)
        self.labels.append(0)
        return len(self.masks) - 1

    def set_leaf(self, idx: int, label: int):
        if label not in (-1, 1):
            raise TreeError(f"leaf label must be -1 or 1, got {label}")
        self.labels[idx] = label

    def set_node(self, idx: int, mask: int, c0: int, c1: int):
        if mask == 0:
            raise TreeError("internal node with empty query mask")
        self.masks[idx] = mask
        self.child0[idx] = c0
        self.child1[idx] = c1

    def leaf(self, label: int) -> int:
        idx = self.reserve()
        self.set_leaf(idx, label)
        return idx

    def build(self, n: int) -> "ParityDecisionTree":
        return ParityDecisionTree(
            n,
            np.array(self.masks, dtype=np.int64),
            np.array(self.child0, dtype=np.int64),
            np.array(self.child1, dtype=np.int64),
            np.array(self.labels, dtype=np.int8),
        )


class ParityDecisionTree:
    __slots__ = ("n", "masks", "child0", "child1", "labels", "_depth")

    def __init__(self, n, masks, child0, child1, labels):
        self.n = n
        self.masks = masks
        self.child0 = child0
        self.child1 = child1
        self.labels = labels
        for a in (masks, child0, child1, labels):
            a.flags.writeable = False
        if masks.size == 0:
            raise TreeError("empty tree")
        if (masks >> n).any() if n < 63 else False:
            raise TreeError(f"query mask outside {n} variables")
        self._depth = None

    @classmethod
    def from_nested(cls, root: TreeNode, n: int) -> "ParityDecisionTree":
        b = TreeBuilder()

        def go(node):
            idx = b.reserve()
            if isinstance(node, Leaf):
                b.set_leaf(idx, node.label)
            else:
                c0 = go(node.child0)
                c1 = go(node.child1)
                b.set_node(idx, node.mask, c0, c1)
            return idx

        go(root)
        return b.build(n)

    @classmethod
    def leaf(cls, label: int, n: int) -> "ParityDecisionTree":
        return cls.from_nested(Leaf(label), n)

    def is_leaf(self, v: int) -> bool:
        return self.masks[v] == 0

    def to_nested(self, v: int = 0) -> TreeNode:
        if self.masks[v] == 0:
            return Leaf(int(self.labels[v]))
        return Node(
            int(self.masks[v]),
            self.to_nested(int(self.child0[v])),
            self.to_nested(int(self.child1[v])),
        )

    @property
    def size(self) -> int:
        return int(self.masks.size)

    def leaf_count(self) -> int:
        return int(np.count_nonzero(self.masks == 0))

    def depth(self) -> int:
        if self._depth is None:
            d = np.zeros(self.size, dtype=np.int64)
            # preorder: children have larger indices than their parent
            for v in range(self.size - 1, -1, -1):
                if self.masks[v]:
                    d[v] = 1 + max(d[self.child0[v]], d[self.child1[v]])
            self._depth = int(d[0])
        return self._depth

    def paths(self) -> Iterator[tuple[int, tuple[tuple[int, int], ...]]]:
        """Yield (leaf index, ((mask, bit), ...)) for every root-to-leaf path."""
        stack = [(0, ())]
        while stack:
            v, path = stack.pop()
            if self.masks[v] == 0:
                yield v, path
                continue
            m = int(self.masks[v])
            stack.append((int(self.child1[v]), path + ((m, 1),)))
            stack.append((int(self.child0[v]), path + ((m, 0),)))

    def truncate(self, depth: int, fill: int = 1) -> "ParityDecisionTree":
        """Cut every path at ``depth`` queries, placing ``fill`` leaves at the cut."""
        b = TreeBuilder()

        def go(v, d):
            idx = b.reserve()
            if self.masks[v] == 0:
                b.set_leaf(idx, int(self.labels[v]))
            elif d == depth:
                b.set_leaf(idx, fill)
            else:
                c0 = go(int(self.child0[v]), d + 1)
                c1 = go(int(self.child1[v]), d + 1)
                b.set_node(idx, int(self.masks[v]), c0, c1)
            return idx

        go(0, 0)
        return b.build(self.n)

    def with_label(self, leaf: int, label: int) -> "ParityDecisionTree":
        labels = self.labels.copy()
        labels[leaf] = label
        return ParityDecisionTree(
            self.n, self.masks.copy(), self.child0.copy(), self.child1.copy(), labels
        )

    def eval_all(self) -> tuple[np.ndarray, np.ndarray]:
        """(+-1 outputs, path lengths) on every input, indexed by assignment."""
        return kernels.tree_eval_all(self.masks, self.child0, self.child1, self.labels, self.n)

    def __repr__(self):
        return f"ParityDecisionTree(n={self.n}, nodes={self.size}, depth={self.depth()})"


def eval_tree(t: ParityDecisionTree, x: int) -> int:
    v = 0
    while t.masks[v]:
        par = bin(int(t.masks[v]) & x).count("1") & 1
        v = int(t.child1[v] if par else t.child0[v])
    return int(t.labels[v])


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    ok: bool
    mode: str
    witness: int | None = None
    checked: int = 0
    infeasible_leaves: int = 0

    def __bool__(self):
        return self.ok


def verify_tree(t: ParityDecisionTree, f, mode: str = "auto") -> VerifyReport:
    """Check that ``t`` computes ``f``.

    ``mode`` is ``"exhaustive"`` (every input through the tree),
    ``"leafwise"`` (f constant and equal to the label on each leaf coset),
    or ``"auto"`` (exhaustive when f is a table with n <= 20).
    """
    if t.n != f.n:
        raise TreeError(f"tree over {t.n} variables, function over {f.n}")
    if mode == "auto":
        exhaustive_ok = isinstance(f, BooleanFunction) and f.n <= EXHAUSTIVE_MAX_N
        mode = "exhaustive" if exhaustive_ok else "leafwise"
    if mode == "exhaustive":
        if not isinstance(f, BooleanFunction):
            xs = np.arange(1 << f.n, dtype=np.int64)
            want = f.values(xs)
        else:
            want = f.values(np.arange(1 << f.n))
        got, _ = t.eval_all()
        bad = np.flatnonzero(got != want)
        if bad.size:
            return VerifyReport(False, mode, int(bad[0]), 1 << f.n)
        return VerifyReport(True, mode, None, 1 << f.n)
    if mode != "leafwise":
        raise ValueError(f"unknown verification mode {mode!r}")

    checked = 0
    infeasible = 0
    batch_pts: list[np.ndarray] = []
    batch_labels: list[np.ndarray] = []
    pending = 0

    def flush():
        nonlocal pending
        if not batch_pts:
            return None
        pts = np.concatenate(batch_pts)
        want = np.concatenate(batch_labels)
        batch_pts.clear()
        batch_labels.clear()
        pending = 0
        bad = np.flatnonzero(f.values(pts) != want)
        return int(pts[bad[0]]) if bad.size else None

    # DFS carrying the coset of the path; leaf points are checked in batches
    stack = [(0, Coset.full(t.n))]
    while stack:
        v, c = stack.pop()
        if t.masks[v] == 0:
            pts = c.points()
            checked += pts.size
            batch_pts.append(pts)
            batch_labels.append(np.full(pts.size, t.labels[v], dtype=np.int8))
            pending += pts.size
            if pending >= LEAFWISE_BATCH:
                bad = flush()
                if bad is not None:
                    return VerifyReport(False, mode, bad, checked, infeasible)
            continue
        m = int(t.masks[v])
        for bit, child in ((1, t.child1[v]), (0, t.child0[v])):
            nxt = c.insert(m, bit)
            if isinstance(nxt, Dependent):
                if nxt.forced != bit:
                    infeasible += _count_leaves(t, int(child))
                    continue
                nxt = c
            stack.append((int(child), nxt))
    bad = flush()
    if bad is not None:
        return VerifyReport(False, mode, bad, checked, infeasible)
    return VerifyReport(True, mode, None, checked, infeasible)


def _count_leaves(t: ParityDecisionTree, v: int) -> int:
    count = 0
    stack = [v]
    while stack:
        u = stack.pop()
        if t.masks[u] == 0:
            count += 1
        else:
            stack.extend((int(t.child0[u]), int(t.child1[u])))
    return count


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Query:
    mask: int


@dataclass(frozen=True)
class Output:
    value: int


Action = Union[Query, Output]


class Strategy:
    """Adaptive query protocol.

    Subclasses implement ``start``, ``decide`` and ``update`` over immutable
    states; a state is a function of the transcript so far, which keeps the
    protocol deterministic in the transcript. ``budget`` is the declared
    worst-case number of queries.
    """

    n: int
    budget: int
    name: str = "strategy"

    def start(self):
        raise NotImplementedError

    def decide(self, state) -> Action:
        raise NotImplementedError

    def update(self, state, mask: int, answer: int):
        raise NotImplementedError

    def respond(self, transcript) -> Action:
        """Action after the given sequence of (mask, answer) pairs."""
        state = self.start()
        for mask, answer in transcript:
            act = self.decide(state)
            if not isinstance(act, Query) or act.mask != mask:
                raise ValueError("transcript does not follow this strategy")
            state = self.update(state, mask, answer)
        return self.decide(state)


class QueryOracle:
    """Answers parity queries about a hidden assignment and counts them."""

    def __init__(self, x: int, n: int):
        if x >> n:
            raise ValueError(f"assignment {x} does not fit in {n} bits")
        self.x = x
        self.n = n
        self.queries = 0

    def ask(self, mask: int) -> int:
        if mask == 0 or mask >> self.n:
            raise ValueError(f"invalid query mask {mask:#x}")
        self.queries += 1
        return bin(mask & self.x).count("1") & 1


def run_strategy(s: Strategy, oracle: QueryOracle, budget: int | None = None):
    """Drive ``s`` against ``oracle``; returns (output, queries used)."""
    limit = s.budget if budget is None else budget
    state = s.start()
    used = 0
    while True:
        act = s.decide(state)
        if isinstance(act, Output):
            return act.value, used
        if used >= limit:
            raise BudgetExceeded(f"{s.name} exceeded its budget of {limit} queries")
        ans = oracle.ask(act.mask)
        used += 1
        state = s.update(state, act.mask, ans)


@dataclass
class MaterializeStats:
    nodes: int = 0
    dependent_queries: int = 0
    max_charged: int = 0


def materialize(s: Strategy, n: int | None = None, stats: MaterializeStats | None = None):
    """Expand ``s`` into a tree over all consistent answer sequences.

    A query already determined by earlier answers emits no node; only the
    forced branch is followed, but it is still charged against the budget.
    """
    n = s.n if n is None else n
    b = TreeBuilder()
    st = stats if stats is not None else MaterializeStats()
    budget = s.budget

    def go(state, coset, charged):
        act = s.decide(state)
        if s.decide(state) != act:
            raise NondeterministicStrategy(f"{s.name} is not deterministic")
        while isinstance(act, Query):
            if charged >= budget:
                raise BudgetExceeded(f"{s.name} exceeded its budget of {budget} queries")
            forced = coset.value_of(act.mask)
            if forced is None:
                break
            st.dependent_queries += 1
            charged += 1
            state = s.update(state, act.mask, forced)
            act = s.decide(state)
        idx = b.reserve()
        st.max_charged = max(st.max_charged, charged)
        if isinstance(act, Output):
            b.set_leaf(idx, act.value)
            return idx
        m = act.mask
        c0 = go(s.update(state, m, 0), coset.insert(m, 0), charged + 1)
        c1 = go(s.update(state, m, 1), coset.insert(m, 1), charged + 1)
        b.set_node(idx, m, c0, c1)
        return idx

    go(s.start(), Coset.full(n), 0)
    tree = b.build(n)
    st.nodes = tree.size
    return tree


@dataclass
class StrategyCheck:
    correct: bool
    worst_case: int
    budget: int
    mode: str
    tree_depth: int
    witness: int | None = None
    dependent_queries: int = 0
    nodes: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.worst_case <= self.budget

    @property
    def tight(self) -> bool:
        return self.worst_case == self.budget


def check_strategy(s: Strategy, f, mode: str = "auto") -> StrategyCheck:
    """Materialize ``s`` and verify it against ``f``."""
    stats = MaterializeStats()
    tree = materialize(s, f.n, stats)
    rep = verify_tree(tree, f, mode)
    if rep.mode == "exhaustive":
        _, depths = tree.eval_all()
        worst = int(depths.max())
    else:
        worst = tree.depth()
    worst = max(worst, stats.max_charged)
    return StrategyCheck(
        rep.ok,
        worst,
        s.budget,
        rep.mode,
        tree.depth(),
        rep.witness,
        stats.dependent_queries,
        tree.size,
    )


# ---------------------------------------------------------------------------
# s-expression format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def dumps_tree(t: ParityDecisionTree) -> str:
    out: list[str] = []

    def go(v):
        if t.masks[v] == 0:
            out.append(f"(leaf {int(t.labels[v])})")
            return
        out.append(f"(q {int(t.masks[v]):x} (0 ")
        go(int(t.child0[v]))
        out.append(") (1 ")
        go(int(t.child1[v]))
        out.append("))")

    go(0)
    return "".join(out) + "\n"


def loads_tree(text: str, n: int) -> ParityDecisionTree:
    tokens = _TOKEN.findall(text)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise TreeError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def atom():
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] in "()":
            raise TreeError("expected an atom")
        pos += 1
        return tokens[pos - 1]

    def node():
        expect("(")
        kind = atom()
        if kind == "leaf":
            try:
                label = int(atom())
            except ValueError as exc:
                raise TreeError("leaf label must be an integer") from exc
            expect(")")
            if label not in (-1, 1):
                raise TreeError(f"leaf label must be -1 or 1, got {label}")
            return Leaf(label)
        if kind != "q":
            raise TreeError(f"unknown node kind {kind!r}")
        try:
            mask = int(atom(), 16)
        except ValueError as exc:
            raise TreeError("query mask must be hexadecimal") from exc
        if mask == 0:
            raise TreeError("query mask must be nonzero")
        if mask >> n:
            raise TreeError(f"query mask {mask:#x} outside {n} variables")
        expect("(")
        if atom() != "0":
            raise TreeError("first branch must be labelled 0")
        c0 = node()
        expect(")")
        expect("(")
        if atom() != "1":
            raise TreeError("second branch must be labelled 1")
        c1 = node()
        expect(")")
        expect(")")
        return Node(mask, c0, c1)

    root = node()
    if pos != len(tokens):
        raise TreeError("trailing tokens after tree")
    return ParityDecisionTree.from_nested(root, n)


def read_tree(path, n: int) -> ParityDecisionTree:
    with open(path) as fh:
        return loads_tree(fh.read(), n)


def write_tree(t: ParityDecisionTree, path):
    with open(path, "w") as fh:
        fh.write(dumps_tree(t))


# ---------------------------------------------------------------------------
# random trees
# ---------------------------------------------------------------------------


def random_tree(n: int, depth: int, rng: np.random.Generator, leaf_prob: float = 0.2) -> ParityDecisionTree:
    """Random tree of depth <= ``depth``; queries along a path are independent."""
    b = TreeBuilder()

    def go(coset, d):
        idx = b.reserve()
        if d == 0 or coset.dim == 0 or rng.random() < leaf_prob:
            b.set_leaf(idx, int(rng.choice((-1, 1))))
            return idx
        while True:
            m = int(rng.integers(1, 1 << n))
            if coset.value_of(m) is None:
                break
        c0 = go(coset.insert(m, 0), d - 1)
        c1 = go(coset.insert(m, 1), d - 1)
        b.set_node(idx, m, c0, c1)
        return idx

    go(Coset.full(n), depth)
    return b.build(n)


def random_correct_tree(f: BooleanFunction, rng: np.random.Generator) -> ParityDecisionTree:
    """A tree computing ``f`` that asks random independent parities until f is constant."""
    n = f.n
    b = TreeBuilder()

    def go(coset):
        idx = b.reserve()
        vals = f.table[coset.points()]
        if vals.min() == vals.max():
            b.set_leaf(idx, -1 if vals[0] else 1)
            return idx
        while True:
            m = int(rng.integers(1, 1 << n))
            if coset.value_of(m) is None:
                break
        c0 = go(coset.insert(m, 0))
        c1 = go(coset.insert(m, 1))
        b.set_node(idx, m, c0, c1)
        return idx

    go(Coset.full(n))
    return b.build(n)
