"""Exact parity decision tree depth, lower-bound profile, the granularity
adversary and parity certificate complexity.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import BooleanFunction, Coset, Dependent, function_id, nu2
from .pdt import ParityDecisionTree, TreeBuilder, materialize, verify_tree
from .spectral import granularity, granularity_witness, sparsity, wht, deg2


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------


@dataclass
class BoundProfile:
    spar: int
    gran: int
    deg2: int
    sparsity_bound: int
    deg2_bound: int
    gran_bound: int
    cert_bound: int | None = None
    upper: int | None = None

    @property
    def best_lower(self) -> int:
        vals = [self.sparsity_bound, self.deg2_bound, self.gran_bound]
        if self.cert_bound is not None:
            vals.append(self.cert_bound)
        return max(vals)

    def as_dict(self) -> dict:
        return {
            "spar": self.spar,
            "gran": self.gran,
            "deg2": self.deg2,
            "sparsity_bound": self.sparsity_bound,
            "deg2_bound": self.deg2_bound,
            "gran_bound": self.gran_bound,
            "cert_bound": self.cert_bound,
            "best_lower": self.best_lower,
            "upper": self.upper,
        }


def sparsity_bound(spar: int) -> int:
    """ceil(log2(spar) / 2), computed without floating point."""
    # log2(spar) <= 2b  <=>  spar <= 4^b
    b = 0
    while 4**b < spar:
        b += 1
    return b


def bound_profile(f: BooleanFunction, with_certificate: bool = False, upper: int | None = None,
                  cert_budget: int | None = None) -> BoundProfile:
    s = wht(f)
    spar = sparsity(s)
    gran = granularity(s)
    d2 = deg2(f)
    prof = BoundProfile(
        spar=spar,
        gran=gran,
        deg2=d2,
        sparsity_bound=sparsity_bound(spar),
        deg2_bound=d2,
        gran_bound=0 if f.is_constant() else gran + 1,
        upper=upper,
    )
    if with_certificate:
        cert = parity_certificate(f, budget=cert_budget)
        prof.cert_bound = cert.lower
    return prof


def _table_lower_bound(table: np.ndarray, d: int) -> int:
    """max(gran + 1, deg2, sparsity bound) of a non-constant table."""
    a = 1 - 2 * table.astype(np.int64)
    kernels.fwht(a)
    nz = a[a != 0]
    low = np.abs(nz) & -np.abs(nz)
    gran = max(0, d - int(np.log2(low.min())))
    lb = gran + 1
    m = table.copy()
    kernels.mobius(m)
    support = np.flatnonzero(m)
    if support.size:
        lb = max(lb, int(np.bitwise_count(support.astype(np.int64)).max()))
    lb = max(lb, sparsity_bound(int(nz.size)))
    return lb


# ---------------------------------------------------------------------------
# exact depth
# ---------------------------------------------------------------------------


class _OutOfBudget(Exception):
    pass


@dataclass
class _Entry:
    lower: int
    exact: int | None = None
    mask: int = 0


@dataclass
class SolveReport:
    n: int
    function_id: str
    exact_depth: int | None
    lower: int
    upper: int
    bounds: BoundProfile
    witness: ParityDecisionTree | None = None
    nodes_expanded: int = 0
    memo_hits: int = 0
    wall_ms: float = 0.0
    incumbent: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.exact_depth is not None

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "function_id": self.function_id,
        }
        if self.is_exact:
            out["exact_depth"] = self.exact_depth
        else:
            out["interval"] = [self.lower, self.upper]
        out["bounds"] = {
            "spar": self.bounds.sparsity_bound,
            "deg2": self.bounds.deg2_bound,
            "gran": self.bounds.gran_bound,
            "cert": self.bounds.cert_bound,
        }
        out["nodes_expanded"] = self.nodes_expanded
        out["memo_hits"] = self.memo_hits
        out["wall_ms"] = round(self.wall_ms, 3)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class DepthSearch:
    """Branch and bound over restricted subfunctions.

    A subfunction on d variables is its own table. Querying mask m (over
    the current variables) fixes the lowest variable of m and leaves the
    others in order, so every nonzero mask is exactly one useful candidate:
    queries dependent on earlier answers never appear. Subtrees are cut
    with max(gran + 1, deg2, sparsity bound) of the subfunction.
    """

    def __init__(self, memo: bool = True, max_nodes: int | None = None,
                 max_seconds: float | None = None, use_bounds: bool = True):
        self.use_memo = memo
        self.use_bounds = use_bounds
        self.memo: dict[bytes, _Entry] = {}
        self.max_nodes = max_nodes
        self.deadline = None if max_seconds is None else time.monotonic() + max_seconds
        self.nodes = 0
        self.hits = 0

    def _tick(self):
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _OutOfBudget
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise _OutOfBudget

    def lower_bound(self, table: np.ndarray, d: int) -> int:
        if not self.use_bounds:
            return 1
        return _table_lower_bound(table, d)

    def solve(self, table: np.ndarray, ub: int) -> int:
        """Exact depth if it is below ``ub``; otherwise a lower bound >= ub."""
        if table.min() == table.max():
            return 0
        d = table.size.bit_length() - 1
        key = table.tobytes() if self.use_memo else None
        entry = self.memo.get(key) if key is not None else None
        if entry is not None:
            self.hits += 1
            if entry.exact is not None:
                return entry.exact
            lb = entry.lower
        else:
            lb = self.lower_bound(table, d)
        if lb >= ub:
            if key is not None and entry is None:
                self.memo[key] = _Entry(lb)
            return lb
        self._tick()
        if lb >= d:
            # reading the variables one by one is optimal
            if key is not None:
                self.memo[key] = _Entry(d, d, 1)
            return d
        target = min(ub, d + 1)
        best, best_mask = target, 0
        for m in range(1, 1 << d):
            c0 = kernels.restrict_parity(table, m, 0)
            c1 = kernels.restrict_parity(table, m, 1)
            if c1.sum() < c0.sum():
                c0, c1 = c1, c0
            r = self.solve(c0, best - 1)
            if r >= best - 1:
                continue
            r2 = self.solve(c1, best - 1)
            if r2 >= best - 1:
                continue
            best, best_mask = 1 + max(r, r2), m
            if best <= lb:
                break
        if best_mask:
            if key is not None:
                self.memo[key] = _Entry(best, best, best_mask)
            return best
        if key is not None:
            self.memo[key] = _Entry(max(lb, target))
        return target

    def witness(self, table: np.ndarray, n: int, variables=None) -> ParityDecisionTree:
        """Optimal tree for a solved table, lifted to the original variables."""
        b = TreeBuilder()
        if variables is None:
            variables = list(range(n))

        def go(tab, vars_, plain=False):
            idx = b.reserve()
            if tab.min() == tab.max():
                b.set_leaf(idx, -1 if tab[0] else 1)
                return idx
            d = tab.size.bit_length() - 1
            if plain:
                m = 1
            else:
                entry = self.memo.get(tab.tobytes())
                if entry is None or entry.exact is None:
                    self.solve(tab, d + 1)
                    entry = self.memo[tab.tobytes()]
                m = entry.mask
                # depth d means reading the variables in order is optimal
                plain = entry.exact == d
                if plain:
                    m = 1
            p = (m & -m).bit_length() - 1
            orig = sum(1 << vars_[j] for j in range(len(vars_)) if m >> j & 1)
            rest = vars_[:p] + vars_[p + 1:]
            c0 = go(kernels.restrict_parity(tab, m, 0), rest, plain)
            c1 = go(kernels.restrict_parity(tab, m, 1), rest, plain)
            b.set_node(idx, orig, c0, c1)
            return idx

        go(table, list(variables))
        return b.build(n)


def exact_depth(f: BooleanFunction, max_seconds: float | None = None, max_nodes: int | None = None,
                incumbent: bool = True, memo: bool = True, with_witness: bool = True,
                threads: int = 1) -> SolveReport:
    """Minimal parity decision tree depth of ``f``.

    Returns an interval instead of an exact value when the budget runs out.
    ``threads`` is accepted for interface compatibility; the search runs on
    one thread.
    """
    t0 = time.perf_counter()
    prof = bound_profile(f)
    fid = function_id(f)
    search = DepthSearch(memo=memo, max_nodes=max_nodes, max_seconds=max_seconds)
    table = np.ascontiguousarray(f.table)

    inc_tree = None
    upper = f.n
    if incumbent:
        from .strategies import incumbent_for

        strat = incumbent_for(f)
        if strat is not None:
            cand = materialize(strat, f.n)
            if verify_tree(cand, f).ok and cand.depth() <= upper:
                inc_tree, upper = cand, cand.depth()

    def done(exact, lower, up, tree):
        return SolveReport(
            f.n, fid, exact, lower, up, prof, tree if with_witness else None,
            search.nodes, search.hits, (time.perf_counter() - t0) * 1e3,
            None if inc_tree is None else inc_tree.depth(),
        )

    if f.is_constant():
        return done(0, 0, 0, ParityDecisionTree.leaf(-1 if table[0] else 1, f.n))
    lower = prof.best_lower
    if lower >= upper and inc_tree is not None:
        return done(upper, upper, upper, inc_tree)
    # without an incumbent the bound n itself must be found by the search
    limit = upper if inc_tree is not None else upper + 1
    try:
        r = search.solve(table, limit)
    except _OutOfBudget:
        entry = search.memo.get(table.tobytes())
        lo = max(lower, entry.lower if entry else 0)
        return done(None, lo, upper, inc_tree)
    if r < limit:
        tree = search.witness(table, f.n) if (with_witness and memo) else None
        return done(r, r, r, tree)
    return done(upper, upper, upper, inc_tree)


def naive_depth(f: BooleanFunction) -> int:
    """Plain minimax over every splitting parity; no pruning, no cache.

    Works on explicit sets of inputs, so it shares nothing with the table
    restriction used by :class:`DepthSearch`. Only for tiny n.
    """
    n = f.n
    value = {x: f.table[x] for x in range(1 << n)}
    masks = range(1, 1 << n)

    def par(x, m):
        return bin(x & m).count("1") & 1

    def d(points: frozenset) -> int:
        if len({value[x] for x in points}) <= 1:
            return 0
        best = None
        for m in masks:
            a = frozenset(x for x in points if par(x, m) == 0)
            if not a or len(a) == len(points):
                continue
            cost = 1 + max(d(a), d(points - a))
            if best is None or cost < best:
                best = cost
        return best

    return d(frozenset(range(1 << n)))


# ---------------------------------------------------------------------------
# adversary
# ---------------------------------------------------------------------------


@dataclass
class Refuted:
    """Evidence that a tree does not compute f.

    ``path`` is the followed (mask, bit) sequence; ``x_true`` / ``x_false``
    are two points of the leaf coset with f = -1 and f = 1 respectively;
    ``wrong`` is the one the leaf label disagrees with.
    """

    path: tuple[tuple[int, int], ...]
    leaf: int
    label: int
    x_true: int | None
    x_false: int | None
    wrong: int
    character: int
    valuations: tuple = ()


@dataclass
class NotApplicable:
    reason: str


def adversary_refute(f: BooleanFunction, t: ParityDecisionTree):
    """Walk ``t`` answering so the character sum keeps a small 2-adic valuation.

    S is the smallest mask attaining gran(f). At each node the inputs with
    f = -1 still consistent with the answers are split by the query; the
    branch whose sum of chi_S has the smaller valuation is taken (parity 0 on
    ties). Succeeds whenever depth(t) <= gran(f).
    """
    if f.is_constant():
        return NotApplicable("constant function")
    if t.n != f.n:
        raise ValueError("tree and function have different arity")
    spec = wht(f)
    gran = granularity(spec)
    if t.depth() > gran:
        return NotApplicable(f"depth {t.depth()} exceeds gran(f) = {gran}")
    S = granularity_witness(spec)
    xs = np.arange(1 << f.n, dtype=np.int64)
    pts = xs[f.table == 1]
    chi = 1 - 2 * kernels.parity_of(pts, S)
    v = 0
    path: list[tuple[int, int]] = []
    vals = [nu2(int(chi.sum()))]
    while t.masks[v]:
        m = int(t.masks[v])
        par = kernels.parity_of(pts, m)
        s0 = int(chi[par == 0].sum())
        s1 = int(chi[par == 1].sum())
        bit = 1 if nu2(s1) < nu2(s0) else 0
        keep = par == bit
        pts, chi = pts[keep], chi[keep]
        vals.append(nu2(s1 if bit else s0))
        path.append((m, bit))
        v = int(t.child1[v] if bit else t.child0[v])
    label = int(t.labels[v])
    coset = Coset.from_constraints(f.n, path)
    if coset is None:
        raise AssertionError("adversary followed an infeasible path")
    cpts = coset.points()
    values = f.table[cpts]
    x_true = int(cpts[np.argmax(values == 1)]) if values.any() else None
    x_false = int(cpts[np.argmax(values == 0)]) if not values.all() else None
    wrong = x_false if label == -1 else x_true
    if wrong is None:
        raise AssertionError("granularity adversary failed to find a violation")
    return Refuted(tuple(path), v, label, x_true, x_false, wrong, S, tuple(vals))


def check_refutation(f: BooleanFunction, t: ParityDecisionTree, ref: Refuted) -> bool:
    """Independent re-check: the path is real and the tree errs at ``ref.wrong``."""
    v = 0
    for m, bit in ref.path:
        if t.masks[v] != m:
            return False
        v = int(t.child1[v] if bit else t.child0[v])
    if t.masks[v] != 0 or v != ref.leaf:
        return False
    x = ref.wrong
    for m, bit in ref.path:
        if bin(m & x).count("1") % 2 != bit:
            return False
    from .pdt import eval_tree

    return eval_tree(t, x) != (-1 if f.table[x] else 1)


# ---------------------------------------------------------------------------
# parity certificate complexity
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    value: int | None  # exact C(f) when every point finished
    lower: int
    upper: int
    per_x: np.ndarray  # exact values, -1 where unknown
    per_x_lower: np.ndarray
    per_x_upper: np.ndarray
    nodes: int = 0
    symmetric: bool = False


def max_subspace_dim(zero_set: np.ndarray, budget: int | None = None):
    """Largest dimension of a linear subspace inside ``zero_set`` (a bool mask over GF(2)^n).

    Returns (best, upper, nodes); ``best == upper`` unless the budget ran out.
    Branching: take the smallest candidate v and either add it to the span,
    or discard the whole coset v + span.
    """
    size = zero_set.size
    idx = np.arange(size, dtype=np.int64)
    cand0 = zero_set.copy()
    cand0[0] = False
    root_upper = int(math.floor(math.log2(1 + int(cand0.sum()))))
    best = 0
    nodes = 0

    def rec(dim, span, cand):
        nonlocal best, nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise _OutOfBudget
        best = max(best, dim)
        cand = cand.copy()
        while True:
            count = int(cand.sum())
            if count == 0:
                return
            if int(math.floor(math.log2(span.size + count))) <= best:
                return
            v = int(np.argmax(cand))
            rec(dim + 1, np.concatenate([span, span ^ v]), cand & cand[idx ^ v])
            cand[span ^ v] = False

    try:
        rec(0, np.zeros(1, dtype=np.int64), cand0)
    except _OutOfBudget:
        return best, root_upper, nodes
    return best, best, nodes


def is_symmetric(f: BooleanFunction) -> bool:
    w = np.bitwise_count(np.arange(1 << f.n, dtype=np.int64))
    for k in range(f.n + 1):
        vals = f.table[w == k]
        if vals.min() != vals.max():
            return False
    return True


def parity_certificate(f: BooleanFunction, budget: int | None = None) -> CertificateReport:
    """C(f, x) for every x and C(f) = max_x C(f, x).

    C(f, x) = n - (largest subspace V with f constant on x + V). Symmetric
    functions are solved once per Hamming weight.
    """
    n = f.n
    size = 1 << n
    xs = np.arange(size, dtype=np.int64)
    exact = np.full(size, -1, dtype=np.int64)
    lo = np.zeros(size, dtype=np.int64)
    hi = np.full(size, n, dtype=np.int64)
    symmetric = is_symmetric(f)
    weights = np.bitwise_count(xs)
    done_weight: dict[int, tuple[int, int]] = {}
    total_nodes = 0
    for x in range(size):
        if symmetric and int(weights[x]) in done_weight:
            best, upper = done_weight[int(weights[x])]
        else:
            zero = f.table[xs ^ x] == f.table[x]
            best, upper, nodes = max_subspace_dim(zero, budget)
            total_nodes += nodes
            if symmetric:
                done_weight[int(weights[x])] = (best, upper)
        lo[x] = n - upper
        hi[x] = n - best
        if best == upper:
            exact[x] = n - best
    all_exact = bool((exact >= 0).all())
    return CertificateReport(
        int(exact.max()) if all_exact else None,
        int(lo.max()),
        int(hi.max()),
        exact,
        lo,
        hi,
        total_nodes,
        symmetric,
    )
