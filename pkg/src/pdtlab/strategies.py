"""Query strategies for majority, recursive majority and small thresholds,
and the threshold reduction that turns a tree for THR_{n+2}^{k+1} into a
cheaper protocol for THR_n^k.

Variables are 0-based inside this module: bit i of a mask is x_{i+1}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .core import BooleanFunction, Coset, build_named, ones_in_binary
from .pdt import Output, ParityDecisionTree, Query, Strategy, TreeError, verify_tree


# ---------------------------------------------------------------------------
# majority by block merging
# ---------------------------------------------------------------------------

EQUAL = 1  # every variable in the block has the same value
BALANCED = 2  # as many ones as zeros


@dataclass(frozen=True)
class Block:
    size: int
    kind: int
    rep: int


@dataclass(frozen=True)
class MajState:
    blocks: tuple[Block, ...]
    answer: int | None = None


class MajStrategy(Strategy):
    """Folklore merging algorithm for MAJ_n, at most n - B(n) + 1 queries.

    Two equal-kind blocks of the same size are compared through their
    representatives; the smallest such size goes first, lowest
    representatives first. Once the equal-kind sizes are pairwise distinct
    the largest one decides the output.
    """

    name = "maj"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("maj_strategy needs n >= 1")
        self.n = n
        self.budget = n - ones_in_binary(n) + 1
        self.name = f"maj:{n}"

    def start(self):
        return MajState(tuple(Block(1, EQUAL, i) for i in range(self.n)))

    @staticmethod
    def _pair(state: MajState):
        by_size: dict[int, list[Block]] = {}
        for b in state.blocks:
            if b.kind == EQUAL:
                by_size.setdefault(b.size, []).append(b)
        for size in sorted(by_size):
            group = by_size[size]
            if len(group) >= 2:
                group.sort(key=lambda b: b.rep)
                return group[0], group[1]
        return None

    @staticmethod
    def _largest_equal(state: MajState):
        eq = [b for b in state.blocks if b.kind == EQUAL]
        return max(eq, key=lambda b: b.size) if eq else None

    def decide(self, state: MajState):
        if state.answer is not None:
            return Output(-1 if state.answer else 1)
        pair = self._pair(state)
        if pair is not None:
            return Query((1 << pair[0].rep) | (1 << pair[1].rep))
        top = self._largest_equal(state)
        if top is None:
            return Output(-1)  # balanced input, n even
        return Query(1 << top.rep)

    def update(self, state: MajState, mask: int, answer: int):
        pair = self._pair(state)
        if pair is None:
            return MajState(state.blocks, answer)
        a, b = pair
        merged = Block(2 * a.size, BALANCED if answer else EQUAL, min(a.rep, b.rep))
        rest = [blk for blk in state.blocks if blk is not a and blk is not b]
        rest.append(merged)
        rest.sort(key=lambda blk: (blk.size, blk.rep))
        return MajState(tuple(rest))


def maj_strategy(n: int) -> MajStrategy:
    return MajStrategy(n)


# ---------------------------------------------------------------------------
# trees of MAJ_3 gates
# ---------------------------------------------------------------------------

Shape = Union[int, tuple]


def rmaj_shape(k: int) -> Shape:
    """Complete ternary tree of depth k over variables 0 .. 3^k - 1."""
    level: list[Shape] = list(range(3**k))
    for _ in range(k):
        level = [tuple(level[i : i + 3]) for i in range(0, len(level), 3)]
    return level[0]


def internal_nodes(shape: Shape) -> int:
    if isinstance(shape, int):
        return 0
    return 1 + sum(internal_nodes(c) for c in shape)


def shape_variables(shape: Shape) -> list[int]:
    if isinstance(shape, int):
        return [shape]
    return [v for c in shape for v in shape_variables(c)]


def eval_shape(shape: Shape, x: int) -> int:
    """0/1 value of the MAJ_3 formula on assignment index x."""
    if isinstance(shape, int):
        return x >> shape & 1
    return int(sum(eval_shape(c, x) for c in shape) >= 2)


def _deepest_gate(shape: Shape, depth=0, path=()):
    """(depth, path) of the deepest-leftmost gate whose inputs are all variables."""
    if isinstance(shape, int):
        return None
    if all(isinstance(c, int) for c in shape):
        best = (depth, path)
    else:
        best = None
    for i, c in enumerate(shape):
        sub = _deepest_gate(c, depth + 1, path + (i,))
        if sub is not None and (best is None or sub[0] > best[0]):
            best = sub
    return best


def _gate_at(shape: Shape, path):
    for i in path:
        shape = shape[i]
    return shape


def _replace(shape: Shape, path, value) -> Shape:
    if not path:
        return value
    i = path[0]
    return tuple(_replace(c, path[1:], value) if j == i else c for j, c in enumerate(shape))


@dataclass(frozen=True)
class ShapeState:
    shape: Shape
    answer: int | None = None


class Maj3TreeStrategy(Strategy):
    """Collapse MAJ_3 gates bottom-up with one equality query each.

    For a gate (y, z, t) ask y xor z: equal means the gate equals y,
    different means it equals t. The last remaining variable is read
    directly, so l gates cost at most l + 1 queries.
    """

    name = "maj3tree"

    def __init__(self, shape: Shape, n: int | None = None):
        vars_ = shape_variables(shape)
        if len(set(vars_)) != len(vars_):
            raise ValueError("every leaf of a MAJ_3 tree must be a distinct variable")
        self.shape = shape
        self.n = (max(vars_) + 1) if n is None else n
        self.budget = internal_nodes(shape) + 1

    def start(self):
        return ShapeState(self.shape)

    def decide(self, state: ShapeState):
        if state.answer is not None:
            return Output(-1 if state.answer else 1)
        if isinstance(state.shape, int):
            return Query(1 << state.shape)
        _, path = _deepest_gate(state.shape)
        y, z, _t = _gate_at(state.shape, path)
        return Query((1 << y) | (1 << z))

    def update(self, state: ShapeState, mask: int, answer: int):
        if isinstance(state.shape, int):
            return ShapeState(state.shape, answer)
        _, path = _deepest_gate(state.shape)
        y, _z, t = _gate_at(state.shape, path)
        return ShapeState(_replace(state.shape, path, t if answer else y))


def maj3tree_strategy(shape: Shape, n: int | None = None) -> Maj3TreeStrategy:
    return Maj3TreeStrategy(shape, n)


def rmaj_strategy(k: int) -> Maj3TreeStrategy:
    s = Maj3TreeStrategy(rmaj_shape(k), 3**k)
    s.name = f"rmaj:{k}"
    return s


# ---------------------------------------------------------------------------
# THR_n^2 (odd n) and THR_n^3 (n = 2 mod 4)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThrState:
    blocks: tuple[tuple[tuple[int, ...], int], ...]  # (variables, kind)
    step: int  # position in the merge plan
    counting: bool
    values: tuple[int, ...] = ()  # answers collected while counting


class BlockThresholdStrategy(Strategy):
    """Build equal blocks of ``block_size`` by pairwise comparisons.

    As soon as a balanced block shows up, every remaining equal block is
    read once and the weight is known exactly. If all blocks come out equal
    the ``k - 1`` leftover variables cannot change the answer, so only the
    block representatives are read.
    """

    def __init__(self, n: int, k: int, block_size: int, name: str):
        leftover = n % block_size
        if leftover != k - 1 or block_size < k:
            raise ValueError(f"THR_{n}^{k} cannot use blocks of size {block_size}")
        self.n = n
        self.k = k
        self.budget = n - 1
        self.name = name
        self.block_size = block_size
        full = n - leftover
        plan = []
        for base in range(0, full, block_size):
            width = 1
            while width < block_size:
                for off in range(0, block_size, 2 * width):
                    plan.append((base + off, base + off + width))
                width *= 2
        self.plan = tuple(plan)
        self.full_blocks = full // block_size

    def start(self):
        return ThrState(tuple(((i,), EQUAL) for i in range(self.n)), 0, False)

    def _to_count(self, state: ThrState) -> list[int]:
        """Indices of blocks that still have to be read."""
        if any(kind == BALANCED for _, kind in state.blocks):
            return [i for i, (_, kind) in enumerate(state.blocks) if kind == EQUAL]
        return [
            i for i, (vs, _) in enumerate(state.blocks) if len(vs) == self.block_size
        ]

    def _find(self, state: ThrState, var: int) -> int:
        for i, (vs, _) in enumerate(state.blocks):
            if var in vs:
                return i
        raise AssertionError(var)

    def decide(self, state: ThrState):
        if not state.counting:
            a, b = self.plan[state.step]
            return Query((1 << a) | (1 << b))
        todo = self._to_count(state)
        if len(state.values) < len(todo):
            vs, _ = state.blocks[todo[len(state.values)]]
            return Query(1 << vs[0])
        balanced = any(kind == BALANCED for _, kind in state.blocks)
        if balanced:
            weight = sum(len(vs) // 2 for vs, kind in state.blocks if kind == BALANCED)
            weight += sum(len(state.blocks[i][0]) * v for i, v in zip(todo, state.values))
            return Output(-1 if weight >= self.k else 1)
        return Output(-1 if any(state.values) else 1)

    def update(self, state: ThrState, mask: int, answer: int):
        if state.counting:
            return ThrState(state.blocks, state.step, True, state.values + (answer,))
        a, b = self.plan[state.step]
        ia, ib = self._find(state, a), self._find(state, b)
        merged = (tuple(sorted(state.blocks[ia][0] + state.blocks[ib][0])), BALANCED if answer else EQUAL)
        blocks = [blk for i, blk in enumerate(state.blocks) if i not in (ia, ib)]
        blocks.insert(min(ia, ib), merged)
        step = state.step + 1
        counting = bool(answer) or step == len(self.plan)
        return ThrState(tuple(blocks), step, counting)

    def block_sizes(self, state: ThrState) -> list[int]:
        return [len(vs) for vs, _ in state.blocks]


def thr2_strategy(n: int) -> BlockThresholdStrategy:
    if n < 3 or n % 2 == 0:
        raise ValueError("thr2_strategy needs odd n >= 3")
    return BlockThresholdStrategy(n, 2, 2, f"thr2:{n}")


def thr3_strategy(n: int) -> BlockThresholdStrategy:
    if n < 6 or n % 4 != 2:
        raise ValueError("thr3_strategy needs n = 2 (mod 4) and n >= 6")
    return BlockThresholdStrategy(n, 3, 4, f"thr3:{n}")


# ---------------------------------------------------------------------------
# threshold reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReduceState:
    node: int
    placement: tuple[int, int, int] | None  # (position of y, position of not-y, y as x-mask)
    coset: Coset


class ThresholdReduction(Strategy):
    """Protocol for THR_n^k that simulates a tree for THR_{n+2}^{k+1}.

    The tree sees (x, y, not y) with the two padding wires placed at
    positions chosen from its first query that is not the all-ones parity;
    since THR is symmetric any wire assignment is valid. y is then defined
    as the parity of the x-wires in that query, making its answer 0 for
    free. Later queries are rewritten over x; ones whose value is already
    implied by previous answers are not asked.
    """

    def __init__(self, tree: ParityDecisionTree, n: int, k: int):
        self.tree = tree
        self.n = n
        self.k = k
        self.budget = max(tree.depth() - 1, 0)
        self.name = f"reduce-thr:{n},{k}"
        self.full = (1 << (n + 2)) - 1

    def start(self):
        return ReduceState(0, None, Coset.full(self.n))

    def _x_form(self, mask: int, placement) -> tuple[int, int]:
        """Rewrite a tree query as (mask over x, constant)."""
        a, b, ymask = placement
        xm, const = 0, 0
        j = 0
        for pos in range(self.n + 2):
            if pos in (a, b):
                if mask >> pos & 1:
                    xm ^= ymask
                    const ^= int(pos == b)
                continue
            if mask >> pos & 1:
                xm ^= 1 << j
            j += 1
        return xm, const

    def _place(self, mask: int) -> tuple[int, int, int]:
        a = (mask & -mask).bit_length() - 1
        b = next(p for p in range(self.n + 2) if not mask >> p & 1)
        provisional = (a, b, 0)
        ymask, _ = self._x_form(mask & ~(1 << a), provisional)
        return a, b, ymask

    def _advance(self, state: ReduceState):
        """Follow free moves; returns (state, action, constant for the pending query)."""
        t = self.tree
        node, placement, coset = state.node, state.placement, state.coset
        while True:
            mask = int(t.masks[node])
            if mask == 0:
                return ReduceState(node, placement, coset), Output(int(t.labels[node])), 0
            if placement is None and mask != self.full:
                placement = self._place(mask)
                node = int(t.child0[node])  # answer is 0 by the choice of y
                continue
            if placement is None:
                xm, const = (1 << self.n) - 1, 1  # y xor not-y = 1
            else:
                xm, const = self._x_form(mask, placement)
            known = const if xm == 0 else coset.value_of(xm)
            if xm != 0 and known is not None:
                known ^= const
            if known is not None:
                node = int(t.child1[node] if known else t.child0[node])
                continue
            return ReduceState(node, placement, coset), Query(xm), const

    def decide(self, state: ReduceState):
        return self._advance(state)[1]

    def update(self, state: ReduceState, mask: int, answer: int):
        st, act, const = self._advance(state)
        if not isinstance(act, Query) or act.mask != mask:
            raise ValueError("update does not match the pending query")
        t = self.tree
        child = int(t.child1[st.node] if answer ^ const else t.child0[st.node])
        return ReduceState(child, st.placement, st.coset.insert(mask, answer))


def thr_reduce(tree: ParityDecisionTree, n: int, k: int, check: bool = True) -> ThresholdReduction:
    """Strategy for THR_n^k using at most depth(tree) - 1 queries.

    ``tree`` must compute THR_{n+2}^{k+1}; with ``check`` it is verified
    first (exhaustively when the table fits in memory, otherwise leaf-wise).
    """
    if tree.n != n + 2:
        raise TreeError(f"expected a tree over {n + 2} variables, got {tree.n}")
    if tree.depth() < 1:
        raise TreeError("tree must have depth at least 1")
    if check:
        target = build_named("thr", n + 2, k + 1)
        rep = verify_tree(tree, target)
        if not rep.ok:
            raise TreeError(f"tree does not compute THR_{n + 2}^{k + 1} (input {rep.witness})")
    return ThresholdReduction(tree, n, k)


def named_strategy(name: str, n: int | None = None, k: int | None = None) -> Strategy:
    name = name.lower()
    if name == "maj":
        return maj_strategy(n)
    if name == "rmaj":
        return rmaj_strategy(k)
    if name == "thr2":
        return thr2_strategy(n)
    if name == "thr3":
        return thr3_strategy(n)
    raise ValueError(f"unknown strategy {name!r}")


def strategy_target(name: str, n: int | None = None, k: int | None = None):
    """The function a named strategy computes (table or implicit rule)."""
    from .core import N_MAX, ImplicitFunction, rmaj_values

    name = name.lower()
    if name == "maj":
        return build_named("maj", n)
    if name == "thr2":
        return build_named("thr", n, 2)
    if name == "thr3":
        return build_named("thr", n, 3)
    if name == "rmaj":
        if 3**k <= N_MAX:
            return build_named("rmaj", k)
        return ImplicitFunction(3**k, lambda xs: rmaj_values(xs, k), f"rmaj:{k}")
    raise ValueError(f"unknown strategy {name!r}")


def incumbent_for(f: BooleanFunction) -> Strategy | None:
    """Known upper-bound strategy for a named function, if any."""
    if not f.name:
        return None
    from .core import parse_family

    fam, params = parse_family(f.name)
    if fam == "maj":
        return maj_strategy(params[0])
    if fam == "rmaj":
        return rmaj_strategy(params[0])
    if fam == "thr":
        n, k = params
        if k == 2 and n % 2 == 1 and n >= 3:
            return thr2_strategy(n)
        if k == 3 and n % 4 == 2 and n >= 6:
            return thr3_strategy(n)
        if 2 * k >= n and k == (n + 1) // 2:
            return maj_strategy(n)
    return None
