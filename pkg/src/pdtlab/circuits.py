"""XOR/AND/NOT circuits and their simulation by parity queries.

Netlist text format, one statement per line (``#`` starts a comment)::

    INPUT 1
    INPUT 2
    4 = XOR 1 2
    5 = AND 4 2
    OUTPUT 5

Input identifiers are the variable numbers 1..n; gate identifiers are any
other integers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import BooleanFunction, Coset
from .pdt import Output, Query, Strategy

OPS = {"NOT": 1, "XOR": 2, "AND": 2}


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    op: str  # INPUT, NOT, XOR, AND
    args: tuple[int, ...]  # gate indices, or (variable index,) for INPUT


@dataclass(frozen=True)
class AffineForm:
    """xor of the variables in ``mask`` plus ``const``."""

    mask: int
    const: int

    def __xor__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(self.mask ^ other.mask, self.const ^ other.const)

    def negate(self) -> "AffineForm":
        return AffineForm(self.mask, self.const ^ 1)

    @property
    def is_constant(self) -> bool:
        return self.mask == 0


ZERO = AffineForm(0, 0)


class XorAndCircuit:
    """Gates in topological order; gate ``i`` only reads gates ``< i``."""

    def __init__(self, n: int, gates, output: int, ids=None):
        self.n = n
        self.gates = tuple(gates)
        self.output = output
        self.ids = tuple(ids) if ids is not None else tuple(range(len(self.gates)))
        for i, g in enumerate(self.gates):
            if g.op == "INPUT":
                if not 0 <= g.args[0] < n:
                    raise NetlistError(f"input variable {g.args[0] + 1} outside 1..{n}")
            elif g.op not in OPS or len(g.args) != OPS[g.op]:
                raise NetlistError(f"bad gate {g}")
            elif any(not 0 <= a < i for a in g.args):
                raise NetlistError(f"gate {self.ids[i]} reads a later or unknown gate")
        if not 0 <= output < len(self.gates):
            raise NetlistError("output gate out of range")

    def and_count(self) -> int:
        return sum(g.op == "AND" for g in self.gates)

    def eval_all(self) -> np.ndarray:
        """Output bit on every assignment index."""
        xs = np.arange(1 << self.n, dtype=np.int64)
        vals: list[np.ndarray] = []
        for g in self.gates:
            if g.op == "INPUT":
                vals.append(((xs >> g.args[0]) & 1).astype(np.uint8))
            elif g.op == "NOT":
                vals.append(vals[g.args[0]] ^ 1)
            elif g.op == "XOR":
                vals.append(vals[g.args[0]] ^ vals[g.args[1]])
            else:
                vals.append(vals[g.args[0]] & vals[g.args[1]])
        return vals[self.output]

    def to_function(self, name: str | None = None) -> BooleanFunction:
        return BooleanFunction(self.n, self.eval_all(), name)

    def __repr__(self):
        return f"XorAndCircuit(n={self.n}, gates={len(self.gates)}, and={self.and_count()})"


def eval_circuit(c: XorAndCircuit, x: int) -> int:
    """Output bit (1 = true) on assignment index ``x``."""
    vals: list[int] = []
    for g in c.gates:
        if g.op == "INPUT":
            vals.append(x >> g.args[0] & 1)
        elif g.op == "NOT":
            vals.append(vals[g.args[0]] ^ 1)
        elif g.op == "XOR":
            vals.append(vals[g.args[0]] ^ vals[g.args[1]])
        else:
            vals.append(vals[g.args[0]] & vals[g.args[1]])
    return vals[c.output]


def and_count(c: XorAndCircuit) -> int:
    return c.and_count()


# ---------------------------------------------------------------------------
# netlist parsing
# ---------------------------------------------------------------------------

_INPUT = re.compile(r"^INPUT\s+(-?\d+)$")
_GATE = re.compile(r"^(-?\d+)\s*=\s*([A-Z]+)((?:\s+-?\d+)*)$")
_OUTPUT = re.compile(r"^OUTPUT\s+(-?\d+)$")


def parse_circuit(text: str) -> XorAndCircuit:
    inputs: list[int] = []
    defs: dict[int, tuple[str, tuple[int, ...]]] = {}
    output = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        up = line.upper()
        if m := _INPUT.match(up):
            i = int(m.group(1))
            if i < 1:
                raise NetlistError(f"line {lineno}: inputs are numbered from 1")
            if i in defs:
                raise NetlistError(f"line {lineno}: identifier {i} defined twice")
            inputs.append(i)
            defs[i] = ("INPUT", ())
        elif m := _GATE.match(up):
            gid, op = int(m.group(1)), m.group(2)
            args = tuple(int(a) for a in m.group(3).split())
            if op not in OPS:
                raise NetlistError(f"line {lineno}: unknown gate type {op}")
            if len(args) != OPS[op]:
                raise NetlistError(f"line {lineno}: {op} takes {OPS[op]} argument(s)")
            if gid in defs:
                raise NetlistError(f"line {lineno}: identifier {gid} defined twice")
            defs[gid] = (op, args)
        elif m := _OUTPUT.match(up):
            if output is not None:
                raise NetlistError(f"line {lineno}: more than one OUTPUT")
            output = int(m.group(1))
        else:
            raise NetlistError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if output is None:
        raise NetlistError("missing OUTPUT")
    if not inputs:
        raise NetlistError("no INPUT lines")
    n = max(inputs)
    for gid, (op, args) in defs.items():
        for a in args:
            if a not in defs:
                raise NetlistError(f"gate {gid} reads undefined identifier {a}")
    if output not in defs:
        raise NetlistError(f"OUTPUT refers to undefined identifier {output}")

    # topological order, inputs first in variable order
    order: list[int] = []
    state: dict[int, int] = {}

    def visit(root):
        stack = [(root, False)]
        while stack:
            gid, done = stack.pop()
            if done:
                state[gid] = 2
                order.append(gid)
                continue
            if state.get(gid) == 2:
                continue
            if state.get(gid) == 1:
                raise NetlistError(f"cycle through identifier {gid}")
            state[gid] = 1
            stack.append((gid, True))
            for a in reversed(defs[gid][1]):
                if state.get(a) == 1:
                    raise NetlistError(f"cycle through identifier {a}")
                if state.get(a) != 2:
                    stack.append((a, False))

    for i in sorted(inputs):
        visit(i)
    for gid in defs:
        visit(gid)
    index = {gid: k for k, gid in enumerate(order)}
    gates = []
    for gid in order:
        op, args = defs[gid]
        if op == "INPUT":
            gates.append(Gate("INPUT", (gid - 1,)))
        else:
            gates.append(Gate(op, tuple(index[a] for a in args)))
    return XorAndCircuit(n, gates, index[output], order)


def dumps_circuit(c: XorAndCircuit) -> str:
    lines = []
    ident = {}
    next_id = c.n + 1
    for i, g in enumerate(c.gates):
        if g.op == "INPUT":
            ident[i] = g.args[0] + 1
            lines.append(f"INPUT {ident[i]}")
        else:
            ident[i] = next_id
            next_id += 1
            args = " ".join(str(ident[a]) for a in g.args)
            lines.append(f"{ident[i]} = {g.op} {args}")
    lines.append(f"OUTPUT {ident[c.output]}")
    return "\n".join(lines) + "\n"


def read_circuit(path) -> XorAndCircuit:
    return parse_circuit(Path(path).read_text())


def random_circuit(n: int, and_gates: int, rng: np.random.Generator, xor_gates: int | None = None):
    """Random netlist with exactly ``and_gates`` AND gates over n inputs."""
    if xor_gates is None:
        xor_gates = int(rng.integers(0, 2 * n + 1))
    gates = [Gate("INPUT", (i,)) for i in range(n)]
    ops = ["AND"] * and_gates + ["XOR"] * xor_gates + ["NOT"] * int(rng.integers(0, 3))
    rng.shuffle(ops)
    for op in ops:
        k = len(gates)
        if op == "NOT":
            gates.append(Gate("NOT", (int(rng.integers(0, k)),)))
        else:
            a, b = (int(v) for v in rng.choice(k, size=2, replace=k < 2))
            gates.append(Gate(op, (a, b)))
    return XorAndCircuit(n, gates, len(gates) - 1)


# ---------------------------------------------------------------------------
# simulation by parity queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitState:
    resolved: tuple[tuple[int, AffineForm], ...]  # AND gates replaced by forms
    coset: Coset
    answer: int | None = None


class CircuitStrategy(Strategy):
    """At most and_count + 1 parity queries.

    Take the first AND gate whose inputs are both affine. A constant input
    (including one implied by earlier answers) settles it for free;
    otherwise one input is queried, and the gate becomes 0 or the other
    input. When the output is affine, one last query reads it.
    """

    def __init__(self, circuit: XorAndCircuit, pick: str = "smaller"):
        if pick not in ("smaller", "left", "right"):
            raise ValueError("pick must be 'smaller', 'left' or 'right'")
        self.circuit = circuit
        self.n = circuit.n
        self.pick = pick
        self.budget = circuit.and_count() + 1
        self.name = "circuit"

    def start(self):
        return CircuitState((), Coset.full(self.n))

    def _known(self, form: AffineForm, coset: Coset):
        if form.mask == 0:
            return form.const
        v = coset.value_of(form.mask)
        return None if v is None else v ^ form.const

    def _forms(self, state: CircuitState):
        """Propagate affine forms; returns (forms, index of pending AND or None)."""
        c = self.circuit
        fixed = dict(state.resolved)
        forms: list[AffineForm | None] = []
        pending = None
        for i, g in enumerate(c.gates):
            if g.op == "INPUT":
                forms.append(AffineForm(1 << g.args[0], 0))
            elif g.op == "NOT":
                f = forms[g.args[0]]
                forms.append(None if f is None else f.negate())
            elif g.op == "XOR":
                a, b = forms[g.args[0]], forms[g.args[1]]
                forms.append(None if a is None or b is None else a ^ b)
            elif i in fixed:
                forms.append(fixed[i])
            else:
                a, b = forms[g.args[0]], forms[g.args[1]]
                if a is None or b is None:
                    forms.append(None)
                    continue
                ka, kb = self._known(a, state.coset), self._known(b, state.coset)
                if ka == 0 or kb == 0:
                    forms.append(ZERO)
                elif ka == 1:
                    forms.append(b)
                elif kb == 1:
                    forms.append(a)
                else:
                    forms.append(None)
                    if pending is None:
                        pending = i
        return forms, pending

    def _choice(self, a: AffineForm, b: AffineForm) -> int:
        if self.pick == "left":
            return 0
        if self.pick == "right":
            return 1
        return 0 if a.mask <= b.mask else 1

    def _plan(self, state: CircuitState):
        forms, pending = self._forms(state)
        out = forms[self.circuit.output]
        if out is not None:
            known = self._known(out, state.coset)
            if known is None and state.answer is not None:
                known = state.answer ^ out.const
            if known is not None:
                return Output(-1 if known else 1), None
            return Query(out.mask), ("out", out)
        g = self.circuit.gates[pending]
        a, b = forms[g.args[0]], forms[g.args[1]]
        side = self._choice(a, b)
        asked, other = (a, b) if side == 0 else (b, a)
        return Query(asked.mask), ("and", pending, asked, other)

    def decide(self, state: CircuitState):
        return self._plan(state)[0]

    def update(self, state: CircuitState, mask: int, answer: int):
        act, info = self._plan(state)
        if not isinstance(act, Query) or act.mask != mask:
            raise ValueError("update does not match the pending query")
        coset = state.coset.insert(mask, answer)
        if info[0] == "out":
            return CircuitState(state.resolved, coset, answer)
        _, gate, asked, other = info
        value = answer ^ asked.const
        form = other if value else ZERO
        return CircuitState(state.resolved + ((gate, form),), coset)


def circuit_to_strategy(c: XorAndCircuit, pick: str = "smaller") -> CircuitStrategy:
    return CircuitStrategy(c, pick)


MAJ3_NETLIST = """\
INPUT 1
INPUT 2
INPUT 3
4 = XOR 1 2
5 = XOR 2 3
6 = AND 4 5
7 = XOR 6 2
OUTPUT 7
"""
