"""Truth tables, named families, GF(2) cosets and small numeric helpers.

Index convention: an assignment x = (x_1, ..., x_n) lives at table index
``sum(x_i << (i - 1))``, so x_1 is the least significant bit. A table entry
is 1 exactly when f(x) = -1 ("true").
"""
from __future__ import annotations

import hashlib
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels

N_MAX = int(os.environ.get("PDTLAB_N_MAX", "24"))
INFINITY = math.inf

FAMILIES = ("maj", "thr", "rmaj", "and", "or", "parity", "ip", "const", "random")


class FunctionError(ValueError):
    """Raised for malformed function descriptions or files."""


# ---------------------------------------------------------------------------
# numeric helpers
# ---------------------------------------------------------------------------


def ones_in_binary(m: int) -> int:
    if m < 0:
        raise ValueError("ones_in_binary expects a nonnegative integer")
    return bin(m).count("1")


def nu2(value: int):
    """2-adic valuation; ``INFINITY`` for 0."""
    value = int(value)
    if value == 0:
        return INFINITY
    return (value & -value).bit_length() - 1


def index_of(bits: Sequence[int]) -> int:
    """Table index of the assignment ``bits = (x_1, ..., x_n)``."""
    idx = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"assignment entries must be 0/1, got {b!r}")
        idx |= b << i
    return idx


def bits_of(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(n))


# ---------------------------------------------------------------------------
# BooleanFunction
# ---------------------------------------------------------------------------


class BooleanFunction:
    """f: {0,1}^n -> {-1, 1} stored as a read-only 0/1 table (1 means -1)."""

    __slots__ = ("n", "table", "name")

    def __init__(self, n: int, table, name: str | None = None):
        if not 0 <= n <= N_MAX:
            raise FunctionError(f"n={n} outside [0, {N_MAX}]")
        arr = np.ascontiguousarray(table, dtype=np.uint8)
        if arr.shape != (1 << n,):
            raise FunctionError(f"table must have exactly 2^{n} entries, got {arr.shape}")
        if arr.size and arr.max() > 1:
            raise FunctionError("table entries must be 0 or 1")
        if arr.base is not None or arr.flags.writeable:
            arr = arr.copy()
        arr.flags.writeable = False
        self.n = n
        self.table = arr
        self.name = name

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[tuple[int, ...]], int], name=None):
        """Build from ``fn(bits) -> +-1``."""
        table = np.fromiter(
            (fn(bits_of(i, n)) == -1 for i in range(1 << n)), dtype=np.uint8, count=1 << n
        )
        return cls(n, table, name)

    @classmethod
    def from_signs(cls, n: int, signs, name=None):
        signs = np.asarray(signs)
        return cls(n, (signs == -1).astype(np.uint8), name)

    def __call__(self, x) -> int:
        return eval_fn(self, x)

    def values(self, xs) -> np.ndarray:
        """+-1 values (int8) at an array of table indices."""
        return (1 - 2 * self.table[np.asarray(xs, dtype=np.int64)].astype(np.int8)).astype(np.int8)

    def signs(self) -> np.ndarray:
        return 1 - 2 * self.table.astype(np.int64)

    def is_constant(self) -> bool:
        return bool(self.table.min() == self.table.max())

    def ones(self) -> int:
        """Number of inputs mapped to -1."""
        return int(self.table.sum(dtype=np.int64))

    def packed(self) -> bytes:
        return np.packbits(self.table, bitorder="little").tobytes()

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.packed()))

    def __repr__(self):
        label = self.name or "table"
        return f"BooleanFunction(n={self.n}, {label})"


class ImplicitFunction:
    """Function given by a vectorised rule instead of a table.

    Used for instances with more than ``N_MAX`` variables (RMAJ_3 has 27),
    where only leaf-wise verification is possible.
    """

    def __init__(self, n: int, rule: Callable[[np.ndarray], np.ndarray], name: str | None = None):
        self.n = n
        self._rule = rule
        self.name = name

    def values(self, xs) -> np.ndarray:
        return np.asarray(self._rule(np.asarray(xs, dtype=np.int64)), dtype=np.int8)

    def __call__(self, x) -> int:
        if not isinstance(x, (int, np.integer)):
            x = index_of(x)
        return int(self.values(np.array([x]))[0])

    def __repr__(self):
        return f"ImplicitFunction(n={self.n}, {self.name})"


def eval_fn(f, x) -> int:
    """Value of f at x, where x is a table index or a bit sequence."""
    if not isinstance(x, (int, np.integer)):
        if len(x) != f.n:
            raise ValueError(f"assignment has {len(x)} bits, expected {f.n}")
        x = index_of(x)
    if not 0 <= x < (1 << f.n):
        raise ValueError(f"assignment index {x} does not fit in {f.n} bits")
    if isinstance(f, BooleanFunction):
        return -1 if f.table[x] else 1
    return f(int(x))


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------


def _weights(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)


def threshold_values(xs: np.ndarray, k: int) -> np.ndarray:
    return np.where(np.bitwise_count(xs) >= k, -1, 1).astype(np.int8)


def rmaj_values(xs: np.ndarray, depth: int) -> np.ndarray:
    """Recursive majority of ternary depth ``depth`` as +-1 values.

    Variables 3j, 3j+1, 3j+2 (0-based) feed the j-th gate of the next level.
    """
    bits = kernels.rmaj_bits(np.ascontiguousarray(xs, dtype=np.int64), depth)
    return (1 - 2 * bits).astype(np.int8)


def build_named(family: str, *params: int) -> BooleanFunction:
    """Truth table of a named family.

    ``maj(n)``, ``thr(n, k)``, ``rmaj(k)`` on 3^k variables, ``and(n)``,
    ``or(n)``, ``parity(n)``, ``ip(2m)``, ``const(n, +-1)``,
    ``random(n, seed)``.
    """
    fam = family.lower()
    p = [int(v) for v in params]

    def need(count):
        if len(p) != count:
            raise FunctionError(f"{fam} takes {count} parameter(s), got {len(p)}")

    if fam == "maj":
        need(1)
        n = p[0]
        _check_n(n)
        table = (_weights(n) * 2 >= n).astype(np.uint8)
        return BooleanFunction(n, table, f"maj:{n}")
    if fam == "thr":
        need(2)
        n, k = p
        _check_n(n)
        table = (_weights(n) >= k).astype(np.uint8)
        return BooleanFunction(n, table, f"thr:{n},{k}")
    if fam == "rmaj":
        need(1)
        k = p[0]
        if k < 0:
            raise FunctionError("rmaj depth must be nonnegative")
        n = 3**k
        if n > N_MAX:
            raise FunctionError(f"rmaj:{k} has {n} variables, more than N_MAX={N_MAX}")
        table = (rmaj_values(np.arange(1 << n, dtype=np.int64), k) == -1).astype(np.uint8)
        return BooleanFunction(n, table, f"rmaj:{k}")
    if fam == "and":
        need(1)
        n = p[0]
        _check_n(n)
        table = np.zeros(1 << n, dtype=np.uint8)
        table[-1] = 1
        return BooleanFunction(n, table, f"and:{n}")
    if fam == "or":
        need(1)
        n = p[0]
        _check_n(n)
        table = np.ones(1 << n, dtype=np.uint8)
        table[0] = 0
        return BooleanFunction(n, table, f"or:{n}")
    if fam == "parity":
        need(1)
        n = p[0]
        _check_n(n)
        return BooleanFunction(n, (_weights(n) & 1).astype(np.uint8), f"parity:{n}")
    if fam == "ip":
        need(1)
        n = p[0]
        if n % 2:
            raise FunctionError("ip takes an even number of variables")
        _check_n(n)
        m = n // 2
        xs = np.arange(1 << n, dtype=np.int64)
        table = (np.bitwise_count(xs & (xs >> m) & ((1 << m) - 1)) & 1).astype(np.uint8)
        return BooleanFunction(n, table, f"ip:{n}")
    if fam == "const":
        need(2)
        n, v = p
        _check_n(n)
        if v not in (-1, 1):
            raise FunctionError("const value must be -1 or 1")
        return BooleanFunction(n, np.full(1 << n, int(v == -1), dtype=np.uint8), f"const:{n},{v}")
    if fam == "random":
        need(2)
        n, seed = p
        _check_n(n)
        rng = np.random.default_rng(seed)
        return BooleanFunction(n, rng.integers(0, 2, 1 << n, dtype=np.uint8), f"random:{n},{seed}")
    raise FunctionError(f"unknown function family {family!r}; expected one of {FAMILIES}")


def _check_n(n: int):
    if not 0 <= n <= N_MAX:
        raise FunctionError(f"n={n} outside [0, {N_MAX}]")


_SPEC_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?::\s*([-+0-9,\s]*))?$")


def parse_family(text: str) -> tuple[str, tuple[int, ...]]:
    """Split ``"thr:10,3"`` into ``("thr", (10, 3))``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise FunctionError(f"cannot parse function description {text!r}")
    fam = m.group(1).lower()
    raw = m.group(2) or ""
    try:
        params = tuple(int(v) for v in raw.split(",") if v.strip())
    except ValueError as exc:
        raise FunctionError(f"bad parameters in {text!r}") from exc
    return fam, params


def from_description(text: str) -> BooleanFunction:
    fam, params = parse_family(text)
    return build_named(fam, *params)


def function_id(f: BooleanFunction) -> str:
    """Family tag when known, otherwise a hash of the PDTTT content."""
    if f.name:
        return f.name
    digest = hashlib.sha256(dumps_truth_table(f).encode()).hexdigest()
    return "sha256:" + digest[:16]


# ---------------------------------------------------------------------------
# PDTTT truth-table files
# ---------------------------------------------------------------------------

PDTTT_MAGIC = "PDTTT 1"


def dumps_truth_table(f: BooleanFunction) -> str:
    bits = f.table
    pad = (-bits.size) % 4
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    nibbles = bits.reshape(-1, 4) @ np.array([1, 2, 4, 8], dtype=np.int64)
    hexstr = "".join("0123456789abcdef"[v] for v in nibbles)
    return f"{PDTTT_MAGIC}\nn={f.n}\n{hexstr}\n"


def loads_truth_table(text: str, name: str | None = None) -> BooleanFunction:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) != 3 or lines[0] != PDTTT_MAGIC:
        raise FunctionError("not a PDTTT 1 file")
    m = re.fullmatch(r"n=(\d+)", lines[1])
    if not m:
        raise FunctionError(f"bad header line {lines[1]!r}")
    n = int(m.group(1))
    _check_n(n)
    hexstr = lines[2]
    expected = -(-(1 << n) // 4)
    if len(hexstr) != expected:
        raise FunctionError(f"expected {expected} hex characters, got {len(hexstr)}")
    try:
        nibbles = np.array([int(c, 16) for c in hexstr], dtype=np.int64)
    except ValueError as exc:
        raise FunctionError("non-hex character in table") from exc
    bits = ((nibbles[:, None] >> np.arange(4)) & 1).astype(np.uint8).reshape(-1)
    if bits[1 << n :].any():
        raise FunctionError("padding bits beyond 2^n must be zero")
    return BooleanFunction(n, bits[: 1 << n], name)


def read_truth_table(path) -> BooleanFunction:
    # unnamed on purpose: function_id() then falls back to the content hash
    return loads_truth_table(Path(path).read_text())


def write_truth_table(f: BooleanFunction, path):
    Path(path).write_text(dumps_truth_table(f))


# ---------------------------------------------------------------------------
# affine cosets over GF(2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dependent:
    """Result of inserting a query already determined by the coset."""

    forced: int


def _low(m: int) -> int:
    return (m & -m).bit_length() - 1


class Coset:
    """Solution set of a consistent system L_i(x) = b_i in reduced row echelon form.

    Rows are n-bit masks; the pivot of a row is its lowest set bit and no
    other row touches that bit. Rows are kept sorted by pivot.
    """

    __slots__ = ("n", "rows", "rhs")

    def __init__(self, n: int, rows: Iterable[int] = (), rhs: Iterable[int] = ()):
        self.n = n
        self.rows = tuple(rows)
        self.rhs = tuple(rhs)

    @classmethod
    def full(cls, n: int) -> "Coset":
        return cls(n)

    @classmethod
    def from_constraints(cls, n: int, constraints: Iterable[tuple[int, int]]):
        """Build from (mask, bit) pairs; ``None`` if they are contradictory."""
        c = cls(n)
        for mask, bit in constraints:
            nxt = c.insert(mask, bit)
            if isinstance(nxt, Dependent):
                if nxt.forced != bit:
                    return None
                continue
            c = nxt
        return c

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return self.n - len(self.rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_low(r) for r in self.rows)

    def reduce(self, mask: int) -> tuple[int, int]:
        """Reduce ``mask`` by the rows; returns (remainder, rhs of used rows)."""
        b = 0
        for row, r in zip(self.rows, self.rhs):
            if mask >> _low(row) & 1:
                mask ^= row
                b ^= r
        return mask, b

    def insert(self, mask: int, bit: int):
        """Add L(x) = bit; returns the extended Coset or ``Dependent(forced)``."""
        if mask >> self.n:
            raise ValueError(f"mask {mask:#x} does not fit in {self.n} bits")
        rem, forced = self.reduce(mask)
        if rem == 0:
            return Dependent(forced)
        bit ^= forced
        p = _low(rem)
        rows = []
        rhs = []
        for row, r in zip(self.rows, self.rhs):
            if row >> p & 1:
                row ^= rem
                r ^= bit
            rows.append(row)
            rhs.append(r)
        k = 0
        while k < len(rows) and _low(rows[k]) < p:
            k += 1
        rows.insert(k, rem)
        rhs.insert(k, bit)
        return Coset(self.n, rows, rhs)

    def value_of(self, mask: int):
        """The forced parity of ``mask`` on this coset, or ``None``."""
        rem, b = self.reduce(mask)
        return b if rem == 0 else None

    def contains(self, x: int) -> bool:
        return all(
            (bin(row & x).count("1") & 1) == r for row, r in zip(self.rows, self.rhs)
        )

    def parametrization(self) -> "Parametrization":
        pivots = self.pivots
        free = tuple(i for i in range(self.n) if i not in set(pivots))
        return Parametrization(self.n, free, pivots, self.rows, self.rhs)

    def points(self) -> np.ndarray:
        return self.parametrization().points()

    def __eq__(self, other):
        return (
            isinstance(other, Coset)
            and self.n == other.n
            and self.rows == other.rows
            and self.rhs == other.rhs
        )

    def __hash__(self):
        return hash((self.n, self.rows, self.rhs))

    def __repr__(self):
        return f"Coset(n={self.n}, rank={self.rank})"


def coset_insert(c: Coset, mask: int, bit: int):
    return c.insert(mask, bit)


@dataclass(frozen=True)
class Parametrization:
    """t in {0,1}^d -> x in the coset; free coordinates carry t in order."""

    n: int
    free: tuple[int, ...]
    pivots: tuple[int, ...]
    rows: tuple[int, ...]
    rhs: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.free)

    def __call__(self, t: int) -> int:
        x = 0
        for j, v in enumerate(self.free):
            if t >> j & 1:
                x |= 1 << v
        base = x
        for p, row, r in zip(self.pivots, self.rows, self.rhs):
            if (bin(row & base).count("1") & 1) ^ r:
                x |= 1 << p
        return x

    def points(self) -> np.ndarray:
        """All coset points, ordered by parameter index t."""
        return kernels.coset_points(
            np.array(self.free, dtype=np.int64),
            np.array(self.pivots, dtype=np.int64),
            np.array(self.rows, dtype=np.int64),
            np.array(self.rhs, dtype=np.int64),
        )

    def lift_mask(self, tmask: int) -> int:
        """Original-space mask agreeing with the t-parity ``tmask`` on every coset point."""
        return sum(1 << self.free[j] for j in range(self.dim) if tmask >> j & 1)


def restrict(f: BooleanFunction, c: Coset) -> tuple[BooleanFunction, Parametrization]:
    """Subfunction g(t) = f(param(t)) on the coset's free coordinates."""
    if c is None:
        raise FunctionError("cannot restrict to an empty coset")
    if c.n != f.n:
        raise FunctionError(f"coset over {c.n} variables, function over {f.n}")
    param = c.parametrization()
    g = BooleanFunction(param.dim, f.table[param.points()])
    return g, param
