"""Seeded property suites over every module.

Each suite draws its cases from its own generator, derived from the global
seed and the suite name, so a fixed seed reproduces identical case lists
regardless of which suites run.
"""
from __future__ import annotations

import hashlib
import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .circuits import circuit_to_strategy, random_circuit
from .core import (
    BooleanFunction,
    Coset,
    Dependent,
    bits_of,
    build_named,
    index_of,
    restrict,
)
from .pdt import (
    QueryOracle,
    check_strategy,
    materialize,
    random_correct_tree,
    random_tree,
    run_strategy,
    verify_tree,
)
from .solver import (
    NotApplicable,
    adversary_refute,
    bound_profile,
    exact_depth,
    naive_depth,
    parity_certificate,
)
from .spectral import deg2, granularity, inverse_wht, sparsity, wht
from .strategies import maj_strategy, rmaj_strategy, thr2_strategy, thr3_strategy, thr_reduce

DEFAULT_SEED = 20240611


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    case_log: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures and self.cases > 0

    @property
    def digest(self) -> str:
        h = hashlib.sha256("\n".join(self.case_log).encode()).hexdigest()
        return h[:12]

    def case(self, label: str):
        self.cases += 1
        self.case_log.append(label)

    def check(self, cond: bool, label: str):
        if not cond:
            self.failures.append(label)

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "cases": self.cases,
            "failures": self.failures[:10],
            "ok": self.ok,
            "case_digest": self.digest,
            "seconds": round(self.seconds, 3),
        }


def suite_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


def random_function(n: int, rng: np.random.Generator) -> BooleanFunction:
    return BooleanFunction(n, rng.integers(0, 2, 1 << n, dtype=np.uint8))


def random_coset(n: int, rng: np.random.Generator, max_rank: int | None = None) -> Coset:
    c = Coset.full(n)
    for _ in range(int(rng.integers(0, (max_rank if max_rank is not None else n) + 1))):
        r = c.insert(int(rng.integers(1, 1 << n)), int(rng.integers(0, 2)))
        if not isinstance(r, Dependent):
            c = r
    return c


def _is_rref(c: Coset) -> bool:
    piv = c.pivots
    if list(piv) != sorted(set(piv)):
        return False
    for i, row in enumerate(c.rows):
        if (row & -row).bit_length() - 1 != piv[i]:
            return False
        for j, p in enumerate(piv):
            if j != i and row >> p & 1:
                return False
    return True


# ---------------------------------------------------------------------------
# core
# ---------------------------------------------------------------------------


def suite_core(seed, cases, max_n) -> SuiteResult:
    res = SuiteResult("core")
    rng = suite_rng(seed, res.name)
    for n in range(1, min(max_n, 12) + 1):
        res.case(f"maj n={n}")
        f = build_named("maj", n)
        xs = np.arange(1 << n)
        res.check(np.array_equal(f.table == 1, 2 * np.bitwise_count(xs) >= n), f"maj table n={n}")
    for i in range(cases):
        n = int(rng.integers(1, min(max_n, 10) + 1))
        f = random_function(n, rng)
        c = random_coset(n, rng)
        res.case(f"restrict n={n} rank={c.rank} rows={c.rows} rhs={c.rhs}")
        g, param = restrict(f, c)
        pts = param.points()
        res.check(g.n == c.dim and np.array_equal(g.table, f.table[pts]), f"restrict/lift case {i}")
        res.check(all(c.contains(int(x)) for x in pts[:64]), f"points in coset case {i}")
        m, b = int(rng.integers(1, 1 << n)), int(rng.integers(0, 2))
        r = c.insert(m, b)
        if isinstance(r, Dependent):
            res.check(c.value_of(m) == r.forced, f"dependent forced bit case {i}")
        else:
            res.check(r.rank == c.rank + 1 and _is_rref(r), f"insert keeps rref case {i}")
        x = int(rng.integers(0, 1 << n))
        res.check(index_of(bits_of(x, n)) == x, f"index roundtrip case {i}")
    return res


# ---------------------------------------------------------------------------
# spectral
# ---------------------------------------------------------------------------


def suite_spectral(seed, cases, max_n) -> SuiteResult:
    res = SuiteResult("spectral")
    rng = suite_rng(seed, res.name)
    hi = max(2, min(max_n, 16))
    for i in range(cases):
        n = int(rng.integers(2, hi + 1))
        f = random_function(n, rng)
        res.case(f"n={n} crc={zlib.crc32(f.table.tobytes())}")
        s = wht(f)
        res.check(s.parseval() == 4**n, f"parseval case {i}")
        res.check(np.array_equal(inverse_wht(s), f.signs()), f"wht roundtrip case {i}")
        spar, gran, d2 = sparsity(s), granularity(s), deg2(f)
        lg = math.log2(spar)
        res.check(math.ceil(lg / 2 - 1e-12) <= gran, f"sparsity bound <= gran case {i}")
        if spar >= 2:
            res.check(gran <= lg - 1 + 1e-12, f"gran <= log spar - 1 case {i}")
            res.check(d2 <= lg + 1e-12, f"deg2 <= log spar case {i}")
        if not f.is_constant():
            res.check(d2 <= gran + 1, f"deg2 <= gran + 1 case {i}")
        # fixing the last variable
        half = 1 << (n - 1)
        f0 = BooleanFunction(n - 1, f.table[:half])
        f1 = BooleanFunction(n - 1, f.table[half:])
        F = s.coeffs
        ok = np.array_equal(2 * wht(f0).coeffs, F[:half] + F[half:]) and np.array_equal(
            2 * wht(f1).coeffs, F[:half] - F[half:]
        )
        res.check(ok, f"subfunction identities case {i}")
        if n <= 10:
            g, _ = restrict(f, random_coset(n, rng))
            res.check(granularity(wht(g)) <= gran, f"gran monotone under restriction case {i}")
    return res


# ---------------------------------------------------------------------------
# pdt
# ---------------------------------------------------------------------------


def suite_pdt(seed, cases, max_n) -> SuiteResult:
    res = SuiteResult("pdt")
    rng = suite_rng(seed, res.name)
    for i in range(cases):
        n = int(rng.integers(1, min(max_n, 10) + 1))
        t = random_tree(n, int(rng.integers(0, n + 1)), rng)
        f = random_function(n, rng) if rng.random() < 0.5 else BooleanFunction(n, (t.eval_all()[0] == -1).astype(np.uint8))
        res.case(f"n={n} tree={t.size} crc={zlib.crc32(f.table.tobytes())}")
        a = verify_tree(t, f, "exhaustive")
        b = verify_tree(t, f, "leafwise")
        res.check(a.ok == b.ok, f"verify modes agree case {i}")
        res.check(t.leaf_count() <= 2 ** t.depth(), f"leaf count case {i}")
    for n in range(1, min(max_n, 12) + 1):
        s = maj_strategy(n)
        res.case(f"materialize maj n={n}")
        tree = materialize(s, n)
        used = max(run_strategy(s, QueryOracle(x, n))[1] for x in range(1 << n))
        res.check(tree.depth() == used, f"materialized depth = max queries n={n}")
    return res


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


def suite_solver(seed, cases, max_n, exhaustive_functions=False) -> SuiteResult:
    res = SuiteResult("solver")
    rng = suite_rng(seed, res.name)
    hi = max(2, min(max_n, 5))
    for i in range(cases):
        n = int(rng.integers(2, hi + 1))
        f = random_function(n, rng)
        res.case(f"n={n} crc={zlib.crc32(f.table.tobytes())}")
        rep = exact_depth(f, max_seconds=30)
        if not rep.is_exact:
            res.check(False, f"solver budget case {i}")
            continue
        d = rep.exact_depth
        prof = bound_profile(f, with_certificate=n <= 4)
        res.check(d >= prof.best_lower, f"depth >= bounds case {i}")
        res.check(rep.witness is not None and verify_tree(rep.witness, f).ok and rep.witness.depth() == d,
                  f"witness case {i}")
        if rep.witness is not None and not f.is_constant():
            res.check(isinstance(adversary_refute(f, rep.witness), NotApplicable), f"adversary on correct tree case {i}")
        if n <= 4:
            res.check(exact_depth(f, memo=False, incumbent=False).exact_depth == d, f"memo cross-check case {i}")
            g, _ = restrict(f, random_coset(n, rng))
            res.check(exact_depth(g).exact_depth <= d, f"restriction monotone case {i}")
    if exhaustive_functions and max_n >= 3:
        for code in range(256):
            f = BooleanFunction(3, np.array([(code >> j) & 1 for j in range(8)], dtype=np.uint8))
            res.case(f"all3 {code}")
            res.check(exact_depth(f).exact_depth == naive_depth(f), f"naive oracle function {code}")
    else:
        for i in range(min(cases, 32)):
            f = random_function(3, rng)
            res.case(f"naive crc={zlib.crc32(f.table.tobytes())}")
            res.check(exact_depth(f).exact_depth == naive_depth(f), f"naive oracle case {i}")
    for n in range(1, min(max_n, 6) + 1):
        res.case(f"certificate and/parity n={n}")
        res.check(parity_certificate(build_named("and", n)).value == n, f"C(AND_{n})")
        res.check(parity_certificate(build_named("parity", n)).value == 1, f"C(PARITY_{n})")
    return res


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


def suite_strategies(seed, cases, max_n) -> SuiteResult:
    res = SuiteResult("strategies")
    rng = suite_rng(seed, res.name)
    plans = [("maj", n, maj_strategy(n), build_named("maj", n)) for n in range(1, min(max_n, 14) + 1)]
    plans += [("thr2", n, thr2_strategy(n), build_named("thr", n, 2)) for n in range(3, min(max_n, 13) + 1, 2)]
    plans += [("thr3", n, thr3_strategy(n), build_named("thr", n, 3)) for n in (6, 10) if n <= max_n]
    plans += [("rmaj", 3**k, rmaj_strategy(k), build_named("rmaj", k)) for k in (1, 2) if 3**k <= max(max_n, 9)]
    for name, n, s, f in plans:
        res.case(f"{name} n={n}")
        chk = check_strategy(s, f, "exhaustive")
        res.check(chk.correct, f"{name}({n}) correct")
        res.check(chk.tight, f"{name}({n}) worst case {chk.worst_case} vs declared {chk.budget}")
        res.check(chk.dependent_queries == 0, f"{name}({n}) issued a dependent query")
    for i in range(cases):
        n = int(rng.integers(1, min(max_n, 6) + 1))
        k = int(rng.integers(1, n + 1))
        big = build_named("thr", n + 2, k + 1)
        t = random_correct_tree(big, rng)
        res.case(f"reduce n={n} k={k} size={t.size}")
        red = thr_reduce(t, n, k)
        chk = check_strategy(red, build_named("thr", n, k), "exhaustive")
        res.check(chk.correct and chk.worst_case <= t.depth() - 1, f"thr_reduce case {i} (n={n}, k={k})")
    return res


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------


def suite_circuits(seed, cases, max_n) -> SuiteResult:
    res = SuiteResult("circuits")
    rng = suite_rng(seed, res.name)
    for i in range(cases):
        n = int(rng.integers(1, min(max_n, 8) + 1))
        s = int(rng.integers(0, 7))
        c = random_circuit(n, s, rng)
        f = c.to_function()
        res.case(f"n={n} and={s} crc={zlib.crc32(f.table.tobytes())}")
        for pick in ("left", "right", "smaller"):
            chk = check_strategy(circuit_to_strategy(c, pick), f, "exhaustive")
            res.check(chk.correct and chk.worst_case <= c.and_count() + 1, f"circuit case {i} pick={pick}")
        if f.is_constant() and c.and_count() == 0:
            res.check(materialize(circuit_to_strategy(c), n).depth() == 0, f"constant circuit case {i}")
    return res


SUITES = {
    "core": suite_core,
    "spectral": suite_spectral,
    "pdt": suite_pdt,
    "solver": suite_solver,
    "strategies": suite_strategies,
    "circuits": suite_circuits,
}


def run_suites(seed: int = DEFAULT_SEED, cases: int = 40, max_n: int = 10, exhaustive_functions: bool = False,
               only=None) -> list[SuiteResult]:
    out = []
    for name, fn in SUITES.items():
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        if name == "solver":
            r = fn(seed, cases, max_n, exhaustive_functions)
        else:
            r = fn(seed, cases, max_n)
        r.seconds = time.perf_counter() - t0
        out.append(r)
    return out
