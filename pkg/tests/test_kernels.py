"""Both kernel variants against straightforward reference loops."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdtlab import kernels
from pdtlab.core import Coset
from pdtlab.pdt import materialize
from pdtlab.strategies import maj_strategy


def ref_wht(signs):
    n = signs.size
    return np.array(
        [sum(int(signs[x]) * (-1) ** bin(s & x).count("1") for x in range(n)) for s in range(n)],
        dtype=np.int64,
    )


def ref_mobius(bits):
    n = bits.size
    return np.array([sum(int(bits[y]) for y in range(n) if y & s == y) % 2 for s in range(n)], dtype=np.uint8)


@given(st.integers(0, 6), st.integers(0, 2**64 - 1))
def test_fwht_matches_definition(n, seed):
    r = np.random.default_rng(seed)
    signs = 1 - 2 * r.integers(0, 2, 1 << n).astype(np.int64)
    expected = ref_wht(signs)
    for fn in kernels.VARIANTS["fwht"]:
        assert np.array_equal(fn(signs.copy()), expected)


@given(st.integers(0, 6), st.integers(0, 2**64 - 1))
def test_mobius_matches_definition(n, seed):
    r = np.random.default_rng(seed)
    bits = r.integers(0, 2, 1 << n).astype(np.uint8)
    expected = ref_mobius(bits)
    for fn in kernels.VARIANTS["mobius"]:
        assert np.array_equal(fn(bits.copy()), expected)


def test_restrict_parity(variant, rng):
    fn = variant("restrict_parity")
    n = 6
    table = rng.integers(0, 2, 1 << n).astype(np.uint8)
    for mask in range(1, 1 << n):
        p = (mask & -mask).bit_length() - 1
        for bit in (0, 1):
            out = fn(table, mask, bit)
            assert out.size == 1 << (n - 1)
            for t in range(out.size):
                # re-insert the pivot coordinate and solve it from the constraint
                low = t & ((1 << p) - 1)
                x = low | ((t >> p) << (p + 1))
                if (bin(x & mask).count("1") & 1) != bit:
                    x |= 1 << p
                assert bin(x & mask).count("1") % 2 == bit
                assert out[t] == table[x]


def test_tree_eval_all(variant):
    fn = variant("tree_eval_all")
    t = materialize(maj_strategy(6), 6)
    out, depth = fn(t.masks, t.child0, t.child1, t.labels, 6)
    for x in range(64):
        v, d = 0, 0
        while t.masks[v]:
            v = t.child1[v] if bin(int(t.masks[v]) & x).count("1") % 2 else t.child0[v]
            d += 1
        assert out[x] == t.labels[v] and depth[x] == d


def test_coset_points(variant, rng):
    fn = variant("coset_points")
    for _ in range(40):
        n = int(rng.integers(1, 9))
        c = Coset.full(n)
        for _ in range(int(rng.integers(0, n + 1))):
            r = c.insert(int(rng.integers(1, 1 << n)), int(rng.integers(0, 2)))
            if isinstance(r, Coset):
                c = r
        p = c.parametrization()
        args = [np.array(v, dtype=np.int64) for v in (p.free, p.pivots, p.rows, p.rhs)]
        pts = fn(*args)
        assert sorted(pts.tolist()) == [x for x in range(1 << n) if c.contains(x)]
        # parameter order: free coordinate j of point t is bit j of t
        for t, x in enumerate(pts.tolist()):
            assert all((x >> v & 1) == (t >> j & 1) for j, v in enumerate(p.free))


@pytest.mark.parametrize("depth", [0, 1, 2])
def test_rmaj_bits(variant, depth):
    fn = variant("rmaj_bits")
    n = 3**depth
    xs = np.arange(1 << n, dtype=np.int64)

    def ref(x, level, offset):
        if level == 0:
            return x >> offset & 1
        w = 3 ** (level - 1)
        a, b, c = (ref(x, level - 1, offset + i * w) for i in range(3))
        return int(a + b + c >= 2)

    assert fn(xs, depth).tolist() == [ref(int(x), depth, 0) for x in xs]


def test_default_binding_follows_flag():
    from pdtlab._accel import USE_NUMBA

    pair = kernels.VARIANTS["fwht"]
    assert kernels.fwht is (pair[0] if USE_NUMBA else pair[1])


def test_disable_flag_selects_numpy():
    code = "from pdtlab import kernels, backend_name; print(kernels.fwht.__name__, backend_name())"
    env = {**os.environ, "PDTLAB_DISABLE_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "fwht_numpy"
