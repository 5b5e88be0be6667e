import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdtlab.core import BooleanFunction, Coset, build_named, ones_in_binary, restrict
from pdtlab.spectral import (
    anf,
    deg2,
    dumps_spectrum,
    granularity,
    granularity_witness,
    inverse_wht,
    loads_spectrum,
    sparsity,
    support,
    valuations,
    wht,
)


def direct_coeff(f, S):
    return sum(f(x) * (-1) ** bin(S & x).count("1") for x in range(1 << f.n))


def naive_gran(f):
    # smallest k with every coefficient F / 2^n a multiple of 2^-k
    n = f.n
    best = 0
    for S in range(1 << n):
        F = direct_coeff(f, S)
        if F == 0:
            continue
        k = 0
        while (F * 2**k) % (2**n):
            k += 1
        best = max(best, k)
    return best


def anf_eval(poly, x):
    return sum(1 for s in poly.monomials() if s & x == s) % 2


def rand_fn(n, seed):
    return BooleanFunction(n, np.random.default_rng(seed).integers(0, 2, 1 << n))


functions = st.tuples(st.integers(1, 9), st.integers(0, 2**32)).map(lambda a: rand_fn(*a))


# ---------------------------------------------------------------- examples


def test_maj3_spectrum():
    s = wht(build_named("maj", 3))
    assert s.coeffs.tolist() == [0, 4, 4, 0, 4, 0, 0, -4]


@pytest.mark.parametrize("n", [1, 4, 7])
def test_parity_spectrum(n):
    s = wht(build_named("parity", n))
    assert support(s) == [(1 << n) - 1] and s[(1 << n) - 1] == 2**n


def test_and2_spectrum_by_direct_sum():
    f = build_named("and", 2)
    s = wht(f)
    assert s.coeffs.tolist() == [direct_coeff(f, S) for S in range(4)] == [2, 2, 2, -2]
    assert s.parseval() == 16


@pytest.mark.parametrize("n", range(1, 21))
def test_majority_sparsity(n):
    s = wht(build_named("maj", n))
    if n % 2:
        # odd n: f(not x) = -f(x), so exactly the odd-size sets survive, all of them
        assert sparsity(s) == 2 ** (n - 1)
        assert all(bin(m).count("1") % 2 == 1 for m in support(s))
    else:
        # even n: ties count as true, which breaks the odd symmetry; full support
        assert sparsity(s) == 2**n


def test_sparsity_examples():
    assert sparsity(wht(build_named("rmaj", 2))) == 3 * 4 + 4**3
    assert sparsity(wht(build_named("const", 5, 1))) == 1


def test_granularity_examples():
    assert granularity(wht(build_named("maj", 5))) == 5 - ones_in_binary(5)
    assert granularity(wht(build_named("parity", 6))) == 0
    assert granularity(wht(build_named("thr", 10, 3))) == 7
    assert granularity(wht(build_named("const", 4, -1))) == 0


def test_anf_examples():
    assert str(anf(build_named("maj", 3))) == "x1x2 + x1x3 + x2x3"
    assert anf(build_named("and", 5)).monomials() == [31]
    assert anf(build_named("parity", 4)).monomials() == [1, 2, 4, 8]
    assert str(anf(build_named("const", 2, 1))) == "0"
    assert str(anf(build_named("const", 2, -1))) == "1"


def test_deg2_examples():
    assert deg2(build_named("maj", 6)) == 4
    assert deg2(build_named("maj", 8)) == 8
    assert deg2(build_named("rmaj", 2)) == 4
    assert deg2(build_named("const", 3, 1)) == 0


def test_valuations_sentinel_for_zero():
    v = valuations(wht(build_named("maj", 3)))
    assert v[0] > 100 and v[1] == 2 and v[7] == 2


def test_granularity_witness_is_smallest():
    s = wht(build_named("maj", 3))
    assert granularity_witness(s) == 1


def test_spectrum_export_roundtrip():
    s = wht(build_named("maj", 5))
    text = dumps_spectrum(s)
    first = text.splitlines()[0]
    assert first == "01\t12"  # 2^5 * 3/8
    masks = [int(line.split("\t")[0], 16) for line in text.splitlines()]
    assert masks == sorted(masks) and len(masks) == 16
    assert np.array_equal(loads_spectrum(text, 5).coeffs, s.coeffs)


# ---------------------------------------------------------------- properties


@given(functions)
def test_wht_matches_direct_sum(f):
    if f.n > 6:
        return
    s = wht(f)
    assert s.coeffs.tolist() == [direct_coeff(f, S) for S in range(1 << f.n)]


@given(functions)
def test_parseval_and_roundtrip(f):
    s = wht(f)
    assert s.parseval() == 4**f.n
    assert np.array_equal(inverse_wht(s), f.signs())


@given(functions)
def test_granularity_matches_naive(f):
    if f.n > 6:
        return
    assert granularity(wht(f)) == naive_gran(f)


@given(functions)
def test_anf_evaluates_to_f(f):
    p = anf(f)
    for x in range(1 << f.n):
        assert anf_eval(p, x) == f.table[x]


@given(functions)
def test_subfunction_identities(f):
    n = f.n
    if n < 2:
        return
    half = 1 << (n - 1)
    F = wht(f).coeffs
    F0 = wht(BooleanFunction(n - 1, f.table[:half])).coeffs
    F1 = wht(BooleanFunction(n - 1, f.table[half:])).coeffs
    assert np.array_equal(2 * F0, F[:half] + F[half:])
    assert np.array_equal(2 * F1, F[:half] - F[half:])


@given(functions)
def test_inequality_chain(f):
    s = wht(f)
    spar, gran, d = sparsity(s), granularity(s), deg2(f)
    assert 0 <= gran <= max(f.n - 1, 0)
    # ceil(log2(spar) / 2) <= gran, with integers: spar <= 4^gran
    assert spar <= 4**gran
    if spar >= 2:
        assert 2 ** (gran + 1) <= spar  # gran <= log2 spar - 1
        assert 2**d <= spar  # deg2 <= log2 spar
    if not f.is_constant():
        assert d <= gran + 1


@given(functions, st.lists(st.tuples(st.integers(1, 2**9 - 1), st.integers(0, 1)), max_size=6))
def test_granularity_monotone_under_restriction(f, constraints):
    full = (1 << f.n) - 1
    c = Coset.from_constraints(f.n, [(m & full, b) for m, b in constraints if m & full])
    if c is None:
        return
    g, _ = restrict(f, c)
    assert granularity(wht(g)) <= granularity(wht(f))


@pytest.mark.parametrize("m", range(1, 7))
def test_inner_product_is_tight(m):
    s = wht(build_named("ip", 2 * m))
    assert granularity(s) == m and sparsity(s) == 4**m
    assert (np.abs(s.coeffs) == 2**m).all()


def test_single_coefficient_functions_fail_the_unrestricted_bound():
    # spar = 1 gives gran = 0 > log2(1) - 1; the bound only holds for spar >= 2
    s = wht(build_named("parity", 5))
    assert sparsity(s) == 1 and granularity(s) == 0 > math.log2(1) - 1
