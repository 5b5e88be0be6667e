"""Hot inner loops.

Every kernel exists twice: a loop version compiled with numba and a
vectorised numpy version. The module-level names (``fwht``, ``mobius`` ...)
bind to one of them according to :data:`pdtlab._accel.USE_NUMBA`; both
variants stay importable so tests and the benchmark can compare them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# Walsh-Hadamard transform (exact, integer)
# ---------------------------------------------------------------------------


@njit
def fwht_numba(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = a[j]
                v = a[j + h]
                a[j] = u + v
                a[j + h] = u - v
        h *= 2
    return a


def fwht_numpy(a):
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] += hi
        hi *= -1
        hi += lo
        h *= 2
    return a


# ---------------------------------------------------------------------------
# Moebius (subset-sum over GF(2)) transform
# ---------------------------------------------------------------------------


@njit
def mobius_numba(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a[j + h] ^= a[j]
        h *= 2
    return a


def mobius_numpy(a):
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        v[:, 1, :] ^= v[:, 0, :]
        h *= 2
    return a


# ---------------------------------------------------------------------------
# Restriction of a table by one parity constraint
# ---------------------------------------------------------------------------
# The pivot is the lowest set bit p of ``mask``; x_p is solved from the
# constraint and the remaining variables keep their relative order.


@njit
def restrict_parity_numba(table, mask, bit):
    size = table.shape[0] // 2
    p = 0
    while not (mask >> p) & 1:
        p += 1
    rest = mask & ~(1 << p)
    low = (1 << p) - 1
    out = np.empty(size, dtype=table.dtype)
    for t in range(size):
        x = (t & low) | ((t >> p) << (p + 1))
        y = x & rest
        par = bit
        while y:
            par ^= 1
            y &= y - 1
        out[t] = table[x | (par << p)]
    return out


def restrict_parity_numpy(table, mask, bit):
    size = table.shape[0] // 2
    p = (mask & -mask).bit_length() - 1
    rest = mask & ~(1 << p)
    t = np.arange(size, dtype=np.int64)
    x = (t & ((1 << p) - 1)) | ((t >> p) << (p + 1))
    par = (np.bitwise_count(x & rest).astype(np.int64) & 1) ^ bit
    return table[x | (par << p)]


# ---------------------------------------------------------------------------
# Flat tree evaluation on every input
# ---------------------------------------------------------------------------
# Nodes with mask 0 are leaves carrying ``label``; internal nodes route to
# child1 when popcount(mask & x) is odd.


@njit
def tree_eval_all_numba(masks, child0, child1, labels, n):
    size = 1 << n
    out = np.empty(size, dtype=np.int8)
    depth = np.empty(size, dtype=np.int32)
    for x in range(size):
        v = 0
        d = 0
        while masks[v] != 0:
            y = masks[v] & x
            par = 0
            while y:
                par ^= 1
                y &= y - 1
            v = child1[v] if par else child0[v]
            d += 1
        out[x] = labels[v]
        depth[x] = d
    return out, depth


def tree_eval_all_numpy(masks, child0, child1, labels, n):
    x = np.arange(1 << n, dtype=np.int64)
    node = np.zeros(x.shape[0], dtype=np.int64)
    depth = np.zeros(x.shape[0], dtype=np.int32)
    while True:
        m = masks[node]
        active = m != 0
        if not active.any():
            break
        par = np.bitwise_count(m & x) & 1
        nxt = np.where(par == 1, child1[node], child0[node])
        node = np.where(active, nxt, node)
        depth += active
    return labels[node].astype(np.int8), depth


# ---------------------------------------------------------------------------
# Points of an affine subspace given in reduced row echelon form
# ---------------------------------------------------------------------------
# ``free`` lists parameter coordinates in order; row i fixes coordinate
# pivots[i] to rhs[i] xor parity(rows[i] & x) over the free coordinates.
# Points are listed in parameter order: bit j of t sets coordinate free[j].


def _coset_basis(free, pivots, rows, rhs):
    # offset point (t = 0) and the image of each unit parameter vector
    d = free.shape[0]
    x0 = 0
    for i in range(pivots.shape[0]):
        if rhs[i]:
            x0 |= 1 << pivots[i]
    basis = np.empty(d, dtype=np.int64)
    for j in range(d):
        v = 1 << free[j]
        for i in range(pivots.shape[0]):
            if (rows[i] >> free[j]) & 1:
                v |= 1 << pivots[i]
        basis[j] = v
    return x0, basis


_coset_basis_numba = njit(_coset_basis)


@njit
def coset_points_numba(free, pivots, rows, rhs):
    d = free.shape[0]
    x0, basis = _coset_basis_numba(free, pivots, rows, rhs)
    out = np.empty(1 << d, dtype=np.int64)
    out[0] = x0
    for t in range(1, 1 << d):
        low = t & -t
        j = 0
        while (low >> j) != 1:
            j += 1
        out[t] = out[t ^ low] ^ basis[j]
    return out


def coset_points_numpy(free, pivots, rows, rhs):
    d = free.shape[0]
    x0, basis = _coset_basis(free, pivots, rows, rhs)
    out = np.full(1, x0, dtype=np.int64)
    for j in range(d):
        out = np.concatenate([out, out ^ basis[j]])
    return out


def parity_of(xs, mask):
    """Vectorised popcount(xs & mask) mod 2 as int64 0/1."""
    return (np.bitwise_count(xs & mask) & 1).astype(np.int64)


# ---------------------------------------------------------------------------
# recursive majority on packed assignments
# ---------------------------------------------------------------------------
# Returns the 0/1 value; variables 3j, 3j+1, 3j+2 feed gate j of the next level.


@njit
def rmaj_bits_numba(xs, depth):
    out = np.empty(xs.shape[0], dtype=np.int8)
    for i in range(xs.shape[0]):
        cur = xs[i]
        width = 3**depth
        while width > 1:
            width //= 3
            nxt = 0
            for j in range(width):
                a = cur >> (3 * j)
                m = (a & (a >> 1)) | (a & (a >> 2)) | ((a >> 1) & (a >> 2))
                nxt |= (m & 1) << j
            cur = nxt
        out[i] = cur & 1
    return out


def rmaj_bits_numpy(xs, depth):
    cur = np.asarray(xs, dtype=np.int64)
    width = 3**depth
    while width > 1:
        width //= 3
        nxt = np.zeros_like(cur)
        for j in range(width):
            a = cur >> (3 * j)
            m = (a & (a >> 1)) | (a & (a >> 2)) | ((a >> 1) & (a >> 2))
            nxt |= (m & 1) << j
        cur = nxt
    return (cur & 1).astype(np.int8)


if USE_NUMBA:
    fwht = fwht_numba
    mobius = mobius_numba
    restrict_parity = restrict_parity_numba
    tree_eval_all = tree_eval_all_numba
    coset_points = coset_points_numba
    rmaj_bits = rmaj_bits_numba
else:
    fwht = fwht_numpy
    mobius = mobius_numpy
    restrict_parity = restrict_parity_numpy
    tree_eval_all = tree_eval_all_numpy
    coset_points = coset_points_numpy
    rmaj_bits = rmaj_bits_numpy

VARIANTS = {
    "fwht": (fwht_numba, fwht_numpy),
    "mobius": (mobius_numba, mobius_numpy),
    "restrict_parity": (restrict_parity_numba, restrict_parity_numpy),
    "tree_eval_all": (tree_eval_all_numba, tree_eval_all_numpy),
    "coset_points": (coset_points_numba, coset_points_numpy),
    "rmaj_bits": (rmaj_bits_numba, rmaj_bits_numpy),
}
