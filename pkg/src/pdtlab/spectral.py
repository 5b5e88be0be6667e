"""Exact Fourier analysis over the integers and the GF(2) normal form.

Coefficients are kept scaled by 2^n: ``coeffs[S] = sum_x f(x) chi_S(x)``,
an integer, so granularity is read off 2-adic valuations exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .core import BooleanFunction


@dataclass(frozen=True)
class Spectrum:
    n: int
    coeffs: np.ndarray  # int64, length 2^n

    def __getitem__(self, mask: int) -> int:
        return int(self.coeffs[mask])

    def parseval(self) -> int:
        return int((self.coeffs * self.coeffs).sum())


@dataclass(frozen=True)
class AnfPolynomial:
    n: int
    coeffs: np.ndarray  # uint8, coeffs[S] = c_S

    def monomials(self) -> list[int]:
        return [int(s) for s in np.flatnonzero(self.coeffs)]

    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return 0
        return int(np.bitwise_count(nz.astype(np.int64)).max())

    def __str__(self):
        terms = []
        for s in self.monomials():
            if s == 0:
                terms.append("1")
            else:
                terms.append("".join(f"x{i + 1}" for i in range(self.n) if s >> i & 1))
        return " + ".join(terms) if terms else "0"


def wht(f: BooleanFunction) -> Spectrum:
    a = f.signs().astype(np.int64)
    kernels.fwht(a)
    return Spectrum(f.n, a)


def inverse_wht(s: Spectrum) -> np.ndarray:
    """Table (+-1 values) reconstructed from a spectrum."""
    a = s.coeffs.astype(np.int64).copy()
    kernels.fwht(a)
    return a >> s.n


def support(s: Spectrum) -> list[int]:
    return [int(m) for m in np.flatnonzero(s.coeffs)]


def sparsity(s: Spectrum) -> int:
    return int(np.count_nonzero(s.coeffs))


def valuations(s: Spectrum) -> np.ndarray:
    """nu_2 of every coefficient; zero coefficients get a large sentinel."""
    c = np.abs(s.coeffs)
    low = c & -c
    out = np.full(c.shape, 1 << 30, dtype=np.int64)
    nz = c != 0
    out[nz] = np.bitwise_count(low[nz] - 1).astype(np.int64)  # low is a power of two
    return out


def coefficient_granularities(s: Spectrum) -> np.ndarray:
    return np.maximum(0, s.n - valuations(s))


def granularity(s: Spectrum) -> int:
    if s.coeffs.size == 0:
        return 0
    return int(coefficient_granularities(s).max())


def granularity_witness(s: Spectrum) -> int:
    """Smallest mask S whose coefficient attains the granularity."""
    g = coefficient_granularities(s)
    return int(np.argmax(g == g.max()))


def anf(f: BooleanFunction) -> AnfPolynomial:
    a = f.table.copy()
    kernels.mobius(a)
    return AnfPolynomial(f.n, a)


def deg2(f: BooleanFunction) -> int:
    return anf(f).degree()


def log2_sparsity(s: Spectrum) -> float:
    return math.log2(sparsity(s))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def dumps_spectrum(s: Spectrum) -> str:
    width = max(1, -(-s.n // 4))
    lines = [f"{m:0{width}x}\t{int(s.coeffs[m])}" for m in support(s)]
    return "\n".join(lines) + ("\n" if lines else "")


def write_spectrum(s: Spectrum, path):
    Path(path).write_text(dumps_spectrum(s))


def loads_spectrum(text: str, n: int) -> Spectrum:
    coeffs = np.zeros(1 << n, dtype=np.int64)
    for line in text.splitlines():
        if not line.strip():
            continue
        mask, value = line.split("\t")
        coeffs[int(mask, 16)] = int(value)
    return Spectrum(n, coeffs)
