"""Exact arithmetic in the cyclotomic integers Z[w], w = exp(2 pi i / L).

Character values of a Vilenkin group with radices dividing L are powers of w,
so any integer combination of them can be stored as a coefficient vector over
exponents ``0..L-1``.  Reducing modulo the L-th cyclotomic polynomial gives a
canonical form, so "is this sum exactly zero" becomes an integer comparison.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    """Quotient of integer polynomials (coefficients low to high), den monic, exact division."""
    num = list(num)
    dq = len(den) - 1
    q = [0] * (len(num) - dq)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + dq]
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    if any(num[:dq]):
        raise ArithmeticError("division is not exact")
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(L: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the L-th cyclotomic polynomial."""
    num = [-1] + [0] * (L - 1) + [1]
    for d in range(1, L):
        if L % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def reduce(coeffs: np.ndarray, L: int) -> np.ndarray:
    """Canonical form of ``sum_e coeffs[..., e] w^e``; shape ``(..., phi(L))``."""
    c = np.array(coeffs, dtype=np.int64, copy=True)
    phi = np.array(cyclotomic_poly(L), dtype=np.int64)
    deg = len(phi) - 1
    for j in range(L - 1, deg - 1, -1):
        top = c[..., j].copy()
        c[..., j - deg : j + 1] -= top[..., None] * phi
    return c[..., :deg]


def is_zero(reduced: np.ndarray) -> np.ndarray:
    return ~np.any(reduced != 0, axis=-1)


def evaluate(reduced: np.ndarray, L: int) -> np.ndarray:
    """Complex value of a reduced coefficient array."""
    w = np.exp(2j * np.pi * np.arange(reduced.shape[-1]) / L)
    return reduced.astype(float) @ w


def one_hot(exponents: np.ndarray, L: int) -> np.ndarray:
    """Coefficient vectors of ``w^e`` for an integer exponent array."""
    return (np.asarray(exponents)[..., None] == np.arange(L)).astype(np.int64)
