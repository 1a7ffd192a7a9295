"""Vilenkin characters and Vilenkin-Fourier analysis at a fixed truncation level.

Normalisation: the forward transform carries ``1/M_N`` (the Haar measure has
total mass one) and synthesis carries no factor.

The fast transform treats a signal as an N-dimensional array, one axis per
digit, and applies an ``m_k``-point DFT along axis k.  This is the
Cooley-Tukey factorisation of the character matrix, costing
``O(M_N * sum(m_k))``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import EmptySumError, OutOfRangeError, SpecMismatchError
from .group import GroupSpec, Point, digits

_CHUNK = 1 << 22  # max entries per character-matrix block


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples of an F_N-measurable function, one per I_N-coset."""

    spec: GroupSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.spec.size,):
            raise SpecMismatchError(f"signal length {v.shape} does not match M_N={self.spec.size}")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.spec.size

    def __call__(self, x: Point) -> complex:
        return complex(self.values[x.index])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Vilenkin-Fourier coefficients f^(0), ..., f^(M_N - 1)."""

    spec: GroupSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.spec.size,):
            raise SpecMismatchError(f"spectrum length {c.shape} does not match M_N={self.spec.size}")
        object.__setattr__(self, "coeffs", c)


# -- characters ------------------------------------------------------------


def rademacher(k: int, x: Point) -> complex:
    """r_k(x) = exp(2 pi i x_k / m_k)."""
    spec = x.spec
    if not 0 <= k < spec.N:
        raise OutOfRangeError(f"Rademacher index {k} outside [0, {spec.N})")
    return complex(np.exp(2j * np.pi * x.digits[k] / spec.m[k]))


def vilenkin_char(n: int, x: Point) -> complex:
    """psi_n(x): product of r_k(x)^{n_k} over the digits of n."""
    spec = x.spec
    e = sum(nk * xk * w for nk, xk, w in zip(digits(n, spec), x.digits, spec.phase_weights))
    return complex(spec.roots[e % spec.L])


def rademacher_sum(n: int, x: Point) -> complex:
    """sum_{k < m_n} r_n(x)^k; equals m_n when x_n = 0 and 0 otherwise."""
    r = rademacher(n, x)
    return complex(sum(r**k for k in range(x.spec.m[n])))


def rademacher_table(k: int, spec: GroupSpec) -> np.ndarray:
    """r_k over all cosets."""
    return np.exp(2j * np.pi * spec.digit_table[:, k] / spec.m[k])


def phase_exponents(n_idx: np.ndarray, x_idx: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Integer exponents e with ``psi_n(x) = w^e`` for index arrays (outer product)."""
    dn = spec.digit_table[np.asarray(n_idx)] * spec.phase_weights
    dx = spec.digit_table[np.asarray(x_idx)]
    return (dn @ dx.T) % spec.L


def character_rows(n_idx: np.ndarray, spec: GroupSpec, x_idx: np.ndarray | None = None) -> np.ndarray:
    """Matrix ``[psi_n(x)]`` with rows ``n_idx`` and columns ``x_idx`` (all cosets by default)."""
    if x_idx is None:
        x_idx = np.arange(spec.size)
    return spec.roots[phase_exponents(n_idx, x_idx, spec)]


def character(n: int, spec: GroupSpec) -> Signal:
    return Signal(spec, character_rows(np.array([n]), spec)[0])


# -- transforms ------------------------------------------------------------


def forward_naive(f: Signal) -> Spectrum:
    """Direct O(M_N^2) evaluation of ``(1/M_N) sum_x f(x) conj(psi_n(x))``."""
    spec = f.spec
    M = spec.size
    rows = max(1, _CHUNK // M)
    out = np.empty(M, dtype=complex)
    for start in range(0, M, rows):
        n_idx = np.arange(start, min(M, start + rows))
        out[n_idx] = np.conj(character_rows(n_idx, spec)) @ f.values
    return Spectrum(spec, out / M)


@lru_cache(maxsize=64)
def _stage_matrices(m: tuple[int, ...], sign: int) -> tuple[np.ndarray, ...]:
    mats = []
    for mk in m:
        j = np.arange(mk)
        mats.append(np.exp(sign * 2j * np.pi * np.outer(j, j) / mk))
    return tuple(mats)


def _digit_transform(a: np.ndarray, spec: GroupSpec, sign: int) -> np.ndarray:
    """Apply the per-digit DFT along the last axis of ``a`` (batched over leading axes)."""
    lead = a.shape[:-1]
    nb = len(lead)
    t = np.asarray(a, dtype=complex).reshape(lead + spec.m[::-1])
    for k, W in enumerate(_stage_matrices(spec.m, sign)):
        axis = nb + spec.N - 1 - k
        t = np.moveaxis(np.tensordot(W, t, axes=([1], [axis])), 0, axis)
    return t.reshape(lead + (spec.size,))


def forward_fast(f: Signal) -> Spectrum:
    return Spectrum(f.spec, _digit_transform(f.values, f.spec, -1) / f.spec.size)


def forward(f: Signal, naive: bool = False) -> Spectrum:
    return forward_naive(f) if naive else forward_fast(f)


def inverse(s: Spectrum) -> Signal:
    """Synthesis ``f = sum_n s(n) psi_n``."""
    return Signal(s.spec, _digit_transform(s.coeffs, s.spec, +1))


def synthesize_batch(coeffs: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Synthesis of every row of a ``(B, M_N)`` coefficient array."""
    return _digit_transform(coeffs, spec, +1)


def analyze_batch(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    return _digit_transform(values, spec, -1) / spec.size


# -- partial sums and Fejer means -----------------------------------------


def _check_count(n: int, spec: GroupSpec) -> None:
    if n == 0:
        raise EmptySumError("S_0 and sigma_0 are not defined; counts start at 1")
    if not 1 <= n <= spec.size:
        raise OutOfRangeError(f"count {n} outside [1, {spec.size}]")


def dirichlet_weights(n: int, size: int) -> np.ndarray:
    w = np.zeros(size)
    w[:n] = 1.0
    return w


def fejer_weights(n: int, size: int) -> np.ndarray:
    """Triangular weights (n - k)/n for k < n, zero beyond."""
    k = np.arange(size)
    return np.clip((n - k) / n, 0.0, None)


def fejer_weight_matrix(ns: np.ndarray, size: int) -> np.ndarray:
    ns = np.asarray(ns, dtype=float)[:, None]
    k = np.arange(size)[None, :]
    return np.clip((ns - k) / ns, 0.0, None)


def partial_sum(f: Signal, n: int, spectrum: Spectrum | None = None) -> Signal:
    """S_n f, the synthesis of the first n coefficients."""
    _check_count(n, f.spec)
    s = forward_fast(f) if spectrum is None else spectrum
    return inverse(Spectrum(f.spec, s.coeffs * dirichlet_weights(n, f.spec.size)))


def fejer_mean(f: Signal, n: int, spectrum: Spectrum | None = None) -> Signal:
    """sigma_n f via triangular spectral weights."""
    _check_count(n, f.spec)
    s = forward_fast(f) if spectrum is None else spectrum
    return inverse(Spectrum(f.spec, s.coeffs * fejer_weights(n, f.spec.size)))


def fejer_means(spectrum: Spectrum, ns: np.ndarray) -> np.ndarray:
    """Rows sigma_n f for each n in ``ns``; shape ``(len(ns), M_N)``."""
    spec = spectrum.spec
    W = fejer_weight_matrix(ns, spec.size)
    return synthesize_batch(W * spectrum.coeffs[None, :], spec)


def iter_fejer_means(spectrum: Spectrum, ns: np.ndarray, batch: int | None = None):
    """Yield ``(n_chunk, sigma rows)`` in blocks to bound memory."""
    spec = spectrum.spec
    ns = np.asarray(ns)
    if batch is None:
        batch = max(1, _CHUNK // spec.size)
    for start in range(0, len(ns), batch):
        chunk = ns[start : start + batch]
        yield chunk, fejer_means(spectrum, chunk)


def conditional_expectation(f: Signal, n: int) -> Signal:
    """Average of f over each I_n-coset (the F_n conditional expectation)."""
    spec = f.spec
    Mn = spec.M[n]
    avg = f.values.reshape(spec.size // Mn, Mn).mean(axis=0)
    return Signal(spec, np.tile(avg, spec.size // Mn))


# -- CSV I/O ---------------------------------------------------------------


def _write_complex_csv(path: str | Path, values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(values):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def _read_complex_csv(path: str | Path, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=complex)
    seen = np.zeros(size, dtype=bool)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(row["index"])
            if not 0 <= i < size:
                raise OutOfRangeError(f"row index {i} outside [0, {size})")
            out[i] = complex(float(row["re"]), float(row.get("im") or 0.0))
            seen[i] = True
    if not seen.all():
        raise SpecMismatchError(f"{path}: missing {int((~seen).sum())} of {size} rows")
    return out


def write_signal(path: str | Path, f: Signal) -> None:
    _write_complex_csv(path, f.values)


def read_signal(path: str | Path, spec: GroupSpec) -> Signal:
    return Signal(spec, _read_complex_csv(path, spec.size))


def write_spectrum(path: str | Path, s: Spectrum) -> None:
    _write_complex_csv(path, s.coeffs)


def read_spectrum(path: str | Path, spec: GroupSpec) -> Spectrum:
    return Spectrum(spec, _read_complex_csv(path, spec.size))


def transform_cost(spec: GroupSpec) -> tuple[int, int]:
    """Operation counts (naive, fast) used for reporting."""
    return spec.size**2, spec.size * sum(spec.m)

