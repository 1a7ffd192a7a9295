"""Dirichlet and Fejer kernels: brute-force tables and closed-form identities."""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import HypothesisViolationError, OutOfRangeError, SpecMismatchError
from .group import GroupSpec, Point, basis_point, digits, expansion, in_interval, region_masks, sub, sub_index
from .system import Signal, _CHUNK, character_rows, rademacher, rademacher_table

Kind = Literal["D", "K"]


@dataclass(frozen=True, eq=False)
class KernelTable:
    spec: GroupSpec
    n: int
    kind: Kind
    signal: Signal

    @property
    def values(self) -> np.ndarray:
        return self.signal.values

    def __call__(self, x: Point) -> complex:
        return self.signal(x)


class KernelCache:
    """Thread-safe LRU cache of kernel tables keyed by (spec, kind, n)."""

    def __init__(self, maxsize: int = 256) -> None:
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key, build):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                self.hits += 1
                return self._data[key]
        value = build()
        with self._lock:
            self.misses += 1
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return value

    def resize(self, maxsize: int) -> None:
        with self._lock:
            self.maxsize = maxsize
            while len(self._data) > maxsize:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self.hits = self.misses = 0

    def __len__(self) -> int:
        return len(self._data)


cache = KernelCache()


def _check_n(n: int, spec: GroupSpec) -> None:
    if not 1 <= n <= spec.size:
        raise OutOfRangeError(f"kernel order {n} outside [1, {spec.size}]")


def _weighted_characters(weights: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Brute-force ``sum_k weights[k] psi_k`` over all cosets (nonzero weights only)."""
    (nz,) = np.nonzero(weights)
    out = np.zeros(spec.size, dtype=complex)
    rows = max(1, _CHUNK // spec.size)
    for start in range(0, len(nz), rows):
        idx = nz[start : start + rows]
        out += weights[idx] @ character_rows(idx, spec)
    return out


def dirichlet(n: int, spec: GroupSpec) -> KernelTable:
    """D_n, the pointwise sum of the first n characters."""
    _check_n(n, spec)

    def build():
        w = np.zeros(spec.size)
        w[:n] = 1.0
        return KernelTable(spec, n, "D", Signal(spec, _weighted_characters(w, spec)))

    return cache.get((spec, "D", n), build)


def fejer(n: int, spec: GroupSpec) -> KernelTable:
    """K_n, the average of D_1, ..., D_n (summed as triangular weights on characters)."""
    _check_n(n, spec)

    def build():
        k = np.arange(spec.size)
        w = np.clip((n - k) / n, 0.0, None)
        return KernelTable(spec, n, "K", Signal(spec, _weighted_characters(w, spec)))

    return cache.get((spec, "K", n), build)


@lru_cache(maxsize=4)
def kernel_tables(spec: GroupSpec) -> tuple[np.ndarray, np.ndarray]:
    """All kernels at once: rows ``D[n-1] = D_n`` and ``K[n-1] = K_n`` for n = 1..M_N.

    Built by cumulative sums of the full character matrix, so memory is
    ``O(M_N^2)``; intended for exhaustive scans on small groups.
    """
    psi = character_rows(np.arange(spec.size), spec)
    D = np.cumsum(psi, axis=0)
    del psi
    K = np.cumsum(D, axis=0) / np.arange(1, spec.size + 1)[:, None]
    D.setflags(write=False)
    K.setflags(write=False)
    return D, K


# -- closed forms ----------------------------------------------------------


def dirichlet_closed(n: int, x: Point) -> complex:
    """D_n(x) from the closed form ``psi_n(x) sum_j D_{M_j}(x) sum_{p=m_j-n_j}^{m_j-1} r_j(x)^p``."""
    spec = x.spec
    if not 0 <= n < spec.size:
        raise OutOfRangeError(f"closed form needs 0 <= n < M_N, got {n}")
    nd = digits(n, spec)
    total = 0j
    for j in range(spec.N):
        if not in_interval(x, Point(spec, (0,) * spec.N), j):
            break
        r = rademacher(j, x)
        mj = spec.m[j]
        total += spec.M[j] * sum(r**p for p in range(mj - nd[j], mj))
    e = sum(a * b * w for a, b, w in zip(nd, x.digits, spec.phase_weights)) % spec.L
    return complex(spec.roots[e]) * total


def dirichlet_closed_table(spec: GroupSpec) -> np.ndarray:
    """Closed-form D_n(x) for every ``0 <= n < M_N`` (rows) and every coset (columns)."""
    M = spec.size
    dt = spec.digit_table
    acc = np.zeros((M, M), dtype=complex)
    inside = np.ones(M, dtype=bool)  # x in I_j
    for j in range(spec.N):
        mj = spec.m[j]
        # G[d, y] = sum_{p = mj - d}^{mj - 1} exp(2 pi i p y / mj)
        p = np.arange(mj)
        y = np.arange(mj)
        terms = np.exp(2j * np.pi * np.outer(p, y) / mj)
        G = np.zeros((mj, mj), dtype=complex)
        for d in range(1, mj):
            G[d] = terms[mj - d :].sum(axis=0)
        cols = np.nonzero(inside)[0]
        acc[:, cols] += spec.M[j] * G[dt[:, j]][:, dt[cols, j]]
        inside &= dt[:, j] == 0
    return acc * character_rows(np.arange(M), spec)


OUTSIDE_DOMAIN = None


def _first_nonzero(ds) -> int | None:
    for k, d in enumerate(ds):
        if d:
            return k
    return None


def fejer_Mn_closed(n: int, x: Point) -> complex | None:
    """K_{M_n}(x) for x in I_t minus I_{t+1} with t < n.

    Returns 0 when ``x - x_t e_t`` leaves I_n and ``M_t / (1 - r_t(x))``
    otherwise.  Points of I_n are not covered and give ``None``.
    """
    spec = x.spec
    if not 0 <= n <= spec.N:
        raise OutOfRangeError(f"level {n} outside [0, {spec.N}]")
    t = _first_nonzero(x.digits)
    if t is None or t >= n:
        return OUTSIDE_DOMAIN
    if any(x.digits[t + 1 : n]):
        return 0j
    return spec.M[t] / (1 - rademacher(t, x))


def fejer_Mn_closed_table(n: int, spec: GroupSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised closed form for K_{M_n}: ``(values, covered_mask)``."""
    dt = spec.digit_table
    nz = dt != 0
    pos = np.arange(spec.N)
    first = np.where(nz, pos, spec.N).min(axis=1)
    covered = first < n
    vals = np.zeros(spec.size, dtype=complex)
    t_idx = np.nonzero(covered)[0]
    t = first[t_idx]
    mid = np.array([not nz[i, ti + 1 : n].any() for i, ti in zip(t_idx, t)], dtype=bool)
    xt = dt[t_idx, t]
    mt = np.array(spec.m)[t]
    r = np.exp(2j * np.pi * xt / mt)
    Mt = np.array(spec.M)[t]
    vals[t_idx] = np.where(mid, Mt / (1 - r), 0.0)
    return vals, covered


@dataclass
class FejerDigitDecomposition:
    """Pieces of the expansion of n K_n along the digits of n.

    ``kernel_terms[k] = (prefactor, s_k M_{n_k})`` contributes
    ``prefactor * s_k M_{n_k} * K_{s_k M_{n_k}}``; ``dirichlet_terms[k] =
    (prefactor, tail, s_k M_{n_k})`` contributes ``prefactor * tail *
    D_{s_k M_{n_k}}``.  Prefactors are signals (products of Rademacher powers).
    """

    n: int
    positions: list[int]
    digits: list[int]
    tails: list[int]
    kernel_terms: list[tuple[np.ndarray, int]] = field(default_factory=list)
    dirichlet_terms: list[tuple[np.ndarray, int, int]] = field(default_factory=list)
    reconstruction: np.ndarray | None = None


def nK_decomposition(n: int, spec: GroupSpec, tables: tuple[np.ndarray, np.ndarray] | None = None) -> FejerDigitDecomposition:
    if not 1 <= n < spec.size:
        raise OutOfRangeError(f"decomposition needs 1 <= n < M_N, got {n}")
    exp = expansion(n, spec)
    positions = [k for k, _ in exp]
    ds = [d for _, d in exp]

    def D(v):
        return tables[0][v - 1] if tables is not None else dirichlet(v, spec).values

    def K(v):
        return tables[1][v - 1] if tables is not None else fejer(v, spec).values

    tails = []
    rest = n
    for pos, s in exp:
        rest -= s * spec.M[pos]
        tails.append(rest)
    dec = FejerDigitDecomposition(n, positions, ds, tails)
    pref = np.ones(spec.size, dtype=complex)
    total = np.zeros(spec.size, dtype=complex)
    r = len(exp)
    for k, (pos, s) in enumerate(exp):
        v = s * spec.M[pos]
        dec.kernel_terms.append((pref, v))
        total += pref * v * K(v)
        if k < r - 1:
            dec.dirichlet_terms.append((pref, tails[k], v))
            total += pref * tails[k] * D(v)
        pref = pref * rademacher_table(pos, spec) ** s
    dec.reconstruction = total
    return dec


def dirichlet_sMn(s: int, n: int, spec: GroupSpec) -> KernelTable:
    """D_{s M_n} as the product ``D_{M_n} * sum_{k<s} r_n^k``."""
    if not 0 <= n < spec.N:
        raise OutOfRangeError(f"position {n} outside [0, {spec.N})")
    if not 1 <= s < spec.m[n]:
        raise OutOfRangeError(f"multiplier {s} outside [1, {spec.m[n]})")
    r = rademacher_table(n, spec)
    geo = sum(r**k for k in range(s))
    vals = dirichlet(spec.M[n], spec).values * geo
    return KernelTable(spec, s * spec.M[n], "D", Signal(spec, vals))


def fejer_sMn_zero_check(s: int, n: int, t: int, x: Point, tol: float = 1e-10) -> bool:
    """Check that K_{s M_n}(x) vanishes when ``x - x_t e_t`` is outside I_n.

    Raises :class:`HypothesisViolationError` if the arguments do not satisfy
    ``t < n < N``, ``1 <= s < m_n``, ``x in I_t minus I_{t+1}`` and the
    hypothesis on ``x - x_t e_t``.
    """
    spec = x.spec
    if not 0 <= t < n < spec.N:
        raise HypothesisViolationError(f"need 0 <= t < n < N, got t={t}, n={n}")
    if not 1 <= s < spec.m[n]:
        raise HypothesisViolationError(f"need 1 <= s < m_n = {spec.m[n]}, got {s}")
    if any(x.digits[:t]) or x.digits[t] == 0:
        raise HypothesisViolationError(f"{x.digits} is not in I_t minus I_(t+1) for t={t}")
    shifted = sub(x, _times(basis_point(t, spec), x.digits[t]))
    if in_interval(shifted, Point(spec, (0,) * spec.N), n):
        raise HypothesisViolationError("x - x_t e_t lies in I_n; the vanishing identity does not apply")
    return abs(fejer(s * spec.M[n], spec)(x)) <= tol


def _times(e: Point, c: int) -> Point:
    return Point(e.spec, tuple((c * d) % mk for d, mk in zip(e.digits, e.spec.m)))


# -- norms and integral estimates ------------------------------------------


def kernel_l1_norm(n: int, spec: GroupSpec) -> float:
    """Integral of |K_n| over the group."""
    return float(np.abs(fejer(n, spec).values).mean())


def kernel_l1_curve(spec: GroupSpec) -> np.ndarray:
    """``[int |K_n| for n = 1..M_N]`` from the full table."""
    _, K = kernel_tables(spec)
    return np.abs(K).mean(axis=1)


def kernel_l1_sup(spec: GroupSpec) -> tuple[float, int]:
    """Largest integral of |K_n| over n <= M_N, and the maximising n."""
    curve = kernel_l1_curve(spec)
    i = int(np.argmax(curve))
    return float(curve[i]), i + 1


def _region_bound(n: int, k: int, l: int, depth: int, spec: GroupSpec) -> float:
    M = spec.M
    if l == depth:
        return M[k] / M[depth]
    return M[l] * M[k] / (n * M[depth])


def region_bound_ratio(n: int, k: int, l: int, depth: int, spec: GroupSpec, K_n: np.ndarray | None = None) -> float:
    """Sup over x in the region (k, l) of depth ``depth`` of the region integral of |K_n(x - t)| over its bound.

    The integral is ``int_{I_depth} |K_n(x - t)| dmu(t)``; the bound is
    ``M_l M_k / (n M_depth)``, or ``M_k / M_depth`` when ``l = depth``.
    Requires ``depth < N`` and ``M_depth <= n <= M_N``.
    """
    if not 1 <= depth < spec.N:
        raise OutOfRangeError(f"inner depth {depth} must lie in [1, {spec.N})")
    if n < spec.M[depth]:
        raise HypothesisViolationError(f"region bound needs n >= M_depth = {spec.M[depth]}, got {n}")
    _check_n(n, spec)
    if not 0 <= k < l <= depth:
        raise OutOfRangeError(f"bad region ({k}, {l}) for depth {depth}")
    mask = region_masks(spec, depth)[(k, l)]
    xs = np.nonzero(mask)[0]
    if xs.size == 0:
        return 0.0
    if K_n is None:
        K_n = fejer(n, spec).values
    ts = np.arange(0, spec.size, spec.M[depth])
    vals = np.abs(K_n[sub_index(xs[:, None], ts[None, :], spec)]).sum(axis=1) / spec.size
    return float(vals.max() / _region_bound(n, k, l, depth, spec))


def region_bound_scan(depth: int, spec: GroupSpec, n_values=None) -> dict:
    """Region-bound ratio for every region and every n in ``n_values`` (default ``[M_depth, M_N]``).

    Returns ``{"n": array, "ratio": array (per-n sup over regions), "by_region": {...}}``.
    """
    if n_values is None:
        n_values = np.arange(spec.M[depth], spec.size + 1)
    n_values = np.asarray(n_values)
    big = spec.size * spec.size <= 1 << 24
    tables = kernel_tables(spec)[1] if big else None
    regions = [(k, l) for k in range(depth) for l in range(k + 1, depth + 1)]
    by_region = {reg: np.zeros(len(n_values)) for reg in regions}
    for i, n in enumerate(n_values):
        K_n = tables[n - 1] if tables is not None else None
        for k, l in regions:
            by_region[(k, l)][i] = region_bound_ratio(int(n), k, l, depth, spec, K_n)
    ratio = np.max(np.vstack(list(by_region.values())), axis=0)
    return {"n": n_values, "ratio": ratio, "by_region": by_region}


# -- convolution -----------------------------------------------------------


def convolve(f: Signal, g: Signal) -> Signal:
    """Group convolution ``(f * g)(x) = int f(t) g(x - t) dmu(t)``, evaluated directly."""
    if f.spec != g.spec:
        raise SpecMismatchError("convolution of signals on different groups")
    spec = f.spec
    idx = np.arange(spec.size)
    out = np.empty(spec.size, dtype=complex)
    rows = max(1, _CHUNK // spec.size)
    for start in range(0, spec.size, rows):
        xs = idx[start : start + rows]
        out[xs] = g.values[sub_index(xs[:, None], idx[None, :], spec)] @ f.values
    return Signal(spec, out / spec.size)
