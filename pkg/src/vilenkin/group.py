"""Mixed-radix arithmetic on a bounded Vilenkin group truncated at level N.

A point of the truncated group is a digit vector ``(x_0, ..., x_{N-1})`` with
``0 <= x_k < m_k``.  Points are enumerated by the linear index
``sum(x_k * M_k)`` so digit 0 varies fastest; every array of samples in this
package uses that order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapacityError,
    ConfigError,
    InvalidRadixError,
    OutOfRangeError,
    SpecMismatchError,
)

MAX_SIZE = 2**31

INSIDE = "inside"


@dataclass(frozen=True)
class GroupSpec:
    m: tuple[int, ...]
    N: int
    M: tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        M = [1]
        for mk in self.m:
            M.append(M[-1] * mk)
        object.__setattr__(self, "M", tuple(M))

    @property
    def size(self) -> int:
        """M_N, the number of cosets of I_N."""
        return self.M[-1]

    @property
    def lam(self) -> int:
        """sup of the radices (``lambda`` in the bounded-group setting)."""
        return max(self.m)

    @cached_property
    def L(self) -> int:
        """Least common multiple of the radices; every character value is an L-th root of unity."""
        return math.lcm(*self.m)

    @cached_property
    def digit_table(self) -> np.ndarray:
        """``(M_N, N)`` int array; row i holds the digits of linear index i."""
        idx = np.arange(self.size, dtype=np.int64)
        out = np.empty((self.size, self.N), dtype=np.int64)
        for k in range(self.N):
            out[:, k] = (idx // self.M[k]) % self.m[k]
        out.setflags(write=False)
        return out

    @cached_property
    def phase_weights(self) -> np.ndarray:
        """L / m_k per position: ``psi_n(x) = w^(sum n_k x_k L/m_k)`` with ``w = exp(2 pi i / L)``."""
        w = np.array([self.L // mk for mk in self.m], dtype=np.int64)
        w.setflags(write=False)
        return w

    @cached_property
    def roots(self) -> np.ndarray:
        """The L-th roots of unity, indexed by exponent."""
        r = np.exp(2j * np.pi * np.arange(self.L) / self.L)
        r.setflags(write=False)
        return r

    def to_json(self) -> dict:
        return {"m": list(self.m), "N": self.N}


def make_group(m: Sequence[int], N: int | None = None) -> GroupSpec:
    """Build a truncated group from the radix sequence ``m``.

    Only the first ``N`` radices are kept (all of them when ``N`` is None).
    """
    m = [int(v) for v in m]
    if N is None:
        N = len(m)
    if N < 1:
        raise OutOfRangeError(f"truncation level must be >= 1, got {N}")
    if len(m) < N:
        raise OutOfRangeError(f"need at least N={N} radices, got {len(m)}")
    m = m[:N]
    bad = [(k, v) for k, v in enumerate(m) if v < 2]
    if bad:
        raise InvalidRadixError(f"radices must be >= 2; offending (position, value): {bad}")
    if math.prod(m) > MAX_SIZE:
        raise CapacityError(f"M_N = {math.prod(m)} exceeds the capacity bound {MAX_SIZE}")
    return GroupSpec(tuple(m), N)


def walsh(N: int) -> GroupSpec:
    return make_group([2] * N, N)


def cyclic_group(pattern: Sequence[int], N: int) -> GroupSpec:
    """Radices repeating ``pattern`` cyclically up to level N."""
    return make_group([pattern[k % len(pattern)] for k in range(N)], N)


def parse_radices(text: str) -> list[int]:
    """Parse ``"2,3,2"``; a token ``a*k`` repeats radix ``a`` k times."""
    out: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "*" in tok:
            a, k = tok.split("*", 1)
            out.extend([int(a)] * int(k))
        else:
            out.append(int(tok))
    return out


def load_group(source: str | Path, N: int | None = None) -> GroupSpec:
    """Load a group from a JSON file ``{"m": [...], "N": int}`` or an inline radix list."""
    path = Path(source)
    try:
        if path.exists():
            text = path.read_text()
            if not text.strip():
                raise ConfigError(f"group spec file {path} is empty")
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"group spec file {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict) or "m" not in data:
                raise ConfigError(f"group spec file {path} must be an object with key 'm'")
            return make_group(data["m"], N if N is not None else data.get("N"))
        return make_group(parse_radices(str(source)), N)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot build group from {source!r}: {exc}") from exc


# -- indices ---------------------------------------------------------------


def digits(n: int, spec: GroupSpec) -> tuple[int, ...]:
    """Mixed-radix digits ``(n_0, ..., n_{N-1})`` of ``0 <= n < M_N``."""
    if not 0 <= n < spec.size:
        raise OutOfRangeError(f"index {n} outside [0, {spec.size})")
    out = []
    for mk in spec.m:
        n, d = divmod(n, mk)
        out.append(d)
    return tuple(out)


def from_digits(ds: Sequence[int], spec: GroupSpec) -> int:
    return sum(int(d) * spec.M[k] for k, d in enumerate(ds))


def order(n: int, spec: GroupSpec) -> int:
    """|n|: position of the highest nonzero digit; -1 for n = 0."""
    if n < 0:
        raise OutOfRangeError(f"order of negative index {n}")
    if n == 0:
        return -1
    ds = digits(n, spec)
    return max(k for k, d in enumerate(ds) if d)


def expansion(n: int, spec: GroupSpec) -> list[tuple[int, int]]:
    """Nonzero digits as ``(position, digit)`` pairs, highest position first."""
    return [(k, d) for k, d in reversed(list(enumerate(digits(n, spec)))) if d]


# -- points ----------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    spec: GroupSpec
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.digits) != self.spec.N:
            raise OutOfRangeError(f"point needs {self.spec.N} digits, got {len(self.digits)}")
        for k, (d, mk) in enumerate(zip(self.digits, self.spec.m)):
            if not 0 <= d < mk:
                raise OutOfRangeError(f"digit {d} at position {k} not below radix {mk}")

    @cached_property
    def index(self) -> int:
        return from_digits(self.digits, self.spec)

    def __add__(self, other: "Point") -> "Point":
        return add(self, other)

    def __sub__(self, other: "Point") -> "Point":
        return sub(self, other)


def point(spec: GroupSpec, ds: Iterable[int]) -> Point:
    return Point(spec, tuple(int(d) for d in ds))


def point_from_index(i: int, spec: GroupSpec) -> Point:
    return Point(spec, digits(i, spec))


def zero(spec: GroupSpec) -> Point:
    return Point(spec, (0,) * spec.N)


def _check_same(x: Point, y: Point) -> None:
    if x.spec != y.spec:
        raise SpecMismatchError("points belong to different groups")


def add(x: Point, y: Point) -> Point:
    _check_same(x, y)
    return Point(x.spec, tuple((a + b) % mk for a, b, mk in zip(x.digits, y.digits, x.spec.m)))


def sub(x: Point, y: Point) -> Point:
    _check_same(x, y)
    return Point(x.spec, tuple((a - b) % mk for a, b, mk in zip(x.digits, y.digits, x.spec.m)))


def basis_point(n: int, spec: GroupSpec) -> Point:
    """e_n: digit 1 at position n, zero elsewhere."""
    if not 0 <= n < spec.N:
        raise OutOfRangeError(f"position {n} outside [0, {spec.N})")
    ds = [0] * spec.N
    ds[n] = 1
    return Point(spec, tuple(ds))


def scale(x: Point, c: int) -> Point:
    return Point(x.spec, tuple((c * d) % mk for d, mk in zip(x.digits, x.spec.m)))


def in_interval(y: Point, x: Point, n: int) -> bool:
    """Whether y lies in I_n(x), i.e. the first n digits agree."""
    return y.digits[:n] == x.digits[:n]


def sub_index(xi: np.ndarray, ti: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Linear index of ``x - t`` for broadcastable index arrays."""
    xi = np.asarray(xi, dtype=np.int64)
    ti = np.asarray(ti, dtype=np.int64)
    out = np.zeros(np.broadcast_shapes(xi.shape, ti.shape), dtype=np.int64)
    for k, mk in enumerate(spec.m):
        Mk = spec.M[k]
        out += ((xi // Mk - ti // Mk) % mk) * Mk
    return out


# -- regions ---------------------------------------------------------------


def region_of(x: Point) -> tuple[int, int] | str:
    """Classify x into ``(k, l)`` for I_N^{k,l}, or :data:`INSIDE` for x in I_N.

    ``k`` is the first nonzero digit position, ``l`` the second one, or ``N``
    when there is no second nonzero digit.
    """
    nz = [k for k, d in enumerate(x.digits) if d]
    if not nz:
        return INSIDE
    k = nz[0]
    l = nz[1] if len(nz) > 1 else x.spec.N
    return (k, l)


def region_labels(spec: GroupSpec) -> list[tuple[int, int] | str]:
    """All region labels in the order of the partition of the complement of I_N, then INSIDE."""
    N = spec.N
    labels: list[tuple[int, int] | str] = [(k, l) for k in range(N - 1) for l in range(k + 1, N)]
    labels += [(k, N) for k in range(N)]
    labels.append(INSIDE)
    return labels


def region_masks(spec: GroupSpec, depth: int | None = None) -> dict[tuple[int, int] | str, np.ndarray]:
    """Boolean masks over all cosets for each region of depth ``depth`` (default N).

    Only the first ``depth`` digits matter, so for ``depth < N`` the regions are
    unions of finer cosets.
    """
    depth = spec.N if depth is None else depth
    dt = spec.digit_table[:, :depth] != 0
    pos = np.arange(depth)
    big = depth + 1
    first = np.where(dt, pos, big).min(axis=1)
    masked = np.where(dt & (pos[None, :] > first[:, None]), pos, big)
    second = masked.min(axis=1)
    second = np.where(second == big, depth, second)
    masks: dict[tuple[int, int] | str, np.ndarray] = {}
    for k in range(depth):
        for l in range(k + 1, depth + 1):
            masks[(k, l)] = (first == k) & (second == l)
    masks[INSIDE] = first == big
    return masks


# -- measure ---------------------------------------------------------------


def measure_exact(cosets: Iterable[Point | int], spec: GroupSpec) -> Fraction:
    """Haar measure of a set of I_N-cosets as an exact fraction."""
    seen = {c.index if isinstance(c, Point) else int(c) for c in cosets}
    return Fraction(len(seen), spec.size)


def measure(cosets: Iterable[Point | int], spec: GroupSpec) -> float:
    return float(measure_exact(cosets, spec))


def interval_indices(x: Point, n: int) -> np.ndarray:
    """Linear indices of all cosets inside I_n(x)."""
    spec = x.spec
    base = from_digits(x.digits[:n], spec)
    return base + spec.M[n] * np.arange(spec.size // spec.M[n], dtype=np.int64)
