"""Quasi-norms, martingale maximal functions, H_p norms and p-atoms at level N."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateAtomError,
    InvalidExponentError,
    SpecMismatchError,
    SupportViolationError,
)
from .group import GroupSpec, Point, interval_indices, point
from .system import Signal, conditional_expectation, forward_fast, partial_sum

ATOM_RTOL = 1e-12


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Signal) else np.asarray(f)


def _check_p(p: float) -> None:
    if not p > 0:
        raise InvalidExponentError(f"exponent must be positive, got {p}")


def lp_power(f, p: float) -> float:
    """``||f||_p^p`` = mean of |f|^p over the cosets."""
    _check_p(p)
    return float(np.mean(np.abs(_values(f)) ** p))


def lp_norm(f, p: float) -> float:
    return lp_power(f, p) ** (1.0 / p)


def weak_lp_power(f, p: float) -> float:
    """``sup_lam lam^p mu{|f| > lam}``, attained at the distinct values of |f|.

    With |f| sorted in decreasing order ``v_1 >= v_2 >= ...``, the measure of
    ``{|f| >= v_i}`` is at least ``i / M_N`` with equality at the last of any
    run of ties, so the sup is ``max_i v_i^p * i / M_N``.
    """
    _check_p(p)
    a = np.sort(np.abs(_values(f)))[::-1]
    if a.size == 0 or a[0] == 0:
        return 0.0
    return float(np.max(a**p * np.arange(1, a.size + 1)) / a.size)


def weak_lp_norm(f, p: float) -> float:
    return weak_lp_power(f, p) ** (1.0 / p)


def weak_lp_powers(rows: np.ndarray, p: float) -> np.ndarray:
    """Row-wise :func:`weak_lp_power` for a ``(B, M_N)`` array."""
    _check_p(p)
    a = -np.sort(-np.abs(rows), axis=1)
    cnt = np.arange(1, a.shape[1] + 1)
    return np.max(a**p * cnt, axis=1) / a.shape[1]


# -- martingales -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MartingaleSeq:
    """Levels ``f^(0), ..., f^(N)`` with ``f^(n)`` measurable with respect to F_n."""

    spec: GroupSpec
    levels: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.levels) != self.spec.N + 1:
            raise SpecMismatchError(f"need {self.spec.N + 1} levels, got {len(self.levels)}")
        for lv in self.levels:
            if np.shape(lv) != (self.spec.size,):
                raise SpecMismatchError("level length does not match M_N")

    @property
    def top(self) -> Signal:
        return Signal(self.spec, self.levels[-1])

    def adaptedness_error(self) -> float:
        """Largest deviation of f^(n) from its own average over I_n-cosets."""
        worst = 0.0
        for n, lv in enumerate(self.levels):
            avg = conditional_expectation(Signal(self.spec, lv), n).values
            worst = max(worst, float(np.abs(lv - avg).max()))
        return worst

    def tower_error(self) -> float:
        """Largest deviation of E[f^(n+1) | F_n] from f^(n)."""
        worst = 0.0
        for n in range(self.spec.N):
            avg = conditional_expectation(Signal(self.spec, self.levels[n + 1]), n).values
            worst = max(worst, float(np.abs(avg - self.levels[n]).max()))
        return worst


def martingale(f: Signal) -> MartingaleSeq:
    """The martingale ``(S_{M_n} f)_{n <= N}`` generated by f."""
    s = forward_fast(f)
    levels = tuple(partial_sum(f, f.spec.M[n], s).values for n in range(f.spec.N + 1))
    return MartingaleSeq(f.spec, levels)


def maximal_function(mart: MartingaleSeq) -> Signal:
    """f* = pointwise max over levels of |f^(n)|."""
    return Signal(mart.spec, np.max(np.abs(np.vstack(mart.levels)), axis=0))


def maximal_function_averages(f: Signal) -> Signal:
    """f* as the sup over n of |mean of f over I_n(x)|, computed by coset averaging."""
    stack = [np.abs(conditional_expectation(f, n).values) for n in range(f.spec.N + 1)]
    return Signal(f.spec, np.max(np.vstack(stack), axis=0))


def hp_norm(mart: MartingaleSeq, p: float) -> float:
    return lp_norm(maximal_function(mart), p)


def hp_power(mart: MartingaleSeq, p: float) -> float:
    return lp_power(maximal_function(mart), p)


# -- atoms -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Atom:
    signal: Signal
    base: Point
    depth: int
    p: float

    @property
    def measure(self) -> float:
        return 1.0 / self.base.spec.M[self.depth]

    @property
    def bound(self) -> float:
        """mu(I)^(-1/p), the sup-norm ceiling of a p-atom on I."""
        return self.base.spec.M[self.depth] ** (1.0 / self.p)

    def violations(self, rtol: float = ATOM_RTOL) -> list[str]:
        return atom_violations(self.signal, self.base, self.depth, self.p, rtol)


def _support_mask(base: Point, depth: int) -> np.ndarray:
    mask = np.zeros(base.spec.size, dtype=bool)
    mask[interval_indices(base, depth)] = True
    return mask


def atom_violations(f: Signal, base: Point, depth: int, p: float, rtol: float = ATOM_RTOL) -> list[str]:
    """Names of the p-atom conditions that ``f`` fails on the interval ``I_depth(base)``."""
    _check_p(p)
    spec = base.spec
    v = f.values
    inside = _support_mask(base, depth)
    bound = spec.M[depth] ** (1.0 / p)
    out = []
    if np.any(np.abs(v[~inside]) > rtol * bound):
        out.append("support")
    # integral over I of a dmu, compared with the scale mu(I) * sup|a|
    integral = v[inside].sum() / spec.size
    if abs(integral) > rtol * max(1.0, bound / spec.M[depth]):
        out.append("mean")
    if np.abs(v).max() > bound * (1 + rtol):
        out.append("size")
    return out


def is_atom(f: Signal, base: Point, depth: int, p: float, rtol: float = ATOM_RTOL) -> bool:
    return not atom_violations(f, base, depth, p, rtol)


def make_atom(base: Point, depth: int, p: float, raw: Signal | np.ndarray) -> Atom:
    """Project ``raw`` to mean zero on ``I_depth(base)`` and scale to the p-atom sup bound."""
    _check_p(p)
    spec = base.spec
    v = np.array(_values(raw), dtype=complex)
    inside = _support_mask(base, depth)
    if np.any(v[~inside] != 0):
        raise SupportViolationError(f"raw signal is not supported in I_{depth}({base.digits})")
    v[inside] -= v[inside].mean()
    peak = np.abs(v).max()
    if peak <= 1e-14 * max(1.0, np.abs(_values(raw)).max()):
        raise DegenerateAtomError("raw signal is constant on the support interval")
    v *= spec.M[depth] ** (1.0 / p) / peak
    v[inside] -= v[inside].mean()
    atom = Atom(Signal(spec, v), base, depth, p)
    bad = atom.violations()
    if bad:
        raise DegenerateAtomError(f"constructed atom fails {bad}")
    return atom


def random_atom(spec: GroupSpec, p: float, depth: int, base: Sequence[int] | None = None,
                seed: int = 0, resolution: int | None = None) -> Atom:
    """Seeded random p-atom on ``I_depth(base)``.

    ``resolution`` (default N) is the level at which the raw profile is
    measurable; values are constant on I_resolution-cosets.
    """
    rng = np.random.default_rng(seed)
    resolution = spec.N if resolution is None else resolution
    if not depth < resolution <= spec.N:
        raise SpecMismatchError(f"need depth < resolution <= N, got {depth}, {resolution}")
    if base is None:
        base = [int(rng.integers(mk)) if k < depth else 0 for k, mk in enumerate(spec.m)]
    b = point(spec, list(base)[: spec.N] + [0] * (spec.N - len(base)))
    coarse = rng.standard_normal(spec.M[resolution])
    raw = np.tile(coarse, spec.size // spec.M[resolution])
    raw = np.where(_support_mask(b, depth), raw, 0.0)
    return make_atom(b, depth, p, raw)


def load_atom_suite(path: str | Path, spec: GroupSpec) -> list[Atom]:
    """Atoms from a JSON list of ``{support_base, depth, p, seed[, resolution]}``."""
    entries = json.loads(Path(path).read_text())
    return [atom_from_entry(e, spec) for e in entries]


def atom_from_entry(e: dict, spec: GroupSpec) -> Atom:
    return random_atom(spec, float(e["p"]), int(e["depth"]), e.get("support_base"), int(e["seed"]), e.get("resolution"))


def atom_suite_entries(spec_N: int, size: int, p: float, seed: int, resolution: int | None = None,
                       m: Sequence[int] | None = None) -> list[dict]:
    """Suite description: ``size`` atoms with depths below ``resolution`` drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    resolution = spec_N if resolution is None else resolution
    m = [2] * spec_N if m is None else list(m)
    out = []
    for i in range(size):
        depth = int(rng.integers(0, resolution))
        base = [int(rng.integers(m[k])) if k < depth else 0 for k in range(spec_N)]
        out.append({"support_base": base, "depth": depth, "p": p,
                    "seed": int(rng.integers(2**31)), "resolution": resolution})
    return out


# -- atomic decompositions ---------------------------------------------------


@dataclass
class DecompositionReport:
    level_errors: list[float]
    max_error: float
    sum_abs_p: float
    hp_power: float
    ratio: float
    holds: bool


def verify_decomposition(mart: MartingaleSeq, weights: Sequence[complex], atoms: Sequence[Atom], p: float,
                         tol: float = 1e-9) -> DecompositionReport:
    """Check ``sum_k w_k S_{M_n} a_k = f^(n)`` at every level and compare ``||f||_{H_p}^p`` with ``sum |w_k|^p``.

    Level errors are relative to ``max(1, sup |f^(N)|)``.
    """
    _check_p(p)
    if len(weights) != len(atoms):
        raise SpecMismatchError("weights and atoms differ in length")
    spec = mart.spec
    for a in atoms:
        if a.signal.spec != spec:
            raise SpecMismatchError("atom lives on a different group")
    errs = []
    scale = max(1.0, float(np.abs(mart.levels[-1]).max()))
    specs = [forward_fast(a.signal) for a in atoms]
    for n in range(spec.N + 1):
        acc = np.zeros(spec.size, dtype=complex)
        for w, a, s in zip(weights, atoms, specs):
            acc += w * partial_sum(a.signal, spec.M[n], s).values
        errs.append(float(np.abs(acc - mart.levels[n]).max()) / scale)
    total = float(sum(abs(w) ** p for w in weights))
    hp = hp_power(mart, p)
    ratio = hp / total if total > 0 else float("inf") if hp > 0 else 0.0
    return DecompositionReport(errs, max(errs), total, hp, ratio, max(errs) <= tol)
