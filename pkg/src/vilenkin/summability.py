"""Numerical experiments around strong convergence of Vilenkin-Fejer means.

* weighted sums ``sum_k ||sigma_k f||_p^p / k^(2-2p)`` normalised by a log power,
* the companion sum for ``||sigma_k f - f||_{1/2}``,
* the divergence counterexample for ``0 < p < 1/2``: selection of scales,
  the martingale built from Dirichlet blocks, the split of ``sigma_alpha f``
  on ``I_2^{0,1}`` and the weighted weak-L_p divergence curve.

Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .errors import HypothesisViolationError, InvalidExponentError, OutOfRangeError, SelectionFailureError
from .group import GroupSpec, digits, order, point
from .kernels import dirichlet
from .spaces import Atom, MartingaleSeq, martingale, verify_decomposition, weak_lp_powers
from .system import Signal, Spectrum, forward_fast, iter_fejer_means, phase_exponents

LOG_CONVENTION = "natural"


def log_power(p: float) -> int:
    """Integer part of 1/2 + p, computed exactly."""
    return math.floor(Fraction(p) + Fraction(1, 2))


def _signal(f) -> Signal:
    return f.top if isinstance(f, MartingaleSeq) else f


# -- strong summability ----------------------------------------------------


@dataclass
class Curve:
    n: np.ndarray
    term: np.ndarray
    partial_sum: np.ndarray
    normalized: np.ndarray
    block_id: np.ndarray | None = None


def sigma_lp_powers(f: Signal, p: float, ns: np.ndarray) -> np.ndarray:
    """``||sigma_n f||_p^p`` for each n."""
    s = forward_fast(f)
    out = np.empty(len(ns))
    i = 0
    for chunk, rows in iter_fejer_means(s, ns):
        out[i : i + len(chunk)] = np.mean(np.abs(rows) ** p, axis=1)
        i += len(chunk)
    return out


def strong_sum_curve(f, p: float, n_max: int) -> Curve:
    """Terms ``||sigma_k f||_p^p / k^(2-2p)``, k = 1..n_max, their partial sums, and the normalised sum.

    ``normalized[k-1]`` is the partial sum divided by ``log(k)^[1/2+p]``; it is
    NaN at k = 1 where the statement does not apply.
    """
    f = _signal(f)
    if not 0 < p <= 0.5:
        raise InvalidExponentError(f"p must lie in (0, 1/2], got {p}")
    if not 2 <= n_max <= f.spec.size:
        raise OutOfRangeError(f"n_max must lie in [2, {f.spec.size}], got {n_max}")
    ks = np.arange(1, n_max + 1)
    term = sigma_lp_powers(f, p, ks) / ks ** (2 - 2 * p)
    partial = np.cumsum(term)
    e = log_power(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = partial / np.log(ks.astype(float)) ** e
    norm[0] = np.nan
    return Curve(ks, term, partial, norm)


def strong_sum(f, p: float, n: int) -> float:
    """``(1 / log^[1/2+p] n) * sum_{k<=n} ||sigma_k f||_p^p / k^(2-2p)``."""
    return float(strong_sum_curve(f, p, n).normalized[-1])


@dataclass
class StrongSumReport:
    p: float
    n_max: int
    curves: list[Curve]
    sup_per_atom: list[float]
    sup: float
    argmax_atom: int
    log_power: int
    log_convention: str = LOG_CONVENTION


def strong_sum_suite(atoms: Sequence[Atom], p: float, n_max: int | None = None) -> StrongSumReport:
    """Strong-sum curves for every atom; ``sup`` is the measured constant c_p over the suite."""
    curves, sups = [], []
    for a in atoms:
        nm = a.signal.spec.size if n_max is None else n_max
        c = strong_sum_curve(a.signal, p, nm)
        curves.append(c)
        sups.append(float(np.nanmax(c.normalized)))
    i = int(np.argmax(sups))
    return StrongSumReport(p, curves[0].n[-1] if curves else 0, curves, sups, sups[i], i, log_power(p))


def deviation_curve(f: Signal, n_max: int) -> Curve:
    """``(1/log n) sum_{k<=n} ||sigma_k f - f||_{1/2}^{1/2} / k``."""
    if not 2 <= n_max <= f.spec.size:
        raise OutOfRangeError(f"n_max must lie in [2, {f.spec.size}], got {n_max}")
    s = forward_fast(f)
    ks = np.arange(1, n_max + 1)
    dev = np.empty(n_max)
    i = 0
    for chunk, rows in iter_fejer_means(s, ks):
        dev[i : i + len(chunk)] = np.mean(np.sqrt(np.abs(rows - f.values[None, :])), axis=1)
        i += len(chunk)
    term = dev / ks
    partial = np.cumsum(term)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = partial / np.log(ks.astype(float))
    norm[0] = np.nan
    return Curve(ks, term, partial, norm)


def deviation_sum(f: Signal, n: int) -> float:
    return float(deviation_curve(f, n).normalized[-1])


# -- the index set A_{0,2} -------------------------------------------------


def in_A02(n: int, spec: GroupSpec) -> bool:
    """Digits n_0 = 1, n_1 = 0, n_2 = 1; higher digits are free."""
    if n < 1:
        return False
    if spec.N < 3:
        return False
    d = digits(n, spec)
    return d[0] == 1 and d[1] == 0 and d[2] == 1


def A02_members(spec: GroupSpec, lo: int = 1, hi: int | None = None) -> np.ndarray:
    """All n in A_{0,2} with ``lo <= n < hi`` (hi defaults to M_N)."""
    hi = spec.size if hi is None else hi
    if spec.N < 3:
        return np.zeros(0, dtype=np.int64)
    dt = spec.digit_table
    mask = (dt[:, 0] == 1) & (dt[:, 1] == 0) & (dt[:, 2] == 1)
    idx = np.nonzero(mask)[0]
    return idx[(idx >= lo) & (idx < hi)]


# -- weight functions ------------------------------------------------------


@dataclass(frozen=True)
class Phi:
    """Nondecreasing weight ``n -> [1, inf)``: ``pow:a`` (n^a), ``log`` (1 + log n) or ``const:c``."""

    kind: str
    param: float = 0.0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "pow":
            return n**self.param
        if self.kind == "log":
            return 1.0 + np.log(n)
        return np.full_like(n, self.param)

    def __str__(self) -> str:
        return "log" if self.kind == "log" else f"{self.kind}:{self.param:g}"


def parse_phi(text: str) -> Phi:
    text = text.strip()
    if text == "log":
        return Phi("log")
    kind, _, arg = text.partition(":")
    if kind not in ("pow", "const") or not arg:
        raise ValueError(f"unknown weight function {text!r}; expected pow:<a>, log or const:<c>")
    val = float(arg)
    if kind == "pow" and val < 0:
        raise ValueError("pow exponent must be >= 0 for a nondecreasing weight")
    if kind == "const" and val < 1:
        raise ValueError("const weight must be >= 1")
    return Phi(kind, val)


# -- scale selection ---------------------------------------------------------


@dataclass
class AlphaSelection:
    orders: list[int]
    growth: dict[int, float]
    summands: dict[int, float]
    partial_sum: float
    cond_ratios: dict[int, float]
    rejected: dict[int, str] = field(default_factory=dict)


MIN_SELECTED_ORDER = 3


def select_alphas(p: float, phi: Phi, spec: GroupSpec, summand_cap: float = 1.0, total_cap: float = 10.0) -> AlphaSelection:
    """Greedy choice of orders t = |alpha_k| in ``3..N-1``.

    Orders start at 3 because the lower bound for the partial block needs
    ``alpha - M_t`` to stay in A_{0,2}, which fails for t = 2.

    A candidate t is kept when its summand ``Phi^(1/2)(M_{t+1}) / M_t^(1-p)``
    is at most ``summand_cap``, the running total of summands stays at most
    ``total_cap``, and the growth ratio ``M_t^(1-p) / Phi^(1/2)(M_{t+1})``
    strictly exceeds every previously kept one.
    """
    if not 0 < p < 0.5:
        raise InvalidExponentError(f"p must lie in (0, 1/2), got {p}")
    M = spec.M
    growth, summands, cond, rejected = {}, {}, {}, {}
    kept: list[int] = []
    best = 1.0 / summand_cap
    total = 0.0
    for t in range(MIN_SELECTED_ORDER, spec.N):
        ph = float(phi(M[t + 1]))
        g = M[t] ** (1 - p) / math.sqrt(ph)
        s = 1.0 / g
        growth[t], summands[t] = g, s
        cond[t] = M[t + 1] ** (2 - 2 * p) / ph
        if s > summand_cap:
            rejected[t] = "summand cap"
        elif total + s > total_cap:
            rejected[t] = "partial-sum cap"
        elif not g > best:
            rejected[t] = "growth trend"
        else:
            kept.append(t)
            best = g
            total += s
    if not kept:
        reasons = sorted(set(rejected.values()))
        raise SelectionFailureError(f"no admissible order in [{MIN_SELECTED_ORDER}, {spec.N - 1}]; failed conditions: {reasons}")
    return AlphaSelection(kept, growth, summands, total, cond, rejected)


# -- counterexample -----------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleSpec:
    p: float
    phi: Phi
    orders: tuple[int, ...]
    A: int


@dataclass
class Counterexample:
    spec: GroupSpec
    p: float
    phi: Phi
    orders: list[int]
    coeff: dict[int, float]
    weights: list[float]
    atoms: list[Atom]
    signal: Signal
    spectrum: Spectrum
    martingale: MartingaleSeq


def block_coefficient(t: int, phi: Phi, p: float, spec: GroupSpec) -> float:
    """Phi^(1/(2p))(M_{t+1}), the Fourier coefficient on the block [M_t, M_{t+1})."""
    return float(phi(spec.M[t + 1])) ** (1.0 / (2 * p))


def build_counterexample(cs: CounterexampleSpec, spec: GroupSpec) -> Counterexample:
    """f_A = sum over orders t < A of ``lambda_t * a_t`` with Dirichlet-block atoms.

    ``a_t = (M_t^(1/p-1) / lam) (D_{M_{t+1}} - D_{M_t})`` is a p-atom supported
    on I_t and ``lambda_t = lam * Phi^(1/(2p))(M_{t+1}) / M_t^(1/p-1)`` with
    ``lam = sup m_k``, so f_A has coefficient Phi^(1/(2p))(M_{t+1}) on each
    block and zero elsewhere.
    """
    p = cs.p
    if not 0 < p < 0.5:
        raise InvalidExponentError(f"p must lie in (0, 1/2), got {p}")
    if not 1 <= cs.A <= spec.N:
        raise OutOfRangeError(f"level cap A={cs.A} outside [1, {spec.N}]")
    orders = sorted(t for t in cs.orders if 2 <= t < cs.A)
    if not orders:
        raise SelectionFailureError(f"no selected order below A={cs.A}")
    lam = spec.lam
    M = spec.M
    zero = point(spec, [0] * spec.N)
    weights, atoms, coeff = [], [], {}
    values = np.zeros(spec.size, dtype=complex)
    for t in orders:
        block = dirichlet(M[t + 1], spec).values - dirichlet(M[t], spec).values
        scale = M[t] ** (1 / p - 1) / lam
        a = Atom(Signal(spec, scale * block), zero, t, p)
        w = lam * block_coefficient(t, cs.phi, p, spec) / M[t] ** (1 / p - 1)
        atoms.append(a)
        weights.append(w)
        coeff[t] = block_coefficient(t, cs.phi, p, spec)
        values += w * a.signal.values
    f = Signal(spec, values)
    return Counterexample(spec, p, cs.phi, orders, coeff, weights, atoms, f, forward_fast(f), martingale(f))


def expected_coefficients(cex: Counterexample) -> np.ndarray:
    """Coefficients predicted for f_A: constant on each selected block, zero elsewhere."""
    out = np.zeros(cex.spec.size)
    for t in cex.orders:
        out[cex.spec.M[t] : cex.spec.M[t + 1]] = cex.coeff[t]
    return out


def verify_counterexample_decomposition(cex: Counterexample, tol: float = 1e-9):
    return verify_decomposition(cex.martingale, cex.weights, cex.atoms, cex.p, tol)


# -- split of sigma_alpha f on I_2^{0,1} ----------------------------------------


def region_I2_01(spec: GroupSpec) -> np.ndarray:
    """Cosets with x_0 != 0 and x_1 != 0."""
    dt = spec.digit_table
    return np.nonzero((dt[:, 0] != 0) & (dt[:, 1] != 0))[0]


def _bracket(v_lo: int, v_hi: int, weights: np.ndarray, xs: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Exact reduced form of ``sum_{v_lo <= v < v_hi} weights[v - v_lo] psi_v(x)`` per x."""
    E = phase_exponents(np.arange(v_lo, v_hi), xs, spec)
    L = spec.L
    c = np.empty((len(xs), L), dtype=np.int64)
    w = np.asarray(weights, dtype=np.int64)
    for e in range(L):
        c[:, e] = w @ (E == e).astype(np.int64)
    return exact.reduce(c, L)


@dataclass
class SplitReport:
    alpha: int
    order: int
    points: int
    max_abs_I: float
    max_abs_II1: float
    min_II2_ratio: float
    max_split_error: float
    split_tol: float
    I_exact_zero: bool
    II1_exact_zero: bool
    passed: bool


class _BlockCache:
    """Per-order exact pieces shared by every alpha of the same order."""

    def __init__(self, cex: Counterexample, t: int, xs: np.ndarray) -> None:
        spec = cex.spec
        M = spec.M
        self.t = t
        earlier = [u for u in cex.orders if u < t]
        # block u contributes sum_{v in block} (M_t - v) psi_v to sum_{j <= M_t} S_j f
        self.I_parts = []
        self.II1_parts = []
        for u in earlier:
            v = np.arange(M[u], M[u + 1])
            self.I_parts.append((cex.coeff[u], _bracket(M[u], M[u + 1], M[t] - v, xs, spec)))
            self.II1_parts.append((cex.coeff[u], _bracket(M[u], M[u + 1], np.ones(len(v)), xs, spec)))
        # prefix sums over the current block for sum_{v < J} (J - v) psi_v = J*C0(J) - C1(J)
        lo, hi = M[t], M[t + 1]
        E = phase_exponents(np.arange(lo, hi), xs, spec)
        onehot = exact.one_hot(E, spec.L)
        self.lo = lo
        self.C0 = np.concatenate([np.zeros((1,) + onehot.shape[1:], np.int64), np.cumsum(onehot, axis=0)])
        vw = np.arange(lo, hi, dtype=np.int64)[:, None, None]
        self.C1 = np.concatenate([np.zeros((1,) + onehot.shape[1:], np.int64), np.cumsum(onehot * vw, axis=0)])

    def current(self, J: int, L: int) -> np.ndarray:
        k = J - self.lo
        return exact.reduce(J * self.C0[k] - self.C1[k], L)


def sigma_split_check(cex: Counterexample, alpha: int, tol: float = 1e-9, split_tol: float = 1e-6,
                      _cache: dict | None = None) -> SplitReport:
    """Split ``sigma_alpha f = I + II_1 + II_2`` on I_2^{0,1} and test each piece.

    ``I`` collects ``S_j f`` for ``j <= M_t`` (t = |alpha|), ``II_1`` the
    complete earlier blocks inside ``S_j f`` for ``M_t < j <= alpha`` and
    ``II_2`` the partial current block.  The bracket sums are evaluated
    exactly in the cyclotomic integers, so ``I`` and ``II_1`` are reported as
    exact zeros when the identities hold.  ``max_split_error`` compares
    ``I + II_1 + II_2`` with sigma_alpha f from the spectral route, relative
    to ``Phi^(1/(2p))(M_{t+1}) / alpha``; it carries the rounding of the
    floating transform of f and has its own tolerance ``split_tol``.
    """
    spec = cex.spec
    if not in_A02(alpha, spec):
        raise HypothesisViolationError(f"alpha={alpha} is not in A_(0,2)")
    t = order(alpha, spec)
    if t not in cex.orders:
        raise HypothesisViolationError(f"|alpha|={t} is not one of the counterexample orders {cex.orders}")
    M = spec.M
    if not M[t] < alpha < M[t + 1]:
        raise HypothesisViolationError(f"alpha={alpha} not strictly inside (M_t, M_(t+1))")
    xs = region_I2_01(spec)
    cache = {} if _cache is None else _cache
    if t not in cache:
        cache[t] = _BlockCache(cex, t, xs)
    bc = cache[t]
    L = spec.L

    I = np.zeros(len(xs), dtype=complex)
    I_zero = True
    for c, red in bc.I_parts:
        I_zero &= bool(exact.is_zero(red).all())
        I += c * exact.evaluate(red, L)
    I /= alpha
    II1 = np.zeros(len(xs), dtype=complex)
    II1_zero = True
    for c, red in bc.II1_parts:
        II1_zero &= bool(exact.is_zero(red).all())
        II1 += c * exact.evaluate(red, L)
    II1 *= (alpha - M[t]) / alpha
    scale = cex.coeff[t] / alpha
    II2 = scale * exact.evaluate(bc.current(alpha, L), L)

    sigma = _fejer_at(cex.spectrum, alpha)[xs]
    split_err = float(np.abs(sigma - (I + II1 + II2)).max() / scale)
    ratio = float(np.abs(II2).min() / scale)
    passed = (
        float(np.abs(I).max(initial=0.0)) <= tol
        and float(np.abs(II1).max(initial=0.0)) <= tol
        and ratio >= 1 - tol
        and split_err <= split_tol
    )
    return SplitReport(alpha, t, len(xs), float(np.abs(I).max(initial=0.0)), float(np.abs(II1).max(initial=0.0)),
                       ratio, split_err, split_tol, I_zero, II1_zero, passed)


def _fejer_at(spectrum: Spectrum, n: int) -> np.ndarray:
    for _, rows in iter_fejer_means(spectrum, np.array([n])):
        return rows[0]
    raise AssertionError


def split_scan(cex: Counterexample, tol: float = 1e-9, split_tol: float = 1e-6) -> list[SplitReport]:
    """sigma_split_check for every alpha in A_{0,2} lying strictly inside a selected block."""
    cache: dict = {}
    out = []
    for t in cex.orders:
        for a in A02_members(cex.spec, cex.spec.M[t] + 1, cex.spec.M[t + 1]):
            out.append(sigma_split_check(cex, int(a), tol, split_tol, cache))
        cache.pop(t, None)
    return out


# -- divergence curve -----------------------------------------------------------


@dataclass
class DivergenceReport:
    curve: Curve
    blocks: dict[int, float]
    lower_bound_constants: dict[int, float]
    restrict_A02: bool


def divergence_sum(cex: Counterexample, p: float, phi: Phi, n_max: int | None = None,
                   restrict_A02: bool = True) -> DivergenceReport:
    """Partial sums of ``||sigma_n f||_{L_{p,inf}}^p / Phi(n)`` over n <= n_max.

    With ``restrict_A02`` only n in A_{0,2} are summed.  ``blocks[t]`` is the
    increment over n in A_{0,2} (or all n) strictly between M_t and M_{t+1} for
    each selected order t; ``lower_bound_constants[t]`` divides it by
    ``M_t^(1-p) / Phi^(1/2)(M_{t+1})``.
    """
    spec = cex.spec
    n_max = spec.size if n_max is None else n_max
    if not 1 <= n_max <= spec.size:
        raise OutOfRangeError(f"n_max must lie in [1, {spec.size}]")
    if restrict_A02:
        ns = A02_members(spec, 1, n_max + 1)
    else:
        ns = np.arange(1, n_max + 1)
    weak = np.empty(len(ns))
    i = 0
    for chunk, rows in iter_fejer_means(cex.spectrum, ns):
        weak[i : i + len(chunk)] = weak_lp_powers(rows, p)
        i += len(chunk)
    term = weak / phi(ns)
    partial = np.cumsum(term)
    M = spec.M
    block_id = np.full(len(ns), -1)
    blocks, consts = {}, {}
    for t in cex.orders:
        inside = (ns > M[t]) & (ns < M[t + 1])
        block_id[inside] = t
        if M[t + 1] - 1 > n_max:
            continue
        blocks[t] = float(term[inside].sum())
        consts[t] = blocks[t] / (M[t] ** (1 - p) / math.sqrt(float(phi(M[t + 1]))))
    curve = Curve(np.asarray(ns), term, partial, partial, block_id)
    return DivergenceReport(curve, blocks, consts, restrict_A02)
