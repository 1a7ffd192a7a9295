"""Exhaustive scans of the kernel identities over a small group.

Each scan compares a closed form (or a vanishing claim) with the brute-force
kernel tables and returns a :class:`CheckResult`.  Scans accept precomputed
``(D, K)`` tables so callers can share them or inject faulty ones.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .group import GroupSpec, region_masks, sub_index
from .kernels import dirichlet_closed_table, fejer_Mn_closed_table, kernel_tables, nK_decomposition
from .system import Signal, character_rows, fejer_means, forward_fast, forward_naive, rademacher_table


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    scanned: int
    tolerance: float
    counterexamples: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        d["scanned_count"] = d.pop("scanned")
        d["counterexamples"] = d["counterexamples"][:10]
        return d


def _result(name, errs_max, scanned, tol, bad, **extra) -> CheckResult:
    return CheckResult(name, errs_max <= tol and not bad, float(errs_max), int(scanned), tol, bad, extra)


def _tables(spec, tables):
    return kernel_tables(spec) if tables is None else tables


def check_dirichlet_closed(spec: GroupSpec, tables=None, tol: float = 1e-10) -> CheckResult:
    """Closed-form D_n against brute force for every 1 <= n < M_N and every coset."""
    D, _ = _tables(spec, tables)
    C = dirichlet_closed_table(spec)
    err = np.abs(C[1:] - D[:-1])
    bad = [[int(i) + 1, int(j)] for i, j in zip(*np.nonzero(err > tol))]
    return _result("dirichlet_closed_form", err.max(initial=0.0), err.size, tol, bad)


def check_dirichlet_Mn(spec: GroupSpec, tables=None, tol: float = 1e-10) -> CheckResult:
    """D_{M_n} = M_n on I_n and 0 elsewhere, for n = 0..N."""
    D, _ = _tables(spec, tables)
    dt = spec.digit_table
    worst, bad, count = 0.0, [], 0
    inside = np.ones(spec.size, dtype=bool)
    for n in range(spec.N + 1):
        expect = np.where(inside, spec.M[n], 0.0)
        err = np.abs(D[spec.M[n] - 1] - expect)
        worst = max(worst, err.max())
        bad += [[n, int(j)] for j in np.nonzero(err > tol)[0]]
        count += spec.size
        if n < spec.N:
            inside &= dt[:, n] == 0
    return _result("dirichlet_Mn_indicator", worst, count, tol, bad)


def check_fejer_Mn_closed(spec: GroupSpec, tables=None, tol: float = 1e-10) -> CheckResult:
    """Closed form of K_{M_n} at every covered point, n = 1..N."""
    _, K = _tables(spec, tables)
    worst, bad, count = 0.0, [], 0
    for n in range(1, spec.N + 1):
        vals, covered = fejer_Mn_closed_table(n, spec)
        err = np.abs(vals[covered] - K[spec.M[n] - 1][covered])
        worst = max(worst, err.max(initial=0.0))
        bad += [[n, int(j)] for j in np.nonzero(covered)[0][err > tol]]
        count += int(covered.sum())
    return _result("fejer_Mn_closed_form", worst, count, tol, bad)


def check_fejer_decomposition(spec: GroupSpec, tables=None, tol: float = 1e-9) -> CheckResult:
    """Reconstruction of n K_n from its digit expansion, every 1 <= n < M_N."""
    tables = _tables(spec, tables)
    K = tables[1]
    worst, bad = 0.0, []
    for n in range(1, spec.size):
        dec = nK_decomposition(n, spec, tables)
        e = float(np.abs(dec.reconstruction - n * K[n - 1]).max())
        worst = max(worst, e)
        if e > tol:
            bad.append([n, e])
    return _result("fejer_digit_decomposition", worst, (spec.size - 1) * spec.size, tol, bad)


def check_dirichlet_sMn(spec: GroupSpec, tables=None, tol: float = 1e-10) -> CheckResult:
    """D_{s M_n} = D_{M_n} * sum_{k<s} r_n^k for n < N, 1 <= s < m_n."""
    D, _ = _tables(spec, tables)
    worst, bad, count = 0.0, [], 0
    for n in range(spec.N):
        r = rademacher_table(n, spec)
        geo = np.zeros(spec.size, dtype=complex)
        for s in range(1, spec.m[n]):
            geo = geo + r ** (s - 1)
            err = np.abs(D[s * spec.M[n] - 1] - D[spec.M[n] - 1] * geo)
            worst = max(worst, err.max())
            bad += [[s, n, int(j)] for j in np.nonzero(err > tol)[0]]
            count += spec.size
    return _result("dirichlet_sMn_product", worst, count, tol, bad)


def check_fejer_sMn_zero(spec: GroupSpec, tables=None, tol: float = 1e-10) -> CheckResult:
    """K_{s M_n}(x) = 0 whenever t < n < N, s < m_n, x in I_t minus I_{t+1}, x - x_t e_t not in I_n."""
    _, K = _tables(spec, tables)
    dt = spec.digit_table
    nz = dt != 0
    pos = np.arange(spec.N)
    first = np.where(nz, pos, spec.N).min(axis=1)
    worst, bad, count = 0.0, [], 0
    for t in range(spec.N):
        at_t = first == t
        for n in range(t + 1, spec.N):
            adm = at_t & nz[:, t + 1 : n].any(axis=1)
            xs = np.nonzero(adm)[0]
            if xs.size == 0:
                continue
            for s in range(1, spec.m[n]):
                vals = np.abs(K[s * spec.M[n] - 1][xs])
                worst = max(worst, vals.max())
                bad += [[s, n, t, int(j)] for j in xs[vals > tol]]
                count += xs.size
    return _result("fejer_sMn_vanishing", worst, count, tol, bad)


def check_partition(spec: GroupSpec) -> CheckResult:
    """Every coset belongs to exactly one region of depth N."""
    masks = region_masks(spec)
    cover = np.sum(np.vstack(list(masks.values())).astype(int), axis=0)
    bad = [int(j) for j in np.nonzero(cover != 1)[0]]
    return _result("region_partition", float(np.abs(cover - 1).max()), spec.size, 0.0, bad)


def check_orthonormality(spec: GroupSpec, tol: float = 1e-10, max_size: int = 256) -> CheckResult:
    """Gram matrix of the characters is the identity (exhaustive up to ``max_size`` cosets)."""
    if spec.size > max_size:
        rng = np.random.default_rng(0)
        idx = np.sort(rng.choice(spec.size, size=max_size, replace=False))
    else:
        idx = np.arange(spec.size)
    psi = character_rows(idx, spec)
    gram = psi @ psi.conj().T / spec.size
    err = np.abs(gram - np.eye(len(idx)))
    return _result("character_orthonormality", err.max(), err.size, tol, [])


def check_fast_transform(spec: GroupSpec, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    f = Signal(spec, rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size))
    err = float(np.abs(forward_fast(f).coeffs - forward_naive(f).coeffs).max())
    return _result("fast_vs_naive_transform", err, spec.size, tol, [])


def check_convolution(spec: GroupSpec, seed: int = 0, n_signals: int = 20, n_max: int = 64, tol: float = 1e-9) -> CheckResult:
    """sigma_n f from spectral weights against the direct group convolution f * K_n."""
    _, K = kernel_tables(spec)
    rng = np.random.default_rng(seed)
    idx = np.arange(spec.size)
    sub = sub_index(idx[:, None], idx[None, :], spec)
    ns = np.arange(1, min(n_max, spec.size) + 1)
    worst = 0.0
    for _ in range(n_signals):
        f = Signal(spec, rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size))
        sig = fejer_means(forward_fast(f), ns)
        for i, n in enumerate(ns):
            conv = K[n - 1][sub] @ f.values / spec.size
            worst = max(worst, float(np.abs(conv - sig[i]).max()))
    return _result("fejer_mean_convolution", worst, n_signals * len(ns) * spec.size, tol, [])


KERNEL_CHECKS = {
    "dirichlet_closed_form": check_dirichlet_closed,
    "dirichlet_Mn_indicator": check_dirichlet_Mn,
    "fejer_Mn_closed_form": check_fejer_Mn_closed,
    "fejer_digit_decomposition": check_fejer_decomposition,
    "dirichlet_sMn_product": check_dirichlet_sMn,
    "fejer_sMn_vanishing": check_fejer_sMn_zero,
}
