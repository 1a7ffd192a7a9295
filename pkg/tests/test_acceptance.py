"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest

from conftest import record_criterion
from vilenkin.cli import main
from vilenkin.group import cyclic_group, make_group, walsh
from vilenkin.identities import (
    check_convolution,
    check_dirichlet_closed,
    check_dirichlet_sMn,
    check_fejer_decomposition,
    check_fejer_Mn_closed,
    check_fejer_sMn_zero,
)
from vilenkin.kernels import kernel_l1_sup, kernel_tables, region_bound_scan
from vilenkin.report import run_bench
from vilenkin.spaces import atom_from_entry, atom_suite_entries
from vilenkin.summability import (
    CounterexampleSpec,
    build_counterexample,
    deviation_sum,
    divergence_sum,
    parse_phi,
    select_alphas,
    split_scan,
    strong_sum_suite,
    verify_counterexample_decomposition,
)
from vilenkin.system import fejer_means, forward

SPECS = {
    "walsh8": walsh(8),
    "walsh9": walsh(9),
    "walsh10": walsh(10),
    "cyclic234": cyclic_group([2, 3, 4], 7),  # M_N = 1152 <= 1296
    "all3": make_group([3] * 6),  # M_N = 729
}

SUITE_SEED = 7
SUITE_SIZE = 50
SUITE_RESOLUTION = 8  # atoms are F_8-measurable, so the same functions live on both truncations


def _suite(p: float, N: int):
    entries = atom_suite_entries(8, SUITE_SIZE, p, SUITE_SEED, resolution=SUITE_RESOLUTION)
    for e in entries:
        e["support_base"] = e["support_base"] + [0] * (N - len(e["support_base"]))
    return [atom_from_entry(e, walsh(N)) for e in entries]


def test_criterion_01_dirichlet_closed_form():
    details, ok = [], True
    for name, g in SPECS.items():
        t0 = time.perf_counter()
        r = check_dirichlet_closed(g, kernel_tables(g), tol=1e-10)
        dt = time.perf_counter() - t0
        ok &= r.passed and dt <= 120
        details.append(f"{name}: err={r.max_error:.1e} {dt:.1f}s")
    record_criterion(1, ok, "; ".join(details))
    assert ok


def test_criterion_02_lemma_suite():
    details, ok = [], True
    for name, g in SPECS.items():
        tables = kernel_tables(g)
        rs = [check_fejer_Mn_closed(g, tables, 1e-10), check_dirichlet_sMn(g, tables, 1e-10),
              check_fejer_sMn_zero(g, tables, 1e-10), check_fejer_decomposition(g, tables, 1e-9)]
        ok &= all(r.passed and not r.counterexamples for r in rs)
        details.append(f"{name}: " + ",".join(f"{r.max_error:.0e}" for r in rs))
    record_criterion(2, ok, "max errors (Mn closed, sMn product, sMn zero, digit decomposition) " + "; ".join(details))
    assert ok


def test_criterion_03_fast_transform():
    rep = run_bench((2,), repetitions=3, sizes=(4096,))
    row = rep["rows"][0]
    ok = row["size"] == 4096 and row["max_deviation"] <= 1e-9 and row["fast_s"] < row["naive_s"]
    record_criterion(3, ok, f"deviation={row['max_deviation']:.1e} naive={row['naive_s']:.3f}s "
                            f"fast={row['fast_s']:.5f}s speedup={row['speedup']:.0f}x")
    assert ok


def test_criterion_04_convolution():
    r = check_convolution(walsh(8), seed=0, n_signals=20, n_max=64, tol=1e-9)
    record_criterion(4, r.passed, f"max |sigma_n f - f*K_n| = {r.max_error:.1e} over 20 signals, n <= 64")
    assert r.passed


def test_criterion_05_atom_vanishing():
    worst, count = 0.0, 0
    for p in (0.5, 0.4):
        for N in (8, 10):
            for a in _suite(p, N):
                ns = np.arange(1, a.signal.spec.M[a.depth] + 1)
                worst = max(worst, float(np.abs(fejer_means(forward(a.signal), ns)).max()))
                count += 1
    ok = worst <= 1e-10
    record_criterion(5, ok, f"max ||sigma_n a||_inf for n <= M_depth = {worst:.1e} over {count} atoms")
    assert ok


def test_criterion_06_strong_sum_stability():
    details, ok = [], True
    for p in (0.5, 0.4):
        sup = {N: strong_sum_suite(_suite(p, N), p).sup for N in (8, 10)}
        change = abs(sup[10] - sup[8]) / sup[8]
        ok &= bool(np.isfinite(sup[10]) and change < 0.05)
        details.append(f"p={p}: c_p(N=8)={sup[8]:.4f} c_p(N=10)={sup[10]:.4f} change={100 * change:.1f}%")
    record_criterion(6, ok, "; ".join(details) + " (limit 5%)")
    assert ok


def test_criterion_07_deviation_trend():
    atoms = _suite(0.5, 10)
    bad = []
    for i, a in enumerate(atoms):
        lo, hi = deviation_sum(a.signal, 2**8), deviation_sum(a.signal, 2**10)
        if not hi < lo:
            bad.append((i, a.depth, round(lo, 4), round(hi, 4)))
    ok = not bad
    record_criterion(7, ok, f"{len(atoms) - len(bad)}/{len(atoms)} atoms decrease from M_8 to M_10; "
                            f"failures (index, depth, M_8, M_10): {bad}")
    assert ok


def test_criterion_08_divergence():
    g = walsh(12)
    phi = parse_phi("pow:0.75")
    sel = select_alphas(0.25, phi, g)
    cex = build_counterexample(CounterexampleSpec(0.25, phi, tuple(sel.orders), g.N), g)
    dec = verify_counterexample_decomposition(cex)
    splits = split_scan(cex, tol=1e-9)
    div = divergence_sum(cex, 0.25, phi)
    inc = [div.blocks[t] for t in cex.orders]
    final = float(div.curve.partial_sum[-1])
    split_ok = all(s.max_abs_I <= 1e-9 and s.max_abs_II1 <= 1e-9 and s.min_II2_ratio >= 1 - 1e-9 for s in splits)
    ok = (len(cex.orders) >= 3 and all(not a.violations() for a in cex.atoms) and dec.holds and split_ok
          and all(b > a for a, b in zip(inc, inc[1:])) and final > 10 * inc[0])
    record_criterion(8, ok, f"blocks={cex.orders} split points={sum(s.points for s in splits)} over {len(splits)} alphas "
                            f"increments={[round(v, 3) for v in inc]} final={final:.3f} > 10x{inc[0]:.3f}")
    assert ok


def test_criterion_09_kernel_l1_and_region_bound():
    sups = {N: kernel_l1_sup(walsh(N)) for N in (6, 8, 10)}
    l1_ok = abs(sups[10][0] - sups[8][0]) <= 1e-9
    ratios = {}
    region_ok = True
    for name, g in (("walsh6", walsh(6)), ("m23x3", make_group([2, 3] * 3))):
        scan = region_bound_scan(3, g)
        n, running = scan["n"], np.maximum.accumulate(scan["ratio"])
        region_ok &= bool(np.isfinite(running).all())
        for i, a in enumerate(n[n <= g.size // 2]):
            region_ok &= bool(running[n == 2 * a][0] <= 2 * running[i])
        ratios[name] = float(running[-1])
    ok = l1_ok and region_ok
    sup_txt = ", ".join(f"N={N}: {s:.9f} at n={k}" for N, (s, k) in sups.items())
    record_criterion(9, ok, f"sup int|K_n| {sup_txt}; |N10-N8|={abs(sups[10][0] - sups[8][0]):.2e} (limit 1e-9); "
                            f"region-bound sup ratios {ratios} stable={region_ok}")
    assert ok


def test_criterion_10_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    args = ["verify-all", "--group", "2*8", "--threads", "3", "--seed", "11"]
    codes = [main(args + ["--out", str(tmp_path / d)]) for d in ("a", "b")]
    a, b = (tmp_path / d / "verify_all.json" for d in ("a", "b"))
    codes.append(main(["replay", "--manifest", str(a), "--out", str(tmp_path / "c")]))
    c = tmp_path / "c" / "verify_all.json"
    ok = codes == [0, 0, 0] and a.read_bytes() == b.read_bytes() == c.read_bytes()
    record_criterion(10, ok, f"exit codes {codes}; reports byte-identical: {ok}; "
                             f"manifest threads={json.loads(a.read_text())['manifest']['threads']}")
    assert ok
