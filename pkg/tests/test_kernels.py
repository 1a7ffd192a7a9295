from __future__ import annotations

import threading
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_signal
from vilenkin.errors import HypothesisViolationError, OutOfRangeError
from vilenkin.group import make_group, point, point_from_index, walsh
from vilenkin.kernels import (
    OUTSIDE_DOMAIN,
    KernelCache,
    convolve,
    dirichlet,
    dirichlet_closed,
    dirichlet_closed_table,
    dirichlet_sMn,
    fejer,
    fejer_Mn_closed,
    fejer_sMn_zero_check,
    kernel_l1_norm,
    kernel_l1_sup,
    kernel_tables,
    nK_decomposition,
    region_bound_ratio,
    region_bound_scan,
)
from vilenkin.system import Signal, fejer_mean, rademacher_table


def test_dirichlet_examples():
    g = walsh(4)
    assert np.all(dirichlet(1, g).values == 1)
    assert dirichlet(3, walsh(2))(point(walsh(2), (0, 1))) == pytest.approx(1)
    with pytest.raises(OutOfRangeError):
        dirichlet(0, g)
    with pytest.raises(OutOfRangeError):
        dirichlet(g.size + 1, g)


def test_dirichlet_Mn_indicator(small_group):
    g = small_group
    dt = g.digit_table
    for n in range(g.N + 1):
        inside = ~np.any(dt[:, :n] != 0, axis=1)
        assert np.abs(dirichlet(g.M[n], g).values - g.M[n] * inside).max() < 1e-10


def test_values_at_zero(small_group):
    g = small_group
    D, K = kernel_tables(g)
    n = np.arange(1, g.size + 1)
    assert np.abs(D[:, 0] - n).max() < 1e-10
    assert np.abs(K[:, 0] - (n + 1) / 2).max() < 1e-10


def test_fejer_examples():
    g = walsh(3)
    assert np.allclose(fejer(1, g).values, 1)
    assert fejer(2, g)(point(g, (1, 0, 0))) == pytest.approx(0.5)


def test_dirichlet_closed_matches_brute_force():
    for g in (walsh(8), make_group([2, 3, 4]), make_group([3, 3, 3, 3])):
        D, _ = kernel_tables(g)
        assert np.abs(dirichlet_closed_table(g)[1:] - D[:-1]).max() <= 1e-10
        for k in range(g.N):
            x = point_from_index(g.size - 1, g)
            assert dirichlet_closed(g.M[k], x) == pytest.approx(D[g.M[k] - 1][x.index], abs=1e-12)


def test_fejer_Mn_closed_examples():
    g = walsh(3)
    assert fejer_Mn_closed(2, point(g, (1, 0, 0))) == pytest.approx(0.5)
    # x - x_1 e_1 = (0,0,1) is in I_2, so the value branch applies; it leaves I_3
    assert fejer_Mn_closed(2, point(g, (0, 1, 1))) == pytest.approx(1)
    assert fejer(4, g)(point(g, (0, 1, 1))) == pytest.approx(1)
    assert fejer_Mn_closed(3, point(g, (0, 1, 1))) == 0
    assert abs(fejer(8, g)(point(g, (0, 1, 1)))) < 1e-12
    assert fejer_Mn_closed(2, point(g, (0, 0, 1))) is OUTSIDE_DOMAIN
    assert fejer(4, g)(point(g, (1, 0, 0))) == pytest.approx(0.5)


def test_fejer_Mn_closed_exhaustive():
    for g in (walsh(8), make_group([2, 3, 4])):
        _, K = kernel_tables(g)
        for n in range(1, g.N + 1):
            for i in range(g.size):
                v = fejer_Mn_closed(n, point_from_index(i, g))
                if v is not OUTSIDE_DOMAIN:
                    assert abs(v - K[g.M[n] - 1][i]) <= 1e-10


def test_nK_single_digit():
    g = make_group([3, 3, 3])
    dec = nK_decomposition(2 * g.M[1], g)
    assert len(dec.kernel_terms) == 1 and not dec.dirichlet_terms
    assert np.abs(dec.reconstruction - 6 * fejer(6, g).values).max() < 1e-10


def test_nK_walsh_three():
    # 3 K_3 = 2 K_2 + r_1 K_1 + D_2
    g = walsh(3)
    lhs = 3 * fejer(3, g).values
    rhs = 2 * fejer(2, g).values + rademacher_table(1, g) * fejer(1, g).values + dirichlet(2, g).values
    assert np.abs(lhs - rhs).max() < 1e-12
    assert np.abs(nK_decomposition(3, g).reconstruction - lhs).max() < 1e-12


def test_nK_exhaustive():
    for g in (walsh(8), make_group([3, 2, 3])):
        tables = kernel_tables(g)
        for n in range(1, g.size):
            assert np.abs(nK_decomposition(n, g, tables).reconstruction - n * tables[1][n - 1]).max() <= 1e-9


def test_dirichlet_sMn_examples():
    g = make_group([2, 3, 2])
    assert np.allclose(dirichlet_sMn(1, 1, g).values, dirichlet(2, g).values)
    expect = dirichlet(2, g).values * (1 + rademacher_table(1, g))
    assert np.abs(dirichlet(4, g).values - expect).max() < 1e-12
    assert np.abs(dirichlet_sMn(2, 1, g).values - dirichlet(4, g).values).max() < 1e-12
    with pytest.raises(OutOfRangeError):
        dirichlet_sMn(3, 1, g)


def test_fejer_sMn_zero_examples():
    g = make_group([2, 3, 2])
    x = point(g, (1, 1, 0))
    assert fejer_sMn_zero_check(1, 2, 0, x)
    assert abs(fejer(6, g)(x)) < 1e-12
    # s must stay below m_2 = 2
    with pytest.raises(HypothesisViolationError):
        fejer_sMn_zero_check(2, 2, 0, x)


def test_fejer_sMn_hypothesis_guard():
    # x - e_0 = (0,0,1,0) lies in I_2, so the vanishing claim does not apply; K_4(x) = 1/2 there
    g = walsh(4)
    x = point(g, (1, 0, 1, 0))
    with pytest.raises(HypothesisViolationError):
        fejer_sMn_zero_check(1, 2, 0, x)
    assert fejer(4, g)(x) == pytest.approx(0.5)
    assert fejer_sMn_zero_check(1, 2, 0, point(g, (1, 1, 1, 0)))


def _walsh_l1_exact(N: int) -> tuple[Fraction, int]:
    """Exact integer oracle: n K_n(x) = sum_{k<=n} D_k(x) with D_k(x) = sum_{j<k} (-1)^popcount(j & x)."""
    M = 1 << N
    best, arg = Fraction(0), 0
    D = [[0] * M]
    for k in range(1, M + 1):
        D.append([D[-1][x] + (-1) ** bin((k - 1) & x).count("1") for x in range(M)])
    nK = [0] * M
    for n in range(1, M + 1):
        nK = [a + b for a, b in zip(nK, D[n])]
        v = Fraction(sum(abs(a) for a in nK), n * M)
        if v > best:
            best, arg = v, n
    return best, arg


@pytest.mark.parametrize("N", [4, 6])
def test_walsh_l1_sup_matches_exact_oracle(N):
    exact, arg = _walsh_l1_exact(N)
    sup, n = kernel_l1_sup(walsh(N))
    assert n == arg and sup == pytest.approx(float(exact), abs=1e-12)


def test_walsh_l1_frozen_values():
    assert kernel_l1_sup(walsh(4)) == (pytest.approx(43 / 40, abs=1e-12), 10)
    assert kernel_l1_sup(walsh(6)) == (pytest.approx(249 / 224, abs=1e-12), 42)
    assert kernel_l1_norm(1, walsh(5)) == pytest.approx(1)
    assert all(kernel_l1_norm(2**k, walsh(8)) == pytest.approx(1, abs=1e-12) for k in range(9))


def test_region_bound_ratios_finite_and_stable():
    for g in (walsh(6), make_group([2, 3] * 3)):
        scan = region_bound_scan(3, g)
        r = scan["ratio"]
        assert np.isfinite(r).all() and r.max() > 0
        n = scan["n"]
        running = np.maximum.accumulate(r)
        for i, a in enumerate(n[n <= g.size // 2]):
            assert running[n == 2 * a][0] <= 2 * running[i]
    assert region_bound_scan(3, walsh(6))["ratio"].max() == pytest.approx(0.5)
    with pytest.raises(HypothesisViolationError):
        region_bound_ratio(4, 0, 1, 3, walsh(6))


def test_convolution_matches_fejer_mean():
    g = make_group([2, 3, 2, 2])
    f = random_signal(g, 9)
    for n in (1, 5, 17, g.size):
        assert np.abs(convolve(f, fejer(n, g).signal).values - fejer_mean(f, n).values).max() <= 1e-9


def test_telescoping_dirichlet_sum():
    g = make_group([2, 3, 2, 3])
    D, K = kernel_tables(g)
    for t in range(g.N):
        lo, hi = g.M[t], g.M[t + 1]
        lhs = D[lo:hi].sum(axis=0)  # rows lo..hi-1 hold D_{lo+1}..D_hi
        rhs = hi * K[hi - 1] - lo * K[lo - 1]
        assert np.abs(lhs - rhs).max() <= 1e-9


def test_kernels_vanish_on_I2_01():
    g = walsh(6)
    D, K = kernel_tables(g)
    dt = g.digit_table
    xs = (dt[:, 0] != 0) & (dt[:, 1] != 0)
    for n in range(2, g.N + 1):
        assert np.abs(D[g.M[n] - 1][xs]).max() <= 1e-12
        assert np.abs(K[g.M[n] - 1][xs]).max() <= 1e-12


def test_cache_lru_and_threads():
    c = KernelCache(maxsize=2)
    calls = []
    for key in ("a", "b", "a", "c"):
        c.get(key, lambda key=key: calls.append(key) or key)
    assert calls == ["a", "b", "c"] and len(c) == 2
    c.get("b", lambda: calls.append("b2"))
    assert calls[-1] == "b2"  # b was evicted as least recently used
    c.resize(1)
    assert len(c) == 1
    out = []
    ts = [threading.Thread(target=lambda: out.append(c.get("z", lambda: 1))) for _ in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert out == [1] * 8
