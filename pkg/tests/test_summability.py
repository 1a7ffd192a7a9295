from __future__ import annotations

import math

import numpy as np
import pytest

from vilenkin.errors import HypothesisViolationError, InvalidExponentError, OutOfRangeError, SelectionFailureError
from vilenkin.group import walsh
from vilenkin.spaces import atom_suite_entries, atom_from_entry, lp_power, random_atom
from vilenkin.summability import (
    A02_members,
    CounterexampleSpec,
    build_counterexample,
    deviation_curve,
    deviation_sum,
    divergence_sum,
    expected_coefficients,
    in_A02,
    log_power,
    parse_phi,
    region_I2_01,
    select_alphas,
    sigma_split_check,
    split_scan,
    strong_sum,
    strong_sum_curve,
    strong_sum_suite,
    verify_counterexample_decomposition,
)
from vilenkin.system import Signal, character, fejer_mean, forward, fejer_means


def test_log_power():
    assert log_power(0.5) == 1
    assert log_power(0.4) == 0
    assert log_power(0.3) == 0
    assert log_power(0.1) == 0


def test_strong_sum_examples():
    g = walsh(5)
    assert strong_sum(Signal(g, np.zeros(g.size)), 0.5, g.size) == 0
    a = random_atom(g, 0.4, 2, seed=1)
    c = strong_sum_curve(a.signal, 0.4, g.size)
    assert np.array_equal(c.normalized[1:], c.partial_sum[1:])
    c = strong_sum_curve(a.signal, 0.5, g.size)
    assert c.normalized[-1] == pytest.approx(c.partial_sum[-1] / math.log(g.size))
    with pytest.raises(InvalidExponentError):
        strong_sum(a.signal, 0.6, 8)
    with pytest.raises(OutOfRangeError):
        strong_sum(a.signal, 0.5, 1)


def test_strong_sum_terms_match_direct_oracle():
    g = walsh(4)
    a = random_atom(g, 0.5, 1, seed=2)
    c = strong_sum_curve(a.signal, 0.5, g.size)
    for k in (1, 3, 9, 16):
        direct = lp_power(fejer_mean(a.signal, k), 0.5) / k
        assert c.term[k - 1] == pytest.approx(direct, abs=1e-12)


def test_atoms_have_vanishing_low_fejer_means():
    g = walsh(7)
    for e in atom_suite_entries(g.N, 12, 0.5, seed=3):
        a = atom_from_entry(e, g)
        ns = np.arange(1, g.M[a.depth] + 1)
        assert np.abs(fejer_means(forward(a.signal), ns)).max() <= 1e-10


def test_strong_sum_suite_reports_sup():
    g = walsh(5)
    atoms = [random_atom(g, 0.5, d, seed=d) for d in range(4)]
    rep = strong_sum_suite(atoms, 0.5)
    assert rep.sup == max(rep.sup_per_atom) and np.isfinite(rep.sup)
    assert rep.log_power == 1 and rep.log_convention == "natural"


def test_deviation_sum_examples():
    g = walsh(6)
    c = Signal(g, np.full(g.size, 1.5))
    # sigma_k c = c up to rounding of order 1e-16, which the square root lifts to about 1e-8
    assert np.abs(deviation_curve(c, g.size).partial_sum).max() <= 1e-7
    psi1 = character(1, g)
    curve = deviation_curve(psi1, g.size)
    direct = np.mean(np.sqrt(np.abs(fejer_mean(psi1, 7).values - psi1.values))) / 7
    assert curve.term[6] == pytest.approx(direct)
    tail = curve.normalized[4:]
    assert np.all(np.diff(tail) < 0)
    assert deviation_sum(psi1, g.size) < deviation_sum(psi1, g.M[g.N - 2])


def test_A02_examples():
    g = walsh(6)
    assert in_A02(5, g) and not in_A02(7, g) and in_A02(13, g)
    assert not in_A02(0, g)
    members = A02_members(g)
    assert list(members) == [n for n in range(g.size) if in_A02(n, g)]


def test_parse_phi():
    assert parse_phi("pow:0.75")(16) == pytest.approx(8)
    assert parse_phi("log")(1) == 1
    assert parse_phi("const:2")(100) == 2
    for bad in ("pow", "exp:1", "const:0.5", "pow:-1"):
        with pytest.raises(ValueError):
            parse_phi(bad)


def test_select_alphas_examples():
    g = walsh(10)
    sel = select_alphas(0.25, parse_phi("pow:0.75"), g)
    assert sel.orders and all(t >= 2 for t in sel.orders)
    growth = [sel.growth[t] for t in sel.orders]
    assert all(b > a for a, b in zip(growth, growth[1:]))
    for t in sel.orders:
        expect = g.M[t] ** 0.75 / math.sqrt(g.M[t + 1] ** 0.75)
        assert sel.growth[t] == pytest.approx(expect)
    assert sel.partial_sum <= 10.0
    with pytest.raises(SelectionFailureError, match="summand cap"):
        select_alphas(0.25, parse_phi("pow:1.5"), g)
    with pytest.raises(InvalidExponentError):
        select_alphas(0.5, parse_phi("pow:0.75"), g)


@pytest.fixture(scope="module")
def cex8():
    g = walsh(8)
    phi = parse_phi("pow:0.75")
    sel = select_alphas(0.25, phi, g)
    return build_counterexample(CounterexampleSpec(0.25, phi, tuple(sel.orders), g.N), g)


def test_counterexample_atoms_and_decomposition(cex8):
    assert all(not a.violations() for a in cex8.atoms)
    for a, t in zip(cex8.atoms, cex8.orders):
        assert a.depth == t
    rep = verify_counterexample_decomposition(cex8)
    assert rep.holds
    assert rep.ratio <= 1 + 1e-9


def test_counterexample_coefficients(cex8):
    expect = expected_coefficients(cex8)
    scale = np.abs(expect).max()
    assert np.abs(cex8.spectrum.coeffs - expect).max() <= 1e-9 * scale
    outside = expect == 0
    assert np.abs(cex8.spectrum.coeffs[outside]).max() <= 1e-9 * scale
    t = cex8.orders[0]
    assert cex8.coeff[t] == pytest.approx(float(2 ** (t + 1)) ** (0.75 / 0.5))


def test_split_example_alpha5():
    g = walsh(6)
    phi = parse_phi("pow:0.75")
    cex = build_counterexample(CounterexampleSpec(0.25, phi, (2, 3, 4), 6), g)
    rep = sigma_split_check(cex, 5)
    assert rep.I_exact_zero and rep.max_abs_I == 0
    assert rep.min_II2_ratio >= 1 - 1e-9 and rep.passed
    # independent oracle: sigma_5 f as the plain average of S_1 f .. S_5 f on I_2^{0,1}
    xs = region_I2_01(g)
    sig = fejer_mean(cex.signal, 5).values[xs]
    assert np.abs(np.abs(sig) - cex.coeff[2] / 5).max() <= 1e-9 * cex.coeff[2]
    with pytest.raises(HypothesisViolationError):
        sigma_split_check(cex, 7)


def test_split_scan_all_alphas(cex8):
    reps = split_scan(cex8)
    assert reps and all(r.passed and r.I_exact_zero and r.II1_exact_zero for r in reps)
    assert {r.alpha for r in reps} == {int(a) for t in cex8.orders
                                       for a in A02_members(cex8.spec, cex8.spec.M[t] + 1, cex8.spec.M[t + 1])}


def test_divergence_blocks(cex8):
    rep = divergence_sum(cex8, 0.25, parse_phi("pow:0.75"))
    inc = [rep.blocks[t] for t in cex8.orders]
    assert all(b > a for a, b in zip(inc, inc[1:]))
    consts = list(rep.lower_bound_constants.values())
    assert max(consts) <= 2 * min(consts)
    assert np.all(np.diff(rep.curve.partial_sum) >= 0)


def test_divergence_with_slower_weight():
    g = walsh(9)
    phi = parse_phi("pow:0.75")  # n^(1-p) at p = 1/4
    sel = select_alphas(0.25, phi, g)
    cex = build_counterexample(CounterexampleSpec(0.25, phi, tuple(sel.orders), g.N), g)
    inc = list(divergence_sum(cex, 0.25, phi).blocks.values())
    assert len(inc) >= 3 and all(b > a for a, b in zip(inc, inc[1:]))
