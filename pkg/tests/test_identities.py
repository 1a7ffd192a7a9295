from __future__ import annotations

import numpy as np
import pytest

from vilenkin.group import make_group, walsh
from vilenkin.identities import (
    KERNEL_CHECKS,
    check_convolution,
    check_dirichlet_closed,
    check_fast_transform,
    check_fejer_Mn_closed,
    check_fejer_sMn_zero,
    check_orthonormality,
    check_partition,
)
from vilenkin.kernels import kernel_tables

GROUPS = [walsh(6), make_group([2, 3, 4]), make_group([3, 2, 3, 2]), make_group([3, 3, 3, 3])]


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: "x".join(map(str, g.m)))
@pytest.mark.parametrize("name", sorted(KERNEL_CHECKS))
def test_kernel_checks_pass(g, name):
    r = KERNEL_CHECKS[name](g)
    assert r.passed, r.to_json()
    assert r.scanned > 0 and not r.counterexamples


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: "x".join(map(str, g.m)))
def test_structural_checks_pass(g):
    for r in (check_partition(g), check_orthonormality(g), check_fast_transform(g), check_convolution(g, n_signals=3)):
        assert r.passed, r.to_json()


def test_fault_injection_names_the_check():
    g = walsh(5)
    D, K = (t.copy() for t in kernel_tables(g))
    D[6, 3] += 1e-6
    bad = check_dirichlet_closed(g, (D, K))
    assert not bad.passed and bad.counterexamples[0] == [7, 3]
    assert check_fejer_Mn_closed(g, (D, K)).passed
    K[g.M[4] - 1, 5] += 1e-3
    assert not check_fejer_sMn_zero(g, (D, K)).passed or not check_fejer_Mn_closed(g, (D, K)).passed


def test_result_json_shape():
    j = check_dirichlet_closed(walsh(3)).to_json()
    assert {"name", "status", "max_error", "scanned_count", "tolerance", "counterexamples"} <= set(j)
    assert j["status"] == "pass"


def test_counterexamples_truncated_in_json():
    g = walsh(4)
    D, K = (t.copy() for t in kernel_tables(g))
    D += 1.0
    r = check_dirichlet_closed(g, (D, K))
    assert len(r.counterexamples) > 10 and len(r.to_json()["counterexamples"]) == 10
