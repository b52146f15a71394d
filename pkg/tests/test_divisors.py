"""Divisor enumeration, classification, and resonant-set measures."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgnls.divisors import (IndexPair, ResonantQuery, S_CLASSES,
                            cantor_excision, center_pair_correction,
                            classify_pair, divisor, divisor_parts,
                            enumerate_ell, is_resonant, iter_k, k0_floor_scan,
                            make_pair, measure_estimate_grid,
                            measure_estimate_mc, nongauge_scan,
                            s8_localization, sample_xi, threshold,
                            weight_w, wilson_interval)
from kgnls.frequencies import build_model

J3 = (1, 2, 3)


def small_model(c=10.0, M=20, R=1e-2):
    return build_model(c, J3, M, R)


def brute_force_ells(k, J, M):
    """Independent enumeration: all ell with |ell|_1 <= 2 supported on the
    normal modes, momentum cancelling <k, J>."""
    m = sum(int(kv) * j for kv, j in zip(k, J))
    normal = [j for j in range(-M, M + 1) if j not in set(J)]
    out = []
    if m == 0 and any(k):
        out.append({})
    for a in normal:
        for v in (-2, -1, 1, 2):
            if a * v + m == 0:
                out.append({a: v})
    for a, b in itertools.combinations(normal, 2):
        for va, vb in itertools.product((-1, 1), repeat=2):
            if a * va + b * vb + m == 0:
                out.append({a: va, b: vb})
    return out


@pytest.mark.parametrize("k", [(0, 0, 0), (1, 0, 0), (1, -1, 0), (2, -1, -1)])
def test_enumerate_ell_matches_brute_force(k):
    M = 12
    got = enumerate_ell(np.array(k), J3, M)
    want = brute_force_ells(k, J3, M)
    key = lambda d: tuple(sorted(d.items()))  # noqa: E731
    assert sorted(map(key, got)) == sorted(map(key, want))


def test_enumerated_pairs_have_zero_momentum():
    for k in iter_k(3, 2):
        for ell in enumerate_ell(k, J3, 10):
            mom = sum(int(kv) * j for kv, j in zip(k, J3)) \
                + sum(a * v for a, v in ell.items())
            assert mom == 0


def test_pair_validation():
    with pytest.raises(ValueError):
        make_pair((0, 0, 0), {}, J3)            # trivial pair rejected
    with pytest.raises(ValueError):
        make_pair((1, 0, 0), {5: 2, 6: 1}, J3)  # |ell|_1 > 2
    p = make_pair((1, -1, 0), {-1: -1}, J3)
    assert p.in_ZM and p.k_l1 == 2 and p.ell_l1 == 1


def test_classification_is_total_and_exclusive():
    c = 10.0
    for k in iter_k(3, 1):
        for ell in enumerate_ell(k, J3, 20):
            if not any(k) and not ell:
                continue
            if not ell:
                continue
            pair = make_pair(k, ell, J3)
            label = classify_pair(pair, c)
            assert label in S_CLASSES


def test_classification_examples():
    c = 4.0
    # single support -> S0
    assert classify_pair(make_pair((1, 0, 0), {-1: 1}, J3), c) == "S0"
    # every taxonomy branch is reachable in a broad momentum-zero sweep
    labels = {}
    for k in iter_k(3, 3):
        for ell in enumerate_ell(k, J3, 40):
            if not ell:
                continue
            pair = make_pair(k, ell, J3)
            labels.setdefault(classify_pair(pair, c), pair)
    assert {"S0", "S1", "S2", "S6"} <= set(labels)
    if "S8" in labels:
        p = labels["S8"]
        loc = s8_localization(p, c)
        assert set(loc["offsets"]) == set(p.ell_dict)


def test_divisor_affine_in_xi():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    rng = np.random.default_rng(0)
    x0 = model.xi_lo.copy()
    d0 = divisor(model, x0, pair)
    # finite differences recover the gradient implied by two evaluations
    for i in range(model.N):
        x1 = x0.copy()
        step = (model.xi_hi[i] - model.xi_lo[i])
        x1[i] += step
        g = (divisor(model, x1, pair) - d0) / step
        x2 = x0.copy()
        x2[i] += 0.5 * step
        mid = divisor(model, x2, pair)
        assert abs(mid - (d0 + 0.5 * step * g)) < 1e-9 * max(1.0, abs(d0))


def test_divisor_parts_decomposition():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    xi = 0.5 * (model.xi_lo + model.xi_hi)
    parts = divisor_parts(model, xi, pair)
    assert abs(parts["total"] - divisor(model, xi, pair)) < 1e-9
    assert parts["gauge"] == pair.gauge_sum * model.c ** 2


def test_threshold_weight_convention():
    model = small_model()
    q = ResonantQuery(alpha=1e-3, tau=2.0, theta=0.5)
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    kb = math.sqrt(1.0 + pair.k_l1 ** 2)
    expect = 1e-3 / (kb ** 2 * weight_w(model, {-1: -1}) ** 0.5)
    assert abs(threshold(model, q, pair) - expect) < 1e-15
    assert weight_w(model, {}) == 1.0


def test_wilson_interval_brackets_fraction():
    lo, hi = wilson_interval(30, 100)
    assert lo < 0.3 < hi
    assert wilson_interval(0, 100)[0] <= 1e-12
    assert wilson_interval(100, 100)[1] <= 1.0


def test_center_correction_zeroes_divisor():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    centered = center_pair_correction(model, pair)
    xi_c = 0.5 * (model.xi_lo + model.xi_hi)
    assert abs(divisor(centered, xi_c, pair)) < 1e-9
    assert model.delta is None                    # original untouched


def test_mc_fraction_monotone_in_alpha():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    centered = center_pair_correction(model, pair)
    fracs = []
    for alpha in (1e-7, 3e-7, 1e-6):
        q = ResonantQuery(alpha=alpha, tau=2.0, samples=2000, seed=3)
        res = measure_estimate_mc(centered, pair.k, q,
                                  ells=[pair.ell_dict])
        assert res.ci_lo <= res.fraction <= res.ci_hi
        fracs.append(res.fraction)
    assert fracs == sorted(fracs)
    assert fracs[-1] > 0


def test_mc_grid_agreement():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    centered = center_pair_correction(model, pair)
    q = ResonantQuery(alpha=1e-6, tau=2.0, samples=4000, seed=5)
    mc = measure_estimate_mc(centered, pair.k, q, ells=[pair.ell_dict])
    grid = measure_estimate_grid(centered, pair.k, q, pts_per_dim=16,
                                 ells=[pair.ell_dict])
    assert abs(mc.fraction - grid) < 0.02


def test_mc_reproducible():
    model = small_model()
    q = ResonantQuery(alpha=1e-6, tau=2.0, samples=1000, seed=11)
    a = measure_estimate_mc(model, (1, -1, 0), q)
    b = measure_estimate_mc(model, (1, -1, 0), q)
    assert a.fraction == b.fraction and a.hits == b.hits


def test_nongauge_scan_positive_floor():
    for c in (25.0, 100.0):
        rep = nongauge_scan(build_model(c, J3, 20, 1e-2), kappa=0.5)
        assert rep["min_over_c2"] > 0.5


def test_k0_floor_positive():
    rep = k0_floor_scan(small_model())
    assert rep["floor"] > 0


def test_cantor_excision_monotone_in_alpha():
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    centered = center_pair_correction(model, pair)
    prev = -1.0
    for alpha in (1e-7, 1e-6):
        q = ResonantQuery(alpha=alpha, tau=2.0, samples=2000, seed=9)
        rep = cantor_excision(centered, q, K_cut=0, kmax=2)
        assert 0.0 <= rep["excised_fraction"] <= 1.0
        assert rep["excised_fraction"] >= prev
        prev = rep["excised_fraction"]
    assert prev > 0


@given(st.integers(0, 10 ** 6), st.floats(1e-8, 1e-5))
@settings(max_examples=10, deadline=None)
def test_resonant_set_nesting(seed, alpha):
    # R(alpha) subset of R(2 alpha) pointwise
    model = small_model()
    pair = make_pair((1, -1, 0), {-1: -1}, J3)
    centered = center_pair_correction(model, pair)
    xi = sample_xi(centered, 50, seed)
    q1 = ResonantQuery(alpha=alpha, tau=2.0)
    q2 = ResonantQuery(alpha=2 * alpha, tau=2.0)
    for x in xi:
        if is_resonant(centered, x, pair, q1):
            assert is_resonant(centered, x, pair, q2)
