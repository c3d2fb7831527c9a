"""Difference families, telescoping, square/maximal functions, H^1 and BMO."""

from itertools import combinations

import numpy as np
import pytest

from finprod import hoeffding as hf
from finprod import martingale as mg
from finprod import space as sp
from oracles import random_rational_function

ALL_FAMILIES = lambda N: [
    mg.linear_family(N),
    mg.reversed_family(N),
    mg.double_family(N),
    mg.mlast_family(N, 1),
    mg.mlast_family(N, 2),
    mg.mlast_family(N, 3),
]


def test_stock_families_validate():
    for N in range(1, 7):
        for fam in ALL_FAMILIES(N):
            assert mg.validate_family(fam), (fam.kind, N)


def test_linear_family_smallest_case():
    fam = mg.linear_family(1)
    assert fam.items == (
        (frozenset(), frozenset()),
        (frozenset({1}), frozenset({1})),
    )


def test_double_family_two_coords():
    got = set(mg.double_family(2).items)
    assert got == {
        (frozenset(), frozenset()),
        (frozenset({1}), frozenset({1})),
        (frozenset({2}), frozenset({2})),
        (frozenset({1, 2}), frozenset({1, 2})),
    }


def test_mlast_m1_equals_linear():
    for N in range(1, 6):
        assert sorted(mg.mlast_family(N, 1).items) == sorted(mg.linear_family(N).items)


def test_invalid_families_detected():
    missing_empty = mg.DifferenceFamily(
        2, tuple(it for it in mg.linear_family(2).items if it[0])
    )
    assert not mg.validate_family(missing_empty)
    duplicated = mg.DifferenceFamily(
        2, mg.linear_family(2).items + (mg.linear_family(2).items[1],)
    )
    assert not mg.validate_family(duplicated)
    bad_boundary = mg.DifferenceFamily(
        1, ((frozenset(), frozenset()), (frozenset({1}), frozenset({1, 2})))
    )
    assert not mg.validate_family(bad_boundary)


def test_differences_sum_to_identity_exact():
    rng = np.random.default_rng(40)
    s = sp.uniform_space(2, 5, sp.RATIONAL)
    f = random_rational_function(s, rng)
    for fam in ALL_FAMILIES(5):
        ds = mg.family_differences(f, fam)
        assert sp.values_allclose(ds.total(), f), fam.kind


def test_expansion_into_components_exact():
    rng = np.random.default_rng(41)
    s = sp.uniform_space(2, 4, sp.RATIONAL)
    f = random_rational_function(s, rng)
    for fam in ALL_FAMILIES(4):
        for i, (T, bd) in enumerate(fam.items):
            d = mg.family_difference(f, fam, i)
            interior = sorted(T - bd)
            total = None
            for k in range(len(interior) + 1):
                for B in combinations(interior, k):
                    c = hf.hoeffding_component(f, tuple(sorted(bd)) + B)
                    total = c if total is None else total + c
            assert sp.values_allclose(d, total), (fam.kind, T, bd)


def test_double_difference_four_term_identity():
    rng = np.random.default_rng(42)
    s = sp.uniform_space(3, 3)
    f = sp.tensor_function(s, rng.standard_normal(27))
    fam = mg.double_family(3)
    for i, (T, bd) in enumerate(fam.items):
        if not T:
            continue
        a, b = min(T), max(T)
        assert sp.values_allclose(
            mg.family_difference(f, fam, i),
            mg.double_difference_four_term(f, a, b),
            tol=1e-12,
        )
        if a == b:
            assert sp.values_allclose(
                mg.family_difference(f, fam, i),
                hf.hoeffding_component(f, [a]),
                tol=1e-12,
            )


def test_double_differences_pick_extremes():
    # r1 r3 has min 1 and max 3: only the [1,3] interval difference survives
    s = sp.uniform_space(2, 3)
    r1 = sp.coordinate_function(s, 1, [1, -1])
    r3 = sp.coordinate_function(s, 3, [1, -1])
    f = sp.tensor_function(s, r1.values * r3.values)
    ds = mg.family_differences(f, mg.double_family(3))
    for (T, bd), part in zip(ds.family.items, ds.parts):
        if T == frozenset({1, 2, 3}):
            assert np.allclose(part.values, f.values)
        else:
            assert np.allclose(part.values, 0), (T, bd)


def test_mlast_differences_pick_trailing_boundary():
    # a pure sign product lands in the unique item whose boundary is its
    # trailing coordinates (all of them when fewer than m)
    s = sp.uniform_space(2, 4)
    r = [sp.coordinate_function(s, j, [1, -1]) for j in range(1, 5)]
    f = sp.tensor_function(s, r[0].values * r[2].values * r[3].values)  # A = {1,3,4}
    fam = mg.mlast_family(4, 2)
    ds = mg.family_differences(f, fam)
    for (T, bd), part in zip(fam.items, ds.parts):
        if bd == frozenset({3, 4}):
            assert np.allclose(part.values, f.values)
        else:
            assert np.allclose(part.values, 0, atol=1e-12), (T, bd)


def test_constant_goes_to_empty_item():
    s = sp.uniform_space(2, 3)
    c = sp.constant_function(s, 2.0)
    for fam in ALL_FAMILIES(3):
        ds = mg.family_differences(c, fam)
        for (T, bd), part in zip(fam.items, ds.parts):
            if bd == frozenset():
                assert np.allclose(part.values, 2.0)
            else:
                assert np.allclose(part.values, 0)


def test_square_and_maximal_examples():
    s = sp.uniform_space(2, 2)
    r1 = sp.coordinate_function(s, 1, [1, -1])
    r2 = sp.coordinate_function(s, 2, [1, -1])
    rr = sp.tensor_function(s, r1.values * r2.values)
    Sf, fstar = mg.square_and_maximal(rr, mg.linear_family(2))
    assert np.allclose(Sf.values, 1.0)
    assert np.allclose(fstar.values, 1.0)

    c = sp.constant_function(s, -1.5)
    Sc, cstar = mg.square_and_maximal(c, mg.linear_family(2))
    assert np.allclose(Sc.values, 1.5)
    assert np.allclose(cstar.values, 1.5)

    with pytest.raises(ValueError):
        mg.square_and_maximal(rr, mg.double_family(2))


def test_square_function_ignores_level_signs():
    rng = np.random.default_rng(43)
    s = sp.uniform_space(2, 4)
    f = sp.tensor_function(s, rng.standard_normal(16))
    fam = mg.linear_family(4)
    ds = mg.family_differences(f, fam)
    flipped = None
    for eps, part in zip([1, -1, 1, -1, -1], ds.parts):
        term = part * eps
        flipped = term if flipped is None else flipped + term
    S1, _ = mg.square_and_maximal(f, fam)
    S2, _ = mg.square_and_maximal(flipped, fam)
    assert np.allclose(S1.values, S2.values, atol=1e-12)


def test_h1_norm_examples():
    s = sp.uniform_space(2, 2)
    r1 = sp.coordinate_function(s, 1, [1.0, -1.0])
    r2 = sp.coordinate_function(s, 2, [1.0, -1.0])
    rr = sp.tensor_function(s, r1.values * r2.values)
    lin = mg.linear_family(2)
    assert abs(mg.h1_norm(rr, lin) - 1.0) < 1e-12
    assert abs(mg.h1_norm(sp.constant_function(s, 3.0), lin) - 3.0) < 1e-12
    assert abs(mg.h1_norm(r1 + r2, lin) - np.sqrt(2)) < 1e-12


def test_h1_dominates_l1():
    rng = np.random.default_rng(44)
    s = sp.uniform_space(2, 4)
    lin = mg.linear_family(4)
    for _ in range(200):
        f = sp.tensor_function(s, rng.standard_normal(16))
        assert mg.h1_norm(f, lin) >= sp.lp_norm(f, 1) - 1e-10


def test_hp_norm_reduces_to_h1():
    rng = np.random.default_rng(45)
    s = sp.uniform_space(2, 3)
    f = sp.tensor_function(s, rng.standard_normal(8))
    fam = mg.mlast_family(3, 2)
    assert abs(mg.hp_norm(f, fam, 1.0) - mg.h1_norm(f, fam)) < 1e-12
    assert mg.hp_norm(f, fam, 2.0) >= mg.h1_norm(f, fam) - 1e-12


def test_bmo_examples():
    s = sp.uniform_space(2, 2)
    lin = mg.linear_family(2)
    r1 = sp.coordinate_function(s, 1, [1.0, -1.0])
    assert abs(mg.bmo_norm(r1, lin) - 1.0) < 1e-12
    assert abs(mg.bmo_norm(sp.constant_function(s, 2.0), lin) - 2.0) < 1e-12
    with pytest.raises(ValueError):
        mg.bmo_norm(r1, mg.double_family(2))


def test_h1_bmo_duality_sanity():
    rng = np.random.default_rng(46)
    s = sp.uniform_space(2, 4)
    lin = mg.linear_family(4)
    worst = 0.0
    for _ in range(100):
        f = sp.tensor_function(s, rng.standard_normal(16))
        g = sp.tensor_function(s, rng.standard_normal(16))
        pairing = abs(sp.inner_product(f, g))
        bound = mg.h1_norm(f, lin) * mg.bmo_norm(g, lin)
        if bound > 0:
            worst = max(worst, pairing / bound)
    assert worst <= 4.0


def test_projection_compatibility_mlast():
    # differences of the m-last family against multiplicity projections
    rng = np.random.default_rng(47)
    s = sp.uniform_space(2, 4, sp.RATIONAL)
    f = random_rational_function(s, rng)
    for m in (2, 3):
        fam = mg.mlast_family(4, m)
        for mp in range(m):
            pf = hf.project_multiplicity(f, mp)
            for i, (T, bd) in enumerate(fam.items):
                comp = mg.family_difference(pf, fam, i)
                if len(bd) == mp:
                    assert sp.values_allclose(comp, mg.family_difference(f, fam, i))
                else:
                    assert all(v == 0 for v in comp.values), (m, mp, bd)
        # top level: the difference of the projection averages away the head
        pm = hf.project_multiplicity(f, m)
        for i, (T, bd) in enumerate(fam.items):
            if len(bd) != m:
                continue
            lhs = mg.family_difference(pm, fam, i)
            head_gone = sp.conditional_expectation(
                mg.family_difference(f, fam, i), range(min(bd), 5)
            )
            assert sp.values_allclose(lhs, head_gone), (m, bd)


def test_lepingle_check():
    s = sp.uniform_space(2, 3)
    fs = [sp.coordinate_function(s, n, [1.0, -1.0]) for n in (1, 2, 3)]
    out = mg.lepingle_check(fs)
    assert abs(out["lhs"] - out["rhs"]) < 1e-12

    # single function: conditional contraction
    rng = np.random.default_rng(48)
    f1 = sp.tensor_function(s, np.broadcast_to(
        rng.standard_normal((2, 1, 1)), (2, 2, 2)).reshape(-1).copy())
    out1 = mg.lepingle_check([f1])
    assert out1["rhs"] <= out1["lhs"] + 1e-12

    # adaptedness violation: f_1 depending on coordinate 2
    bad = sp.coordinate_function(s, 2, [1.0, -1.0])
    with pytest.raises(ValueError):
        mg.lepingle_check([bad])


def test_lepingle_random_adapted():
    rng = np.random.default_rng(49)
    s = sp.uniform_space(2, 3)
    for _ in range(20):
        fs = []
        for n in (1, 2, 3):
            head = rng.standard_normal((2,) * n)
            grid = np.broadcast_to(head.reshape((2,) * n + (1,) * (3 - n)), (2, 2, 2))
            fs.append(sp.tensor_function(s, grid.reshape(-1).copy()))
        out = mg.lepingle_check(fs)
        assert out["rhs"] <= 2.0 * out["lhs"] + 1e-10


def test_family_json_round_trip():
    fam = mg.mlast_family(3, 2)
    back = mg.DifferenceFamily.from_json(fam.to_json())
    assert sorted(back.items) == sorted(fam.items)
    assert back.n_coords == 3
