"""Core space: factors, tensor functions, conditional expectations, norms."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finprod import space as sp
from oracles import cond_exp_ref, inner_ref, iter_atoms, lp_ref


def test_two_fair_coins():
    s = sp.uniform_space(2, 2)
    assert s.atom_count == 4
    assert np.allclose(s.atom_weights, 0.25)


def test_biased_product_weights():
    s = sp.make_product_space([(0.3, 0.7)] * 3, sp.REAL)
    assert s.atom_count == 8
    # atom (1,1,1): first outcome on every coordinate
    assert abs(s.atom_weights[0] - 0.027) < 1e-15
    assert abs(s.atom_weights.sum() - 1.0) < 1e-12


def test_weight_sum_violation():
    with pytest.raises(ValueError):
        sp.make_product_space([(0.4, 0.5)], sp.REAL)
    with pytest.raises(ValueError):
        sp.make_product_space([(Fraction(1, 3), Fraction(1, 3))], sp.RATIONAL)


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        sp.finite_factor([-0.5, 1.5], sp.REAL)


def test_atom_guard():
    with pytest.raises(sp.GuardExceededError):
        sp.make_product_space([(0.5, 0.5)] * 4, sp.REAL, max_atoms=8)


def test_single_atom_factor_allowed():
    s = sp.make_product_space([[1.0], (0.5, 0.5)], sp.REAL)
    assert s.atom_count == 2
    f = sp.tensor_function(s, [1.0, 3.0])
    # averaging over the degenerate coordinate is the identity
    g = sp.conditional_expectation(f, [2])
    assert np.allclose(g.values, f.values)


def test_conditional_expectation_identity_and_mean():
    s = sp.uniform_space(3, 2)
    rng = np.random.default_rng(0)
    f = sp.tensor_function(s, rng.standard_normal(9))
    assert np.allclose(sp.conditional_expectation(f, [1, 2]).values, f.values)
    g = sp.conditional_expectation(f, [])
    assert np.allclose(g.values, sp.expectation(f))


def test_conditional_expectation_example():
    # x1 + x2 with outcomes 0,1: keeping coordinate 1 gives x1 + 1/2
    s = sp.uniform_space(2, 2)
    f = sp.tensor_function(s, [0, 1, 1, 2])
    g = sp.conditional_expectation(f, [1])
    assert np.allclose(g.values, [0.5, 0.5, 1.5, 1.5])


def test_conditional_expectation_against_oracle():
    rng = np.random.default_rng(1)
    s = sp.make_product_space([(0.3, 0.7), (0.2, 0.5, 0.3), (0.5, 0.5)], sp.REAL)
    f = sp.tensor_function(s, rng.standard_normal(s.atom_count))
    for k in range(4):
        for A in combinations([1, 2, 3], k):
            fast = sp.conditional_expectation(f, A).values
            ref = cond_exp_ref(f, A)
            assert np.allclose(fast, ref, atol=1e-12), A


def test_projection_idempotent_rational_exact():
    rng = np.random.default_rng(2)
    s = sp.uniform_space(2, 3, sp.RATIONAL)
    f = sp.tensor_function(s, [Fraction(int(v), 8) for v in rng.integers(-16, 16, 8)])
    g = sp.conditional_expectation(f, [1, 3])
    gg = sp.conditional_expectation(g, [1, 3])
    assert sp.values_allclose(g, gg)


def test_tower_property_exhaustive():
    rng = np.random.default_rng(3)
    for factors in ([(0.5, 0.5)] * 3, [(0.3, 0.7)] * 2 + [(0.25, 0.25, 0.5)]):
        s = sp.make_product_space(factors, sp.REAL)
        f = sp.tensor_function(s, rng.standard_normal(s.atom_count))
        coords = list(range(1, s.n_coords + 1))
        subsets = [
            tuple(a) for k in range(len(coords) + 1) for a in combinations(coords, k)
        ]
        for A in subsets:
            for B in subsets:
                lhs = sp.conditional_expectation(sp.conditional_expectation(f, B), A)
                rhs = sp.conditional_expectation(f, set(A) & set(B))
                assert np.allclose(lhs.values, rhs.values, atol=1e-12), (A, B)


def test_lp_examples():
    s = sp.uniform_space(2, 1)
    one = sp.constant_function(s, 1.0)
    for p in (1, 2, 7.5, "sup"):
        assert abs(sp.lp_norm(one, p) - 1.0) < 1e-15
    f = sp.tensor_function(s, [0, 2])
    assert abs(sp.lp_norm(f, 1) - 1.0) < 1e-15
    assert abs(sp.lp_norm(f, 2) - np.sqrt(2)) < 1e-15
    assert sp.lp_norm(f, "sup") == 2.0
    with pytest.raises(ValueError):
        sp.lp_norm(f, 0.5)


def test_lp_against_oracle():
    rng = np.random.default_rng(4)
    s = sp.make_product_space([(0.3, 0.7), (0.5, 0.5)], sp.COMPLEX)
    f = sp.tensor_function(s, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    for p in (1, 2, 3, "sup"):
        assert abs(sp.lp_norm(f, p) - lp_ref(f, p)) < 1e-12


def test_sup_ignores_null_atoms():
    s = sp.make_product_space([(0.0, 1.0)], sp.REAL)
    f = sp.tensor_function(s, [100.0, 1.0])
    assert sp.lp_norm(f, "sup") == 1.0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4),
    st.floats(1, 8),
    st.floats(1, 8),
)
def test_lp_monotone_in_p(vals, p1, p2):
    s = sp.uniform_space(2, 2)
    f = sp.tensor_function(s, vals)
    lo, hi = sorted((p1, p2))
    assert sp.lp_norm(f, lo) <= sp.lp_norm(f, hi) + 1e-12


def test_inner_product_examples():
    s = sp.uniform_space(2, 2)
    f = sp.tensor_function(s, [0.0, 1.0, 2.0, 3.0])
    assert abs(sp.inner_product(f, sp.constant_function(s, 1.0)) - sp.expectation(f)) < 1e-15
    r1 = sp.coordinate_function(s, 1, [1, -1])
    r2 = sp.coordinate_function(s, 2, [1, -1])
    assert sp.inner_product(r1, r2) == 0
    assert sp.inner_product(r1, r1) == 1
    ref = inner_ref(f, r1)
    assert abs(sp.inner_product(f, r1) - ref) < 1e-15


def test_inner_product_conjugates_complex():
    s = sp.uniform_space(2, 1, sp.COMPLEX)
    f = sp.tensor_function(s, [1j, 0])
    assert abs(sp.inner_product(f, f) - 0.5) < 1e-15


def test_space_mismatch():
    a = sp.uniform_space(2, 1)
    b = sp.uniform_space(3, 1)
    with pytest.raises(sp.SpaceMismatchError):
        sp.inner_product(
            sp.constant_function(a, 1.0), sp.constant_function(b, 1.0)
        )


def test_tensor_product_examples():
    s = sp.uniform_space(2, 1)
    f = sp.tensor_function(s, [0, 2])
    one = sp.constant_function(s, 1.0)
    ext = sp.tensor_product(f, one)
    assert np.allclose(ext.values, [0, 0, 2, 2])
    ff = sp.tensor_product(f, f)
    assert np.allclose(ff.values, [0, 0, 0, 4])
    assert abs(sp.lp_norm(ff, 1) - sp.lp_norm(f, 1) ** 2) < 1e-15


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=2),
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3),
)
def test_tensor_norm_multiplicative(avals, bvals):
    sa = sp.uniform_space(2, 1)
    sb = sp.uniform_space(3, 1)
    f = sp.tensor_function(sa, avals)
    g = sp.tensor_function(sb, bvals)
    fg = sp.tensor_product(f, g)
    for p in (1, 2, "sup"):
        assert abs(sp.lp_norm(fg, p) - sp.lp_norm(f, p) * sp.lp_norm(g, p)) < 1e-10


def test_tensor_mode_mismatch():
    f = sp.constant_function(sp.uniform_space(2, 1, sp.REAL), 1.0)
    g = sp.constant_function(sp.uniform_space(2, 1, sp.COMPLEX), 1.0)
    with pytest.raises(sp.SpaceMismatchError):
        sp.tensor_product(f, g)


def test_rational_values_only_in_rational_mode():
    s = sp.uniform_space(2, 1, sp.REAL)
    with pytest.raises(TypeError):
        sp.tensor_function(sp.uniform_space(2, 1, sp.RATIONAL), [0.5, object()])
    with pytest.raises(ValueError):
        sp.tensor_function(s, [1 + 1j, 0])
    with pytest.raises(ValueError):
        sp.tensor_function(s, [Fraction(1, 3), 0])


def test_json_round_trip_float_and_complex():
    rng = np.random.default_rng(5)
    s = sp.make_product_space([(0.3, 0.7), (0.5, 0.5)], sp.REAL)
    f = sp.tensor_function(s, rng.standard_normal(4))
    g = sp.load_function(sp.dump_function(f))
    assert np.array_equal(f.values, g.values)

    sc = sp.uniform_space(2, 2, sp.COMPLEX)
    h = sp.tensor_function(sc, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    h2 = sp.load_function(sp.dump_function(h))
    assert np.array_equal(h.values, h2.values)


def test_json_round_trip_rational_bit_exact():
    s = sp.make_product_space(
        [(Fraction(1, 3), Fraction(2, 3)), (Fraction(1, 2), Fraction(1, 2))],
        sp.RATIONAL,
    )
    f = sp.tensor_function(s, [Fraction(22, 7), Fraction(-3, 11), Fraction(0), Fraction(5)])
    g = sp.load_function(sp.dump_function(f))
    assert list(g.values) == list(f.values)
    assert all(isinstance(v, Fraction) for v in g.values)


def test_atom_iteration_matches_layout():
    # last coordinate fastest: atom order of Z_2 x Z_3
    s = sp.make_product_space([(0.5, 0.5), (0.2, 0.3, 0.5)], sp.REAL)
    idxs = [idx for idx, _, _ in iter_atoms(s)]
    assert idxs == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    ws = [w for _, _, w in iter_atoms(s)]
    assert np.allclose(s.atom_weights, ws)
