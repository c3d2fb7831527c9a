"""Walsh-Hadamard transform, its naive oracle, and sign-pattern enumeration."""

import numpy as np
import pytest

from finprod import hoeffding as hf
from finprod import space as sp
from finprod import walsh as wl
from oracles import random_rational_function, walsh_coeff_ref


def test_transform_examples():
    s = sp.uniform_space(2, 2)
    one = sp.constant_function(s, 1.0)
    spec = wl.walsh_hadamard_transform(one)
    assert np.allclose(spec.coeffs, [1, 0, 0, 0])

    r1 = sp.coordinate_function(s, 1, [1, -1])
    r2 = sp.coordinate_function(s, 2, [1, -1])
    rr = sp.tensor_function(s, r1.values * r2.values)
    spec_rr = wl.walsh_hadamard_transform(rr)
    assert np.allclose(spec_rr.coeffs, [0, 0, 0, 1])

    f = sp.tensor_function(s, [0, 1, 1, 2])
    spec_f = wl.walsh_hadamard_transform(f)
    assert np.allclose(spec_f.coeffs, [1, -0.5, -0.5, 0])


def test_butterfly_matches_naive_oracle():
    rng = np.random.default_rng(20)
    for N in (1, 2, 3, 5):
        s = sp.uniform_space(2, N)
        f = sp.tensor_function(s, rng.standard_normal(1 << N))
        fast = wl.walsh_hadamard_transform(f).coeffs
        slow = wl.naive_walsh_transform(f).coeffs
        assert np.allclose(fast, slow, atol=1e-12)
        for mask in range(1 << N):
            assert abs(fast[mask] - walsh_coeff_ref(f, mask)) < 1e-12


def test_round_trip_exact_in_rational_mode():
    rng = np.random.default_rng(21)
    s = sp.uniform_space(2, 4, sp.RATIONAL)
    f = random_rational_function(s, rng)
    spec = wl.walsh_hadamard_transform(f)
    back = wl.inverse_walsh_hadamard(spec, s)
    assert sp.values_allclose(f, back)
    # analysis then synthesis of the spectrum scales by 2^N on the raw pair
    twice = wl.walsh_hadamard_transform(back)
    assert list(twice.coeffs) == list(spec.coeffs)


def test_parseval():
    rng = np.random.default_rng(22)
    s = sp.uniform_space(2, 6)
    f = sp.tensor_function(s, rng.standard_normal(64))
    assert wl.parseval_gap(f) < 1e-12


def test_rejects_wrong_spaces():
    with pytest.raises(ValueError):
        wl.walsh_hadamard_transform(
            sp.constant_function(sp.uniform_space(3, 2), 1.0)
        )
    with pytest.raises(ValueError):
        wl.walsh_hadamard_transform(
            sp.constant_function(sp.make_product_space([(0.3, 0.7)], sp.REAL), 1.0)
        )


def test_projection_examples():
    s = sp.uniform_space(2, 2)
    f = sp.tensor_function(s, [0, 1, 1, 2])
    p0 = wl.walsh_projection(f, 0)
    assert np.allclose(p0.values, 1.0)

    r1 = sp.coordinate_function(s, 1, [1, -1])
    rr = sp.tensor_function(s, r1.values * sp.coordinate_function(s, 2, [1, -1]).values)
    g = sp.tensor_function(s, r1.values + rr.values)
    p1 = wl.walsh_projection(g, 1)
    assert np.allclose(p1.values, r1.values)


def test_projection_equals_multiplicity_projection():
    rng = np.random.default_rng(23)
    for trial in range(50):
        N = 1 + trial % 6
        s = sp.uniform_space(2, N)
        f = sp.tensor_function(s, rng.standard_normal(1 << N))
        m = trial % (N + 1)
        a = wl.walsh_projection(f, m)
        b = hf.project_multiplicity(f, m)
        assert np.allclose(a.values, b.values, atol=1e-12), (N, m)


def test_khintchine_examples():
    assert abs(wl.khintchine_ratio([1.0]) - 1.0) < 1e-15
    assert abs(wl.khintchine_ratio([1.0, 1.0]) - 1 / np.sqrt(2)) < 1e-12
    assert abs(wl.khintchine_ratio([1.0, 1.0, 1.0, 1.0]) - 0.75) < 1e-12
    with pytest.raises(ValueError):
        wl.khintchine_ratio(list(range(25)))
    with pytest.raises(ValueError):
        wl.khintchine_ratio([0.0, 0.0])


def test_khintchine_envelope_random():
    rng = np.random.default_rng(24)
    lo = 1 / np.sqrt(2)
    for _ in range(200):
        dim = int(rng.integers(1, 13))
        c = rng.standard_normal(dim)
        if np.abs(c).max() == 0:
            continue
        ratio = wl.khintchine_ratio(c)
        assert lo - 1e-9 <= ratio <= 1.0 + 1e-12


def test_spectrum_json():
    s = sp.uniform_space(2, 2)
    f = sp.tensor_function(s, [0, 1, 1, 2])
    doc = wl.walsh_hadamard_transform(f).to_json()
    assert doc["n"] == 2
    assert doc["coeffs"] == [1.0, -0.5, -0.5, 0.0]
