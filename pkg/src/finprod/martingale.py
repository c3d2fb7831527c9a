"""Generalized martingale difference families and the norms built on them.

A difference family is a list of pairs (T_i, boundary_i) with
boundary_i <= T_i such that every coordinate subset lies between exactly
one pair. The difference for item i applies (id - E) on the boundary,
identity on the interior of T_i, and E outside T_i; summing the
differences over a valid family reproduces the identity operator.

The stock families:
  linear    T_k = [1, k], boundary {k}           (natural filtration)
  reversed  T_k = [k, N], boundary {k}
  double    T = [a, b],  boundary {a, b}
  m-last    boundary A for all |A| <= m, with T_A widened to
            [1, min A - 1] union A when |A| = m
plus the empty item (T, boundary) = (0, 0) stored explicitly so the
telescoping sum is literally the identity and |Ef| enters every H^1 norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .space import (
    GuardExceededError,
    ProductSpace,
    TensorFunction,
    conditional_expectation,
)

VALIDATE_MAX_COORDS = 20


@dataclass(frozen=True)
class DifferenceFamily:
    n_coords: int
    items: tuple  # of (T: frozenset, boundary: frozenset)
    kind: str = "custom"

    def to_json(self) -> dict:
        return {
            "N": self.n_coords,
            "items": [
                {"T": sorted(T), "boundary": sorted(b)} for T, b in self.items
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "DifferenceFamily":
        items = tuple(
            (frozenset(it["T"]), frozenset(it["boundary"])) for it in obj["items"]
        )
        return DifferenceFamily(int(obj["N"]), items)


def linear_family(N: int) -> DifferenceFamily:
    if N < 1:
        raise ValueError("N must be >= 1")
    items = [(frozenset(), frozenset())]
    for k in range(1, N + 1):
        items.append((frozenset(range(1, k + 1)), frozenset({k})))
    return DifferenceFamily(N, tuple(items), kind="linear")


def reversed_family(N: int) -> DifferenceFamily:
    if N < 1:
        raise ValueError("N must be >= 1")
    items = [(frozenset(), frozenset())]
    for k in range(N, 0, -1):
        items.append((frozenset(range(k, N + 1)), frozenset({k})))
    return DifferenceFamily(N, tuple(items), kind="reversed")


def double_family(N: int) -> DifferenceFamily:
    if N < 1:
        raise ValueError("N must be >= 1")
    items = [(frozenset(), frozenset())]
    for a in range(1, N + 1):
        for b in range(a, N + 1):
            items.append((frozenset(range(a, b + 1)), frozenset({a, b})))
    return DifferenceFamily(N, tuple(items), kind="double")


def mlast_family(N: int, m: int) -> DifferenceFamily:
    if N < 1 or m < 1:
        raise ValueError("need N >= 1 and m >= 1")
    items = []
    for size in range(min(m, N) + 1):
        for A in combinations(range(1, N + 1), size):
            boundary = frozenset(A)
            if size == m:
                T = frozenset(range(1, min(A))) | boundary
            else:
                T = boundary
            items.append((T, boundary))
    return DifferenceFamily(N, tuple(items), kind="mlast")


def validate_family(family: DifferenceFamily) -> bool:
    """Exhaustive uniqueness check over all 2^N coordinate subsets."""
    N = family.n_coords
    if N > VALIDATE_MAX_COORDS:
        raise GuardExceededError(
            f"validation guarded at {VALIDATE_MAX_COORDS} coordinates"
        )
    for T, boundary in family.items:
        if not boundary <= T:
            return False
        if not T <= set(range(1, N + 1)):
            return False
    for mask in range(1 << N):
        A = {j + 1 for j in range(N) if mask >> j & 1}
        hits = sum(1 for T, b in family.items if b <= A <= T)
        if hits != 1:
            return False
    return True


@dataclass(frozen=True, eq=False)
class DifferenceSet:
    """One function split into its family differences, aligned with items."""

    family: DifferenceFamily
    parts: tuple  # of TensorFunction

    def total(self) -> TensorFunction:
        out = self.parts[0]
        for p in self.parts[1:]:
            out = out + p
        return out


def family_difference(
    f: TensorFunction, family: DifferenceFamily, index: int
) -> TensorFunction:
    """The single difference for item `index`."""
    T, boundary = family.items[index]
    space = f.space
    out = f.grid
    for j in range(1, space.n_coords + 1):
        w = space.factor_weights(j)
        if j in boundary:
            red = (out * w.reshape(_axshape(out.ndim, j - 1, w.shape[0]))).sum(
                axis=j - 1, keepdims=True
            )
            out = out - np.broadcast_to(red, out.shape)
        elif j not in T:
            red = (out * w.reshape(_axshape(out.ndim, j - 1, w.shape[0]))).sum(
                axis=j - 1, keepdims=True
            )
            out = np.broadcast_to(red, out.shape)
    return TensorFunction(space, out.reshape(-1).copy())


def _axshape(ndim: int, axis: int, size: int) -> list[int]:
    shape = [1] * ndim
    shape[axis] = size
    return shape


def family_differences(f: TensorFunction, family: DifferenceFamily) -> DifferenceSet:
    if family.n_coords != f.space.n_coords:
        raise ValueError("family and function disagree on coordinate count")
    if not validate_family(family):
        raise ValueError("family fails the uniqueness condition")
    parts = tuple(
        family_difference(f, family, i) for i in range(len(family.items))
    )
    return DifferenceSet(family, parts)


def double_difference_four_term(f: TensorFunction, a: int, b: int) -> TensorFunction:
    """Interval difference via the four conditional expectations.

    Empty intervals fall back to the global mean, which is what makes the
    single-point case collapse to the one-coordinate component.
    """
    if not 1 <= a <= b <= f.space.n_coords:
        raise ValueError("need 1 <= a <= b <= N")

    def e_interval(lo: int, hi: int) -> TensorFunction:
        if lo > hi:
            return conditional_expectation(f, ())
        return conditional_expectation(f, range(lo, hi + 1))

    return (
        e_interval(a + 1, b - 1)
        + e_interval(a, b)
        - e_interval(a + 1, b)
        - e_interval(a, b - 1)
    )


# ---------------------------------------------------------------------------
# square and maximal functions, H^1 / BMO norms
# ---------------------------------------------------------------------------


def _pointwise_l2(parts: Sequence[TensorFunction]) -> np.ndarray:
    total = None
    for p in parts:
        sq = np.abs(np.asarray(p.values, dtype=complex)) ** 2
        total = sq if total is None else total + sq
    return np.sqrt(total.real)


def _chain_levels(family: DifferenceFamily) -> list[frozenset]:
    """T-sets ordered by inclusion; only defined for linearly ordered families."""
    tsets = sorted((T for T, _ in family.items), key=len)
    for small, big in zip(tsets, tsets[1:]):
        if not small <= big:
            raise ValueError("family is not linearly ordered")
    return tsets


def square_and_maximal(
    f: TensorFunction, family: DifferenceFamily
) -> tuple[TensorFunction, TensorFunction]:
    """Square function over the family differences and the running-mean
    maximal function along the family's chain of T-sets."""
    diffs = family_differences(f, family)
    sf = _pointwise_l2(diffs.parts)

    star = None
    for T in _chain_levels(family):
        level = np.abs(
            np.asarray(conditional_expectation(f, T).values, dtype=complex)
        )
        star = level if star is None else np.maximum(star, level)
    space = f.space
    return (
        TensorFunction(_real_view(space), sf),
        TensorFunction(_real_view(space), star.real),
    )


def _real_view(space: ProductSpace) -> ProductSpace:
    # square/maximal functions are real floats whatever the input mode
    from .space import REAL, make_product_space

    return make_product_space(
        [[float(w) for w in f.weights] for f in space.factors], REAL
    )


def h1_norm(f: TensorFunction, family: DifferenceFamily) -> float:
    """Expected pointwise l2 across all family differences."""
    diffs = family_differences(f, family)
    sf = _pointwise_l2(diffs.parts)
    w = f.space.atom_weights.astype(np.float64)
    return float((w * sf).sum())


def hp_norm(f: TensorFunction, family: DifferenceFamily, p: float) -> float:
    """E[(sum |Delta_i f|^2)^(p/2)]^(1/p); p = 1 recovers h1_norm."""
    if p < 1:
        raise ValueError("p must be >= 1")
    diffs = family_differences(f, family)
    sf = _pointwise_l2(diffs.parts)
    w = f.space.atom_weights.astype(np.float64)
    return float(((w * sf**p).sum()) ** (1.0 / p))


def bmo_norm(g: TensorFunction, family: DifferenceFamily) -> float:
    """Conditional tail square-function norm over the linear filtration."""
    if family.kind != "linear":
        raise ValueError("the BMO norm is defined for the linear family")
    diffs = family_differences(g, family)
    space = g.space
    w = space.atom_weights.astype(np.float64)
    positive = w > 0
    best = 0.0
    real_space = _real_view(space)
    # items are ordered (empty, level 1, ..., level N)
    for k in range(len(family.items)):
        tail = None
        for part in diffs.parts[k:]:
            sq = np.abs(np.asarray(part.values, dtype=complex)) ** 2
            tail = sq if tail is None else tail + sq
        cond = conditional_expectation(
            TensorFunction(real_space, tail.real), range(1, k + 1)
        )
        level = float(np.sqrt(np.max(cond.values[positive])))
        best = max(best, level)
    return best


def lepingle_check(funcs: Sequence[TensorFunction]) -> dict:
    """Both sides of the adapted-sequence comparison: the raw square sum
    against the single-coordinate conditioned one."""
    if not funcs:
        raise ValueError("need at least one function")
    space = funcs[0].space
    for n, fn in enumerate(funcs, start=1):
        fixed = conditional_expectation(fn, range(1, n + 1))
        gap = np.max(np.abs(np.asarray(fixed.values - fn.values, dtype=complex)), initial=0.0)
        if gap > 1e-10:
            raise ValueError(f"function {n} is not measurable at level {n} (gap {gap})")
    w = space.atom_weights.astype(np.float64)
    lhs = float((w * _pointwise_l2(funcs)).sum())
    conditioned = [conditional_expectation(fn, {n}) for n, fn in enumerate(funcs, start=1)]
    rhs = float((w * _pointwise_l2(conditioned)).sum())
    return {"lhs": lhs, "rhs": rhs}
