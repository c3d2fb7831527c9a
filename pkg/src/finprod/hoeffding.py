"""Hoeffding decomposition, multiplicity projections and operator identities.

The component at a coordinate subset A applies (id - E) on each coordinate
of A and E on every other coordinate; these per-coordinate operators
commute, so the sequential form used here is exact. The inclusion-exclusion
form (signed sum of conditional expectations over subsets of A) is kept as
a cross-check oracle.

Identity verification applies both operators to the full indicator basis of
the atom grid; equality on a spanning set is operator equality, and in
rational mode the comparison is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Iterable, Sequence

import numpy as np

from .space import (
    RATIONAL,
    GuardExceededError,
    ProductSpace,
    TensorFunction,
    average_axis,
    conditional_expectation,
    expectation,
    function_to_json,
    lp_norm,
    normalize_subset,
    tensor_power,
    uniform_space,
)

DECOMPOSE_MAX_COORDS = 20

#: identity verification materializes a 4^N-cell basis batch
VERIFY_MAX_COORDS = 12


@dataclass(frozen=True, eq=False)
class HoeffdingComponents:
    """All 2^N components of one function, keyed by sorted coordinate tuples."""

    space: ProductSpace
    components: dict

    def reassemble(self) -> TensorFunction:
        total = None
        for part in self.components.values():
            total = part if total is None else total + part
        return total

    def to_json(self) -> dict:
        subsets = sorted(self.components, key=lambda a: (len(a), a))
        return {
            "subsets": [list(a) for a in subsets],
            "components": [function_to_json(self.components[a]) for a in subsets],
        }


def _zeros_like(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        out = np.empty(arr.shape, dtype=object)
        out[:] = Fraction(0)
        return out
    return np.zeros(arr.shape, dtype=arr.dtype)


def _avg(arr: np.ndarray, axis: int, weights: np.ndarray) -> np.ndarray:
    red = average_axis(arr, axis, weights)
    return np.broadcast_to(red, arr.shape)


def _apply_component_ops(
    arr: np.ndarray,
    block: Sequence[int],
    centered: Iterable[int],
    space: ProductSpace,
    axis_offset: int,
) -> np.ndarray:
    """(id - E) on `centered`, E on the rest of `block`, identity elsewhere.

    `arr` may carry extra leading axes (e.g. a batch of basis functions);
    coordinate j acts on axis j - 1 + axis_offset.
    """
    centered = set(centered)
    out = arr
    for j in block:
        axis = j - 1 + axis_offset
        w = space.factor_weights(j)
        if j in centered:
            out = out - _avg(out, axis, w)
        else:
            out = _avg(out, axis, w)
    return out


def _apply_block_multiplicity(
    arr: np.ndarray,
    block: Sequence[int],
    level: int,
    space: ProductSpace,
    axis_offset: int,
) -> np.ndarray:
    """Multiplicity-`level` projection of the tensor factor over `block`."""
    total = _zeros_like(arr)
    for chosen in combinations(block, level):
        total = total + _apply_component_ops(arr, block, chosen, space, axis_offset)
    return total


def hoeffding_component(f: TensorFunction, subset: Iterable[int]) -> TensorFunction:
    """The component of f at coordinate subset A."""
    space = f.space
    A = normalize_subset(space.n_coords, subset)
    out = _apply_component_ops(f.grid, list(space.coords()), A, space, 0)
    return TensorFunction(space, out.reshape(-1))


def hoeffding_component_ie(f: TensorFunction, subset: Iterable[int]) -> TensorFunction:
    """Inclusion-exclusion oracle: signed sum of E_B over B inside A."""
    space = f.space
    A = normalize_subset(space.n_coords, subset)
    total = None
    for k in range(len(A) + 1):
        for B in combinations(A, k):
            sign = -1 if (len(A) - k) % 2 else 1
            term = conditional_expectation(f, B) * (
                Fraction(sign) if space.scalar_mode == RATIONAL else sign
            )
            total = term if total is None else total + term
    return total


def hoeffding_decompose(
    f: TensorFunction, max_coords: int = DECOMPOSE_MAX_COORDS
) -> HoeffdingComponents:
    """All 2^N components; guarded against large N."""
    n = f.space.n_coords
    if n > max_coords:
        raise GuardExceededError(
            f"full decomposition guarded at {max_coords} coordinates (got {n})"
        )
    comps = {}
    for k in range(n + 1):
        for A in combinations(range(1, n + 1), k):
            comps[A] = hoeffding_component(f, A)
    return HoeffdingComponents(f.space, comps)


def project_multiplicity(f: TensorFunction, m: int) -> TensorFunction:
    """Sum of components over all subsets of size m (subsets iterated on the fly)."""
    n = f.space.n_coords
    if not 0 <= m <= n:
        raise ValueError(f"multiplicity {m} out of range [0, {n}]")
    out = _apply_block_multiplicity(f.grid, list(f.space.coords()), m, f.space, 0)
    return TensorFunction(f.space, out.reshape(-1))


def _indicator_basis(space: ProductSpace) -> np.ndarray:
    """All atom indicators, stacked along a leading batch axis."""
    n = space.atom_count
    if space.scalar_mode == RATIONAL:
        flat = np.empty((n, n), dtype=object)
        flat[:] = Fraction(0)
        for i in range(n):
            flat[i, i] = Fraction(1)
    else:
        flat = np.eye(n, dtype=space.dtype)
    return flat.reshape((n,) + space.shape)


def _arrays_equal(a: np.ndarray, b: np.ndarray, exact: bool) -> bool:
    if exact:
        return bool(np.equal(a, b).all())
    return bool(np.max(np.abs(a - b), initial=0.0) <= 1e-10)


# ---------------------------------------------------------------------------
# combinatorial operator identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QIdentityReport:
    n_coords: int
    block_size: int
    multiplicity: int
    coefficient: Fraction
    operator_match: bool


def verify_q_identity(
    N: int, n: int, m: int, space: ProductSpace | None = None
) -> QIdentityReport:
    """Check that averaging rank-1-times-rank-(m-1) blocks collapses to a
    rational multiple of the multiplicity-m projection.

    The averaged operator runs over all size-n coordinate blocks A, applying
    the multiplicity-1 projection on A tensored with the multiplicity-(m-1)
    projection on the complement. Exact arithmetic is required.
    """
    if space is None:
        space = uniform_space(2, N, RATIONAL)
    if space.scalar_mode != RATIONAL:
        raise ValueError("identity verification requires rational mode")
    if space.n_coords != N:
        raise ValueError("space has wrong number of coordinates")
    if not (1 <= m <= N and 1 <= n <= N):
        raise ValueError("need 1 <= n, m <= N")
    if N > VERIFY_MAX_COORDS:
        raise GuardExceededError(
            f"identity verification guarded at {VERIFY_MAX_COORDS} coordinates"
        )

    coeff = Fraction(m * comb(N - m, n - 1), comb(N, n))
    basis = _indicator_basis(space)
    coords = list(range(1, N + 1))

    averaged = _zeros_like(basis)
    for A in combinations(coords, n):
        complement = [c for c in coords if c not in A]
        t = _apply_block_multiplicity(basis, complement, m - 1, space, 1)
        t = _apply_block_multiplicity(t, list(A), 1, space, 1)
        averaged = averaged + t
    averaged = averaged / Fraction(comb(N, n))

    projected = _apply_block_multiplicity(basis, coords, m, space, 1)
    match = _arrays_equal(averaged, projected * coeff, exact=True)
    return QIdentityReport(N, n, m, coeff, match)


@dataclass(frozen=True)
class MultinomialReport:
    block_size: int
    multiplicity: int
    count_per_B: int
    match: bool


def _ordered_partitions(elements: tuple[int, ...], block_size: int, blocks: int):
    if blocks == 0:
        yield ()
        return
    for first in combinations(elements, block_size):
        rest = tuple(e for e in elements if e not in first)
        for tail in _ordered_partitions(rest, block_size, blocks - 1):
            yield (first,) + tail


def verify_multinomial_identity(
    n: int, m: int, space: ProductSpace | None = None
) -> MultinomialReport:
    """Check the ordered-partition average of m rank-1 blocks.

    Every size-m subset picking one coordinate per block occurs the same
    number of times, m! * multinomial((n-1)m; n-1, ..., n-1), and the
    average is the corresponding multiple of the multiplicity-m projection.
    """
    N = n * m
    if space is None:
        space = uniform_space(2, N, RATIONAL)
    if space.scalar_mode != RATIONAL:
        raise ValueError("identity verification requires rational mode")
    if space.n_coords != N:
        raise ValueError(f"space must have {N} coordinates")
    if N > VERIFY_MAX_COORDS:
        raise GuardExceededError(
            f"identity verification guarded at {VERIFY_MAX_COORDS} coordinates"
        )

    coords = tuple(range(1, N + 1))
    expected_count = factorial(m) * _multinomial((n - 1) * m, n - 1, m)
    total_partitions = _multinomial(N, n, m)

    # direct count of appearances of each P_B among the ordered partitions
    counts: dict[tuple[int, ...], int] = {}
    partitions = list(_ordered_partitions(coords, n, m))
    assert len(partitions) == total_partitions
    for blocks in partitions:
        for picks in _product_picks(blocks):
            B = tuple(sorted(picks))
            counts[B] = counts.get(B, 0) + 1
    count_values = set(counts.values())
    counts_ok = (
        count_values == {expected_count}
        and len(counts) == comb(N, m)
    )

    # operator check on the indicator basis
    basis = _indicator_basis(space)
    averaged = _zeros_like(basis)
    for blocks in partitions:
        t = basis
        for block in blocks:
            t = _apply_block_multiplicity(t, list(block), 1, space, 1)
        averaged = averaged + t
    averaged = averaged / Fraction(total_partitions)

    projected = _apply_block_multiplicity(basis, list(coords), m, space, 1)
    coeff = Fraction(expected_count, total_partitions)
    operator_ok = _arrays_equal(averaged, projected * coeff, exact=True)

    return MultinomialReport(n, m, expected_count, counts_ok and operator_ok)


def _multinomial(total: int, part: int, blocks: int) -> int:
    out = 1
    remaining = total
    for _ in range(blocks):
        out *= comb(remaining, part)
        remaining -= part
    return out


def _product_picks(blocks):
    if not blocks:
        yield ()
        return
    for head in blocks[0]:
        for tail in _product_picks(blocks[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# tensor-power lower-bound identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorPowerReport:
    multiplicity: int
    identity_holds: bool
    lhs_norms: dict
    rhs_norms: dict


def tensor_power_projection_check(
    f: TensorFunction, m: int, ps: Sequence = (1, 2)
) -> TensorPowerReport:
    """For mean-zero f, the multiplicity-m projection of f^(x m) equals the
    m-fold tensor power of the multiplicity-1 projection of f."""
    mean = expectation(f)
    if f.space.scalar_mode == RATIONAL:
        if mean != 0:
            raise ValueError(f"input must have exactly zero mean, got {mean}")
    elif abs(mean) > 1e-12:
        raise ValueError(f"input mean {mean} exceeds 1e-12")
    if m < 1:
        raise ValueError("m must be >= 1")

    F = tensor_power(f, m)
    lhs = project_multiplicity(F, m)
    rhs = tensor_power(project_multiplicity(f, 1), m)
    exact = f.space.scalar_mode == RATIONAL
    holds = _arrays_equal(lhs.values, rhs.values, exact=exact) if exact else bool(
        np.max(np.abs(lhs.values - rhs.values), initial=0.0) <= 1e-12
    )
    lhs_norms = {p: lp_norm(lhs, p) for p in ps}
    rhs_norms = {p: lp_norm(rhs, p) for p in ps}
    return TensorPowerReport(m, holds, lhs_norms, rhs_norms)
