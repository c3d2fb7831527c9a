"""Decoupling functionals: adapted square-sum means, their decoupled
counterparts (exact grid extension or Monte Carlo), the lambda recursion
whose telescoping sandwich proves the two-sided comparison, and the
per-level translation operators on cyclic-group factors.

Exact decoupled evaluation duplicates coordinate blocks explicitly; the
extended grid is guarded, and Monte Carlo covers sizes past the guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

from .space import (
    GuardExceededError,
    ProductSpace,
    TensorFunction,
    conditional_expectation,
    same_space,
)

DEFAULT_MAX_EXTENDED_ATOMS = 1 << 24
MEASURABILITY_TOL = 1e-10


class MeasurabilityError(ValueError):
    """A function depends on coordinates its adaptedness contract forbids."""


@dataclass(frozen=True, eq=False)
class AdaptedTuple:
    """Functions f_1 ... f_N on one space, f_k depending on coords [1, k]."""

    space: ProductSpace
    funcs: tuple

    def __len__(self) -> int:
        return len(self.funcs)


def adapted_tuple(space: ProductSpace, funcs: Sequence[TensorFunction]) -> AdaptedTuple:
    if len(funcs) != space.n_coords:
        raise ValueError("need exactly one function per coordinate")
    for k, fk in enumerate(funcs, start=1):
        if not same_space(fk.space, space):
            raise MeasurabilityError(f"function {k} lives on a different space")
        _check_measurable(fk, range(1, k + 1), f"function {k}")
    return AdaptedTuple(space, tuple(funcs))


def _check_measurable(f: TensorFunction, coords: Iterable[int], label: str) -> None:
    fixed = conditional_expectation(f, coords)
    gap = np.max(np.abs(np.asarray(fixed.values - f.values, dtype=complex)), initial=0.0)
    if gap > MEASURABILITY_TOL:
        raise MeasurabilityError(f"{label} is not measurable on {sorted(set(coords))} (gap {gap:.2e})")


def _abs2(values: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(values, dtype=complex)).real ** 2


def _float_weights(space: ProductSpace, coord: int) -> np.ndarray:
    return space.factor_weights(coord).astype(np.float64)


def random_adapted_tuple(space: ProductSpace, rng: np.random.Generator) -> AdaptedTuple:
    """Structurally adapted tuple: f_k is an i.i.d. normal array over [1, k]."""
    N = space.n_coords
    funcs = []
    for k in range(1, N + 1):
        head = rng.standard_normal(space.shape[:k])
        grid = np.broadcast_to(
            head.reshape(space.shape[:k] + (1,) * (N - k)), space.shape
        )
        funcs.append(TensorFunction(space, grid.reshape(-1).astype(np.float64)))
    return AdaptedTuple(space, tuple(funcs))


def random_independent_tuple(space: ProductSpace, rng: np.random.Generator) -> AdaptedTuple:
    """f_k depends on coordinate k alone; the lambda recursion is constant."""
    from .space import coordinate_function

    funcs = [
        coordinate_function(space, k, rng.standard_normal(space.shape[k - 1]))
        for k in range(1, space.n_coords + 1)
    ]
    return AdaptedTuple(space, tuple(funcs))


# ---------------------------------------------------------------------------
# the two sides
# ---------------------------------------------------------------------------


def zinn_left(t: AdaptedTuple) -> float:
    """E sqrt(sum_k |f_k(x_1..x_k)|^2), exact over the atom grid."""
    total = None
    for fk in t.funcs:
        sq = _abs2(fk.values)
        total = sq if total is None else total + sq
    w = t.space.atom_weights.astype(np.float64)
    return float((w * np.sqrt(total)).sum())


def zinn_right(
    t: AdaptedTuple, max_extended_atoms: int = DEFAULT_MAX_EXTENDED_ATOMS
) -> float:
    """Decoupled side, exact: the last argument of each f_k is replaced by an
    independent copy, so the sum runs over the (2N-1)-coordinate grid
    (x_1..x_{N-1}, y_1..y_N)."""
    space = t.space
    N = space.n_coords
    x_shape = space.shape[: N - 1]
    y_shape = space.shape
    ext_shape = x_shape + y_shape
    if prod(ext_shape) > max_extended_atoms:
        raise GuardExceededError(
            f"extended grid has {prod(ext_shape)} atoms, guard {max_extended_atoms}"
        )
    total = np.zeros(ext_shape, dtype=np.float64)
    for k, fk in enumerate(t.funcs, start=1):
        restricted = fk.grid[(slice(None),) * k + (0,) * (N - k)]
        newshape = [1] * len(ext_shape)
        for c in range(1, k):
            newshape[c - 1] = space.shape[c - 1]
        newshape[(N - 1) + (k - 1)] = space.shape[k - 1]
        total += _abs2(restricted).reshape(newshape)
    s = np.sqrt(total)
    for axis_coord in list(range(1, N)) + list(range(1, N + 1)):
        w = _float_weights(space, axis_coord)
        s = (s * w.reshape([-1] + [1] * (s.ndim - 1))).sum(axis=0)
    return float(s)


def zinn_right_mc(t: AdaptedTuple, trials: int, seed: int) -> dict:
    """Monte Carlo decoupled side with per-trial substreams from one seed."""
    if trials < 2:
        raise ValueError("need at least 2 trials")
    space = t.space
    N = space.n_coords
    grids = [fk.grid for fk in t.funcs]
    children = np.random.SeedSequence(seed).spawn(trials)
    samples = np.empty(trials, dtype=np.float64)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        x_idx = tuple(
            rng.choice(space.shape[c], p=_float_weights(space, c + 1))
            for c in range(N)
        )
        y_idx = tuple(
            rng.choice(space.shape[c], p=_float_weights(space, c + 1))
            for c in range(N)
        )
        acc = 0.0
        for k in range(1, N + 1):
            idx = x_idx[: k - 1] + (y_idx[k - 1],) + x_idx[k:]
            acc += float(_abs2(np.asarray(grids[k - 1][idx])))
        samples[i] = sqrt(acc)
    value = float(samples.sum() / trials)
    stderr = float(samples.std(ddof=1) / sqrt(trials))
    return {"value": value, "stderr": stderr, "trials": trials, "seed": seed}


# ---------------------------------------------------------------------------
# lambda recursion and sandwich
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LambdaSequence:
    """lambda_0 = 0 and lambda_k = E_{y_k} sqrt(f_k^2 + lambda_{k-1}^2);
    lambda_k depends on coordinates [1, k-1] only and grows pointwise."""

    lambdas: tuple  # of TensorFunction, length N + 1


def lambda_recursion(t: AdaptedTuple) -> tuple[LambdaSequence, dict]:
    space = t.space
    N = space.n_coords
    real_shape = space.shape
    lam = np.zeros(real_shape, dtype=np.float64)
    out = [lam]
    for k in range(1, N + 1):
        fk2 = _abs2(t.funcs[k - 1].values).reshape(real_shape)
        integrand = np.sqrt(fk2 + lam**2)
        w = _float_weights(space, k)
        red = (integrand * w.reshape([1] * (k - 1) + [-1] + [1] * (N - k))).sum(
            axis=k - 1, keepdims=True
        )
        lam = np.broadcast_to(red, real_shape).copy()
        out.append(lam)

    from .space import REAL, make_product_space

    rspace = make_product_space(
        [[float(w) for w in f.weights] for f in space.factors], REAL
    )
    lambdas = tuple(TensorFunction(rspace, a.reshape(-1)) for a in out)

    w_atoms = rspace.atom_weights
    e_lambda = float((w_atoms * out[-1].reshape(-1)).sum())
    left = zinn_left(t)
    right = zinn_right(t)

    measurable_ok = True
    increasing_ok = True
    for k in range(1, N + 1):
        fixed = conditional_expectation(lambdas[k], range(1, k))
        if np.max(np.abs(fixed.values - lambdas[k].values), initial=0.0) > 1e-10:
            measurable_ok = False
        if np.min(lambdas[k].values - lambdas[k - 1].values, initial=0.0) < -1e-12:
            increasing_ok = False

    independent = all(
        _is_single_coordinate(fk, k, space) for k, fk in enumerate(t.funcs, start=1)
    )
    tol = 1e-10
    bound_right = e_lambda <= right + tol
    bound_left = left <= 2.0 * e_lambda + tol
    sandwich_independent = True
    if independent:
        lam_n = float(np.max(out[-1]))
        e_sqrt = zinn_left(t)
        sandwich_independent = lam_n <= e_sqrt + tol and e_sqrt <= 2.0 * lam_n + tol

    report = {
        "Elambda_N": e_lambda,
        "zinn_left": left,
        "zinn_right": right,
        "independent": independent,
        "measurable_ok": measurable_ok,
        "increasing_ok": increasing_ok,
        "sandwich_ok": bool(
            bound_right and bound_left and sandwich_independent
            and measurable_ok and increasing_ok
        ),
    }
    return LambdaSequence(lambdas), report


def _is_single_coordinate(f: TensorFunction, k: int, space: ProductSpace) -> bool:
    fixed = conditional_expectation(f, {k})
    return bool(
        np.max(np.abs(np.asarray(fixed.values - f.values, dtype=complex)), initial=0.0)
        <= 1e-12
    )


# ---------------------------------------------------------------------------
# multi-fold decoupling
# ---------------------------------------------------------------------------


def components_left(space: ProductSpace, components: Mapping) -> float:
    """Undecoupled side for index-tuple components: E sqrt(sum |f_i|^2)."""
    total = None
    for f in components.values():
        sq = _abs2(f.values)
        total = sq if total is None else total + sq
    w = space.atom_weights.astype(np.float64)
    return float((w * np.sqrt(total)).sum())


def multi_decoupled_right(
    space: ProductSpace,
    components: Mapping,
    m: int,
    max_extended_atoms: int = DEFAULT_MAX_EXTENDED_ATOMS,
) -> float:
    """m-fold decoupled functional: component f_i sees x below its first
    index and an independent copy y^(r) at its r-th index."""
    if m < 1:
        raise ValueError("m must be >= 1")
    items = []
    for key in sorted(components):
        idx = tuple(int(j) for j in key)
        if len(idx) != m or list(idx) != sorted(set(idx)):
            raise ValueError(f"component index {key!r} must be m strictly increasing coords")
        f = components[key]
        allowed = list(range(1, idx[0])) + list(idx)
        _check_measurable(f, allowed, f"component {idx}")
        items.append((idx, f))
    if not items:
        raise ValueError("need at least one component")

    x_top = max(idx[0] - 1 for idx, _ in items)
    pairs = sorted({(r, idx[r - 1]) for idx, _ in items for r in range(1, m + 1)})
    pair_axis = {p: x_top + i for i, p in enumerate(pairs)}
    ext_shape = tuple(space.shape[c - 1] for c in range(1, x_top + 1)) + tuple(
        space.shape[j - 1] for _, j in pairs
    )
    if prod(ext_shape) > max_extended_atoms:
        raise GuardExceededError(
            f"extended grid has {prod(ext_shape)} atoms, guard {max_extended_atoms}"
        )

    total = np.zeros(ext_shape, dtype=np.float64)
    N = space.n_coords
    for idx, f in items:
        used = sorted(set(range(1, idx[0])) | set(idx))
        slicer = tuple(slice(None) if c in used else 0 for c in range(1, N + 1))
        restricted = np.asarray(f.grid[slicer], dtype=complex)
        newshape = [1] * len(ext_shape)
        for c in used:
            if c < idx[0]:
                newshape[c - 1] = space.shape[c - 1]
            else:
                r = idx.index(c) + 1
                newshape[pair_axis[(r, c)]] = space.shape[c - 1]
        total += _abs2(restricted).reshape(newshape)

    s = np.sqrt(total)
    coords_in_order = list(range(1, x_top + 1)) + [j for _, j in pairs]
    for c in coords_in_order:
        w = _float_weights(space, c)
        s = (s * w.reshape([-1] + [1] * (s.ndim - 1))).sum(axis=0)
    return float(s)


# ---------------------------------------------------------------------------
# translation operators
# ---------------------------------------------------------------------------


def translate_op(f: TensorFunction, xi: Sequence[int]) -> TensorFunction:
    """Per-level translated reassembly on uniform cyclic factors:
    level-k difference translated by xi_k in coordinate k, then summed."""
    space = f.space
    N = space.n_coords
    if len(xi) != N:
        raise ValueError("xi must have one entry per coordinate")
    for fac in space.factors:
        w0 = fac.weights[0]
        if any(abs(float(w) - float(w0)) > 1e-12 for w in fac.weights):
            raise ValueError("translation needs uniform (group) factors")

    from .martingale import family_differences, linear_family

    diffs = family_differences(f, linear_family(N))
    out = diffs.parts[0].grid.copy()  # mean part, translation invariant
    for k in range(1, N + 1):
        part = diffs.parts[k].grid
        out = out + np.roll(part, -int(xi[k - 1]), axis=k - 1)
    return TensorFunction(space, out.reshape(-1))
