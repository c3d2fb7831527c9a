"""Finite product probability spaces and dense tensor functions.

Every other module computes on the substrate defined here: a product of
finite weighted factors, scalar fields over its atom grid, per-coordinate
conditional expectations and the L^p geometry they induce.

Atoms are laid out row-major with the LAST coordinate varying fastest;
this is the single canonical layout and all serialization uses it.
Coordinates are 1-based everywhere in the public API.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

REAL = "real"
COMPLEX = "complex"
RATIONAL = "rational"
SCALAR_MODES = (REAL, COMPLEX, RATIONAL)

#: construction of spaces with more atoms than this fails
DEFAULT_MAX_ATOMS = 1 << 24

#: tolerance for the weight-sum invariant in float modes
WEIGHT_SUM_TOL = 1e-9


class GuardExceededError(ValueError):
    """A size guard (atom count, subset enumeration, ...) was exceeded."""


class SpaceMismatchError(ValueError):
    """Operands live on different spaces or incompatible scalar modes."""


def _dtype_for(scalar_mode: str):
    if scalar_mode == REAL:
        return np.float64
    if scalar_mode == COMPLEX:
        return np.complex128
    if scalar_mode == RATIONAL:
        return object
    raise ValueError(f"unknown scalar mode {scalar_mode!r}")


def _as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        # exact binary value of the float; callers wanting 1/3 must pass Fraction
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _coerce_values(values, scalar_mode: str) -> np.ndarray:
    """Return a fresh 1-D array of the mode's dtype, validating scalar kinds."""
    if scalar_mode == RATIONAL:
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = _as_rational(v)
        return out
    arr = np.asarray(values)
    if arr.dtype == object and any(isinstance(v, Fraction) for v in arr.reshape(-1)):
        raise ValueError("exact rationals are only permitted in rational mode")
    if scalar_mode == REAL:
        if np.iscomplexobj(arr):
            raise ValueError("complex values not permitted in real mode")
        return arr.astype(np.float64)
    return arr.astype(np.complex128)


@dataclass(frozen=True)
class FiniteFactor:
    """One finite probability factor: `outcome_count` outcomes with `weights`.

    Weights are stored as a tuple (floats in float modes, Fractions in
    rational mode) and must sum to 1; validation happens in
    :func:`finite_factor` / :func:`make_product_space`.
    """

    outcome_count: int
    weights: tuple


def finite_factor(weights: Sequence, scalar_mode: str = REAL) -> FiniteFactor:
    """Validate a weight vector and wrap it as a FiniteFactor."""
    if scalar_mode not in SCALAR_MODES:
        raise ValueError(f"unknown scalar mode {scalar_mode!r}")
    ws = list(weights)
    if len(ws) < 1:
        raise ValueError("a factor needs at least one outcome")
    if scalar_mode == RATIONAL:
        ws = [_as_rational(w) for w in ws]
        if any(w < 0 for w in ws):
            raise ValueError("negative weight")
        if sum(ws) != 1:
            raise ValueError(f"weights sum to {sum(ws)}, expected exactly 1")
    else:
        ws = [float(w) for w in ws]
        if any(w < 0 for w in ws):
            raise ValueError("negative weight")
        total = sum(ws)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total}, expected 1")
    return FiniteFactor(len(ws), tuple(ws))


def uniform_factor(outcomes: int, scalar_mode: str = REAL) -> FiniteFactor:
    if outcomes < 1:
        raise ValueError("outcome count must be >= 1")
    if scalar_mode == RATIONAL:
        w = Fraction(1, outcomes)
    else:
        w = 1.0 / outcomes
    return finite_factor([w] * outcomes, scalar_mode)


@dataclass(frozen=True, eq=False)
class ProductSpace:
    """An ordered product of finite factors with a fixed scalar mode."""

    factors: tuple[FiniteFactor, ...]
    scalar_mode: str

    @property
    def n_coords(self) -> int:
        return len(self.factors)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.outcome_count for f in self.factors)

    @cached_property
    def atom_count(self) -> int:
        return prod(self.shape)

    @cached_property
    def dtype(self):
        return _dtype_for(self.scalar_mode)

    def factor_weights(self, coord: int) -> np.ndarray:
        """Weight vector of the factor at 1-based coordinate `coord`."""
        ws = self.factors[coord - 1].weights
        if self.scalar_mode == RATIONAL:
            out = np.empty(len(ws), dtype=object)
            out[:] = ws
            return out
        return np.asarray(ws, dtype=np.float64)

    @cached_property
    def atom_weights(self) -> np.ndarray:
        """Flat array of atom weights (product of factor weights), canonical order."""
        if self.scalar_mode == RATIONAL:
            w = np.empty(1, dtype=object)
            w[0] = Fraction(1)
            w = w.reshape(())
        else:
            w = np.asarray(1.0)
        for c in range(1, self.n_coords + 1):
            fw = self.factor_weights(c)
            w = np.multiply.outer(w, fw)
        return w.reshape(-1)

    def coords(self) -> range:
        return range(1, self.n_coords + 1)


def make_product_space(
    factors: Sequence,
    scalar_mode: str = REAL,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> ProductSpace:
    """Build a validated ProductSpace.

    `factors` may mix FiniteFactor instances and raw weight sequences;
    raw sequences are validated in the requested scalar mode.
    """
    if scalar_mode not in SCALAR_MODES:
        raise ValueError(f"unknown scalar mode {scalar_mode!r}")
    validated = []
    for f in factors:
        if isinstance(f, FiniteFactor):
            f = finite_factor(f.weights, scalar_mode)
        else:
            f = finite_factor(f, scalar_mode)
        validated.append(f)
    if not validated:
        raise ValueError("a product space needs at least one factor")
    n_atoms = prod(f.outcome_count for f in validated)
    if n_atoms > max_atoms:
        raise GuardExceededError(
            f"atom count {n_atoms} exceeds guard {max_atoms}"
        )
    return ProductSpace(tuple(validated), scalar_mode)


def uniform_space(outcomes: int, n_coords: int, scalar_mode: str = REAL) -> ProductSpace:
    """N i.i.d. uniform factors with `outcomes` points each."""
    return make_product_space(
        [uniform_factor(outcomes, scalar_mode)] * n_coords, scalar_mode
    )


def same_space(a: ProductSpace, b: ProductSpace) -> bool:
    if a is b:
        return True
    return (
        a.scalar_mode == b.scalar_mode
        and a.shape == b.shape
        and all(fa.weights == fb.weights for fa, fb in zip(a.factors, b.factors))
    )


# ---------------------------------------------------------------------------
# tensor functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorFunction:
    """A dense scalar field over a space's atom grid.

    `values` is the flat canonical-order array; `grid` exposes the same
    data reshaped to one axis per coordinate. Instances are immutable;
    all operations return new TensorFunctions.
    """

    space: ProductSpace
    values: np.ndarray

    @cached_property
    def grid(self) -> np.ndarray:
        return self.values.reshape(self.space.shape)

    def __add__(self, other: "TensorFunction") -> "TensorFunction":
        _require_same_space(self, other)
        return TensorFunction(self.space, self.values + other.values)

    def __sub__(self, other: "TensorFunction") -> "TensorFunction":
        _require_same_space(self, other)
        return TensorFunction(self.space, self.values - other.values)

    def __neg__(self) -> "TensorFunction":
        return TensorFunction(self.space, -self.values)

    def __mul__(self, scalar) -> "TensorFunction":
        return TensorFunction(self.space, self.values * scalar)

    __rmul__ = __mul__


def tensor_function(space: ProductSpace, values) -> TensorFunction:
    """Validate a value array against `space` and wrap it."""
    if space.scalar_mode == RATIONAL:
        flat = list(np.asarray(values, dtype=object).reshape(-1))
    else:
        flat = np.asarray(values).reshape(-1)
    arr = _coerce_values(flat, space.scalar_mode)
    if arr.shape[0] != space.atom_count:
        raise ValueError(
            f"expected {space.atom_count} values, got {arr.shape[0]}"
        )
    return TensorFunction(space, arr)


def constant_function(space: ProductSpace, value) -> TensorFunction:
    if space.scalar_mode == RATIONAL:
        value = _as_rational(value)
        arr = np.empty(space.atom_count, dtype=object)
        arr[:] = value
    else:
        arr = np.full(space.atom_count, value, dtype=space.dtype)
    return TensorFunction(space, arr)


def coordinate_function(space: ProductSpace, coord: int, outcome_values: Sequence) -> TensorFunction:
    """The function depending on a single coordinate through `outcome_values`."""
    if not 1 <= coord <= space.n_coords:
        raise IndexError(f"coordinate {coord} out of range")
    col = _coerce_values(outcome_values, space.scalar_mode)
    if col.shape[0] != space.shape[coord - 1]:
        raise ValueError("outcome_values length must match the factor size")
    shape = [1] * space.n_coords
    shape[coord - 1] = col.shape[0]
    grid = np.broadcast_to(col.reshape(shape), space.shape)
    return TensorFunction(space, grid.reshape(-1).copy())


def indicator_function(space: ProductSpace, atom_index: int) -> TensorFunction:
    """Indicator of a single atom (by flat canonical index)."""
    if space.scalar_mode == RATIONAL:
        arr = np.empty(space.atom_count, dtype=object)
        arr[:] = Fraction(0)
        arr[atom_index] = Fraction(1)
    else:
        arr = np.zeros(space.atom_count, dtype=space.dtype)
        arr[atom_index] = 1
    return TensorFunction(space, arr)


def _require_same_space(f: TensorFunction, g: TensorFunction) -> None:
    if not same_space(f.space, g.space):
        raise SpaceMismatchError("operands live on different spaces")


def normalize_subset(n_coords: int, subset: Iterable[int]) -> tuple[int, ...]:
    """Sorted duplicate-free tuple of 1-based coordinates within [1, n]."""
    members = sorted(set(int(j) for j in subset))
    if members and (members[0] < 1 or members[-1] > n_coords):
        raise IndexError(f"coordinate out of range in {members}")
    return tuple(members)


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------


def average_axis(grid: np.ndarray, axis: int, weights: np.ndarray) -> np.ndarray:
    """Weighted average along one axis, kept as a length-1 axis."""
    shape = [1] * grid.ndim
    shape[axis] = weights.shape[0]
    return (grid * weights.reshape(shape)).sum(axis=axis, keepdims=True)


def conditional_expectation(f: TensorFunction, keep: Iterable[int]) -> TensorFunction:
    """Integrate away every coordinate outside `keep`.

    The result is constant along each averaged coordinate; keeping all
    coordinates returns f unchanged, keeping none returns the constant Ef.
    """
    space = f.space
    kept = set(normalize_subset(space.n_coords, keep))
    grid = f.grid
    for c in space.coords():
        if c not in kept:
            grid = average_axis(grid, c - 1, space.factor_weights(c))
    out = np.broadcast_to(grid, space.shape)
    return TensorFunction(space, out.reshape(-1).copy())


def expectation(f: TensorFunction):
    """Scalar mean of f under the product measure."""
    return (f.values * f.space.atom_weights).sum()


def inner_product(f: TensorFunction, g: TensorFunction):
    """Weighted pairing sum_atoms w * f * conj(g)."""
    _require_same_space(f, g)
    gv = g.values
    if f.space.scalar_mode == COMPLEX:
        gv = np.conj(gv)
    return (f.values * gv * f.space.atom_weights).sum()


def lp_norm(f: TensorFunction, p) -> float:
    """The L^p norm for real p >= 1, or the essential sup for p="sup"."""
    w = f.space.atom_weights
    absvals = np.abs(f.values)
    if p == "sup":
        mask = np.asarray([wi > 0 for wi in w]) if f.space.scalar_mode == RATIONAL else w > 0
        if not mask.any():
            return 0.0
        return float(max(absvals[mask]))
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1 or 'sup'")
    av = absvals.astype(np.float64)
    wf = w.astype(np.float64)
    if p == 1.0:
        return float((wf * av).sum())
    return float(((wf * av**p).sum()) ** (1.0 / p))


def tensor_product(f: TensorFunction, g: TensorFunction) -> TensorFunction:
    """Separated-variables product on the concatenated space."""
    if f.space.scalar_mode != g.space.scalar_mode:
        raise SpaceMismatchError("scalar modes differ")
    space = make_product_space(
        list(f.space.factors) + list(g.space.factors), f.space.scalar_mode
    )
    vals = np.multiply.outer(f.values, g.values).reshape(-1)
    return TensorFunction(space, vals)


def tensor_power(f: TensorFunction, m: int) -> TensorFunction:
    if m < 1:
        raise ValueError("tensor power needs m >= 1")
    out = f
    for _ in range(m - 1):
        out = tensor_product(out, f)
    return out


def values_allclose(f: TensorFunction, g: TensorFunction, tol: float = 0.0) -> bool:
    """Atomwise comparison; exact when tol == 0 (the rational-mode default)."""
    _require_same_space(f, g)
    if f.space.scalar_mode == RATIONAL and tol == 0.0:
        return bool(all(a == b for a, b in zip(f.values, g.values)))
    diff = np.abs(np.asarray(f.values - g.values, dtype=complex))
    return bool(diff.max(initial=0.0) <= tol)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _scalar_to_json(v, scalar_mode: str):
    if scalar_mode == RATIONAL:
        fr = _as_rational(v)
        return f"{fr.numerator}/{fr.denominator}"
    if scalar_mode == COMPLEX:
        c = complex(v)
        return [c.real, c.imag]
    return float(v)


def _scalar_from_json(v, scalar_mode: str):
    if scalar_mode == RATIONAL:
        return Fraction(v)
    if scalar_mode == COMPLEX:
        re, im = v
        return complex(re, im)
    return float(v)


def space_to_json(space: ProductSpace) -> dict:
    return {
        "factors": [
            {
                "outcomes": f.outcome_count,
                "weights": [_scalar_to_json(w, RATIONAL if space.scalar_mode == RATIONAL else REAL) for w in f.weights],
            }
            for f in space.factors
        ],
        "scalar": space.scalar_mode,
    }


def space_from_json(obj: dict) -> ProductSpace:
    mode = obj["scalar"]
    factors = []
    for fo in obj["factors"]:
        ws = fo["weights"]
        if mode == RATIONAL:
            ws = [Fraction(w) for w in ws]
        if len(ws) != fo["outcomes"]:
            raise ValueError("factor weight length disagrees with outcome count")
        factors.append(ws)
    return make_product_space(factors, mode)


def function_to_json(f: TensorFunction) -> dict:
    doc = space_to_json(f.space)
    doc["values"] = [_scalar_to_json(v, f.space.scalar_mode) for v in f.values]
    return doc


def function_from_json(obj: dict) -> TensorFunction:
    space = space_from_json(obj)
    vals = [_scalar_from_json(v, space.scalar_mode) for v in obj["values"]]
    return tensor_function(space, vals)


def dump_function(f: TensorFunction) -> str:
    return json.dumps(function_to_json(f), sort_keys=True)


def load_function(text: str) -> TensorFunction:
    return function_from_json(json.loads(text))
