"""Fair-coin specialization: fast Walsh-Hadamard analysis.

Character w_A = prod of the sign coordinates r_i over i in A, with the
global convention r = +1 at outcome 0 and -1 at outcome 1. Spectra are
bitmask-indexed: bit j-1 of the mask set  <=>  coordinate j in A.

The butterfly transform is exact in rational mode (all stage weights are
dyadic), which is what lets it serve as an independent oracle elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import numpy as np

from .space import (
    RATIONAL,
    ProductSpace,
    TensorFunction,
    inner_product,
    tensor_function,
)

MAX_COORDS = 24
KHINTCHINE_MAX_DIM = 20


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    n_coords: int
    coeffs: np.ndarray  # length 2**n_coords, bitmask-indexed

    def to_json(self) -> dict:
        return {"n": self.n_coords, "coeffs": [_coeff_json(c) for c in self.coeffs]}


def _coeff_json(c):
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, complex):
        return [c.real, c.imag]
    return float(c)


def _check_space(space: ProductSpace) -> None:
    if space.n_coords > MAX_COORDS:
        raise ValueError(f"transform guarded at {MAX_COORDS} coordinates")
    for f in space.factors:
        if f.outcome_count != 2:
            raise ValueError("every factor must be a two-point space")
        half = Fraction(1, 2) if space.scalar_mode == RATIONAL else 0.5
        if space.scalar_mode == RATIONAL:
            if tuple(f.weights) != (half, half):
                raise ValueError("every factor must be uniform")
        elif abs(f.weights[0] - 0.5) > 1e-12 or abs(f.weights[1] - 0.5) > 1e-12:
            raise ValueError("every factor must be uniform")


def _mask_order(grid: np.ndarray) -> np.ndarray:
    # canonical flat order has coordinate N fastest; bitmask order wants
    # coordinate 1 on bit 0, i.e. coordinate 1 fastest
    n = grid.ndim
    return grid.transpose(tuple(reversed(range(n)))).reshape(-1)


def _grid_order(flat: np.ndarray, n: int) -> np.ndarray:
    return flat.reshape((2,) * n).transpose(tuple(reversed(range(n))))


def walsh_hadamard_transform(f: TensorFunction) -> WalshSpectrum:
    """Analysis transform: coeffs[mask] = <f, w_A> on the uniform space."""
    _check_space(f.space)
    n = f.space.n_coords
    grid = f.grid
    two = Fraction(2) if f.space.scalar_mode == RATIONAL else 2.0
    for ax in range(n):
        lo = np.take(grid, [0], axis=ax)
        hi = np.take(grid, [1], axis=ax)
        grid = np.concatenate([(lo + hi) / two, (lo - hi) / two], axis=ax)
    return WalshSpectrum(n, _mask_order(grid).copy())


def inverse_walsh_hadamard(spec: WalshSpectrum, space: ProductSpace) -> TensorFunction:
    """Synthesis: f = sum_A coeffs[A] w_A, back on the given uniform space."""
    _check_space(space)
    if space.n_coords != spec.n_coords:
        raise ValueError("spectrum size disagrees with space")
    grid = _grid_order(spec.coeffs, spec.n_coords)
    for ax in range(spec.n_coords):
        lo = np.take(grid, [0], axis=ax)
        hi = np.take(grid, [1], axis=ax)
        grid = np.concatenate([lo + hi, lo - hi], axis=ax)
    return tensor_function(space, grid.reshape(-1))


def walsh_function(space: ProductSpace, mask: int) -> TensorFunction:
    """The character w_A as a TensorFunction, A given by bitmask."""
    _check_space(space)
    n = space.n_coords
    one = Fraction(1) if space.scalar_mode == RATIONAL else 1
    vals = np.empty(space.atom_count, dtype=space.dtype)
    vals[:] = one
    grid = vals.reshape(space.shape)
    for j in range(1, n + 1):
        if mask >> (j - 1) & 1:
            sign_shape = [1] * n
            sign_shape[j - 1] = 2
            sign = np.array([one, -one], dtype=space.dtype).reshape(sign_shape)
            grid = grid * sign
    return tensor_function(space, grid.reshape(-1))


def naive_walsh_transform(f: TensorFunction) -> WalshSpectrum:
    """O(4^N) inner-product transform, kept as the test oracle."""
    _check_space(f.space)
    n = f.space.n_coords
    coeffs = np.empty(1 << n, dtype=f.space.dtype)
    for mask in range(1 << n):
        coeffs[mask] = inner_product(f, walsh_function(f.space, mask))
    return WalshSpectrum(n, coeffs)


def walsh_projection(f: TensorFunction, m: int) -> TensorFunction:
    """Spectral restriction to coefficients of multiplicity exactly m."""
    spec = walsh_hadamard_transform(f)
    masked = spec.coeffs.copy()
    zero = Fraction(0) if f.space.scalar_mode == RATIONAL else 0
    for mask in range(masked.shape[0]):
        if mask.bit_count() != m:
            masked[mask] = zero
    return inverse_walsh_hadamard(WalshSpectrum(spec.n_coords, masked), f.space)


def parseval_gap(f: TensorFunction) -> float:
    spec = walsh_hadamard_transform(f)
    total = sum(abs(c) ** 2 for c in spec.coeffs)
    from .space import lp_norm

    return abs(float(total) - lp_norm(f, 2) ** 2)


def khintchine_ratio(c) -> float:
    """E|sum c_i r_i| / ||c||_2 by exhaustive enumeration of sign patterns."""
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    d = c.shape[0]
    if not 1 <= d <= KHINTCHINE_MAX_DIM:
        raise ValueError(f"dimension must be in [1, {KHINTCHINE_MAX_DIM}]")
    l2 = sqrt(float((c * c).sum()))
    if l2 == 0.0:
        raise ValueError("zero vector")
    total = 0.0
    block = 1 << 16
    for start in range(0, 1 << d, block):
        idx = np.arange(start, min(start + block, 1 << d))
        signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(d)) & 1)
        total += np.abs(signs @ c).sum()
    return total / (1 << d) / l2
