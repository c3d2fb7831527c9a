"""Discretized torus: cyclic-group factors, spectra, analytic-type masks,
and the prime-exponent lift connecting Dirichlet polynomials to them.

Frequencies use symmetric representatives in (-K/2, K/2]. Inputs are
expected band-limited strictly below K/2 per coordinate; the aliased
Nyquist row (K even, |entry| = K/2) is rejected wherever an analytic-type
membership question is asked, because sign conventions are ambiguous there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .space import (
    COMPLEX,
    ProductSpace,
    TensorFunction,
    lp_norm,
    make_product_space,
    tensor_function,
    uniform_factor,
)


class NyquistError(ValueError):
    """A frequency entry sits on the aliased Nyquist row."""


def torus_space(K: int, N: int) -> ProductSpace:
    """N uniform K-point cyclic factors, complex scalars."""
    if K < 2:
        raise ValueError("need K >= 2 points per circle")
    if N < 1:
        raise ValueError("need at least one coordinate")
    return make_product_space([uniform_factor(K, COMPLEX)] * N, COMPLEX)


def is_torus_space(space: ProductSpace) -> bool:
    if space.scalar_mode != COMPLEX:
        return False
    k = space.factors[0].outcome_count
    for f in space.factors:
        if f.outcome_count != k:
            return False
        if any(abs(w - 1.0 / k) > 1e-12 for w in f.weights):
            return False
    return True


@dataclass(frozen=True, eq=False)
class TorusSpectrum:
    """Finite frequency map of a grid function, symmetric representatives."""

    K: int
    n_coords: int
    coeffs: dict

    def max_abs_freq(self) -> int:
        out = 0
        for n in self.coeffs:
            for e in n:
                out = max(out, abs(e))
        return out

    def is_band_limited(self) -> bool:
        return self.max_abs_freq() <= (self.K - 1) // 2

    def to_json(self) -> list:
        items = sorted(self.coeffs.items())
        return [
            {"freq": list(n), "coeff": [c.real, c.imag]} for n, c in items
        ]


def _symmetric_reps(K: int) -> np.ndarray:
    k = np.arange(K)
    return np.where(k > K // 2, k - K, k)


def spectrum(f: TensorFunction, drop_tol: float = 1e-14) -> TorusSpectrum:
    """Multidimensional DFT with symmetric frequency representatives."""
    space = f.space
    if not is_torus_space(space):
        raise ValueError("spectrum requires a uniform cyclic-group space")
    K = space.factors[0].outcome_count
    N = space.n_coords
    hat = np.fft.fftn(f.grid) / space.atom_count
    reps = _symmetric_reps(K)
    coeffs = {}
    for idx in np.ndindex(*hat.shape):
        c = complex(hat[idx])
        if abs(c) > drop_tol:
            coeffs[tuple(int(reps[i]) for i in idx)] = c
    return TorusSpectrum(K, N, coeffs)


def inverse_spectrum(spec: TorusSpectrum, space: ProductSpace | None = None) -> TensorFunction:
    if space is None:
        space = torus_space(spec.K, spec.n_coords)
    if not is_torus_space(space) or space.factors[0].outcome_count != spec.K:
        raise ValueError("space does not match the spectrum")
    K, N = spec.K, spec.n_coords
    hat = np.zeros((K,) * N, dtype=np.complex128)
    for n, c in spec.coeffs.items():
        hat[tuple(e % K for e in n)] = c
    grid = np.fft.ifftn(hat) * space.atom_count
    return tensor_function(space, grid.reshape(-1))


def character(space: ProductSpace, freq: Sequence[int]) -> TensorFunction:
    """The character exp(i sum_j n_j x_j) on the K-point grid."""
    if not is_torus_space(space):
        raise ValueError("characters need a uniform cyclic-group space")
    K = space.factors[0].outcome_count
    phase = np.zeros(space.shape, dtype=np.float64)
    for j, n in enumerate(freq):
        t = np.arange(space.shape[j]).reshape(
            [-1 if ax == j else 1 for ax in range(space.n_coords)]
        )
        phase = phase + 2.0 * np.pi * n * t / K
    return tensor_function(space, np.exp(1j * phase).reshape(-1))


def plancherel_gap(f: TensorFunction) -> float:
    spec = spectrum(f, drop_tol=0.0)
    total = sum(abs(c) ** 2 for c in spec.coeffs.values())
    return abs(total - lp_norm(f, 2) ** 2)


# ---------------------------------------------------------------------------
# analytic-type frequency masks
# ---------------------------------------------------------------------------


def _check_nyquist(freq: Sequence[int], K: int | None) -> None:
    if K is not None and K % 2 == 0:
        for e in freq:
            if abs(e) * 2 == K:
                raise NyquistError(f"frequency entry {e} is Nyquist-ambiguous for K={K}")


def mlast_member(freq: Sequence[int], m: int, K: int | None = None) -> bool:
    """Membership of a character in the span whose m trailing nonzero
    frequency entries are positive (all entries nonnegative if fewer)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_nyquist(freq, K)
    support = [j for j, e in enumerate(freq) if e != 0]
    if len(support) < m:
        return all(e >= 0 for e in freq)
    return all(freq[j] > 0 for j in support[-m:])


def all_nonneg_member(freq: Sequence[int], K: int | None = None) -> bool:
    """Fully analytic mask: every frequency entry nonnegative."""
    _check_nyquist(freq, K)
    return all(e >= 0 for e in freq)


def project_mlast(f: TensorFunction, m: int) -> TensorFunction:
    """Spectral masking by the m-last membership test; idempotent."""
    spec = spectrum(f)
    kept = {
        n: c for n, c in spec.coeffs.items() if mlast_member(n, m, K=spec.K)
    }
    return inverse_spectrum(TorusSpectrum(spec.K, spec.n_coords, kept), f.space)


def random_band_limited(
    space: ProductSpace,
    max_abs_freq: int,
    rng: np.random.Generator,
    member=None,
) -> TensorFunction:
    """Random trigonometric polynomial with |entries| <= max_abs_freq,
    optionally restricted to frequencies passing `member`."""
    if not is_torus_space(space):
        raise ValueError("need a uniform cyclic-group space")
    K = space.factors[0].outcome_count
    if max_abs_freq > (K - 1) // 2:
        raise ValueError("band limit must stay strictly below K/2")
    N = space.n_coords
    coeffs = {}
    rng_vals = None
    freqs = list(np.ndindex(*(2 * max_abs_freq + 1,) * N))
    for idx in freqs:
        n = tuple(e - max_abs_freq for e in idx)
        if member is not None and not member(n):
            continue
        re, im = rng.standard_normal(2)
        coeffs[n] = complex(re, im)
    return inverse_spectrum(TorusSpectrum(K, N, coeffs), space)


# ---------------------------------------------------------------------------
# Dirichlet polynomials and the prime-exponent lift
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletPolynomial:
    """Finitely supported coefficient map on positive integers."""

    coeffs: dict

    def __post_init__(self):
        for n in self.coeffs:
            if not (isinstance(n, int) and n >= 1):
                raise ValueError(f"index {n!r} must be a positive integer")

    def to_json(self) -> dict:
        return {
            "coeffs": {
                str(n): [complex(c).real, complex(c).imag]
                for n, c in sorted(self.coeffs.items())
            }
        }

    @staticmethod
    def from_json(obj: dict) -> "DirichletPolynomial":
        return DirichletPolynomial(
            {int(k): complex(v[0], v[1]) for k, v in obj["coeffs"].items()}
        )


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, ascending primes."""
    if n < 1:
        raise ValueError("can only factor positive integers")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def distinct_prime_count(n: int) -> int:
    return len(factorize(n))


def exponent_vector(n: int, prime_pos: dict) -> tuple[int, ...]:
    """Exponent tuple over prime-indexed coordinates, trailing zeros trimmed."""
    fac = factorize(n)
    if not fac:
        return ()
    width = max(prime_pos[p] for p, _ in fac) + 1
    vec = [0] * width
    for p, e in fac:
        vec[prime_pos[p]] = e
    return tuple(vec)


def _prime_positions(indices: Iterable[int]) -> dict:
    top = max(indices, default=1)
    return {p: i for i, p in enumerate(primes_up_to(top))}


def bohr_lift(d: DirichletPolynomial) -> dict:
    """Coefficient map on prime-exponent frequency vectors.

    The index n with factorization prod p_j^(k_j) maps to the tuple
    (k_1, k_2, ...) over the ascending primes, trailing zeros trimmed;
    n = 1 maps to the empty tuple.
    """
    pos = _prime_positions(d.coeffs.keys())
    out = {}
    for n, b in d.coeffs.items():
        out[exponent_vector(n, pos)] = b
    return out


def bohr_drop(coeff_map: dict) -> DirichletPolynomial:
    """Inverse of the lift: exponent vectors back to integer indices."""
    needed = max((len(v) for v in coeff_map), default=0)
    primes: list[int] = []
    limit = 16
    while len(primes) < needed:
        primes = primes_up_to(limit)
        limit *= 2
    coeffs = {}
    for vec, c in coeff_map.items():
        n = 1
        for j, e in enumerate(vec):
            if e < 0:
                raise ValueError("exponent vectors must be nonnegative")
            n *= primes[j] ** e
        coeffs[n] = c
    return DirichletPolynomial(coeffs)


def dirichlet_prime_projection(d: DirichletPolynomial, m: int) -> DirichletPolynomial:
    """Keep coefficients whose index has at most m distinct prime factors."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return DirichletPolynomial(
        {n: b for n, b in d.coeffs.items() if distinct_prime_count(n) <= m}
    )
