"""Residue-series evaluation of R± and the Milne-type multiple sum inside it.

Closing the contours to the left turns R± into

    N! e^{∓iπB} [prod_{j,k} Γ(α_k+β_j) / prod_j Γ(a+β_j)] * S,

    S = sum_{n ∈ ℕ^N} prod_{k<j} (β_k+n_k-β_j-n_j)/(β_k-β_j)
                      prod_j prod_{k=1}^{N+1} (α_k+β_j)_{n_j} / (1-β_k+β_j)_{n_j},

with β_{N+1} = 1 - a.  Terms decay only like n^{-1-ν}, so raw partial sums
converge like n^{-ν}.  Expanding the Vandermonde ratio in monomials splits
the cube sum into products of 1-D moment sums sum_n n^m w_j(n); each is
extrapolated in n with its known exponents and the limits are recombined.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import special_functions as sf
from .extrapolate import fit_limit
from .mb_model import MBParameterSet, derived_quantities

__all__ = [
    "SeriesResult",
    "DegenerateSpacingError",
    "NonConvergentError",
    "residue_series",
    "milne_sum",
    "milne_closed_form",
    "milne_weights",
    "partial_sums",
    "cube_sums_bruteforce",
    "vandermonde_polynomial",
]

DEFAULT_N_MAX = 60
SPACING_GAP = 0.05
MAX_SERIES_DIM = 3
_EXTRAP_ORDER = 8
_FIT_START_DIVISOR = 3
_MIN_EXTRAP_N = 24


class DegenerateSpacingError(ValueError):
    pass


class NonConvergentError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesResult:
    """``value`` is the extrapolated sum (the raw cube partial sum when
    extrapolation is off); ``partial_sum`` is always the raw one."""

    value: complex
    terms_used: int
    tail_estimate: float
    partial_sum: complex


def _check(p: MBParameterSet):
    if not p.family.is_r:
        raise ValueError("residue series is defined for RPlus/RMinus only")
    if p.N > MAX_SERIES_DIM:
        raise ValueError(f"series supports N <= {MAX_SERIES_DIM}")
    nu = derived_quantities(p).nu
    if not nu.real > 0:
        raise NonConvergentError(f"series diverges for Re(ν) <= 0 (ν = {nu})")
    be = p.betas
    for k in range(len(be)):
        for j in range(k + 1, len(be)):
            d = be[k] - be[j]
            if abs(d - round(d.real)) < SPACING_GAP:
                raise DegenerateSpacingError(f"β{k + 1}-β{j + 1} = {d} is within {SPACING_GAP} of an integer")


def milne_weights(p: MBParameterSet, n_max: int) -> np.ndarray:
    """w[j, n] = prod_k (α_k+β_j)_n / (1-β_k+β_j)_n by running recurrence."""
    be_ext = list(p.betas) + [1 - p.a]
    w = np.ones((p.N, n_max + 1), dtype=complex)
    n = np.arange(n_max)
    for j, bj in enumerate(p.betas):
        ratio = np.ones(n_max, dtype=complex)
        for ak in p.alphas:
            ratio *= ak + bj + n
        for bk in be_ext:
            ratio /= 1 - bk + bj + n
        w[j, 1:] = np.cumprod(ratio)
    return w


def _terms(p: MBParameterSet, n_max: int) -> np.ndarray:
    """Every bare term on the cube [0, n_max]^N (brute force)."""
    N = p.N
    w = milne_weights(p, n_max)
    idx = np.arange(n_max + 1)
    grids = np.meshgrid(*([idx] * N), indexing="ij", sparse=True)
    term = np.ones([n_max + 1] * N, dtype=complex)
    for j in range(N):
        term = term * w[j][tuple(slice(None) if d == j else None for d in range(N))]
    for k in range(N):
        for j in range(k + 1, N):
            d0 = p.betas[k] - p.betas[j]
            term = term * ((d0 + grids[k] - grids[j]) / d0)
    return term


def cube_sums_bruteforce(p: MBParameterSet, n_max: int) -> np.ndarray:
    """S[n] = sum of the bare terms over the cube [0, n]^N, by direct summation."""
    term = _terms(p, n_max)
    idx = np.arange(n_max + 1)
    grids = np.meshgrid(*([idx] * p.N), indexing="ij", sparse=True)
    shell = np.zeros(term.shape, dtype=int)
    for g in grids:
        shell = np.maximum(shell, g)
    flat = shell.ravel()
    per = np.bincount(flat, weights=term.real.ravel(), minlength=n_max + 1) + 1j * np.bincount(
        flat, weights=term.imag.ravel(), minlength=n_max + 1
    )
    return np.cumsum(per)


def vandermonde_polynomial(betas) -> dict[tuple[int, ...], complex]:
    """prod_{k<j} (β_k+n_k-β_j-n_j)/(β_k-β_j) expanded in monomials of n."""
    N = len(betas)
    poly: dict[tuple[int, ...], complex] = {(0,) * N: 1.0 + 0j}
    for k in range(N):
        for j in range(k + 1, N):
            d0 = betas[k] - betas[j]
            # factor 1 + n_k/d0 - n_j/d0
            pieces = [((0,) * N, 1.0 + 0j)]
            for var, c in ((k, 1 / d0), (j, -1 / d0)):
                e = [0] * N
                e[var] = 1
                pieces.append((tuple(e), c))
            out: dict[tuple[int, ...], complex] = {}
            for mono, coef in poly.items():
                for e, c in pieces:
                    key = tuple(a + b for a, b in zip(mono, e))
                    out[key] = out.get(key, 0) + coef * c
            poly = out
    return poly


def _moment_sums(p: MBParameterSet, n_max: int) -> np.ndarray:
    """C[j, m, n] = sum_{i<=n} i^m w_j(i)."""
    w = milne_weights(p, n_max)
    i = np.arange(n_max + 1, dtype=float)
    powers = np.stack([i**m for m in range(p.N)])
    return np.cumsum(w[:, None, :] * powers[None, :, :], axis=2)


def _combine(poly, moments):
    total = 0j
    for mono, coef in poly.items():
        term = coef
        for j, m in enumerate(mono):
            term = term * moments[j][m]
        total = total + term
    return total


def partial_sums(p: MBParameterSet, n_max: int) -> np.ndarray:
    """S[n] = sum of the bare terms over the cube [0, n]^N, n = 0..n_max.

    Uses the factorization of the cube sum into 1-D moment sums; equal to
    ``cube_sums_bruteforce`` up to rounding.
    """
    return _combine(vandermonde_polynomial(p.betas), _moment_sums(p, n_max))


def _fit_shift(p: MBParameterSet) -> list[complex]:
    """Shift σ_j making w_j(n) = K (n+σ_j)^e (1 + O(n^-2)).

    From log Γ(n+c) = (n+c-1/2) log n - n + ... + c(c-1)/(2n) + O(n^-2).
    """
    be_ext = list(p.betas) + [1 - p.a]
    out = []
    for bj in p.betas:
        up = [ak + bj for ak in p.alphas]
        down = [1 - bk + bj for bk in be_ext]
        e = sum(up) - sum(down)
        out.append((sum(c * (c - 1) for c in up) - sum(c * (c - 1) for c in down)) / (2 * e))
    return out


def _extrapolate(p: MBParameterSet, n_max: int) -> tuple[complex, float]:
    nu = derived_quantities(p).nu
    C = _moment_sums(p, n_max)
    poly = vandermonde_polynomial(p.betas)
    sigma = _fit_shift(p)

    def combined(top, order):
        lo = max(2, top // _FIT_START_DIVISOR)
        lim = np.zeros((p.N, p.N), dtype=complex)
        for j in range(p.N):
            x = np.arange(lo, top + 1) + sigma[j]
            for m in range(p.N):
                lead = -nu - p.N + m + 1
                lim[j, m], _ = fit_limit(x, C[j, m, lo : top + 1], [lead - k for k in range(order)])
        return complex(_combine(poly, lim))

    value = combined(n_max, _EXTRAP_ORDER)
    # error: spread against a lower-order model and a shifted sample window, doubled
    tail = 2 * max(abs(value - combined(n_max, _EXTRAP_ORDER - 1)), abs(value - combined(n_max - 2, _EXTRAP_ORDER)))
    return value, float(tail)


def milne_sum(p: MBParameterSet, n_max: int = DEFAULT_N_MAX, extrapolate: bool = True) -> SeriesResult:
    """The bare multiple sum S, truncated to the cube [0, n_max]^N (then extrapolated)."""
    _check(p)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    sums = partial_sums(p, n_max)
    raw = complex(sums[-1])
    terms = (n_max + 1) ** p.N
    if extrapolate and n_max >= _MIN_EXTRAP_N:
        value, tail = _extrapolate(p, n_max)
        return SeriesResult(complex(value), terms, float(tail), raw)
    tail = abs(raw - sums[-3]) if n_max >= 2 else math.inf
    return SeriesResult(raw, terms, float(tail), raw)


def _prefactor(p: MBParameterSet) -> complex:
    d = derived_quantities(p)
    log = 0j
    for b in p.betas:
        for x in p.alphas:
            log += sf.log_gamma(x + b)
        log -= sf.log_gamma(p.a + b)
    phase = cmath.exp(-p.family.sign * 1j * math.pi * d.B)
    return math.factorial(p.N) * phase * cmath.exp(log)


def residue_series(p: MBParameterSet, n_max: int = DEFAULT_N_MAX, extrapolate: bool = True) -> SeriesResult:
    """R± from its left-half-plane residues."""
    bare = milne_sum(p, n_max, extrapolate)
    pre = _prefactor(p)
    return SeriesResult(pre * bare.value, bare.terms_used, abs(pre) * bare.tail_estimate, pre * bare.partial_sum)


def milne_closed_form(p: MBParameterSet) -> complex:
    """Γ(ν) prod_j Γ(a+β_j) / prod_j Γ(a-α_j): the value of the bare sum."""
    nu = derived_quantities(p).nu
    log = sf.log_gamma(nu)
    for b in p.betas:
        log += sf.log_gamma(p.a + b)
    rg = 1.0 + 0j
    for x in p.alphas:
        rg *= sf.reciprocal_gamma(p.a - x)
    return cmath.exp(log) * rg
