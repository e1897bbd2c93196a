"""Gauss-Legendre quadrature along vertical lines Re z = c.

A line integral (1/2πi)∫ f(z) dz over z = c + it becomes (1/2π)∫ f(c+it) dt.
The t-axis is cut into panels carrying 16 Gauss-Legendre nodes each: fine
panels of width 0.25 on |t| <= 2 (where the gamma poles sit closest to the
contour), then uniform panels of width 16/nodes_per_unit out to T.

For integrands that decay only like a power of |t| the mesh is continued
geometrically past T and the truncated integrals at T, 2T, 4T, ... are
extrapolated to T = ∞ with prescribed exponents (see ``extrapolate``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .extrapolate import fit_limit, power_family

__all__ = [
    "ContourSpec",
    "QuadResult",
    "PairwiseIntegrand",
    "NonFiniteIntegrandError",
    "LineRule",
    "line_rule",
    "integrate_line",
    "integrate_tensor",
    "estimate_tail",
    "fit_tail",
    "MAX_DIM",
]

NODES_PER_PANEL = 16
CORE_HALF_WIDTH = 2.0
CORE_PANEL = 0.25
MAX_DIM = 3
TAIL_LEVELS = 7
TAIL_PANELS_PER_LEVEL = 2
TAIL_ORDER = 5


class NonFiniteIntegrandError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    shift: float = 0.0
    truncation: float = 40.0
    nodes_per_unit: int = 8

    def __post_init__(self):
        if self.truncation < 5:
            raise ValueError("truncation height must be at least 5")
        if self.nodes_per_unit < 4:
            raise ValueError("nodes_per_unit must be at least 4")

    @classmethod
    def default(cls, dim: int, shift: float = 0.0) -> "ContourSpec":
        if dim <= 1:
            return cls(shift, 40.0, 8)
        return cls(shift, 30.0, 6)

    def refined(self) -> "ContourSpec":
        return ContourSpec(self.shift, self.truncation, 2 * self.nodes_per_unit)


@dataclass(frozen=True)
class QuadResult:
    """Integral value, error estimate (discretization + truncation), node evaluations."""

    value: complex
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class PairwiseIntegrand:
    """An integrand of the form prod_j single(z_j) * prod_{k<j} pair(z_k, z_j).

    ``log_single`` and ``log_pair`` return logarithms (any branch).  ``pair_growth``
    is a rate g with |pair(z_k, z_j)| <~ exp(g*pi*(|Im z_k| + |Im z_j|)); it is
    only used to rescale intermediate products and keep them in range.
    """

    dim: int
    log_single: Callable[[np.ndarray], np.ndarray]
    log_pair: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    pair_growth: float = 1.0

    def __call__(self, *zs):
        if len(zs) == 1 and isinstance(zs[0], (list, tuple)):
            zs = tuple(zs[0])
        if len(zs) != self.dim:
            raise ValueError(f"expected {self.dim} variables, got {len(zs)}")
        zs = [np.asarray(z, dtype=complex) for z in zs]
        total = sum(self.log_single(z) for z in zs)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(self.dim):
                for j in range(k + 1, self.dim):
                    total = total + self.log_pair(zs[k], zs[j])
            out = np.exp(total)
        out = np.where(np.isneginf(np.real(total)), 0.0, out)
        return complex(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass(frozen=True)
class LineRule:
    t: np.ndarray
    w: np.ndarray
    level: np.ndarray  # smallest k with |t| <= heights[k]
    heights: np.ndarray

    def __len__(self):
        return len(self.t)


def _breaks(contour: ContourSpec, tail_levels: int) -> tuple[np.ndarray, np.ndarray]:
    T = float(contour.truncation)
    core = np.arange(0.0, CORE_HALF_WIDTH + 1e-12, CORE_PANEL)
    width = NODES_PER_PANEL / contour.nodes_per_unit
    n_outer = max(1, math.ceil((T - CORE_HALF_WIDTH) / width))
    outer = np.linspace(CORE_HALF_WIDTH, T, n_outer + 1)[1:]
    pos = [core, outer]
    heights = [T]
    for k in range(1, tail_levels + 1):
        lo, hi = T * 2 ** (k - 1), T * 2**k
        pos.append(np.linspace(lo, hi, TAIL_PANELS_PER_LEVEL + 1)[1:])
        heights.append(hi)
    right = np.concatenate(pos)
    return np.concatenate([-right[::-1], right[1:]]), np.array(heights)


def line_rule(contour: ContourSpec, order: int = NODES_PER_PANEL, tail_levels: int = 0) -> LineRule:
    """Composite Gauss-Legendre nodes/weights on the t-axis (weights carry 1/2π)."""
    edges, heights = _breaks(contour, tail_levels)
    x, w = _gauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel() / (2.0 * math.pi)
    level = np.searchsorted(heights, np.abs(t) * (1 - 1e-14), side="left")
    return LineRule(t, wt, level, heights)


def _check_finite(values, z):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.flatnonzero(bad.ravel())[0]
        node = np.broadcast_to(z, values.shape).ravel()[idx] if np.ndim(z) else z
        raise NonFiniteIntegrandError(f"non-finite integrand value at node {node!r}")


def _line_values(f, contour, rule):
    z = contour.shift + 1j * rule.t
    values = np.asarray(f(z), dtype=complex)
    values = np.broadcast_to(values, z.shape)
    _check_finite(values, z)
    return values


def integrate_line(
    f: Callable,
    contour: ContourSpec,
    *,
    tail_exponents: Sequence[complex] | None = None,
) -> QuadResult:
    """(1/2πi)∫ f(z) dz along Re z = c, |Im z| <= T.

    ``f`` must accept a numpy array of nodes.  With ``tail_exponents`` (the
    power laws |t|**p of the integrand in its slowly decaying directions) the
    integral is extrapolated to the full line instead of being truncated.
    """
    if tail_exponents:
        return _extrapolated([f], contour, 1, tail_exponents, measure=1.0)
    rule = line_rule(contour)
    half = line_rule(contour, order=NODES_PER_PANEL // 2)
    fine = _line_values(f, contour, rule)
    coarse = _line_values(f, contour, half)
    value = np.sum(rule.w * fine)
    disc = abs(value - np.sum(half.w * coarse))
    trunc = (estimate_tail(f, contour, "up") + estimate_tail(f, contour, "down")) / (2 * math.pi)
    return QuadResult(complex(value), float(disc + trunc), len(rule) + len(half) + 6)


# ----------------------------------------------------------------------------
# tensor products


def _contract(u: np.ndarray, pair: np.ndarray | None, dim: int) -> complex:
    if dim == 1:
        return complex(np.sum(u))
    if dim == 2:
        return complex(u @ pair @ u)
    # dim == 3: sum_{a,b} u_a u_b P_ab (P diag(u) P^T)_ab
    inner = (pair * u[None, :]) @ pair.T
    return complex(np.sum((u[:, None] * u[None, :]) * pair * inner))


def _pairwise_tables(f: PairwiseIntegrand, z: np.ndarray, t: np.ndarray, w: np.ndarray):
    scale = f.pair_growth * math.pi * np.abs(t)
    log_u = f.log_single(z) + (f.dim - 1) * scale
    with np.errstate(over="ignore", under="ignore"):
        u = w * np.exp(log_u)
    pair = None
    if f.dim > 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = f.log_pair(z[:, None], z[None, :]) - scale[:, None] - scale[None, :]
            pair = np.exp(lp)
        pair = np.where(np.isneginf(lp.real), 0.0, pair)
    _check_finite(u, z)
    if pair is not None:
        _check_finite(pair, z[:, None])
    return u, pair


def _generic_sum(f, z: np.ndarray, w: np.ndarray, dim: int) -> complex:
    n = len(z)
    if dim == 1:
        vals = np.asarray(f(z), dtype=complex)
        _check_finite(vals, z)
        return complex(np.sum(w * vals))
    shape = [1] * dim
    axes = []
    for d in range(1, dim):
        s = list(shape)
        s[d] = n
        axes.append((z.reshape(s), w.reshape(s)))
    block = max(1, int(4_000_000 // n ** (dim - 1)))
    partials = []
    for start in range(0, n, block):
        s = list(shape)
        s[0] = -1
        z0 = z[start : start + block].reshape(s)
        w0 = w[start : start + block].reshape(s)
        vals = np.asarray(f(z0, *[a[0] for a in axes]), dtype=complex)
        _check_finite(vals, z0)
        weight = w0
        for _, wa in axes:
            weight = weight * wa
        partials.append(np.sum(vals * weight))
    return complex(np.sum(partials))


def _tensor_sum(f, contour, rule, dim, mask=None) -> complex:
    z = contour.shift + 1j * rule.t
    w = rule.w if mask is None else np.where(mask, rule.w, 0.0)
    if isinstance(f, PairwiseIntegrand):
        u, pair = _pairwise_tables(f, z, rule.t, w)
        return _contract(u, pair, dim)
    return _generic_sum(f, z, w, dim)


def integrate_tensor(
    f,
    contour: ContourSpec,
    dim: int,
    *,
    measure: str = "2pi",
    tail_exponents: Sequence[complex] | None = None,
) -> QuadResult:
    """Iterated line integral over dim variables on the same contour.

    ``f`` is either a PairwiseIntegrand (contracted with matrix products) or a
    callable taking ``dim`` broadcastable node arrays.  ``measure="4pi"`` uses
    dz/(4πi) per variable instead of dz/(2πi).
    """
    if dim < 1 or dim > MAX_DIM:
        raise ValueError(f"tensor quadrature supports 1 <= dim <= {MAX_DIM}, got {dim}")
    if measure not in ("2pi", "4pi"):
        raise ValueError("measure must be '2pi' or '4pi'")
    factor = 1.0 if measure == "2pi" else 0.5**dim
    if tail_exponents:
        return _extrapolated([f], contour, dim, tail_exponents, measure=factor)
    rule = line_rule(contour)
    half = line_rule(contour, order=NODES_PER_PANEL // 2)
    value = _tensor_sum(f, contour, rule, dim)
    coarse = _tensor_sum(f, contour, half, dim)
    # truncation: mass of the outermost shell of panels, an upper estimate for
    # exponentially decaying integrands
    inner = np.abs(rule.t) < contour.truncation - NODES_PER_PANEL / contour.nodes_per_unit
    shell = abs(value - _tensor_sum(f, contour, rule, dim, mask=inner))
    err = abs(value - coarse) + shell
    evals = len(rule) ** dim + len(half) ** dim
    return QuadResult(complex(value * factor), float(err * factor), int(evals))


def _extrapolated(fs, contour, dim, tail_exponents, measure) -> QuadResult:
    f = fs[0]
    rule = line_rule(contour, tail_levels=TAIL_LEVELS)
    half = line_rule(contour, order=NODES_PER_PANEL // 2, tail_levels=TAIL_LEVELS)
    exps = power_family([complex(p) + 1 for p in tail_exponents], TAIL_ORDER)

    def levels(r):
        return np.array(
            [_tensor_sum(f, contour, r, dim, mask=r.level <= k) for k in range(len(r.heights))]
        )

    fine = levels(rule)
    coarse = levels(half)
    value, fit_err = fit_limit(rule.heights, fine, exps)
    value_c, _ = fit_limit(half.heights, coarse, exps)
    err = abs(value - value_c) + fit_err
    evals = (len(rule) ** dim + len(half) ** dim) * len(rule.heights)
    return QuadResult(complex(value * measure), float(err * abs(measure)), int(evals))


# ----------------------------------------------------------------------------
# tails


def fit_tail(f: Callable, contour: ContourSpec, direction: str) -> tuple[str, float, float]:
    """Fit |f| beyond T by an exponential or a power law.

    Returns (kind, rate, bound): kind is "exp" (|f| ~ e^{-rate t}) or "power"
    (|f| ~ t^{-rate}), bound is the integral of the fitted envelope over
    [T, ∞) in the t variable, +inf when |f| is not decreasing at the probes.
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    T = float(contour.truncation)
    sgn = 1.0 if direction == "up" else -1.0
    heights = np.array([T, 1.25 * T, 1.5 * T])
    z = contour.shift + 1j * sgn * heights
    mags = np.abs(np.asarray(f(z), dtype=complex))
    if np.all(mags == 0):
        return "exp", float("inf"), 0.0
    if not np.all(np.isfinite(mags)) or np.any(np.diff(mags) >= 0):
        return "power", 0.0, float("inf")
    logm = np.log(mags)
    lin = np.polyfit(heights, logm, 1, full=True)
    pw = np.polyfit(np.log(heights), logm, 1, full=True)
    res_lin = lin[1][0] if len(lin[1]) else 0.0
    res_pw = pw[1][0] if len(pw[1]) else 0.0
    head = mags[0]
    if res_lin <= res_pw:
        rate = -lin[0][0]
        return "exp", float(rate), float(head / rate)
    rate = -pw[0][0]
    if rate <= 1.0:
        return "power", float(rate), float("inf")
    return "power", float(rate), float(head * T / (rate - 1.0))


def estimate_tail(f: Callable, contour: ContourSpec, direction: str) -> float:
    """Bound on ∫_T^∞ |f(c ± it)| dt from the fitted decay envelope."""
    return fit_tail(f, contour, direction)[2]
