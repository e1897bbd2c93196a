"""Determinant representation of R± and the residue of R± at ν = 0.

With t = tan(πz) the cross factor of R± factorizes into two Vandermonde
determinants, and the N-fold integral collapses to

    R± = (-1/π)^{N(N-1)/2} N! det Q±,
    (Q±)_{mk} = (1/2πi) ∫ (cos πz)^{N-1} (tan πz)^{m-1} z^{k-1} Q±(z) dz,
    Q±(z) = e^{±iπz} prod_k Γ(α_k - z) prod_j Γ(z + β_j) / Γ(a - z).

The entries of the last column diverge as a → A + B; the residue there is
N e^{∓iπB} times the reduced (N-1)-fold integral.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import special_functions as sf
from .mb_model import (
    MBParameterSet,
    closed_form_rhs,
    default_shift,
    derived_quantities,
    reduction_parameters,
    validate,
)
from .quadrature import ContourSpec, integrate_line

__all__ = [
    "QMatrix",
    "ResidueResult",
    "IllConditionedFitError",
    "q_kernel",
    "log_q_kernel",
    "q_entry_integrand",
    "q_matrix",
    "r_via_determinant",
    "determinant_with_error",
    "asymptotic_leading",
    "extract_residue",
    "residue_prediction_reduced",
    "residue_prediction_closed_form",
    "at_nu",
    "vandermonde",
    "t_hat",
    "cross_factor",
    "DEFAULT_EPSILONS",
]

DEFAULT_EPSILONS = (0.2, 0.1, 0.05)
MAX_FIT_CONDITION = 1e10


class IllConditionedFitError(ArithmeticError):
    pass


def _sign(p: MBParameterSet, sign: int | None) -> int:
    if not p.family.is_r:
        raise ValueError("determinant representation applies to RPlus/RMinus")
    return p.family.sign if sign is None else int(sign)


def log_q_kernel(p: MBParameterSet, z, sign: int | None = None):
    s = _sign(p, sign)
    z = np.asarray(z, dtype=complex)
    out = s * 1j * math.pi * z
    for x in p.alphas:
        out = out + sf.log_gamma(x - z)
    for b in p.betas:
        out = out + sf.log_gamma(z + b)
    return out - sf.log_gamma(p.a - z)


def q_kernel(p: MBParameterSet, z, sign: int | None = None):
    out = np.exp(log_q_kernel(p, z, sign))
    return complex(out) if np.ndim(out) == 0 else out


def q_entry_integrand(p: MBParameterSet, m: int, k: int, sign: int | None = None):
    """I_{mk}(z) = (cos πz)^{N-1} (tan πz)^{m-1} z^{k-1} Q±(z); m, k are 1-based."""
    N = p.N

    def f(z):
        z = np.asarray(z, dtype=complex)
        log = (N - 1) * sf.log_cos_pi(z) + log_q_kernel(p, z, sign)
        return np.exp(log) * sf.tan_pi(z) ** (m - 1) * z ** (k - 1)

    return f


def _entry_tail_exponent(p: MBParameterSet, k: int) -> complex:
    d = derived_quantities(p)
    return d.A + d.B - p.a - p.N + k - 1


def vandermonde(x: Sequence[complex]) -> np.ndarray:
    """Rows are powers 0..n-1, columns the points."""
    x = np.asarray(x, dtype=complex)
    return x[None, :] ** np.arange(len(x))[:, None]


def t_hat(t: Sequence[complex], sign: int) -> np.ndarray:
    """Tangent Vandermonde matrix whose last column is replaced by the limit ∓i of tan."""
    t = list(t) + [-1j if sign > 0 else 1j]
    return vandermonde(t)


def cross_factor(z: Sequence[complex]) -> complex:
    """prod_{k<j} (z_k - z_j)(tan πz_j - tan πz_k)."""
    z = [complex(x) for x in z]
    t = [complex(sf.tan_pi(x)) for x in z]
    out = 1 + 0j
    for k in range(len(z)):
        for j in range(k + 1, len(z)):
            out *= (z[k] - z[j]) * (t[j] - t[k])
    return out


@dataclass(frozen=True)
class QMatrix:
    """entries[m-1][k-1] holds (Q±)_{mk}: tangent power m-1, monomial power k-1."""

    sign: int
    entries: np.ndarray
    entry_errors: np.ndarray


def q_matrix(p: MBParameterSet, sign: int | None = None, contour: ContourSpec | None = None) -> QMatrix:
    s = _sign(p, sign)
    if contour is None:
        contour = ContourSpec.default(1, default_shift(p))
    report = validate(p, contour.shift)
    if not report.ok:
        raise ValueError("; ".join(report.messages))
    N = p.N
    entries = np.zeros((N, N), dtype=complex)
    errors = np.zeros((N, N))
    for m in range(1, N + 1):
        for k in range(1, N + 1):
            res = integrate_line(
                q_entry_integrand(p, m, k, s), contour, tail_exponents=[_entry_tail_exponent(p, k)]
            )
            entries[m - 1, k - 1] = res.value
            errors[m - 1, k - 1] = res.error_estimate
    return QMatrix(s, entries, errors)


def determinant_with_error(entries: np.ndarray, errors: np.ndarray) -> tuple[complex, float]:
    """det by LU with partial pivoting; first-order error bound sum |cofactor| * err."""
    det = complex(np.linalg.det(entries))
    n = entries.shape[0]
    if n == 1:
        return det, float(errors[0, 0])
    cof = np.zeros_like(entries)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(entries, i, 0), j, 1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return det, float(np.sum(np.abs(cof) * errors))


def _det_prefactor(N: int) -> float:
    return (-1.0 / math.pi) ** (N * (N - 1) // 2) * math.factorial(N)


def r_via_determinant(
    p: MBParameterSet, sign: int | None = None, contour: ContourSpec | None = None
) -> tuple[complex, float]:
    """R± from det Q±; returns (value, error bound)."""
    q = q_matrix(p, sign, contour)
    det, err = determinant_with_error(q.entries, q.entry_errors)
    pre = _det_prefactor(p.N)
    return pre * det, abs(pre) * err


def asymptotic_leading(p: MBParameterSet, sign: int | None, m: int, k: int, u: float) -> complex:
    """Leading power law of I±_{mk} at z = ∓iu, u → ∞:

        2 π^N u^{A+B-a-N+k-1} (∓i)^{B-A+a+m+k-2}   (principal powers)
    """
    if u <= 0:
        raise ValueError("u must be positive")
    s = _sign(p, sign)
    d = derived_quantities(p)
    base = -1j if s > 0 else 1j
    power = d.B - d.A + p.a + m + k - 2
    phase = cmath.exp(power * cmath.log(base))
    return 2 * math.pi**p.N * cmath.exp((d.A + d.B - p.a - p.N + k - 1) * math.log(u)) * phase


def at_nu(p: MBParameterSet, nu: complex) -> MBParameterSet:
    """Same instance with a moved so that a - A - B = nu."""
    d = derived_quantities(p)
    return MBParameterSet(p.family, p.N, p.alphas, p.betas, d.A + d.B + nu)


@dataclass(frozen=True)
class ResidueResult:
    residue: complex
    values: tuple[complex, ...]
    errors: tuple[float, ...]
    epsilons: tuple[float, ...]
    coefficients: tuple[complex, ...]
    condition: float
    model: str


def _evaluate_r(p, route, contour):
    if route == "determinant":
        return r_via_determinant(p, None, contour)
    if route == "quadrature":
        from .mb_model import build_integrand, tail_exponents
        from .quadrature import integrate_tensor

        c = contour or ContourSpec.default(p.N, default_shift(p))
        res = integrate_tensor(build_integrand(p), c, p.N, tail_exponents=tail_exponents(p))
        return res.value, res.error_estimate
    if route == "closed-form":
        return closed_form_rhs(p), 0.0
    raise ValueError(f"unknown route {route!r}")


def extract_residue(
    p: MBParameterSet,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    *,
    route: str = "determinant",
    model: str = "log",
    contour: ContourSpec | None = None,
) -> ResidueResult:
    """Numerical residue of R± at ν = 0 from evaluations at ν = ε.

    ``model="laurent"`` fits R(ε) = c₋₁/ε + c₀ + c₁ε.  ``model="log"`` (default)
    fits log(ε R(ε)) = log c₋₁ + d₁ε + d₂ε², i.e. the same quadratic-in-ε model
    applied to the logarithm of the regular part ε R(ε); it has far smaller
    model bias for gamma-product-like dependence on ε.  The parameter a of
    ``p`` is ignored: it is set to A + B + ε for each ε.
    """
    if not p.family.is_r:
        raise ValueError("residue extraction applies to RPlus/RMinus")
    eps = np.asarray([float(e) for e in epsilons])
    if len(eps) < 3 or np.any(eps <= 0) or len(set(eps.tolist())) != len(eps):
        raise ValueError("need at least three distinct positive epsilons")
    vals, errs = [], []
    for e in eps:
        v, err = _evaluate_r(at_nu(p, e), route, contour)
        vals.append(complex(v))
        errs.append(float(err))
    vals_arr = np.asarray(vals)
    if model == "laurent":
        mat = np.stack([1 / eps, np.ones_like(eps), eps], axis=1)
        cond = float(np.linalg.cond(mat))
        if cond > MAX_FIT_CONDITION:
            raise IllConditionedFitError(f"residue fit condition number {cond:.3g}")
        coef, *_ = np.linalg.lstsq(mat.astype(complex), vals_arr, rcond=None)
        residue = complex(coef[0])
    elif model == "log":
        g = eps * vals_arr
        ref = g[np.argmin(eps)]
        mat = np.stack([np.ones_like(eps), eps, eps**2], axis=1)
        cond = float(np.linalg.cond(mat))
        if cond > MAX_FIT_CONDITION:
            raise IllConditionedFitError(f"residue fit condition number {cond:.3g}")
        coef, *_ = np.linalg.lstsq(mat.astype(complex), np.log(g / ref), rcond=None)
        residue = complex(ref * np.exp(coef[0]))
    else:
        raise ValueError("model must be 'log' or 'laurent'")
    return ResidueResult(residue, tuple(vals), tuple(errs), tuple(eps.tolist()), tuple(complex(c) for c in coef), cond, model)


def residue_prediction_reduced(p: MBParameterSet) -> complex:
    """N e^{∓iπB} times the closed form of the reduced (N-1)-fold integral."""
    d = derived_quantities(p)
    return p.N * cmath.exp(-p.family.sign * 1j * math.pi * d.B) * closed_form_rhs(reduction_parameters(p))


def residue_prediction_closed_form(p: MBParameterSet) -> complex:
    """Residue of the R± closed form at ν = 0 (Γ(ν) ~ 1/ν)."""
    d = derived_quantities(p)
    log = 0j
    for x in p.alphas:
        for b in p.betas:
            log += sf.log_gamma(x + b)
    rg = 1.0 + 0j
    for x in p.alphas:
        rg *= sf.reciprocal_gamma(d.A + d.B - x)
    phase = cmath.exp(-p.family.sign * 1j * math.pi * d.B)
    return math.factorial(p.N) * phase * cmath.exp(log) * rg
