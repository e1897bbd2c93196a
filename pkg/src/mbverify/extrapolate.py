"""Limits of sequences whose remainder is a sum of known (possibly complex) powers.

Truncated contour integrals with algebraically decaying integrands and partial
sums of slowly convergent hypergeometric-type series both behave like

    S(x) = L + sum_e c_e x**e,      Re e < 0,

with the exponents e known in advance.  Fitting the c_e by linear least
squares and reading off L is Richardson extrapolation with prescribed
exponents.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["power_family", "fit_limit"]


def power_family(leading: Sequence[complex], order: int) -> list[complex]:
    """Exponents l - j for every leading exponent l and j = 0..order-1."""
    out: list[complex] = []
    for j in range(order):
        for lead in leading:
            out.append(complex(lead) - j)
    return out


def _solve(x, values, exponents):
    xs = x / np.abs(x).max()
    cols = [np.ones_like(xs, dtype=complex)]
    cols += [np.exp(complex(e) * np.log(xs)) for e in exponents]
    mat = np.stack(cols, axis=1)
    norms = np.linalg.norm(mat, axis=0)
    coef, *_ = np.linalg.lstsq(mat / norms, values, rcond=None)
    return coef[0] / norms[0]


def fit_limit(x, values, exponents: Sequence[complex]) -> tuple[complex, float]:
    """Extrapolate ``values`` sampled at ``x`` to x → ∞.

    Returns the limit and an error estimate: the change in the limit when the
    highest-order exponent block is dropped from the model.
    """
    x = np.asarray(x)
    values = np.asarray(values, dtype=complex)
    exponents = list(exponents)
    if len(exponents) + 1 > len(x):
        raise ValueError("not enough samples for the requested exponents")
    limit = _solve(x, values, exponents)
    if not exponents:
        return complex(limit), float("inf")
    # drop the exponents with the smallest real part (the highest correction order)
    cutoff = min(e.real for e in map(complex, exponents))
    reduced = [e for e in exponents if complex(e).real > cutoff + 1e-12]
    coarse = _solve(x, values, reduced)
    return complex(limit), float(abs(limit - coarse))
