"""The integral families: parameters, validity checks, integrands, closed forms.

Six families are modelled.  All of them share the structure

    prod_j single(z_j) * prod_{k<j} pair(z_k, z_j)

so each integrand is built as a ``PairwiseIntegrand``; the tensor quadrature
exploits that structure.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from . import special_functions as sf
from .quadrature import PairwiseIntegrand

__all__ = [
    "MBFamily",
    "MBParameterSet",
    "ArityError",
    "Derived",
    "ValidationReport",
    "derived_quantities",
    "validate",
    "default_shift",
    "build_integrand",
    "integrand",
    "closed_form_rhs",
    "reduction_parameters",
    "tail_exponents",
    "params_to_json",
    "params_from_json",
    "CONVERGENCE_MESSAGE",
]

LOG_PI = math.log(math.pi)
CONVERGENCE_MESSAGE = "R+/R- integrals converge only if Re(ν)>0"


class MBFamily(str, Enum):
    GustafsonFirst = "GustafsonFirst"
    GustafsonSecond = "GustafsonSecond"
    RPlus = "RPlus"
    RMinus = "RMinus"
    TReduced = "TReduced"
    ThreeStars = "ThreeStars"

    @property
    def is_r(self) -> bool:
        return self in (MBFamily.RPlus, MBFamily.RMinus)

    @property
    def sign(self) -> int:
        """+1 for RPlus, -1 for RMinus, 0 otherwise."""
        return {MBFamily.RPlus: 1, MBFamily.RMinus: -1}.get(self, 0)


class ArityError(ValueError):
    pass


def _arity(family: MBFamily, N: int) -> tuple[int, int, bool]:
    """(number of alphas, number of betas, a required)"""
    return {
        MBFamily.GustafsonFirst: (N + 1, N + 1, False),
        MBFamily.GustafsonSecond: (N + 2, N + 1, False),
        MBFamily.RPlus: (N + 1, N, True),
        MBFamily.RMinus: (N + 1, N, True),
        MBFamily.TReduced: (N + 2, N + 1, False),
        MBFamily.ThreeStars: (2 * N + 1, 1, False),
    }[family]


def _cplx_tuple(xs) -> tuple[complex, ...]:
    return tuple(complex(x) for x in xs)


@dataclass(frozen=True)
class MBParameterSet:
    """One instance of an integral family.  ``N`` is the integration dimension."""

    family: MBFamily
    N: int
    alphas: tuple[complex, ...]
    betas: tuple[complex, ...]
    a: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", MBFamily(self.family))
        object.__setattr__(self, "alphas", _cplx_tuple(self.alphas))
        object.__setattr__(self, "betas", _cplx_tuple(self.betas))
        if self.a is not None:
            object.__setattr__(self, "a", complex(self.a))
        min_n = 0 if self.family is MBFamily.TReduced else 1
        if int(self.N) != self.N or self.N < min_n:
            raise ArityError(f"{self.family.value}: N must be an integer >= {min_n}, got {self.N}")
        n_alpha, n_beta, needs_a = _arity(self.family, self.N)
        if len(self.alphas) != n_alpha or len(self.betas) != n_beta:
            raise ArityError(
                f"{self.family.value} with N={self.N} needs {n_alpha} alphas and {n_beta} betas, "
                f"got {len(self.alphas)} and {len(self.betas)}"
            )
        if needs_a and self.a is None:
            raise ArityError(f"{self.family.value} needs the parameter a")
        if not needs_a and self.a is not None:
            raise ArityError(f"{self.family.value} takes no parameter a")

    @property
    def dim(self) -> int:
        return self.N

    def conjugate(self) -> "MBParameterSet":
        return MBParameterSet(
            self.family,
            self.N,
            tuple(x.conjugate() for x in self.alphas),
            tuple(x.conjugate() for x in self.betas),
            None if self.a is None else self.a.conjugate(),
        )


# ----------------------------------------------------------------------------
# JSON


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _unpair(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(float(re), float(im))


def params_to_dict(p: MBParameterSet) -> dict:
    return {
        "family": p.family.value,
        "N": p.N,
        "alphas": [_pair(x) for x in p.alphas],
        "betas": [_pair(x) for x in p.betas],
        "a": None if p.a is None else _pair(p.a),
    }


def params_to_json(p: MBParameterSet) -> str:
    return json.dumps(params_to_dict(p))


def params_from_dict(d: dict) -> MBParameterSet:
    try:
        return MBParameterSet(
            family=MBFamily(d["family"]),
            N=int(d["N"]),
            alphas=[_unpair(v) for v in d["alphas"]],
            betas=[_unpair(v) for v in d["betas"]],
            a=None if d.get("a") is None else _unpair(d["a"]),
        )
    except KeyError as exc:
        raise ArityError(f"missing field {exc.args[0]!r}") from None


def params_from_json(text: str) -> MBParameterSet:
    return params_from_dict(json.loads(text))


# ----------------------------------------------------------------------------
# derived quantities and validation


class Derived(NamedTuple):
    A: complex
    B: complex
    gamma_param: complex | None
    nu: complex | None


def derived_quantities(p: MBParameterSet) -> Derived:
    A = complex(math.fsum(x.real for x in p.alphas), math.fsum(x.imag for x in p.alphas))
    B = complex(math.fsum(x.real for x in p.betas), math.fsum(x.imag for x in p.betas))
    gamma_param = A + B if p.family in (MBFamily.GustafsonSecond, MBFamily.TReduced) else None
    nu = p.a - A - B if p.family.is_r else None
    return Derived(A, B, gamma_param, nu)


@dataclass
class ValidationReport:
    contour_feasible: bool
    converges: bool
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.contour_feasible and self.converges


def _window(p: MBParameterSet) -> tuple[float, float]:
    """Open interval of admissible straight-contour shifts."""
    amin = min(x.real for x in p.alphas)
    if p.family is MBFamily.ThreeStars:
        return -amin, amin
    return max(-x.real for x in p.betas), amin


def default_shift(p: MBParameterSet) -> float:
    """Midpoint of the admissible window (maximal clearance from both pole ladders)."""
    lo, hi = _window(p)
    return 0.5 * (lo + hi)


def validate(p: MBParameterSet, c: float = 0.0) -> ValidationReport:
    msgs: list[str] = []
    lo, hi = _window(p)
    feasible = lo < c < hi
    if not feasible:
        msgs.append(
            f"contour Re z = {c:g} does not separate the pole ladders; admissible window ({lo:g}, {hi:g})"
        )
    converges = True
    if p.family.is_r:
        nu = derived_quantities(p).nu
        if not nu.real > 0:
            converges = False
            msgs.append(f"{CONVERGENCE_MESSAGE}; got Re(ν)={nu.real:.17g}")
    elif p.family is MBFamily.ThreeStars:
        excess = p.betas[0] - sum(p.alphas)
        if not excess.real > 0:
            converges = False
            msgs.append(f"three-stars integral converges only if Re(β - A)>0; got {excess.real:.17g}")
    return ValidationReport(feasible, converges, msgs)


# ----------------------------------------------------------------------------
# integrands


def _lg(x):
    return sf.log_gamma(x)


def _lrg(x):
    """log(1/Γ(x)) with -inf at the zeros of 1/Γ."""
    x = np.asarray(x, dtype=complex)
    n = np.round(x.real)
    poles = (n <= 0) & (np.abs(x - n) < sf.POLE_RADIUS)
    out = -sf.log_gamma(np.where(poles, 1.0, x))
    return np.where(poles, -np.inf + 0j, out)


def _log_inv_gamma_pm(x):
    """log(1/(Γ(x)Γ(-x))) = log(-x sin(πx)/π)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(-x) + sf.log_sin_pi(x) - LOG_PI


def _sum_lg(args):
    return sum(_lg(x) for x in args)


def build_integrand(p: MBParameterSet) -> PairwiseIntegrand:
    """Structured integrand (without the dz/(2πi) or dz/(4πi) measure)."""
    fam = p.family
    al, be = p.alphas, p.betas

    if fam is MBFamily.GustafsonFirst:

        def single(z):
            return _sum_lg([x - z for x in al]) + _sum_lg([b + z for b in be])

    elif fam in (MBFamily.GustafsonSecond, MBFamily.TReduced):
        g = derived_quantities(p).gamma_param

        def single(z):
            return _sum_lg([x - z for x in al]) + _sum_lg([b + z for b in be]) + _lrg(g - z)

    elif fam.is_r:
        s = fam.sign
        a = p.a

        def single(z):
            return s * 1j * math.pi * z + _sum_lg([x - z for x in al]) + _sum_lg([b + z for b in be]) + _lrg(a - z)

    else:  # ThreeStars
        beta = be[0]

        def single(z):
            out = _sum_lg([x - z for x in al]) + _sum_lg([x + z for x in al])
            out = out + _lrg(beta + z) + _lrg(beta - z)
            return out + _log_inv_gamma_pm(2 * z)

    if fam is MBFamily.ThreeStars:

        def pair(zk, zj):
            return _log_inv_gamma_pm(zk + zj) + _log_inv_gamma_pm(zk - zj)

        growth = 2.0
    else:

        def pair(zk, zj):
            return _log_inv_gamma_pm(zk - zj)

        growth = 1.0

    return PairwiseIntegrand(p.N, single, pair if p.N > 1 else None, growth)


def integrand(p: MBParameterSet, z: Sequence[complex]):
    """Full integrand of the family at the point z = (z_1, ..., z_N)."""
    z = list(z)
    if len(z) != p.N:
        raise ValueError(f"{p.family.value} with N={p.N} takes {p.N} variables, got {len(z)}")
    if p.N == 0:
        return 1.0 + 0j
    return build_integrand(p)(z)


def tail_exponents(p: MBParameterSet) -> list[complex] | None:
    """Power laws |t|^e of the integrand along its slowly decaying strips, if any."""
    if p.family.is_r:
        return [-1 - derived_quantities(p).nu]
    if p.family is MBFamily.ThreeStars:
        return [-1 - 2 * (p.betas[0] - sum(p.alphas))]
    return None


# ----------------------------------------------------------------------------
# closed forms


class _LogProduct:
    def __init__(self):
        self.log = 0j
        self.zero = False

    def num(self, x, label):
        try:
            self.log += sf.log_gamma(x)
        except sf.PoleError:
            raise sf.PoleError(f"closed form has a pole in Γ({label}) at argument {x!r}") from None

    def den(self, x, label):
        try:
            self.log -= sf.log_gamma(x)
        except sf.PoleError:
            self.zero = True

    def value(self, prefactor: complex = 1.0) -> complex:
        if self.zero:
            return 0j
        return prefactor * cmath.exp(self.log)


def closed_form_rhs(p: MBParameterSet) -> complex:
    fam, N = p.family, p.N
    al, be = p.alphas, p.betas
    d = derived_quantities(p)
    prod = _LogProduct()
    fact = float(math.factorial(N))

    if fam is MBFamily.GustafsonFirst:
        for k, x in enumerate(al, 1):
            for j, b in enumerate(be, 1):
                prod.num(x + b, f"α{k}+β{j}")
        prod.den(d.A + d.B, "Σα+Σβ")
        return prod.value(fact)

    if fam in (MBFamily.GustafsonSecond, MBFamily.TReduced):
        for k, x in enumerate(al, 1):
            for j, b in enumerate(be, 1):
                prod.num(x + b, f"α{k}+β{j}")
        for k, x in enumerate(al, 1):
            prod.den(d.gamma_param - x, f"γ-α{k}")
        return prod.value(fact)

    if fam.is_r:
        prod.num(d.nu, "ν")
        for j, x in enumerate(al, 1):
            for k, b in enumerate(be, 1):
                prod.num(x + b, f"α{j}+β{k}")
        for j, x in enumerate(al, 1):
            prod.den(p.a - x, f"a-α{j}")
        phase = cmath.exp(-fam.sign * 1j * math.pi * d.B)
        return prod.value(fact * phase)

    beta = be[0]
    prod.num(beta - d.A, "β-A")
    n = len(al)
    for k in range(n):
        for j in range(k + 1, n):
            prod.num(al[k] + al[j], f"α{k + 1}+α{j + 1}")
    for k, x in enumerate(al, 1):
        prod.den(beta - x, f"β-α{k}")
    return prod.value(fact)


def reduction_parameters(p: MBParameterSet) -> MBParameterSet:
    """The reduced integral whose value times N e^{∓iπB} is the residue of R± at ν = 0.

    Same alphas and betas, one integration variable fewer, a pinned to A+B.
    N = 1 gives the zero-dimensional instance whose value is 1.
    """
    if not p.family.is_r:
        raise ArityError("reduction is defined for RPlus/RMinus only")
    return MBParameterSet(MBFamily.TReduced, p.N - 1, p.alphas, p.betas, None)
