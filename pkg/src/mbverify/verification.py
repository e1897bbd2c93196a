"""Verification harness: pair an LHS route with the closed form and report."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .mb_model import (
    MBFamily,
    MBParameterSet,
    build_integrand,
    closed_form_rhs,
    default_shift,
    derived_quantities,
    params_to_dict,
    tail_exponents,
    validate,
)
from .quadrature import ContourSpec, integrate_tensor

__all__ = [
    "ROUTES",
    "VerificationReport",
    "SuiteConfig",
    "default_budget",
    "random_params",
    "rhs_gamma_arguments",
    "verify_instance",
    "run_suite",
    "suite_cases",
    "report_to_dict",
    "dumps",
    "reports_to_jsonl",
    "reports_to_csv",
    "worker_count",
    "SamplingError",
]

ROUTES = ("quadrature", "series", "determinant", "residue-extraction")
SAFE_GAP = 0.05
MAX_ATTEMPTS = 1000
ZERO_RHS = 1e-8
_BUDGETS = {1: 1e-8, 2: 1e-6, 3: 1e-4}
RESIDUE_BUDGET = 5e-3
_FAMILY_INDEX = {f: i for i, f in enumerate(MBFamily)}


class SamplingError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# reports and configuration


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    instances_per_family: int = 2
    N_values: tuple[int, ...] = (1, 2)
    families: tuple[MBFamily, ...] = (
        MBFamily.GustafsonFirst,
        MBFamily.GustafsonSecond,
        MBFamily.RPlus,
        MBFamily.RMinus,
        MBFamily.ThreeStars,
    )
    routes: tuple[str, ...] = ROUTES
    # keys: "route", "family", or "family/route"; the most specific wins
    tolerance_overrides: dict[str, float] = field(default_factory=lambda: {"residue-extraction": RESIDUE_BUDGET})
    n_max: int = 60
    truncation: float | None = None
    nodes_per_unit: int | None = None
    epsilons: tuple[float, ...] = (0.2, 0.1, 0.05)

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "instances_per_family": self.instances_per_family,
            "N_values": list(self.N_values),
            "families": [f.value for f in self.families],
            "routes": list(self.routes),
            "tolerance_overrides": dict(sorted(self.tolerance_overrides.items())),
            "n_max": self.n_max,
            "truncation": self.truncation,
            "nodes_per_unit": self.nodes_per_unit,
            "epsilons": list(self.epsilons),
        }

    def budget(self, family: MBFamily, N: int, route: str) -> float:
        ov = self.tolerance_overrides
        for key in (f"{family.value}/{route}", family.value, route):
            if key in ov:
                return float(ov[key])
        return default_budget(N)


def default_budget(N: int) -> float:
    return _BUDGETS.get(N, _BUDGETS[max(_BUDGETS)])


@dataclass(frozen=True)
class VerificationReport:
    family: MBFamily
    params: MBParameterSet
    route: str
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    budget: float
    passed: bool
    config: dict
    error_estimate: float = math.nan
    message: str = ""

    @property
    def pass_(self) -> bool:
        return self.passed


def _judge(lhs: complex, rhs: complex, budget: float) -> tuple[float, float, bool]:
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / abs(rhs) if rhs != 0 else math.inf
    if not (math.isfinite(abs_err)):
        return abs_err, rel_err, False
    ok = rel_err <= budget if abs(rhs) > ZERO_RHS else abs_err <= budget
    return abs_err, rel_err, bool(ok)


# ----------------------------------------------------------------------------
# sampling


def rhs_gamma_arguments(p: MBParameterSet) -> list[complex]:
    """Every gamma argument appearing in the family's closed form."""
    d = derived_quantities(p)
    al, be = p.alphas, p.betas
    fam = p.family
    if fam is MBFamily.GustafsonFirst:
        return [x + b for x in al for b in be] + [d.A + d.B]
    if fam in (MBFamily.GustafsonSecond, MBFamily.TReduced):
        return [x + b for x in al for b in be] + [d.gamma_param - x for x in al]
    if fam.is_r:
        return [d.nu] + [x + b for x in al for b in be] + [p.a - x for x in al]
    beta = be[0]
    n = len(al)
    pairs = [al[k] + al[j] for k in range(n) for j in range(k + 1, n)]
    return [beta - d.A] + pairs + [beta - x for x in al]


def _near_nonpositive_integer(z: complex) -> bool:
    k = round(z.real)
    return k <= 0 and abs(z - k) < SAFE_GAP


def _spacing_degenerate(betas: Sequence[complex]) -> bool:
    for k in range(len(betas)):
        for j in range(k + 1, len(betas)):
            d = betas[k] - betas[j]
            if abs(d - round(d.real)) < SAFE_GAP:
                return True
    return False


def _uniform_complex(rng: np.random.Generator, n: int) -> list[complex]:
    re = rng.uniform(0.3, 1.2, n)
    im = rng.uniform(-0.3, 0.3, n)
    return [complex(r, i) for r, i in zip(re, im)]


def _draw(family: MBFamily, N: int, rng: np.random.Generator) -> MBParameterSet:
    if family is MBFamily.GustafsonFirst:
        return MBParameterSet(family, N, _uniform_complex(rng, N + 1), _uniform_complex(rng, N + 1))
    if family in (MBFamily.GustafsonSecond, MBFamily.TReduced):
        return MBParameterSet(family, N, _uniform_complex(rng, N + 2), _uniform_complex(rng, N + 1))
    if family.is_r:
        al, be = _uniform_complex(rng, N + 1), _uniform_complex(rng, N)
        nu = rng.uniform(0.3, 1.0)
        return MBParameterSet(family, N, al, be, sum(al) + sum(be) + nu)
    al = _uniform_complex(rng, 2 * N + 1)
    delta = rng.uniform(0.3, 1.0)
    return MBParameterSet(family, N, al, [sum(al) + delta])


def random_params(family: MBFamily | str, N: int, seed: int, index: int) -> MBParameterSet:
    """Instance ``index`` of the safe random stream for (family, N, seed).

    Counter-based: each (family, N, seed, index, attempt) tuple seeds its own
    generator, so any instance can be reproduced in isolation.
    """
    family = MBFamily(family)
    for attempt in range(MAX_ATTEMPTS):
        ss = np.random.SeedSequence([int(seed), _FAMILY_INDEX[family], int(N), int(index), attempt])
        p = _draw(family, N, np.random.default_rng(ss))
        if len(p.betas) > 1 and _spacing_degenerate(p.betas):
            continue
        if any(_near_nonpositive_integer(z) for z in rhs_gamma_arguments(p)):
            continue
        if not validate(p, 0.0).ok:
            continue
        return p
    raise SamplingError(f"no safe {family.value} N={N} instance after {MAX_ATTEMPTS} attempts")


# ----------------------------------------------------------------------------
# routes


def _contour(p: MBParameterSet, config: SuiteConfig | None, dim: int) -> ContourSpec:
    base = ContourSpec.default(dim, default_shift(p))
    if config is None:
        return base
    return ContourSpec(
        base.shift,
        config.truncation if config.truncation is not None else base.truncation,
        config.nodes_per_unit if config.nodes_per_unit is not None else base.nodes_per_unit,
    )


def _lhs(p: MBParameterSet, route: str, config: SuiteConfig) -> tuple[complex, complex, float]:
    """(lhs, rhs, error estimate) for one route."""
    from . import determinant, series

    if route == "quadrature":
        measure = "4pi" if p.family is MBFamily.ThreeStars else "2pi"
        res = integrate_tensor(
            build_integrand(p), _contour(p, config, p.N), p.N, measure=measure, tail_exponents=tail_exponents(p)
        )
        return res.value, closed_form_rhs(p), res.error_estimate
    if route == "series":
        res = series.residue_series(p, config.n_max)
        return res.value, closed_form_rhs(p), res.tail_estimate
    if route == "determinant":
        value, err = determinant.r_via_determinant(p, None, _contour(p, config, 1))
        return value, closed_form_rhs(p), err
    if route == "residue-extraction":
        res = determinant.extract_residue(p, config.epsilons, contour=_contour(p, config, 1))
        return res.residue, determinant.residue_prediction_reduced(p), max(res.errors) / min(res.epsilons)
    raise ValueError(f"unknown route {route!r}")


def _route_applies(p: MBParameterSet, route: str) -> bool:
    if route == "quadrature":
        return True
    if route in ("series", "determinant"):
        return p.family.is_r
    return p.family.is_r and p.N >= 2


def verify_instance(p: MBParameterSet, route: str, config: SuiteConfig | None = None) -> VerificationReport:
    """Run one route on one instance.  Failures become reports, never exceptions."""
    config = config or SuiteConfig()
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}")
    budget = config.budget(p.family, p.N, route)
    echo = config.echo()
    nan = complex(math.nan, math.nan)

    def failed(msg: str, rhs: complex = nan) -> VerificationReport:
        return VerificationReport(p.family, p, route, nan, rhs, math.nan, math.nan, budget, False, echo, math.nan, msg)

    if not _route_applies(p, route):
        return failed(f"route {route} does not apply to {p.family.value} N={p.N}")
    check = validate(p, default_shift(p))
    if not check.ok:
        return failed("; ".join(check.messages))
    try:
        lhs, rhs, err = _lhs(p, route, config)
    except (ArithmeticError, ValueError, OverflowError) as exc:
        return failed(f"{type(exc).__name__}: {exc}")
    abs_err, rel_err, ok = _judge(complex(lhs), complex(rhs), budget)
    return VerificationReport(p.family, p, route, complex(lhs), complex(rhs), abs_err, rel_err, budget, ok, echo, float(err))


def worker_count() -> int:
    env = os.environ.get("MBVERIFY_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return cap


def suite_cases(config: SuiteConfig) -> list[tuple[MBParameterSet, str]]:
    """Deterministic enumeration family × N × instance × route."""
    cases = []
    for fam in config.families:
        for N in config.N_values:
            for i in range(config.instances_per_family):
                p = random_params(fam, N, config.seed, i)
                cases.extend((p, r) for r in config.routes if _route_applies(p, r))
    return cases


def run_suite(config: SuiteConfig | None = None) -> list[VerificationReport]:
    config = config or SuiteConfig()
    cases = suite_cases(config)
    workers = min(worker_count(), max(1, len(cases)))
    if workers == 1:
        return [verify_instance(p, r, config) for p, r in cases]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: verify_instance(c[0], c[1], config), cases))


# ----------------------------------------------------------------------------
# serialization (17 significant digits, fixed key order)


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Compact JSON with every float written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, complex):
        return f"[{_num(obj.real)},{_num(obj.imag)}]"
    if isinstance(obj, str):
        import json

        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.generic):
        return dumps(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(r: VerificationReport) -> dict:
    return {
        "family": r.family.value,
        "params": params_to_dict(r.params),
        "route": r.route,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "abs_err": r.abs_err,
        "rel_err": r.rel_err,
        "budget": r.budget,
        "pass": r.passed,
        "config": r.config,
        "error_estimate": r.error_estimate,
        "message": r.message,
    }


def reports_to_jsonl(reports: Iterable[VerificationReport]) -> str:
    return "".join(dumps(report_to_dict(r)) + "\n" for r in reports)


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "N", "route", "rel_err", "pass"])
    for r in reports:
        w.writerow([r.family.value, r.params.N, r.route, _num(r.rel_err), "true" if r.passed else "false"])
    return buf.getvalue()
