"""Command-line interface: ``mbverify {eval,verify,residue,suite,sweep}``.

Standard output carries only JSON lines or CSV; diagnostics go to standard
error.  Exit status: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import click

from . import determinant, series
from .mb_model import (
    MBFamily,
    MBParameterSet,
    build_integrand,
    closed_form_rhs,
    default_shift,
    params_from_dict,
    tail_exponents,
    validate,
)
from .quadrature import ContourSpec, integrate_tensor
from .verification import (
    ROUTES,
    SuiteConfig,
    _num,
    dumps,
    random_params,
    report_to_dict,
    reports_to_csv,
    reports_to_jsonl,
    run_suite,
    verify_instance,
)

FAMILIES = [f.value for f in MBFamily]
EVAL_ROUTES = ["quadrature", "series", "determinant", "rhs"]


class InputError(Exception):
    pass


def _die(msg: str, code: int = 2):
    click.echo(f"mbverify: {msg}", err=True)
    sys.exit(code)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _load_params(params: str | None, family: str | None, n: int | None, seed: int, index: int) -> MBParameterSet:
    if params is not None:
        text = params if params.lstrip().startswith("{") else Path(params).read_text()
        try:
            return params_from_dict(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot parse parameters: {exc}") from exc
    if family is None or n is None:
        raise InputError("give --params FILE|JSON, or --family and --n for a random safe instance")
    return random_params(family, n, seed, index)


def _contour(p: MBParameterSet, dim: int, truncation, npu) -> ContourSpec:
    base = ContourSpec.default(dim, default_shift(p))
    return ContourSpec(base.shift, truncation or base.truncation, npu or base.nodes_per_unit)


def _evaluate(p: MBParameterSet, route: str, truncation=None, npu=None, n_max: int = 60) -> dict:
    rhs = closed_form_rhs(p)
    if route == "rhs":
        return {"route": route, "lhs": None, "rhs": rhs, "error_estimate": 0.0, "evaluations": 0}
    check = validate(p, default_shift(p))
    if not check.ok:
        raise InputError("; ".join(check.messages))
    if route == "quadrature":
        measure = "4pi" if p.family is MBFamily.ThreeStars else "2pi"
        res = integrate_tensor(
            build_integrand(p), _contour(p, p.N, truncation, npu), p.N, measure=measure, tail_exponents=tail_exponents(p)
        )
        return {"route": route, "lhs": res.value, "rhs": rhs, "error_estimate": res.error_estimate, "evaluations": res.evaluations}
    if not p.family.is_r:
        raise InputError(f"route {route} needs an RPlus/RMinus instance")
    if route == "series":
        res = series.residue_series(p, n_max)
        return {"route": route, "lhs": res.value, "rhs": rhs, "error_estimate": res.tail_estimate, "evaluations": res.terms_used}
    value, err = determinant.r_via_determinant(p, None, _contour(p, 1, truncation, npu))
    return {"route": route, "lhs": value, "rhs": rhs, "error_estimate": err, "evaluations": None}


def _epsilons(text: str) -> tuple[float, ...]:
    try:
        eps = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise InputError(f"bad --epsilons {text!r}") from exc
    if len(eps) < 3 or any(e <= 0 for e in eps) or len(set(eps)) != len(eps):
        raise InputError("--epsilons needs at least three distinct positive values")
    return eps


def _pretty(d: dict) -> str:
    def fmt(v):
        if isinstance(v, complex):
            return f"{v.real:.17g}{v.imag:+.17g}i"
        if isinstance(v, float):
            return _num(v)
        if isinstance(v, (list, tuple)):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        return str(v)

    width = max(len(k) for k in d)
    return "".join(f"{k:<{width}}  {fmt(v)}\n" for k, v in d.items())


params_opt = click.option("--params", "params", help="parameter JSON file, or inline JSON")
family_opt = click.option("--family", type=click.Choice(FAMILIES))
n_opt = click.option("--n", "n", type=click.IntRange(0, 3))
seed_opt = click.option("--seed", default=42, show_default=True, type=int)
index_opt = click.option("--index", default=0, show_default=True, type=int, help="instance counter for random sampling")
trunc_opt = click.option("--truncation", type=float)
npu_opt = click.option("--nodes-per-unit", "npu", type=int)
nmax_opt = click.option("--n-max", "n_max", default=60, show_default=True, type=int)
pretty_opt = click.option("--pretty", is_flag=True, help="human-readable output")
out_opt = click.option("--out", type=click.Path(dir_okay=False), help="write payload to FILE")


@click.group()
def main():
    """Numerical checks of Gustafson-type Mellin-Barnes identities."""


@main.command("eval")
@params_opt
@family_opt
@n_opt
@seed_opt
@index_opt
@click.option("--route", type=click.Choice(EVAL_ROUTES), default="quadrature", show_default=True)
@trunc_opt
@npu_opt
@nmax_opt
@pretty_opt
@out_opt
def cmd_eval(params, family, n, seed, index, route, truncation, npu, n_max, pretty, out):
    """Evaluate one integral by ROUTE alongside its closed form."""
    try:
        p = _load_params(params, family, n, seed, index)
        result = _evaluate(p, route, truncation, npu, n_max)
    except (InputError, ValueError, ArithmeticError) as exc:
        _die(str(exc))
    _emit(_pretty(result) if pretty else dumps(result) + "\n", out)


@main.command("verify")
@params_opt
@family_opt
@n_opt
@seed_opt
@index_opt
@click.option("--route", type=click.Choice(list(ROUTES)), default="quadrature", show_default=True)
@click.option("--tol", type=float, help="override the tolerance budget")
@trunc_opt
@npu_opt
@nmax_opt
@click.option("--epsilons", default="0.2,0.1,0.05", show_default=True)
@pretty_opt
@out_opt
def cmd_verify(params, family, n, seed, index, route, tol, truncation, npu, n_max, epsilons, pretty, out):
    """Verify a single instance; one report line."""
    try:
        p = _load_params(params, family, n, seed, index)
        config = SuiteConfig(
            seed=seed,
            instances_per_family=1,
            N_values=(p.N,),
            families=(p.family,),
            routes=(route,),
            tolerance_overrides={route: tol} if tol is not None else SuiteConfig().tolerance_overrides,
            n_max=n_max,
            truncation=truncation,
            nodes_per_unit=npu,
            epsilons=_epsilons(epsilons),
        )
    except (InputError, ValueError) as exc:
        _die(str(exc))
    report = verify_instance(p, route, config)
    if report.message:
        click.echo(f"mbverify: {report.message}", err=True)
    _emit(_pretty(report_to_dict(report)) if pretty else reports_to_jsonl([report]), out)
    sys.exit(0 if report.passed else 1)


@main.command("residue")
@params_opt
@family_opt
@n_opt
@seed_opt
@index_opt
@click.option("--epsilons", default="0.2,0.1,0.05", show_default=True)
@click.option("--route", type=click.Choice(["determinant", "quadrature"]), default="determinant", show_default=True)
@click.option("--model", type=click.Choice(["log", "laurent"]), default="log", show_default=True)
@click.option("--tol", type=float, default=5e-3, show_default=True)
@trunc_opt
@npu_opt
@pretty_opt
@out_opt
def cmd_residue(params, family, n, seed, index, epsilons, route, model, tol, truncation, npu, pretty, out):
    """Residue of R± at ν = 0 against both closed-form predictions."""
    try:
        p = _load_params(params, family, n, seed, index)
        if not p.family.is_r:
            raise InputError("residue needs an RPlus/RMinus instance")
        eps = _epsilons(epsilons)
        dim = 1 if route == "determinant" else p.N
        contour = _contour(p, dim, truncation, npu) if (truncation or npu) else None
        res = determinant.extract_residue(p, eps, route=route, model=model, contour=contour)
    except (InputError, ValueError) as exc:
        _die(str(exc))
    except determinant.IllConditionedFitError as exc:
        _die(str(exc))
    reduced = determinant.residue_prediction_reduced(p)
    closed = determinant.residue_prediction_closed_form(p)
    d_red = abs(res.residue / reduced - 1)
    d_cf = abs(res.residue / closed - 1)
    payload = {
        "residue": res.residue,
        "prediction_reduced": reduced,
        "prediction_closed_form": closed,
        "rel_diff_reduced": d_red,
        "rel_diff_closed_form": d_cf,
        "predictions_rel_diff": abs(reduced / closed - 1),
        "condition": res.condition,
        "model": res.model,
        "epsilons": list(res.epsilons),
        "values": list(res.values),
        "pass": bool(d_red <= tol and d_cf <= tol),
    }
    _emit(_pretty(payload) if pretty else dumps(payload) + "\n", out)
    sys.exit(0 if payload["pass"] else 1)


@main.command("suite")
@seed_opt
@click.option("--family", "families", multiple=True, type=click.Choice(FAMILIES), help="repeatable")
@click.option("--n", "ns", multiple=True, type=click.IntRange(0, 3), help="repeatable")
@click.option("--route", "routes", multiple=True, type=click.Choice(list(ROUTES)), help="repeatable")
@click.option("--instances", type=click.IntRange(0), default=SuiteConfig().instances_per_family, show_default=True)
@click.option("--tol", type=float, help="override every tolerance budget")
@trunc_opt
@npu_opt
@nmax_opt
@click.option("--epsilons", default="0.2,0.1,0.05", show_default=True)
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), help="also write the CSV summary")
@pretty_opt
@out_opt
def cmd_suite(seed, families, ns, routes, instances, tol, truncation, npu, n_max, epsilons, csv_out, pretty, out):
    """Run the verification matrix family × N × route × instance."""
    base = SuiteConfig()
    try:
        overrides = {r: tol for r in ROUTES} if tol is not None else base.tolerance_overrides
        config = SuiteConfig(
            seed=seed,
            instances_per_family=instances,
            N_values=tuple(ns) or base.N_values,
            families=tuple(MBFamily(f) for f in families) or base.families,
            routes=tuple(routes) or base.routes,
            tolerance_overrides=overrides,
            n_max=n_max,
            truncation=truncation,
            nodes_per_unit=npu,
            epsilons=_epsilons(epsilons),
        )
        reports = run_suite(config)
    except (InputError, ValueError) as exc:
        _die(str(exc))
    if pretty:
        text = "".join(
            f"{'PASS' if r.passed else 'FAIL'}  {r.family.value:<16} N={r.params.N}  {r.route:<19} rel_err={_num(r.rel_err)}\n"
            for r in reports
        )
    else:
        text = reports_to_jsonl(reports)
    _emit(text, out)
    if csv_out:
        Path(csv_out).write_text(reports_to_csv(reports))
    failed = sum(not r.passed for r in reports)
    click.echo(f"mbverify: {len(reports) - failed}/{len(reports)} reports pass", err=True)
    sys.exit(1 if failed else 0)


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise InputError("--steps must be >= 1")
    if steps == 1:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


@main.command("sweep")
@params_opt
@family_opt
@n_opt
@seed_opt
@index_opt
@click.option("--axis", required=True, help="one of nu, truncation, n_max, u")
@click.option("--from", "lo", type=float, required=True)
@click.option("--to", "hi", type=float, required=True)
@click.option("--steps", type=int, default=8, show_default=True)
@click.option("--route", type=click.Choice(EVAL_ROUTES), default="quadrature", show_default=True)
@click.option("--m", "m", type=int, default=1, show_default=True, help="row index for the u axis")
@click.option("--k", "k", type=int, default=None, help="column index for the u axis (default N)")
@trunc_opt
@npu_opt
@nmax_opt
@out_opt
def cmd_sweep(params, family, n, seed, index, axis, lo, hi, steps, route, m, k, truncation, npu, n_max, out):
    """Tabulate a quantity along one axis as CSV."""
    if axis not in ("nu", "truncation", "n_max", "u"):
        _die(f"unknown axis {axis!r}; choose nu, truncation, n_max or u")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    try:
        p = _load_params(params, family, n, seed, index)
        grid = _grid(lo, hi, steps)
        if axis in ("nu", "u") and not p.family.is_r:
            raise InputError(f"axis {axis} needs an RPlus/RMinus instance")
        if axis == "u":
            k = p.N if k is None else k
            if not (1 <= m <= p.N and 1 <= k <= p.N):
                raise InputError("--m and --k must lie in 1..N")
            f = determinant.q_entry_integrand(p, m, k)
            s = p.family.sign
            w.writerow(["u", "ratio_re", "ratio_im", "deviation"])
            for u in grid:
                ratio = complex(f(-s * 1j * u)) / determinant.asymptotic_leading(p, None, m, k, u)
                w.writerow([_num(u), _num(ratio.real), _num(ratio.imag), _num(abs(ratio - 1))])
        else:
            w.writerow([axis, "lhs_re", "lhs_im", "rhs_re", "rhs_im", "error_estimate"])
            for x in grid:
                if axis == "nu":
                    row = _evaluate(determinant.at_nu(p, x), route, truncation, npu, n_max)
                elif axis == "truncation":
                    row = _evaluate(p, "quadrature", x, npu, n_max)
                else:
                    row = _evaluate(p, "series", truncation, npu, int(round(x)))
                lhs = row["lhs"] if row["lhs"] is not None else complex(math.nan, math.nan)
                w.writerow(
                    [_num(x), _num(lhs.real), _num(lhs.imag), _num(row["rhs"].real), _num(row["rhs"].imag), _num(row["error_estimate"])]
                )
    except (InputError, ValueError, ArithmeticError) as exc:
        _die(str(exc))
    _emit(buf.getvalue(), out)


if __name__ == "__main__":
    main()
