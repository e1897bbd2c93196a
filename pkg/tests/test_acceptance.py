"""Acceptance criteria 1-12, each at its stated tolerance.

Every test prints one ``CRITERION k: PASS|FAIL ...`` line to the terminal
(outside pytest's capture) before asserting.
"""

import subprocess
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from mbverify import special_functions as sf
from mbverify.determinant import (
    asymptotic_leading,
    extract_residue,
    q_entry_integrand,
    r_via_determinant,
    residue_prediction_closed_form,
    residue_prediction_reduced,
)
from mbverify.mb_model import (
    MBParameterSet,
    build_integrand,
    closed_form_rhs,
    default_shift,
    tail_exponents,
)
from mbverify.quadrature import ContourSpec, integrate_tensor
from mbverify.series import milne_closed_form, milne_sum, residue_series
from mbverify.verification import default_budget, random_params

SEED = 2024


@pytest.fixture
def announce(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nCRITERION {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def quad(p: MBParameterSet):
    measure = "4pi" if p.family.value == "ThreeStars" else "2pi"
    return integrate_tensor(
        build_integrand(p), ContourSpec.default(p.N, default_shift(p)), p.N, measure=measure, tail_exponents=tail_exponents(p)
    )


def rel(a, b):
    return abs(a - b) / abs(b)


def worst_rel(family, N, count):
    worst = 0.0
    for i in range(count):
        p = random_params(family, N, SEED, i)
        worst = max(worst, rel(quad(p).value, closed_form_rhs(p)))
    return worst


def test_criterion_01_first_barnes_lemma(announce):
    t0 = time.perf_counter()
    p = MBParameterSet("GustafsonFirst", 1, [0.5, 0.5], [0.5, 0.5])
    special = abs(quad(p).value - 1)
    worst = worst_rel("GustafsonFirst", 1, 20)
    dt = time.perf_counter() - t0
    ok = special < 1e-8 and worst < 1e-8 and dt < 5
    assert announce(1, ok, f"|LHS-1|={special:.2e}, worst rel over 20 = {worst:.2e} (tol 1e-8), {dt:.2f}s (<5s)")


@pytest.mark.parametrize("N,tol,limit", [(2, 1e-6, 120), pytest.param(3, 1e-4, 1800, marks=pytest.mark.slow)])
def test_criterion_02_first_integral(announce, N, tol, limit):
    t0 = time.perf_counter()
    worst = worst_rel("GustafsonFirst", N, 10)
    dt = time.perf_counter() - t0
    ok = worst < tol and dt < limit
    assert announce(2, ok, f"N={N}: worst rel over 10 = {worst:.2e} (tol {tol:g}), {dt:.2f}s (<{limit}s)")


def test_criterion_03_second_barnes_lemma(announce):
    t0 = time.perf_counter()
    worst = worst_rel("GustafsonSecond", 1, 20)
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 10
    assert announce(3, ok, f"worst rel over 20 = {worst:.2e} (tol 1e-8), {dt:.2f}s (<10s)")


def test_criterion_04_second_integral(announce):
    t0 = time.perf_counter()
    worst = worst_rel("GustafsonSecond", 2, 10)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 300
    assert announce(4, ok, f"N=2: worst rel over 10 = {worst:.2e} (tol 1e-6), {dt:.2f}s (<300s)")


R_CASES = [(fam, N, i) for fam in ("RPlus", "RMinus") for N in (1, 2) for i in range(10)]


@lru_cache(maxsize=None)
def r_quadrature(fam, N, i):
    p = random_params(fam, N, SEED, i)
    return p, quad(p)


def test_criterion_05_r_closed_form(announce):
    worst = {1: 0.0, 2: 0.0}
    for fam, N, i in R_CASES:
        p, res = r_quadrature(fam, N, i)
        nu = (p.a - sum(p.alphas) - sum(p.betas)).real
        assert 0.3 <= nu <= 1.0
        worst[N] = max(worst[N], rel(res.value, closed_form_rhs(p)))
    ok = worst[1] < 1e-6 and worst[2] < 1e-5
    assert announce(
        5, ok, f"R± worst rel: N=1 {worst[1]:.2e} (tol 1e-6), N=2 {worst[2]:.2e} (tol 1e-5), 40 instances"
    )


def test_criterion_06_route_triangle(announce):
    bad = []
    worst_ratio = 0.0
    for fam, N, i in R_CASES:
        p, q = r_quadrature(fam, N, i)
        s = residue_series(p, 60).value
        d, _ = r_via_determinant(p)
        scale = abs(closed_form_rhs(p))
        b = default_budget(N) * scale  # every route carries the same per-N budget
        checks = (abs(s - q.value) / (2 * b), abs(d - q.value) / (2 * b), abs(s - d) / (4 * b))
        worst_ratio = max(worst_ratio, *checks)
        if max(checks) > 1:
            bad.append((fam, N, i))
    ok = not bad
    assert announce(
        6, ok, f"series/determinant/quadrature: worst |Δ| / allowed = {worst_ratio:.2e} over {len(R_CASES)} instances"
    )


def test_criterion_07_milne(announce):
    worst = {1: 0.0, 2: 0.0}
    for N in (1, 2):
        for i in range(20):
            p = random_params("RPlus", N, SEED, 100 + i)
            worst[N] = max(worst[N], rel(milne_sum(p, n_max=60).value, milne_closed_form(p)))
    ok = max(worst.values()) < 1e-7
    assert announce(7, ok, f"milne_sum(n_max=60) worst rel: N=1 {worst[1]:.2e}, N=2 {worst[2]:.2e} (tol 1e-7)")


def test_criterion_08_residue_reduction(announce):
    worst = 0.0
    count = 0
    for fam in ("RPlus", "RMinus"):
        for N in (2, 3):
            for i in range(5):
                p = random_params(fam, N, SEED, 200 + i)
                r = extract_residue(p, (0.2, 0.1, 0.05)).residue
                worst = max(worst, rel(r, residue_prediction_reduced(p)), rel(r, residue_prediction_closed_form(p)))
                count += 1
    ok = worst < 5e-3
    assert announce(8, ok, f"residue vs N e^(∓iπB) T_(N-1): worst rel {worst:.2e} over {count} (tol 5e-3)")


def test_criterion_09_asymptotics(announce):
    worst = 0.0
    for i in range(5):
        p = random_params("RPlus", 2, SEED, 300 + i)
        for s in (1, -1):
            for m in (1, 2):
                for k in (1, 2):
                    f = q_entry_integrand(p, m, k, s)
                    d20, d40 = (abs(complex(f(-s * 1j * u)) / asymptotic_leading(p, s, m, k, u) - 1) for u in (20.0, 40.0))
                    worst = max(worst, d40 / d20)
    ok = worst <= 0.6
    assert announce(9, ok, f"max dev(u=40)/dev(u=20) = {worst:.3f} (≤0.6), N=2, both signs, all (m,k), 5 instances")


def test_criterion_10_three_stars(announce):
    worst = worst_rel("ThreeStars", 1, 10)
    ok = worst < 1e-6
    assert announce(10, ok, f"ThreeStars N=1 (dz/4πi, A=Σα): worst rel over 10 = {worst:.2e} (tol 1e-6)")


def test_criterion_11_special_function_invariants(announce):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    z = rng.uniform(-50, 50, 40000) + 1j * rng.uniform(-50, 50, 40000)
    z = z[(np.abs(z) <= 50) & (np.abs(z - np.round(z.real)) >= 0.1)][:10000]
    assert len(z) == 10000
    reflection = np.max(np.abs(sf.gamma(z) * sf.gamma(1 - z) * np.sin(np.pi * z) / np.pi - 1))
    recurrence = np.max(np.abs(sf.gamma(z + 1) / (z * sf.gamma(z)) - 1))
    conjugation = np.max(np.abs(sf.log_gamma(np.conj(z)) - np.conj(sf.log_gamma(z))))
    product = np.max(np.abs(sf.reciprocal_gamma(z) * sf.gamma(z) - 1))
    dt = time.perf_counter() - t0
    ok = reflection < 1e-11 and recurrence < 1e-12 and conjugation < 1e-13 and product < 1e-12 and dt < 5
    assert announce(
        11,
        ok,
        f"reflection {reflection:.1e} (1e-11), recurrence {recurrence:.1e} (1e-12), "
        f"conjugation {conjugation:.1e} (1e-13), 1/Γ·Γ {product:.1e} (1e-12), {dt:.2f}s",
    )


def test_criterion_12_determinism(announce, tmp_path):
    outs = []
    for run in range(2):
        path = tmp_path / f"run{run}.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "mbverify.cli", "suite", "--seed", "42", "--out", str(path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    lines = outs[0].count(b"\n")
    assert announce(12, ok, f"default suite --seed 42 twice: byte-identical = {outs[0] == outs[1]} ({lines} lines)")
