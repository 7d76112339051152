"""One test per acceptance criterion.

Each test prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line past pytest's output capture and then asserts, so a
failing criterion shows up both in the summary lines and in pytest's result.
"""

import itertools
import math
import time

import mpmath
import numpy as np
import pytest

from besselmax.cli import reference_tables
from besselmax.km_check import km_ratio_limit, richardson, transition_pM, transition_pM_images
from besselmax.linalg_xp import det_sum_identity_check
from besselmax.maxdist import (ModelParams, TruncationPolicy, prob_brownian_excursion,
                               prob_brownian_reflect, prob_pitman_yor, prob_thm1,
                               prob_thm2_hankel)
from besselmax.mc_oracle import McConfig, estimate_cdf
from besselmax.specfun import bessel_j, bessel_zeros


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def table(which):
    tab = reference_tables()["tables"][which]
    fx = tab["fixed"]
    out = []
    for x, ref in tab["rows"]:
        if tab["variable"] == "M":
            p = ModelParams(fx["n_paths"], fx["alpha"], fx["start"], x)
        else:
            p = ModelParams(fx["n_paths"], fx["alpha"], x, fx["wall"])
        out.append((x, ref, p))
    return out


@pytest.fixture(scope="module")
def table_results():
    res = {}
    for which in ("table1", "table2"):
        t = time.perf_counter()
        rows = [(x, ref, p, prob_thm1(p)) for x, ref, p in table(which)]
        res[which] = (rows, time.perf_counter() - t)
    return res


def test_criterion_01_table1(table_results, verdict):
    rows, secs = table_results["table1"]
    bad = []
    for m, ref, _, r in rows:
        v = float(r.value)
        if m in (3.25, 3.5):
            ok = abs(v - ref) <= 0.05 * ref
        else:
            # rows 5.75 and 6 are read as approaching 1; the tolerance is the same 1e-4
            ok = abs(v - ref) <= 1e-4
        if not ok:
            bad.append(f"M={m}: {v:.6g} vs {ref:.6g}")
    vals = [r.value for *_, r in rows]
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    ok = not bad and monotone and secs < 10
    detail = (f"{len(rows) - len(bad)}/{len(rows)} rows in tolerance, monotone={monotone}, "
              f"{secs:.1f} s")
    verdict(1, ok, detail + ("; off: " + "; ".join(bad) if bad else ""))


def test_criterion_02_table2(table_results, verdict):
    rows, secs = table_results["table2"]
    bad = []
    for a, ref, _, r in rows:
        if a not in (1.0, 1.5, 2.0, 2.5, 3.0, 3.5):
            continue
        v = float(r.value)
        tol = 0.01 * ref if a == 3.5 else 1e-3
        if abs(v - ref) > tol:
            bad.append(f"a={a}: {v:.6g} vs {ref:.6g}")
    worst = max(abs(float(r.value) - ref) for a, ref, _, r in rows)
    ok = not bad and secs < 10
    verdict(2, ok, f"worst abs diff {worst:.2e} over all rows, {secs:.1f} s"
            + ("; off: " + "; ".join(bad) if bad else ""))


def test_criterion_03_route_equivalence(verdict):
    t = time.perf_counter()
    worst, where = 0.0, ""
    grid = itertools.product((1, 2, 3, 5, 10), (-0.4, 0.5, 1.0, 2.3), (0.5, 1.0, 2.0), (1.0, 3.0))
    cases = 0
    for n, al, a, dm in grid:
        p = ModelParams(n, al, a, a + dm)
        v1, v2 = prob_thm1(p).value, prob_thm2_hankel(p).value
        rel = float(abs(v1 - v2) / max(abs(v1), mpmath.mpf(1e-12)))
        cases += 1
        if rel > worst or math.isnan(rel):
            worst, where = rel, f"N={n} alpha={al} a={a} M={a + dm}"
    secs = time.perf_counter() - t
    verdict(3, worst <= 1e-8 and secs < 120,
            f"{cases} cases, worst relative gap {worst:.2e} at {where}, {secs:.1f} s")


def test_criterion_04_brownian_reductions(verdict):
    worst = 0.0
    for n, m in itertools.product((1, 2, 3), (2.0, 4.0)):
        for al, closed in ((-0.5, prob_brownian_reflect), (0.5, prob_brownian_excursion)):
            v = prob_thm1(ModelParams(n, al, 0.0, m)).value
            c = closed(n, m).value
            worst = max(worst, float(abs(v - c) / abs(c)))
    verdict(4, worst <= 1e-10, f"worst relative gap {worst:.2e} over 12 cases")


def test_criterion_05_km_limit(verdict):
    p = ModelParams(2, 1.0, 1.0, 4.0)
    eps = (0.1, 0.05, 0.025, 0.0125)
    diag, resid = richardson(eps, km_ratio_limit(p, eps))
    target = prob_thm1(p).value
    gap = float(abs(diag[-1] - target))
    verdict(5, gap <= 1e-4, f"limit {float(diag[-1]):.10f} vs {float(target):.10f}, "
            f"gap {gap:.2e}, last residual {float(resid[-1]):.1e}")


def test_criterion_06_image_identity(verdict):
    worst = 0.0
    for t, x, y in itertools.product((0.5, 1.0, 2.0), (0.3, 1.5, 2.7), (0.2, 1.4, 2.9)):
        worst = max(worst, float(abs(transition_pM(t, y, x, -0.5, 3.0)
                                     - transition_pM_images(t, y, x, 3.0, 20))))
    verdict(6, worst <= 1e-12, f"worst abs gap {worst:.2e} over 27 points")


def test_criterion_07_det_sum_identity(verdict):
    rng = np.random.default_rng(20240601)
    worst, count = 0.0, 0
    while count < 100:
        n, k = int(rng.integers(1, 5)), int(rng.integers(2, 7))
        if k < n:
            continue
        f, g = rng.normal(size=(k, n)), rng.normal(size=(k, n))
        h = rng.uniform(0.5, 2.0, size=k)
        for weights in (None, h):
            lhs, rhs = det_sum_identity_check(f, g, n, k, h=weights)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        count += 1
    verdict(7, worst <= 1e-12, f"{count} instances, plain and weighted, worst relative {worst:.2e}")


def test_criterion_08_monte_carlo(verdict):
    lines, ok = [], True
    for dim, m, ref in ((3, 2.0, lambda: prob_pitman_yor(0.5, 2.0)),
                        (1, 1.5, lambda: prob_brownian_reflect(1, 1.5))):
        t = time.perf_counter()
        e = estimate_cdf(McConfig(dim, 0.0, m, 2 ** 14, 100_000, 7))
        secs = time.perf_counter() - t
        p = float(ref().value)
        allow = 3 * e.std_err + e.bias_bracket
        ok &= abs(e.p_hat - p) <= allow and secs < 120
        lines.append(f"d={dim}: |{e.p_hat:.5f} - {p:.5f}| = {abs(e.p_hat - p):.2e} "
                     f"<= {allow:.2e}? ({secs:.1f} s)")
    verdict(8, ok, "; ".join(lines))


def test_criterion_09_zero_tables(verdict):
    problems = []
    for al in (-0.5, 0.0, 0.5, 1.0, 2.7):
        tab = bessel_zeros(al, 500)
        nxt = bessel_zeros(al + 1, 500)
        xs = tab.zeros
        if tab.residual_bound > 1e-14:
            problems.append(f"alpha={al}: residual bound {tab.residual_bound:.1e}")
        for n in (0, 99, 499):
            if abs(bessel_j(al, xs[n], 212)) > tab.residual_bound:
                problems.append(f"alpha={al}: residual at n={n + 1}")
        if not all(b > a for a, b in zip(xs, xs[1:])):
            problems.append(f"alpha={al}: not increasing")
        if max(abs(float(b - a) - math.pi) for a, b in zip(xs[49:], xs[50:])) >= 0.01:
            problems.append(f"alpha={al}: gap")
        if not all(xs[n] < nxt.zeros[n] < xs[n + 1] for n in range(499)):
            problems.append(f"alpha={al}: interlacing")
        if al in (-0.5, 0.5):
            with mpmath.workprec(212):
                off = mpmath.mpf(0.5) if al < 0 else 0
                dev = max(abs(x - (n + 1 - off) * mpmath.pi) for n, x in enumerate(xs))
            if dev > 1e-13:
                problems.append(f"alpha={al}: closed form off by {float(dev):.1e}")
    verdict(9, not problems, "5 orders x 500 zeros" + ("; " + "; ".join(problems) if problems else ""))


def test_criterion_10_stability(table_results, verdict):
    worst_ratio, where = 0.0, ""
    for which in ("table1", "table2"):
        for x, _, p, r in table_results[which][0]:
            wider = prob_thm1(p, TruncationPolicy.fixed(2 * r.n_terms_used))
            finer = prob_thm1(p, precision=2 * r.precision_bits)
            for alt in (wider, finer):
                ratio = float(abs(alt.value - r.value)) / r.est_error
                if ratio > worst_ratio:
                    worst_ratio, where = ratio, f"{which} at {x}"
    verdict(10, worst_ratio < 1, f"largest change / est_error = {worst_ratio:.3f} ({where})")
