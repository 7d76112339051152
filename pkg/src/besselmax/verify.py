"""Cross-route consistency checks behind the ``verify`` command."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from mpmath import mp

from .km_check import km_ratio_limit, richardson, transition_pM, transition_pM_images
from .linalg_xp import det_sum_identity_check
from .maxdist import (ModelParams, prob_brownian_excursion, prob_brownian_reflect,
                      prob_pitman_yor, prob_thm1, prob_thm2_hankel)
from .mc_oracle import McConfig, estimate_cdf
from .specfun import bessel_zeros

ROUTE_GRID = {
    "full": dict(n=(1, 2, 3, 5, 10), alpha=(-0.4, 0.5, 1.0, 2.3), a=(0.5, 1.0, 2.0), dm=(1.0, 3.0)),
    "quick": dict(n=(1, 2, 3), alpha=(-0.4, 1.0), a=(0.5, 2.0), dm=(1.0,)),
}
KM_EPS = (0.1, 0.05, 0.025, 0.0125)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float | None
    tolerance: float
    cases: int
    seconds: float = 0.0
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        if d["measured"] is not None and not math.isfinite(d["measured"]):
            d["measured"] = None
        return d


def _rel(a, b) -> float:
    return float(abs(a - b) / max(abs(b), mp.mpf(1e-12)))


def route_equivalence(depth: str) -> Check:
    g = ROUTE_GRID[depth]
    worst, where, cases = 0.0, "", 0
    for n, al, a, dm in itertools.product(g["n"], g["alpha"], g["a"], g["dm"]):
        p = ModelParams(n, al, a, a + dm)
        v1 = prob_thm1(p).value
        v2 = prob_thm2_hankel(p).value
        r = _rel(v2, v1)
        cases += 1
        if r > worst or math.isnan(r):
            worst, where = r, f"N={n} alpha={al} a={a} M={a + dm}"
    return Check("route_equivalence", worst <= 1e-8, worst, 1e-8, cases,
                 detail=f"worst at {where}")


def brownian_reductions(depth: str) -> Check:
    worst, cases = 0.0, 0
    for n, m in itertools.product((1, 2, 3), (2.0, 4.0)):
        worst = max(worst, _rel(prob_brownian_reflect(n, m).value,
                                prob_thm1(ModelParams(n, -0.5, 0.0, m)).value))
        worst = max(worst, _rel(prob_brownian_excursion(n, m).value,
                                prob_thm1(ModelParams(n, 0.5, 0.0, m)).value))
        cases += 2
    return Check("brownian_reductions", worst <= 1e-10, worst, 1e-10, cases)


def det_sum_identity(depth: str) -> Check:
    rng = np.random.default_rng(42)
    count = 100 if depth == "full" else 20
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(2, 7))
        f = rng.normal(size=(k, n))
        g = rng.normal(size=(k, n))
        h = rng.uniform(0.5, 2.0, size=k)
        for weights in (None, h):
            lhs, rhs = det_sum_identity_check(f, g, n, k, h=weights)
            if k < n:
                # every index tuple repeats, so both sides vanish identically
                worst = max(worst, abs(lhs), abs(rhs))
            else:
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return Check("det_sum_identity", worst <= 1e-12, worst, 1e-12, 2 * count,
                 detail="plain and weighted variants")


def image_identity(depth: str) -> Check:
    worst, cases = 0.0, 0
    for t, x, y in itertools.product((0.5, 1.0, 2.0), (0.3, 1.5, 2.7), (0.2, 1.4, 2.9)):
        a = transition_pM(t, y, x, -0.5, 3.0)
        b = transition_pM_images(t, y, x, 3.0, 20)
        worst = max(worst, float(abs(a - b)))
        cases += 1
    return Check("image_identity", worst <= 1e-12, worst, 1e-12, cases, detail="M=3, |n| <= 20")


def km_limit(depth: str) -> Check:
    p = ModelParams(2, 1.0, 1.0, 4.0)
    target = prob_thm1(p).value
    out = {}
    for geom in ("arithmetic", "geometric") if depth == "full" else ("arithmetic",):
        diag, resid = richardson(KM_EPS, km_ratio_limit(p, KM_EPS, geometry=geom))
        out[geom] = (diag[-1], resid)
    worst = max(float(abs(v - target)) for v, _ in out.values())
    detail = "; ".join(f"{g}: limit {float(v):.12f}, last residual {float(r[-1]):.1e}"
                       for g, (v, r) in out.items())
    return Check("km_ratio_limit", worst <= 1e-4, worst, 1e-4, len(out),
                 detail=f"target {float(target):.12f}; {detail}")


def zero_tables(depth: str) -> Check:
    count = 500 if depth == "full" else 100
    problems = []
    worst = 0.0
    for al in (-0.5, 0.0, 0.5, 1.0, 2.7):
        tab = bessel_zeros(al, count)
        nxt = bessel_zeros(al + 1, count)
        rep = tab.invariant_report()
        worst = max(worst, tab.residual_bound)
        if not rep["increasing"]:
            problems.append(f"alpha={al}: not increasing")
        if rep["max_gap_deviation_from_pi_n_ge_50"] >= 0.01:
            problems.append(f"alpha={al}: gap deviation {rep['max_gap_deviation_from_pi_n_ge_50']:.3g}")
        for n in range(count - 1):
            if not tab.zeros[n] < nxt.zeros[n] < tab.zeros[n + 1]:
                problems.append(f"alpha={al}: interlacing fails at n={n + 1}")
                break
        if al in (-0.5, 0.5):
            shift = 0.5 if al < 0 else 0.0
            dev = max(abs(float(x) - (n + 1 - shift) * math.pi) for n, x in enumerate(tab.zeros))
            if dev > 1e-13 * count * math.pi:
                problems.append(f"alpha={al}: closed form off by {dev:.2e}")
    return Check("zero_tables", not problems and worst <= 1e-14, worst, 1e-14, 5 * count,
                 detail="; ".join(problems) or f"{count} zeros per order")


def monte_carlo(depth: str) -> Check:
    samples = 100_000 if depth == "full" else 40_000
    worst, details = 0.0, []
    for dim, m, ref in ((3, 2.0, lambda: prob_pitman_yor(0.5, 2.0)),
                        (1, 1.5, lambda: prob_brownian_reflect(1, 1.5))):
        est = estimate_cdf(McConfig(dim, 0.0, m, 2 ** 14, samples, 7))
        p = float(ref().value)
        allow = 3 * est.std_err + est.bias_bracket
        worst = max(worst, abs(est.p_hat - p) / allow)
        details.append(f"d={dim}: p_hat={est.p_hat:.5f} analytic={p:.5f} allowance={allow:.2e}")
    return Check("monte_carlo", worst <= 1.0, worst, 1.0, 2,
                 detail="measured is |p_hat - P| / (3 se + bias bracket); " + "; ".join(details))


def cdf_monotone(depth: str) -> Check:
    ms = np.arange(3.25, 6.0001, 0.25 if depth == "full" else 0.5)
    vals = [prob_thm1(ModelParams(10, 1.0, 1.0, float(m))) for m in ms]
    worst = 0.0
    for a, b in zip(vals, vals[1:]):
        drop = float(a.value - b.value) - (a.est_error + b.est_error)
        worst = max(worst, drop)
    return Check("cdf_monotone_in_M", worst <= 0.0, worst, 0.0, len(ms),
                 detail="largest decrease beyond the error estimates (N=10, alpha=1, a=1)")


CHECKS: dict[str, Callable[[str], Check]] = {
    "route_equivalence": route_equivalence,
    "brownian_reductions": brownian_reductions,
    "det_sum_identity": det_sum_identity,
    "image_identity": image_identity,
    "km_ratio_limit": km_limit,
    "zero_tables": zero_tables,
    "monte_carlo": monte_carlo,
    "cdf_monotone_in_M": cdf_monotone,
}


def run_check(name: str, depth: str) -> dict:
    t = time.perf_counter()
    try:
        c = CHECKS[name](depth)
    except Exception as exc:  # a crashing check is a failed check
        c = Check(name, False, None, 0.0, 0, detail=f"{type(exc).__name__}: {exc}")
    c.seconds = round(time.perf_counter() - t, 3)
    return c.as_dict()
