"""Transition densities of the Bessel process and Karlin-McGregor ratios.

``q(x, y) = det[p(1, y_j | x_i)]`` is the density of N non-colliding paths
from x to y, and ``q^M`` the same with a wall absorbing at M.  Their ratio
tends to P(max b_N < M) as x -> (a, ..., a) and y -> 0, which gives a check
on the determinant routes that never touches their closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from mpmath import mp, mpf

from .errors import ConvergenceError, DomainError
from .linalg_xp import det_sensitivity, lu_factor, resolve_bits
from .maxdist import DEFAULT_TRUNCATION, ModelParams, TruncationPolicy, _spectral_sums
from .specfun import _check_order, _gamma_cached, _i_scaled, bessel_j

GEOMETRIES = ("arithmetic", "geometric")


@dataclass(frozen=True)
class EndpointConfig:
    """Start points x near a and end points y near 0, both strictly increasing."""

    x: tuple
    y: tuple
    eps: float

    def __post_init__(self):
        if len(self.x) != len(self.y) or not self.x:
            raise DomainError("x and y must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise DomainError("x must be strictly increasing")
        if any(b <= a for a, b in zip(self.y, self.y[1:])):
            raise DomainError("y must be strictly increasing")
        if self.x[0] < 0 or self.y[0] <= 0:
            raise DomainError("need x >= 0 and y > 0")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def arithmetic(cls, n: int, a: float, eps: float) -> "EndpointConfig":
        """x_i = a + (i-1) eps (x_i = i eps when a = 0), y_i = i eps."""
        xs = tuple(a + i * eps for i in range(n)) if a > 0 else tuple((i + 1) * eps for i in range(n))
        return cls(xs, tuple((i + 1) * eps for i in range(n)), eps)

    @classmethod
    def geometric(cls, n: int, a: float, eps: float, ratio: float = 3.0) -> "EndpointConfig":
        """Spacings eps, eps r, eps r^2, ...; y_i = eps r^(i-1)."""
        ys = tuple(eps * ratio ** i for i in range(n))
        if a > 0:
            xs = tuple(a + eps * (ratio ** i - 1) / (ratio - 1) for i in range(n))
        else:
            xs = ys
        return cls(xs, ys, eps)


def _check_point(t, y, x) -> None:
    if not t > 0:
        raise DomainError("t must be positive")
    if x < 0 or y < 0:
        raise DomainError("coordinates must be non-negative")


def transition_p(t, y, x, alpha, precision=None) -> mpf:
    """Density in y of the Bessel process of order alpha after time t from x.

    (1/t) (y^{alpha+1}/x^alpha) exp(-(x^2+y^2)/2t) I_alpha(xy/t), computed with
    the scaled I_alpha; at x = 0 the limiting form y^{2alpha+1} e^{-y^2/2t}
    / (2^alpha Gamma(alpha+1) t^{alpha+1}).
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    _check_point(t, y, x)
    wp = bits + 16
    with mp.workprec(wp):
        t, y, x, al = mpf(t), mpf(y), mpf(x), mpf(alpha)
        if x == 0:
            v = _from_origin(t, y, al, wp)
        elif y == 0:
            # I_alpha(z) ~ (z/2)^alpha / Gamma(alpha+1) as z -> 0
            v = mp.exp(-x * x / (2 * t)) * _from_origin(t, y, al, wp)
        else:
            v = (y ** (al + 1) / x ** al / t * mp.exp(-(x - y) ** 2 / (2 * t))
                 * _i_scaled(alpha, x * y / t, wp))
    with mp.workprec(bits):
        return +v


def _from_origin(t, y, al, wp: int) -> mpf:
    k = 2 * al + 1
    if y == 0:
        if k > 0:
            return mpf(0)
        if k < 0:
            return mpf("inf")
        yk = mpf(1)
    else:
        yk = y ** k
    return yk * mp.exp(-y * y / (2 * t)) / (2 ** al * _gamma_cached(al + 1, wp) * t ** (al + 1))


def transition_pM(t, y, x, alpha, M, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                  precision=None) -> mpf:
    """Density of the Bessel process killed at M, by its expansion over the zeros of J_alpha.

    The factor exp(-x_n^2 t / 2M^2) plays the role of the lattice weight with
    wall M/sqrt(t), so small t needs proportionally more zeros.
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    _check_point(t, y, x)
    if not M > 0 or x > M or y > M:
        raise DomainError("need 0 <= x, y <= M")
    wp = bits + 24
    with mp.workprec(wp):
        al = mpf(alpha)
        mm = mpf(M)
        xr, yr = mpf(x) / mm, mpf(y) / mm
        g = _gamma_cached(al + 1, wp)

        def factors(z):
            jy = bessel_j(al, z * yr, wp)
            if x == 0:
                jx = (z / (2 * mm)) ** al / g
            else:
                jx = bessel_j(al, z * xr, wp) / mpf(x) ** al
            return [jx * jy]

        sums = _spectral_sums(alpha, mm / mp.sqrt(mpf(t)), [[0]], factors, bits, trunc)
        if not math.isfinite(sums.tail):
            raise ConvergenceError(f"eigenfunction series at t={t} cannot be truncated reliably")
        v = 2 / (mm * mm) * mpf(y) ** (al + 1) * sums.values[0][0]
    with mp.workprec(bits):
        return +v


def transition_pM_images(t, y, x, M, n_images: int, precision=None) -> mpf:
    """alpha = -1/2 killed kernel as an alternating sum of reflected Gaussians, |n| <= n_images."""
    bits = resolve_bits(precision)
    _check_point(t, y, x)
    if n_images < 0:
        raise DomainError("n_images must be >= 0")
    with mp.workprec(bits + 16):
        t, y, x, m = mpf(t), mpf(y), mpf(x), mpf(M)
        c = 1 / mp.sqrt(2 * mp.pi * t)
        terms = []
        for n in range(-n_images, n_images + 1):
            s = -1 if n % 2 else 1
            terms.append(s * mp.exp(-(y - x - 2 * n * m) ** 2 / (2 * t)))
            terms.append(s * mp.exp(-(y + x + 2 * n * m) ** 2 / (2 * t)))
        v = c * mp.fsum(terms)
    with mp.workprec(bits):
        return +v


def _det_checked(rows, bits: int) -> tuple[int, mpf, float]:
    f = lu_factor(rows, bits)
    if f.sign == 0:
        return 0, mpf("-inf"), math.inf
    u = 2.0 ** -bits
    err = [[16 * u * abs(float(v)) for v in r] for r in rows]
    return f.sign, f.log_abs, det_sensitivity(rows, f, err).relative_error


def km_q(endpoints: EndpointConfig, alpha, precision=None) -> tuple[int, mpf]:
    """(sign, log|det|) of [p(1, y_j | x_i)]."""
    bits = resolve_bits(precision)
    rows = [[transition_p(1, yj, xi, alpha, bits) for yj in endpoints.y] for xi in endpoints.x]
    s, la, _ = _det_checked(rows, bits)
    return s, la


def km_qM(endpoints: EndpointConfig, alpha, M, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
          precision=None) -> tuple[int, mpf]:
    """(sign, log|det|) of [p^M(1, y_j | x_i)]."""
    bits = resolve_bits(precision)
    rows = [[transition_pM(1, yj, xi, alpha, M, trunc, bits) for yj in endpoints.y]
            for xi in endpoints.x]
    s, la, _ = _det_checked(rows, bits)
    return s, la


def default_km_bits(n: int, eps_min: float) -> int:
    """Working bits for the ratio: 212 plus the structural loss ~ eps^{N(N-1)} per determinant."""
    bits = 212 + int(2 * n * n * math.log2(1 / eps_min)) + 32
    return min(bits, 4096)


def _ratio_at(params: ModelParams, cfg: EndpointConfig, trunc, bits: int):
    al = params.alpha
    n = cfg.n
    q = [[transition_p(1, yj, xi, al, bits) for yj in cfg.y] for xi in cfg.x]
    qm = [[transition_pM(1, yj, xi, al, params.wall, trunc, bits) for yj in cfg.y]
          for xi in cfg.x]
    s, la, e = _det_checked(q, bits)
    sm, lam, em = _det_checked(qm, bits)
    if s == 0:
        return None, math.inf
    with mp.workprec(bits):
        r = sm * s * mp.exp(lam - la)
    return r, e + em + n * 2.0 ** -bits


def km_ratio_limit(params: ModelParams, eps_sequence: Sequence[float], precision=None,
                   geometry: str = "arithmetic", trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                   max_rel_error: float = 1e-12) -> list:
    """q^M / q at endpoints collapsing onto (a, ..., a) and 0, one value per eps.

    The determinants cancel like eps^{N(N-1)}; when the measured relative
    error of a ratio exceeds ``max_rel_error`` the precision is doubled, and
    ConvergenceError is raised once 4096 bits do not suffice.
    """
    if geometry not in GEOMETRIES:
        raise DomainError(f"geometry must be one of {GEOMETRIES}")
    eps_sequence = [float(e) for e in eps_sequence]
    if not eps_sequence or any(e <= 0 for e in eps_sequence):
        raise DomainError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_sequence, eps_sequence[1:])):
        raise DomainError("eps_sequence must be decreasing")
    if params.degenerate:
        return [mpf(0)] * len(eps_sequence)
    make = EndpointConfig.arithmetic if geometry == "arithmetic" else EndpointConfig.geometric
    if precision is None:
        bits = default_km_bits(params.n_paths, eps_sequence[-1])
    else:
        bits = resolve_bits(precision)
    out = []
    for eps in eps_sequence:
        cfg = make(params.n_paths, params.start, eps)
        if cfg.x[-1] >= params.wall or cfg.y[-1] >= params.wall:
            raise DomainError(f"eps={eps} pushes endpoints past the wall")
        b = bits
        while True:
            r, rel = _ratio_at(params, cfg, trunc, b)
            if r is not None and rel <= max_rel_error:
                break
            if b >= 4096:
                raise ConvergenceError(
                    f"q lost all significant digits at eps={eps} even at {b} bits (rel {rel:.1e})")
            b = min(4096, 2 * b)
        out.append(r)
    return out


def richardson(eps: Sequence[float], values: Sequence) -> tuple[list, list]:
    """Neville extrapolation to eps = 0.

    Returns the diagonal of limits using 1, 2, ... points and the differences
    between consecutive limits (a residual estimate for each order).
    """
    if len(eps) != len(values) or not eps:
        raise DomainError("need equal, non-empty eps and value lists")
    with mp.workprec(max(mp.prec, 113)):
        h = [mpf(e) for e in eps]
        tab = [mpf(v) for v in values]
        diag = [tab[-1]] if len(tab) == 1 else []
        cols = [tab[:]]
        for k in range(1, len(h)):
            prev = cols[-1]
            cur = []
            for i in range(len(prev) - 1):
                # P_{i..i+k}(0) from P_{i..i+k-1}(0) and P_{i+1..i+k}(0)
                cur.append((h[i] * prev[i + 1] - h[i + k] * prev[i]) / (h[i] - h[i + k]))
            cols.append(cur)
        diag = [c[-1] for c in cols]
        resid = [abs(b - a) for a, b in zip(diag, diag[1:])]
    return diag, resid
