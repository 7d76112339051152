"""Special functions on the real line: Gamma, J_alpha, I_alpha and zeros of J_alpha.

Everything is evaluated with mpmath binary floats at a caller-chosen number of
bits.  The series branches carry guard bits proportional to the cancellation
they suffer, so results are accurate to the working precision rather than to
double precision.
"""

from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

from .errors import ConvergenceError, DomainError
from .linalg_xp import PrecisionConfig, resolve_bits

DERIV_ORDER_MAX = 64

# Lanczos g = 7, n = 9 (Godfrey's coefficients)
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _check_pole(x) -> None:
    if x <= 0 and x == int(x):
        raise DomainError(f"Gamma has a pole at {x}")


def gamma_lanczos(x: float) -> float:
    """Gamma at double precision via the Lanczos approximation."""
    x = float(x)
    _check_pole(x)
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_lanczos(1.0 - x))
    x -= 1.0
    s = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        s += _LANCZOS_COEF[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * s


@lru_cache(maxsize=None)
def _bernoulli_coeffs(bits: int, count: int) -> tuple:
    with mp.workprec(bits):
        return tuple(mpmath.bernoulli(2 * k) / (2 * k * (2 * k - 1))
                     for k in range(1, count + 1))


def gamma_stirling(x, bits: int) -> mpf:
    """Gamma via upward shift and the Stirling series with Bernoulli corrections."""
    _check_pole(x)
    guard = 24
    wp = bits + guard
    with mp.workprec(wp):
        x = mpf(x)
        if x < 0.5:
            g = mp.pi / (mp.sin(mp.pi * x) * gamma_stirling(1 - x, wp))
            with mp.workprec(bits):
                return +g
        # Stirling remainder ~ exp(-2 pi z): shift until it is below 2^-wp
        z0 = wp * math.log(2) / (2 * math.pi) + 2
        shift = max(0, math.ceil(z0 - float(x)))
        z = x + shift
        nterms = int(math.pi * z0) + 4
        coeffs = _bernoulli_coeffs(wp, nterms)
        s = (z - 0.5) * mp.log(z) - z + mp.log(2 * mp.pi) / 2
        zinv = 1 / z
        zinv2 = zinv * zinv
        zp = zinv
        eps = mp.ldexp(1, -wp)
        for c in coeffs:
            term = c * zp
            s += term
            if abs(term) < eps * abs(s):
                break
            zp *= zinv2
        g = mp.exp(s)
        if shift:
            den = mpf(1)
            for k in range(shift):
                den *= x + k
            g /= den
    with mp.workprec(bits):
        return +g


def gamma_fn(x, precision: PrecisionConfig | int | None = None) -> mpf:
    """Gamma(x) at the working precision.

    53 bits uses the Lanczos approximation; extended precisions use the
    shifted Stirling series.
    """
    bits = resolve_bits(precision)
    _check_pole(x)
    if bits == 53:
        with mp.workprec(53):
            return mpf(gamma_lanczos(float(x)))
    return gamma_stirling(x, bits)


@lru_cache(maxsize=4096)
def _gamma_cached(x, bits: int) -> mpf:
    return gamma_stirling(x, bits)


def _check_order(alpha) -> None:
    if not alpha > -1:
        raise DomainError(f"order must exceed -1, got {alpha}")


def _is_integer(v) -> bool:
    return v == int(v)


def _j_series(alpha, x, bits: int) -> mpf:
    # terms peak near I_alpha(x) ~ e^x while the sum is O(1/sqrt x)
    guard = int(1.4427 * float(x)) + 24
    wp = bits + guard
    with mp.workprec(wp):
        alpha = mpf(alpha)
        x = mpf(x)
        half = x / 2
        t = half ** alpha / _gamma_cached(alpha + 1, wp)
        u = -half * half
        s = t
        peak = abs(t)
        eps = mp.ldexp(1, -wp)
        k = 0
        while True:
            t *= u / ((k + 1) * (k + alpha + 1))
            s += t
            k += 1
            at = abs(t)
            if at > peak:
                peak = at
            if (k + 1) * (k + alpha + 1) > -u and at <= eps * peak:
                break
    return s


def _hankel_asymptotic(alpha, x, wp: int, alternating: bool):
    """Sums of the large-argument series; None when it cannot reach 2^-wp."""
    mu = 4 * mpf(alpha) ** 2
    eps = mp.ldexp(1, -wp)
    t = mpf(1)
    p = mpf(1)
    q = mpf(0)
    total = mpf(1)
    prev = mpf("inf")
    k = 1
    while True:
        t = t * (mu - (2 * k - 1) ** 2) / (8 * k * x)
        if t == 0:
            break
        at = abs(t)
        if at > prev and k > 2:
            return None
        prev = at
        if alternating:
            if k % 2:
                q += t if (k // 2) % 2 == 0 else -t
            else:
                p += t if (k // 2) % 2 == 0 else -t
        else:
            total += -t if k % 2 else t
        if at < eps:
            break
        k += 1
        if k > 4 * wp:
            return None
    return (p, q) if alternating else total


def _j_asymptotic(alpha, x, bits: int):
    wp = bits + 16 + int(math.log2(float(x)))
    with mp.workprec(wp):
        alpha = mpf(alpha)
        x = mpf(x)
        pq = _hankel_asymptotic(alpha, x, wp, alternating=True)
        if pq is None:
            return None
        p, q = pq
        omega = x - (alpha / 2 + mpf(1) / 4) * mp.pi
        return mp.sqrt(2 / (mp.pi * x)) * (p * mp.cos(omega) - q * mp.sin(omega))


def j_crossover(alpha) -> float:
    """Argument above which the large-x expansion is attempted."""
    return max(12.0, 2.0 * abs(float(alpha)))


def _bessel_j_raw(alpha, x, bits: int) -> mpf:
    if x == 0:
        if alpha == 0:
            return mpf(1)
        if alpha > 0:
            return mpf(0)
        raise DomainError(f"J_{alpha} is unbounded at 0")
    # the smallest term of the large-x series is about e^{-2x}; skip hopeless attempts
    if x >= j_crossover(alpha) and 2 * float(x) > (bits + 16) * math.log(2):
        v = _j_asymptotic(alpha, x, bits)
        if v is not None:
            return v
    return _j_series(alpha, x, bits)


def bessel_j(alpha, x, precision: PrecisionConfig | int | None = None) -> mpf:
    """Bessel function of the first kind J_alpha(x) for real x >= 0, alpha > -1.

    Power series below ``j_crossover(alpha)``; above it the Hankel
    large-argument expansion is used whenever its smallest term falls below
    the working precision, otherwise the series with guard bits.
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    if x < 0:
        raise DomainError("bessel_j requires x >= 0")
    v = _bessel_j_raw(alpha, x, bits)
    with mp.workprec(bits):
        return +v


def _i_series(alpha, x, wp: int) -> mpf:
    with mp.workprec(wp):
        alpha = mpf(alpha)
        x = mpf(x)
        half = x / 2
        t = half ** alpha / _gamma_cached(alpha + 1, wp)
        u = half * half
        s = t
        eps = mp.ldexp(1, -wp)
        k = 0
        while True:
            r = u / ((k + 1) * (k + alpha + 1))
            t *= r
            s += t
            k += 1
            # positive terms: the tail is below t r / (1 - r) once r < 1/2
            if r < 0.5 and t <= eps * s:
                break
    return s


def _i_scaled(alpha, x, bits: int) -> mpf:
    """e^{-x} I_alpha(x)."""
    if x == 0:
        if alpha == 0:
            return mpf(1)
        if alpha > 0:
            return mpf(0)
        raise DomainError(f"I_{alpha} is unbounded at 0")
    wp = bits + 16 + int(math.log2(1 + float(x)))
    # the expansion omits a companion term of relative size e^{-2x}
    if x >= j_crossover(alpha) and 2 * float(x) > wp * math.log(2):
        with mp.workprec(wp):
            s = _hankel_asymptotic(alpha, mpf(x), wp, alternating=False)
            if s is not None:
                return s / mp.sqrt(2 * mp.pi * x)
    with mp.workprec(wp):
        return _i_series(alpha, x, wp) * mp.exp(-mpf(x))


def bessel_i(alpha, x, precision: PrecisionConfig | int | None = None,
             scaled: bool = False) -> mpf:
    """Modified Bessel function I_alpha(x), or e^{-x} I_alpha(x) when ``scaled``.

    At 53 bits an unscaled value beyond the double range raises OverflowError.
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    if x < 0:
        raise DomainError("bessel_i requires x >= 0")
    v = _i_scaled(alpha, x, bits)
    with mp.workprec(bits + 8):
        if not scaled:
            if bits == 53 and v > 0 and float(mp.log(v)) + float(x) > math.log(sys.float_info.max):
                raise OverflowError(f"I_{alpha}({x}) exceeds the double range; use scaled=True")
            v = v * mp.exp(mpf(x))
    with mp.workprec(bits):
        return +v


@lru_cache(maxsize=256)
def _deriv_coeffs(alpha, order: int, bits: int) -> tuple:
    """Laurent coefficients of J^(k) = A_k(z) J_alpha + B_k(z) J_{alpha+1}, k <= order.

    Each A_k, B_k is a tuple of (exponent, coefficient) with exponent <= 0.
    Uses J_a' = (a/z) J_a - J_{a+1} and J_{a+1}' = J_a - ((a+1)/z) J_{a+1}.
    """
    with mp.workprec(bits):
        alpha = mpf(alpha)
        a = {0: mpf(1)}
        b: dict = {}
        out = [(tuple(a.items()), tuple(b.items()))]
        for _ in range(order):
            na: dict = {}
            nb: dict = {}

            def add(d, e, c):
                if c:
                    d[e] = d.get(e, 0) + c

            for e, c in a.items():
                add(na, e - 1, c * e)          # A'
                add(na, e - 1, c * alpha)      # alpha A / z
                add(nb, e, -c)                 # -A
            for e, c in b.items():
                add(nb, e - 1, c * e)          # B'
                add(na, e, c)                  # B
                add(nb, e - 1, -c * (alpha + 1))  # -(alpha+1) B / z
            a = {e: c for e, c in na.items() if c}
            b = {e: c for e, c in nb.items() if c}
            out.append((tuple(sorted(a.items())), tuple(sorted(b.items()))))
    return tuple(out)


def _deriv_at_zero(alpha, n: int, bits: int) -> mpf:
    # integer order: n-th Taylor coefficient of J_m times n!
    m = int(alpha)
    with mp.workprec(bits):
        if n < m or (n - m) % 2:
            return mpf(0)
        k = (n - m) // 2
        return mpf((-1) ** k) * mp.factorial(n) / (mp.ldexp(1, n) * mp.factorial(k) * mp.factorial(k + m))


def bessel_j_derivatives(alpha, order: int, x, precision: PrecisionConfig | int | None = None,
                         with_magnitude: bool = False):
    """All derivatives J_alpha^(k)(x), k = 0..order, from one (J_alpha, J_alpha+1) pair.

    With ``with_magnitude`` each entry is ``(value, magnitude)`` where the
    magnitude is the sum of absolute values of the reduction's terms, a
    measure of the cancellation the value went through.
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    if order < 0 or order > DERIV_ORDER_MAX:
        raise DomainError(f"derivative order must be in [0, {DERIV_ORDER_MAX}]")
    if x < 0:
        raise DomainError("x must be >= 0")
    if x == 0:
        if not _is_integer(alpha) or alpha < 0:
            raise DomainError("derivatives at 0 exist only for non-negative integer orders")
        vals = [_deriv_at_zero(alpha, k, bits) for k in range(order + 1)]
        return [(v, abs(v)) for v in vals] if with_magnitude else vals
    guard = 32
    for _ in range(4):
        wp = bits + guard
        coeffs = _deriv_coeffs(alpha, order, wp)
        with mp.workprec(wp):
            xx = mpf(x)
            ja = _bessel_j_raw(alpha, xx, wp)
            jb = _bessel_j_raw(mpf(alpha) + 1, xx, wp)
            zinv = 1 / xx
            res = []
            worst = 0.0
            for acoef, bcoef in coeffs:
                terms = [c * zinv ** (-e) * ja for e, c in acoef]
                terms += [c * zinv ** (-e) * jb for e, c in bcoef]
                val = mp.fsum(terms)
                mag = mp.fsum(abs(t) for t in terms)
                if val != 0 and mag != 0:
                    worst = max(worst, float(mp.log(mag / abs(val), 2)))
                res.append((val, mag))
        if worst < guard - 16:
            break
        guard = int(worst) + 40
    with mp.workprec(bits):
        if with_magnitude:
            return [(+v, +m) for v, m in res]
        return [+v for v, _ in res]


def bessel_j_deriv(alpha, n: int, x, precision: PrecisionConfig | int | None = None,
                   n_max: int = DERIV_ORDER_MAX) -> mpf:
    """n-th derivative of J_alpha at x via exact reduction to J_alpha and J_{alpha+1}."""
    if n < 0 or n > n_max:
        raise DomainError(f"derivative order {n} outside [0, {n_max}]")
    return bessel_j_derivatives(alpha, n, x, precision)[n]


# ---------------------------------------------------------------------------
# zeros


@dataclass(frozen=True)
class BesselZeroTable:
    """First ``count`` positive zeros of J_alpha with a residual certificate.

    ``next_order_values[n]`` is J_{alpha+1} at ``zeros[n]`` (equal to
    -J_alpha' there), which every spectral sum needs.
    """

    alpha: float
    zeros: tuple
    next_order_values: tuple
    residual_bound: float
    bits: int

    @property
    def count(self) -> int:
        return len(self.zeros)

    def __len__(self):
        return len(self.zeros)

    def head(self, count: int) -> "BesselZeroTable":
        if count > self.count:
            raise DomainError(f"table holds {self.count} zeros, asked for {count}")
        return BesselZeroTable(self.alpha, self.zeros[:count], self.next_order_values[:count],
                               self.residual_bound, self.bits)

    def invariant_report(self) -> dict:
        """Measured ordering, residual and gap diagnostics."""
        xs = [float(z) for z in self.zeros]
        increasing = all(b > a for a, b in zip(xs, xs[1:]))
        gaps = [b - a for a, b in zip(xs, xs[1:])]
        gap_dev = max((abs(g - math.pi) for g in gaps[49:]), default=0.0)
        return {
            "increasing": increasing,
            "residual_bound": self.residual_bound,
            "max_gap_deviation_from_pi_n_ge_50": gap_dev,
        }


def mcmahon(alpha, n: int) -> float:
    """Large-n asymptotic estimate of the n-th positive zero of J_alpha."""
    mu = 4.0 * float(alpha) ** 2
    beta = (n + float(alpha) / 2 - 0.25) * math.pi
    b8 = 8 * beta
    return (beta - (mu - 1) / b8 - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8 ** 3)
            - 32 * (mu - 1) * (83 * mu ** 2 - 982 * mu + 3779) / (15 * b8 ** 5))


# consecutive positive zeros of J_alpha are more than 3 apart for every alpha > -1
_MIN_GAP = 3.0
_SCAN_STEP = 1.0


def _refine_zero(alpha, lo, hi, flo, guess, wp: int):
    """Safeguarded Newton on J_alpha inside the sign-change bracket [lo, hi]."""
    with mp.workprec(wp):
        x = guess if lo < guess < hi else (lo + hi) / 2
        tol = mp.ldexp(1, -(wp - 6))
        for _ in range(200):
            fx = _bessel_j_raw(alpha, x, wp)
            jb = _bessel_j_raw(mpf(alpha) + 1, x, wp)
            if fx == 0:
                return x, jb
            if (fx > 0) == (flo > 0):
                lo, flo = x, fx
            else:
                hi = x
            dfx = alpha / x * fx - jb
            if dfx != 0:
                step = fx / dfx
                if abs(step) <= tol * x:
                    return x, jb
                xn = x - step
            if dfx == 0 or not lo < xn < hi:
                xn = (lo + hi) / 2
            x = xn
    raise ConvergenceError(f"zero of J_{alpha} in [{lo}, {hi}] did not converge")


def _zeros_from(alpha, start_zeros: tuple, count: int, wp: int) -> tuple:
    with mp.workprec(wp):
        alpha_m = mpf(alpha)
        zs = list(start_zeros)
        if zs:
            left = zs[-1][0] + _MIN_GAP
        else:
            # J_alpha > 0 on (0, 2 sqrt(alpha+1)): alternating series bound
            left = mp.sqrt(alpha_m + 1)
        fleft = _bessel_j_raw(alpha_m, left, wp)
        while len(zs) < count:
            n = len(zs) + 1
            right = left
            fright = fleft
            steps = 0
            limit = 64 + 2 * int(abs(float(alpha)))
            while (fright > 0) == (fleft > 0) and fright != 0:
                left, fleft = right, fright
                right = right + _SCAN_STEP
                fright = _bessel_j_raw(alpha_m, right, wp)
                steps += 1
                if steps > limit:
                    raise ConvergenceError(
                        f"no sign change of J_{alpha} found after {float(left)} (zero #{n})")
            if fright == 0:
                x, jb = right, _bessel_j_raw(alpha_m + 1, right, wp)
            else:
                x, jb = _refine_zero(alpha_m, left, right, fleft, mpf(mcmahon(alpha, n)), wp)
            zs.append((x, jb))
            left = x + _MIN_GAP
            fleft = _bessel_j_raw(alpha_m, left, wp)
    return tuple(zs)


_zero_lock = threading.Lock()


@lru_cache(maxsize=64)
def _zeros_block(alpha, count: int, wp: int) -> tuple:
    if count <= 32:
        return _zeros_from(alpha, (), count, wp)
    prev = _zeros_block(alpha, count // 2, wp)
    return _zeros_from(alpha, prev, count, wp)


@lru_cache(maxsize=64)
def _certified_block(alpha, block: int, bits: int) -> tuple:
    wp = bits + 16
    with _zero_lock:
        raw = _zeros_block(alpha, block, wp)
    with mp.workprec(bits):
        zeros = tuple(+x for x, _ in raw)
        jb = tuple(+b for _, b in raw)
        res = tuple(abs(float(bessel_j(alpha, x, bits))) for x in zeros)
    return zeros, jb, res


def bessel_zeros(alpha, count: int, tol: float = 1e-14,
                 precision: PrecisionConfig | int | None = None) -> BesselZeroTable:
    """First ``count`` positive zeros of J_alpha, polished to the working precision.

    Each zero is bracketed by a forward sign-change scan that starts 3 past
    the previous zero (consecutive zeros are further apart than that) and
    advances in unit steps, then refined by Newton with bisection fallback.
    Raises ConvergenceError if any residual |J_alpha(x_n)| exceeds
    ``tol * max(1, n)``.
    """
    bits = resolve_bits(precision)
    _check_order(alpha)
    if count < 1:
        raise DomainError("count must be positive")
    if tol < 1e-15:
        raise DomainError("tol must be >= 1e-15")
    block = 32
    while block < count:
        block *= 2
    zeros, jb, res = _certified_block(float(alpha), block, bits)
    for n, r in enumerate(res[:count], start=1):
        if r > tol * max(1, n):
            raise ConvergenceError(
                f"zero #{n} of J_{alpha} at {zeros[n - 1]} has residual {r:.3e} > {tol * n:.1e}")
    return BesselZeroTable(float(alpha), zeros[:count], jb[:count], max(res[:count]), bits)
