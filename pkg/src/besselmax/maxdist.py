"""P(max_{0<t<1} b_N(t) < M) for N non-intersecting Bessel paths.

Every route reduces to a small determinant whose entries are sums over the
positive zeros x_n of J_alpha, damped by exp(-x_n^2 / 2M^2).  The routes
differ only in how the entries are arranged:

* ``thm1``: entries with derivatives of J_alpha at (a/M) x_n, or pure powers
  when a = 0;
* ``thm2_hankel``: block Hankel matrix of moments of two discrete weights
  (a single weight when a = 0);
* ``brownian_reflect`` / ``brownian_excursion``: alpha = -1/2 and 1/2 with
  explicit half-integer and integer lattices;
* ``pitman_yor``: the single-path series.

Prefactors are assembled as logarithms and the determinant enters through
``(sign, log|det|)``, so nothing overflows at N = 10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from mpmath import mp, mpf

from .errors import ConvergenceError, DomainError
from .linalg_xp import DEFAULT_PRECISION, PrecisionConfig, det_sensitivity, lu_factor
from .specfun import _gamma_cached, bessel_j, bessel_j_derivatives, bessel_zeros

ROUTES = ("thm1", "thm2_hankel", "brownian_reflect", "brownian_excursion", "pitman_yor")

_GUARD = 24


@dataclass(frozen=True)
class ModelParams:
    """N paths of a Bessel process of order alpha started at a, wall at M."""

    n_paths: int
    alpha: float
    start: float
    wall: float

    def __post_init__(self):
        if not isinstance(self.n_paths, int) or isinstance(self.n_paths, bool) or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if not self.alpha > -1:
            raise DomainError(f"alpha must exceed -1, got {self.alpha}")
        if not self.start >= 0:
            raise DomainError(f"start must be >= 0, got {self.start}")
        if not math.isfinite(self.wall) or self.wall < 0:
            raise DomainError(f"wall must be finite and >= 0, got {self.wall}")

    @property
    def degenerate(self) -> bool:
        """True when the wall does not lie above the start (P = 0)."""
        return self.wall <= self.start


@dataclass(frozen=True)
class TruncationPolicy:
    """How many zeros enter each lattice sum.

    ``tail_tol`` mode picks the first cutoff whose tail bound drops below
    ``tail_tol`` times the smallest entry magnitude; ``tail_tol=None`` means
    2^-(bits+8), i.e. below the working precision.  ``fixed_terms`` mode
    uses exactly ``n_max`` zeros and only reports the tail bound.
    """

    mode: str = "tail_tol"
    n_max: int | None = None
    tail_tol: float | None = None
    n_cap: int = 5000

    def __post_init__(self):
        if self.mode not in ("tail_tol", "fixed_terms"):
            raise DomainError(f"unknown truncation mode {self.mode!r}")
        if self.mode == "fixed_terms" and (self.n_max is None or self.n_max < 1):
            raise DomainError("fixed_terms mode needs n_max >= 1")
        if self.tail_tol is not None and not 0 < self.tail_tol < 1:
            raise DomainError("tail_tol must lie in (0, 1)")
        if self.n_cap < 1:
            raise DomainError("n_cap must be positive")

    def tolerance(self, bits: int) -> float:
        return self.tail_tol if self.tail_tol is not None else 2.0 ** -(bits + 8)

    @classmethod
    def fixed(cls, n_max: int) -> "TruncationPolicy":
        return cls(mode="fixed_terms", n_max=n_max, n_cap=max(n_max, 5000))


DEFAULT_TRUNCATION = TruncationPolicy()


@dataclass(frozen=True)
class MomentTable:
    """Moments of the discrete weights on the squared-zero lattice.

    ``mop_pair`` carries m1[k], m2[k]; ``single`` carries mt[k].  The
    ``*_err`` tuples hold absolute error bounds (tail plus rounding).
    """

    kind: str
    k_max: int
    truncation: TruncationPolicy
    n_terms: int
    bits: int
    m1: tuple = ()
    m2: tuple = ()
    mt: tuple = ()
    m1_err: tuple = ()
    m2_err: tuple = ()
    mt_err: tuple = ()


@dataclass(frozen=True)
class ProbabilityResult:
    """A probability with its route and a first-order error estimate.

    ``value`` is the raw number, not clamped to [0, 1].
    """

    value: mpf
    route: str
    est_error: float
    n_terms_used: int
    precision_bits: int
    condition: float = 0.0
    note: str = ""

    def __float__(self):
        return float(self.value)

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, float(self.value)))


def _as_config(precision) -> PrecisionConfig:
    if precision is None:
        return DEFAULT_PRECISION
    if isinstance(precision, PrecisionConfig):
        return precision
    return PrecisionConfig(int(precision))


# ---------------------------------------------------------------------------
# lattice sums


def _gauss_tail(q: float, x0: float, m: float) -> float:
    """Upper bound on the integral of x^q exp(-x^2/2m^2) over [x0, inf)."""
    if x0 <= 0:
        return math.inf
    m2 = m * m
    if q > 1:
        d = 1 - (q - 1) * m2 / (x0 * x0)
        if d <= 0:
            return math.inf
    else:
        d = 1.0
    log_b = 2 * math.log(m) + (q - 1) * math.log(x0) - x0 * x0 / (2 * m2) - math.log(d)
    return math.exp(log_b) if log_b < 700 else math.inf


def _guess_cutoff(p: float, m: float, tol: float) -> int:
    # smallest x with x^(p+1) exp(-x^2/2m^2) < tol, past the envelope peak
    x = m * math.sqrt(max(p + 2, 1.0))
    target = -math.log(tol)
    for _ in range(50):
        x = math.sqrt(2 * m * m * (target + max(p + 1, 0) * math.log(max(x, 1.0)) + 4))
    return int(x / math.pi) + 4


@dataclass
class _SpectralSums:
    """Sums S[r][c] = sum_n x_n^p[r][c] F_r(x_n) w(x_n) with error bounds."""

    values: list
    errors: list
    n_terms: int
    tail: float
    note: str = ""


class _Powers:
    """x^(k + shift) for integer k in [lo, hi], from one real power per zero."""

    def __init__(self, exps, shift):
        flat = [k for row in exps for k in row]
        self.shift = shift
        self.lo, self.hi = min(flat), max(flat)

    def table(self, x) -> dict:
        # the fractional part must come from the exact shift; rounding it in
        # double precision leaves a 1e-16 relative error in every entry
        out = {self.lo: x ** (self.shift + self.lo) if self.shift else x ** self.lo}
        for k in range(self.lo + 1, self.hi + 1):
            out[k] = out[k - 1] * x
        return out


def _spectral_sums(alpha, wall, exps: Sequence[Sequence[int]],
                   row_factors: Callable, bits: int, trunc: TruncationPolicy,
                   shift=0) -> _SpectralSums:
    """Evaluate weighted sums over the zeros of J_alpha with truncation control.

    ``row_factors(x)`` returns one factor per row at the zero x (at working
    precision ``bits + _GUARD``); the weight is exp(-x^2/2M^2)/J_{alpha+1}(x)^2.
    Entry (r, c) carries the power x^(exps[r][c] + shift) with integer
    exps and one real shift.  Zeros are consumed one at a time until the
    Gaussian tail bound of every entry drops below the tolerance relative to
    the smallest entry.
    """
    wp = bits + _GUARD
    nrow = len(exps)
    p_max = max(max(r) for r in exps) + float(shift)
    tol = trunc.tolerance(bits)
    m = float(wall)
    x_peak = m * math.sqrt(max(p_max + 2, 0.0))
    fixed = trunc.mode == "fixed_terms"
    count = trunc.n_max if fixed else min(trunc.n_cap, _guess_cutoff(p_max, m, tol))
    with mp.workprec(wp):
        powers = _Powers(exps, mpf(shift))
    parts = [[[] for _ in row] for row in exps]
    absum = [[0.0] * len(row) for row in exps]
    env = []  # |F_r(x_n)| / (x_n J_{alpha+1}(x_n)^2), the smooth part of each term
    xs_f = []
    table = bessel_zeros(alpha, count + 1, precision=wp + 8)
    gaps = [float(b - a) for a, b in zip(table.zeros, table.zeros[1:])]
    gap_min = min(min(gaps, default=math.pi), math.pi)

    def tail(n: int, q: float, r: int) -> float:
        x0 = xs_f[n - 1]
        if x0 * x0 < (q + 1) * m * m:
            return math.inf
        h = max(e[r] for e in env[max(0, n - 8):n])
        return 2 * h / gap_min * _gauss_tail(q + 1, x0, m)

    n = 0
    with mp.workprec(wp):
        mw = mpf(wall)
        while True:
            if n == table.count:
                if table.count >= trunc.n_cap:
                    raise ConvergenceError(
                        f"lattice tail did not fall below {tol:.1e} within {trunc.n_cap} zeros "
                        f"(alpha={alpha}, M={wall}, p_max={p_max:.1f})")
                table = bessel_zeros(alpha, min(trunc.n_cap, 2 * table.count), precision=wp + 8)
            x = table.zeros[n]
            jb = table.next_order_values[n]
            w = mp.exp(-x * x / (2 * mw * mw)) / (jb * jb)
            f = row_factors(x)
            pw = powers.table(x)
            inv = 1 / (x * jb * jb)
            env.append([float(abs(v) * inv) for v in f])
            xs_f.append(float(x))
            for r in range(nrow):
                fw = f[r] * w
                for c, q in enumerate(exps[r]):
                    t = pw[q] * fw
                    parts[r][c].append(t)
                    absum[r][c] += abs(float(t))
            n += 1
            if fixed:
                if n == trunc.n_max:
                    break
                continue
            if xs_f[-1] < x_peak:
                continue
            target = tol * min(min(row) for row in absum)
            if all(tail(n, q + float(shift), r) <= target for r in range(nrow) for q in exps[r]):
                break
        u = 2.0 ** -wp
        values, errors = [], []
        worst_tail = 0.0
        for r in range(nrow):
            vrow, erow = [], []
            for c, q in enumerate(exps[r]):
                qf = q + float(shift)
                t = tail(n, qf, r)
                worst_tail = max(worst_tail, t)
                vrow.append(mp.fsum(parts[r][c]))
                erow.append(t + (abs(qf) + 16 + math.log2(n + 1)) * u * absum[r][c])
            values.append(vrow)
            errors.append(erow)
    note = ""
    if not math.isfinite(worst_tail):
        note = "cutoff lies before the envelope peak; tail bound unavailable"
    return _SpectralSums(values, errors, n, worst_tail, note)


# ---------------------------------------------------------------------------
# determinant assembly


def _log_gamma(x, bits: int) -> mpf:
    return mp.log(_gamma_cached(x, bits))


def _log_prefactor(params: ModelParams, bits: int) -> mpf:
    """log of c_N(alpha) M^{-N(3N+2alpha+1)/2}, or the a = 0 analogue."""
    n = params.n_paths
    with mp.workprec(bits):
        al = mpf(params.alpha)
        a = mpf(params.start)
        m = mpf(params.wall)
        if params.start > 0:
            lc = (n * (3 - n)) * mp.ln2 / 2 + a * a * n / 2 - n * (n + 2 * al - 1) * mp.log(a) / 2
            lc -= mp.fsum(_log_gamma(j, bits) for j in range(1, n + 1))
            return lc - n * (3 * n + 2 * al + 1) * mp.log(m) / 2
        lc = (2 * n - al * n - n * n) * mp.ln2
        lc -= mp.fsum(_log_gamma(j, bits) + _log_gamma(al + j, bits) for j in range(1, n + 1))
        return lc - 2 * n * (n + al) * mp.log(m)


def _finish(route: str, matrix, entry_err, log_pref, sign_pref: int, n_terms: int,
            bits: int, note: str = "") -> ProbabilityResult:
    """Combine the determinant with its log prefactor and error budget."""
    n = len(matrix)
    with mp.workprec(bits):
        a = [[+v for v in row] for row in matrix]
    u = 2.0 ** -bits
    err = [[e + u * abs(float(v)) for e, v in zip(er, row)] for er, row in zip(entry_err, a)]
    fac = lu_factor(a, bits)
    if fac.sign == 0:
        return ProbabilityResult(mpf(0), route, math.inf, n_terms, bits, math.inf,
                                 "determinant vanished at working precision")
    sens = det_sensitivity(a, fac, err)
    with mp.workprec(bits):
        value = sign_pref * fac.sign * mp.exp(log_pref + fac.log_abs)
        value = +value
    rel = sens.relative_error + (8 * n * n + 16) * u
    mag = abs(float(value))
    est = mag * rel
    if rel >= 0.5:
        est = max(est, 1.0 + mag)
    return ProbabilityResult(value, route, est, n_terms, bits, sens.condition, note)


def _with_retry(fn: Callable[[int], ProbabilityResult], precision) -> ProbabilityResult:
    cfg = _as_config(precision)
    res = fn(cfg.working_bits)
    if cfg.auto_retry and res.condition > cfg.condition_limit and cfg.working_bits < 4096:
        hi = cfg.doubled()
        res2 = fn(hi.working_bits)
        note = f"condition {res.condition:.2e} above {cfg.condition_limit:.2e}; " \
               f"recomputed at {hi.working_bits} bits"
        return replace(res2, note="; ".join(s for s in (res2.note, note) if s))
    return res


def _zero_result(params: ModelParams, route: str, precision) -> ProbabilityResult:
    bits = _as_config(precision).working_bits
    return ProbabilityResult(mpf(0), route, 0.0, 0, bits, 0.0,
                             "wall at or below the starting point")


def _hankel_sign_exponent(n: int) -> int:
    n1 = (n + 1) // 2
    num = n * (n - 3) + 2 * n1 * n1
    if num % 4:
        raise ConvergenceError(f"non-integer Hankel sign exponent at N={n}")
    return num // 4


# ---------------------------------------------------------------------------
# routes


def _thm1_at(params: ModelParams, trunc: TruncationPolicy, bits: int) -> ProbabilityResult:
    n = params.n_paths
    al = params.alpha
    if params.start > 0:
        with mp.workprec(bits + _GUARD):
            ratio = mpf(params.start) / mpf(params.wall)

        def factors(x):
            d = bessel_j_derivatives(al, n - 1, ratio * x, bits + _GUARD)
            return [d[i] if i % 2 == 0 else -d[i] for i in range(n)]

        exps = [[i + 2 * j - 3 for j in range(1, n + 1)] for i in range(1, n + 1)]
        shift = al
    else:
        def factors(x):
            return [mpf(1)] * n

        exps = [[2 * i + 2 * j - 4 for j in range(1, n + 1)] for i in range(1, n + 1)]
        shift = 2 * al
    sums = _spectral_sums(al, params.wall, exps, factors, bits, trunc, shift)
    lp = _log_prefactor(params, bits + _GUARD)
    return _finish("thm1", sums.values, sums.errors, lp, 1, sums.n_terms, bits, sums.note)


def prob_thm1(params: ModelParams, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
              precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """Determinant formula with derivatives of J_alpha (pure powers when a = 0)."""
    if params.degenerate:
        return _zero_result(params, "thm1", precision)
    return _with_retry(lambda b: _thm1_at(params, trunc, b), precision)


def _moments_at(params: ModelParams, k_max: int, trunc: TruncationPolicy, bits: int,
                kind: str) -> MomentTable:
    al = params.alpha
    ks = range(k_max + 1)
    if kind == "mop_pair":
        with mp.workprec(bits + _GUARD):
            ratio = mpf(params.start) / mpf(params.wall)
            al_m = mpf(al)

        def factors(x):
            z = ratio * x
            return [bessel_j(al_m, z, bits + _GUARD), bessel_j(al_m + 1, z, bits + _GUARD)]

        exps = [[2 * k for k in ks], [2 * k + 1 for k in ks]]
        s = _spectral_sums(al, params.wall, exps, factors, bits, trunc, al)
        return MomentTable("mop_pair", k_max, trunc, s.n_terms, bits,
                           m1=tuple(s.values[0]), m2=tuple(s.values[1]),
                           m1_err=tuple(s.errors[0]), m2_err=tuple(s.errors[1]))
    s = _spectral_sums(al, params.wall, [[2 * k for k in ks]],
                       lambda x: [mpf(1)], bits, trunc, 2 * al)
    return MomentTable("single", k_max, trunc, s.n_terms, bits,
                       mt=tuple(s.values[0]), mt_err=tuple(s.errors[0]))


def moments_mop(params: ModelParams, k_max: int, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                precision: PrecisionConfig | int | None = None) -> MomentTable:
    """m1[k] = sum x_n^{2k+alpha} J_alpha(a x_n/M) w_n and m2[k] with alpha+1, k <= k_max."""
    if not params.start > 0:
        raise DomainError("moments_mop needs a > 0")
    if params.degenerate:
        raise DomainError("moments_mop needs M > a")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    return _moments_at(params, k_max, trunc, _as_config(precision).working_bits, "mop_pair")


def moments_single(params: ModelParams, k_max: int, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                   precision: PrecisionConfig | int | None = None) -> MomentTable:
    """mt[k] = sum x_n^{2k+2alpha} exp(-x_n^2/2M^2) / J_{alpha+1}(x_n)^2, k <= k_max."""
    if params.start != 0:
        raise DomainError("moments_single needs a = 0")
    if not params.wall > 0:
        raise DomainError("moments_single needs M > 0")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    return _moments_at(params, k_max, trunc, _as_config(precision).working_bits, "single")


def _thm2_at(params: ModelParams, trunc: TruncationPolicy, bits: int) -> ProbabilityResult:
    n = params.n_paths
    lp = _log_prefactor(params, bits + _GUARD)
    if params.start > 0:
        n1, n2 = (n + 1) // 2, n // 2
        mt = _moments_at(params, n1 + n - 2, trunc, bits, "mop_pair")
        rows = [[mt.m1[r + c] for c in range(n)] for r in range(n1)]
        rows += [[mt.m2[r + c] for c in range(n)] for r in range(n2)]
        errs = [[mt.m1_err[r + c] for c in range(n)] for r in range(n1)]
        errs += [[mt.m2_err[r + c] for c in range(n)] for r in range(n2)]
        sign = -1 if _hankel_sign_exponent(n) % 2 else 1
    else:
        mt = _moments_at(params, 2 * n - 2, trunc, bits, "single")
        rows = [[mt.mt[r + c] for c in range(n)] for r in range(n)]
        errs = [[mt.mt_err[r + c] for c in range(n)] for r in range(n)]
        sign = 1
    return _finish("thm2_hankel", rows, errs, lp, sign, mt.n_terms, bits)


def prob_thm2_hankel(params: ModelParams, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                     precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """Hankel-determinant formula built from moments_mop (a > 0) or moments_single."""
    if params.degenerate:
        return _zero_result(params, "thm2_hankel", precision)
    return _with_retry(lambda b: _thm2_at(params, trunc, b), precision)


def _theta_sums(exps, wall, offset: float, bits: int, trunc: TruncationPolicy):
    """sum over x in Z + offset of x^p exp(-x^2 pi^2 / 2M^2), both signs of x."""
    wp = bits + _GUARD
    tol = trunc.tolerance(bits)
    with mp.workprec(wp):
        m = mpf(wall)
        s_eff = float(m / mp.pi)  # Gaussian scale in x
        p_max = max(exps)
        if trunc.mode == "fixed_terms":
            count = trunc.n_max
        else:
            x_min = s_eff * math.sqrt(p_max + 2)
            count = int(x_min) + 2
            while True:
                x0 = count - 1 + offset
                t = 2 * _gauss_tail(p_max, x0, s_eff)
                if x0 >= x_min and t <= tol * _theta_floor(exps, s_eff, offset):
                    break
                count += max(1, count // 4)
                if count > trunc.n_cap:
                    raise ConvergenceError(f"theta-sum tail not reached within {trunc.n_cap} terms")
        xs = [mpf(k) + offset for k in range(count)]
        ws = [mp.exp(-(x * mp.pi / m) ** 2 / 2) for x in xs]
        vals, errs = [], []
        u = 2.0 ** -wp
        for p in exps:
            # p >= 2 on the integer lattice, so x = 0 contributes nothing
            s = mp.fsum(2 * x ** p * w for x, w in zip(xs, ws))
            x0 = count - 1 + offset
            tail = 2 * _gauss_tail(p, x0, s_eff) if x0 * x0 >= p * s_eff * s_eff else math.inf
            vals.append(s)
            errs.append(tail + (p + 16) * u * float(s))
    return vals, errs, count


def _theta_floor(exps, s_eff: float, offset: float) -> float:
    # smallest sum magnitude, estimated by its leading term
    x = 1.0 if offset == 0 else 0.5
    return min(x ** p * math.exp(-x * x / (2 * s_eff * s_eff)) for p in exps)


def _brownian_at(n: int, wall, offset: float, bits: int, trunc: TruncationPolicy,
                 route: str) -> ProbabilityResult:
    shift = 4 if offset else 2
    exps = list(range(0 if offset else 2, 4 * n - shift + 1, 2))
    base = exps[0]
    vals, errs, count = _theta_sums(exps, wall, offset, bits, trunc)
    idx = {p: i for i, p in enumerate(exps)}
    rows = [[vals[idx[base + 2 * (i + j)]] for j in range(n)] for i in range(n)]
    er = [[errs[idx[base + 2 * (i + j)]] for j in range(n)] for i in range(n)]
    with mp.workprec(bits + _GUARD):
        m = mpf(wall)
        if offset:
            lp = (-mpf(n) / 2 * mp.ln2 + (2 * n * n - mpf(3) * n / 2) * mp.log(mp.pi)
                  - n * (2 * n - 1) * mp.log(m)
                  - mp.fsum(mp.log(mp.factorial(2 * k)) for k in range(n)))
        else:
            lp = (-mpf(n) / 2 * mp.ln2 + (2 * n * n + mpf(n) / 2) * mp.log(mp.pi)
                  - n * (2 * n + 1) * mp.log(m)
                  - mp.fsum(mp.log(mp.factorial(2 * k + 1)) for k in range(n)))
    return _finish(route, rows, er, lp, 1, count, bits)


def _check_brownian(n: int, wall) -> None:
    if not isinstance(n, int) or n < 1:
        raise DomainError("N must be a positive integer")
    if not wall > 0:
        raise DomainError("M must be positive")


def prob_brownian_reflect(n: int, wall, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                          precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """alpha = -1/2, a = 0: theta sums over the half-integer lattice."""
    _check_brownian(n, wall)
    return _with_retry(
        lambda b: _brownian_at(n, wall, 0.5, b, trunc, "brownian_reflect"), precision)


def prob_brownian_excursion(n: int, wall, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                            precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """alpha = 1/2, a = 0: theta sums over the integer lattice."""
    _check_brownian(n, wall)
    return _with_retry(
        lambda b: _brownian_at(n, wall, 0.0, b, trunc, "brownian_excursion"), precision)


def _pitman_yor_at(alpha, wall, bits: int, trunc: TruncationPolicy) -> ProbabilityResult:
    s = _spectral_sums(alpha, wall, [[0]], lambda x: [mpf(1)], bits, trunc, 2 * alpha)
    with mp.workprec(bits + _GUARD):
        lp = ((1 - mpf(alpha)) * mp.ln2 - _log_gamma(mpf(alpha) + 1, bits + _GUARD)
              - 2 * (mpf(alpha) + 1) * mp.log(mpf(wall)))
    return _finish("pitman_yor", s.values, s.errors, lp, 1, s.n_terms, bits, s.note)


def prob_pitman_yor(alpha, wall, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                    precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """Single path started at 0: a one-term series over the zeros of J_alpha."""
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if not wall > 0:
        raise DomainError("M must be positive")
    return _with_retry(lambda b: _pitman_yor_at(alpha, wall, b, trunc), precision)


def probability(params: ModelParams, route: str = "thm1",
                trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                precision: PrecisionConfig | int | None = None) -> ProbabilityResult:
    """Dispatch to one route, checking that it applies to ``params``."""
    if route == "thm1":
        return prob_thm1(params, trunc, precision)
    if route == "thm2_hankel":
        return prob_thm2_hankel(params, trunc, precision)
    if route in ("brownian_reflect", "brownian_excursion", "pitman_yor") and params.start != 0:
        raise DomainError(f"route {route} needs a = 0")
    if params.degenerate:
        return _zero_result(params, route, precision)
    if route == "pitman_yor":
        if params.n_paths != 1:
            raise DomainError("route pitman_yor needs N = 1")
        return prob_pitman_yor(params.alpha, params.wall, trunc, precision)
    if route == "brownian_reflect":
        if params.alpha != -0.5:
            raise DomainError("route brownian_reflect needs alpha = -1/2")
        return prob_brownian_reflect(params.n_paths, params.wall, trunc, precision)
    if route == "brownian_excursion":
        if params.alpha != 0.5:
            raise DomainError("route brownian_excursion needs alpha = 1/2")
        return prob_brownian_excursion(params.n_paths, params.wall, trunc, precision)
    raise DomainError(f"unknown route {route!r}; expected one of {', '.join(ROUTES)}")
