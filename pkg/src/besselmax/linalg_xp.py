"""Extended-precision dense linear algebra.

Determinants are returned as ``(sign, log|det|)`` so that products of huge
prefactors and tiny determinants never pass through an overflowing
intermediate.  All arithmetic is carried out with :mod:`mpmath` binary
floating point at ``PrecisionConfig.working_bits``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import mp, mpf

from .errors import DomainError

_MAX_BITS = 4096


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision of every determinant route.

    ``max_condition_warn`` bounds the componentwise determinant condition
    number accepted before a route recomputes at twice the precision; when
    left as ``None`` it defaults to ``2**(working_bits / 2)``, i.e. at least
    half the working digits survive.
    """

    working_bits: int = 106
    max_condition_warn: float | None = None
    auto_retry: bool = True

    def __post_init__(self):
        bits = self.working_bits
        if not isinstance(bits, (int, np.integer)) or isinstance(bits, bool):
            raise DomainError(f"working_bits must be an integer, got {bits!r}")
        if bits not in (53, 106) and not 200 <= bits <= _MAX_BITS:
            raise DomainError(
                f"working_bits must be 53, 106 or in [200, {_MAX_BITS}], got {bits}")
        if self.max_condition_warn is not None and not self.max_condition_warn > 1:
            raise DomainError("max_condition_warn must exceed 1")

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** -self.working_bits

    @property
    def condition_limit(self) -> float:
        if self.max_condition_warn is not None:
            return self.max_condition_warn
        return 2.0 ** (self.working_bits / 2)

    def doubled(self) -> "PrecisionConfig":
        bits = min(2 * self.working_bits, _MAX_BITS)
        if bits < 200:
            bits = 106 if self.working_bits == 53 else 200
        return PrecisionConfig(bits, self.max_condition_warn, self.auto_retry)


DEFAULT_PRECISION = PrecisionConfig()


def resolve_bits(precision: PrecisionConfig | int | None) -> int:
    """Bits for ``precision``; bare integers skip the public validation."""
    if precision is None:
        return DEFAULT_PRECISION.working_bits
    if isinstance(precision, PrecisionConfig):
        return precision.working_bits
    return int(precision)


class XMatrix:
    """Immutable dense matrix of mpmath reals rounded to the working precision."""

    __slots__ = ("rows", "cols", "entries", "bits")

    def __init__(self, entries, precision: PrecisionConfig | int | None = None):
        bits = resolve_bits(precision)
        with mp.workprec(bits):
            rows = tuple(tuple(mpf(v) for v in row) for row in entries)
        if not rows:
            raise DomainError("empty matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DomainError("ragged matrix rows")
        for r in rows:
            for v in r:
                if not mp.isfinite(v):
                    raise DomainError("non-finite matrix entry")
        self.rows = len(rows)
        self.cols = ncols
        self.entries = rows
        self.bits = bits

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __repr__(self):
        return f"XMatrix({self.rows}x{self.cols}, bits={self.bits})"

    def tolist(self) -> list[list[mpf]]:
        return [list(r) for r in self.entries]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


@dataclass(frozen=True)
class LUFactor:
    """Equilibrated LU factorization ``P·(R A C) = L·U`` with power-of-two R, C."""

    lu: tuple
    perm: tuple
    row_exp: tuple
    col_exp: tuple
    sign: int
    log_abs: mpf
    pivot_growth: float
    bits: int

    @property
    def n(self) -> int:
        return len(self.perm)

    def solve_scaled(self, b: list) -> list:
        n = self.n
        lu = self.lu
        y = [b[self.perm[i]] for i in range(n)]
        for i in range(n):
            for k in range(i):
                y[i] -= lu[i][k] * y[k]
        for i in reversed(range(n)):
            for k in range(i + 1, n):
                y[i] -= lu[i][k] * y[k]
            y[i] /= lu[i][i]
        return y

    def inverse(self) -> list[list[mpf]]:
        """Inverse of the original (unscaled) matrix."""
        n = self.n
        if self.sign == 0:
            raise ZeroDivisionError("singular matrix")
        with mp.workprec(self.bits):
            cols = []
            for j in range(n):
                e = [mpf(0)] * n
                e[j] = mpf(1)
                cols.append(self.solve_scaled(e))
            # A^{-1} = C · B^{-1} · R
            return [[mp.ldexp(cols[j][i], self.col_exp[i] + self.row_exp[j])
                     for j in range(n)] for i in range(n)]


def _as_rows(m, bits):
    if isinstance(m, XMatrix):
        return [list(r) for r in m.entries]
    with mp.workprec(bits):
        return [[mpf(v) for v in row] for row in m]


def lu_factor(m, precision: PrecisionConfig | int | None = None) -> LUFactor:
    """Row/column equilibrated LU with partial pivoting at the working precision."""
    bits = resolve_bits(precision)
    a = _as_rows(m, bits)
    n = len(a)
    if any(len(r) != n for r in a):
        raise DomainError("determinant requires a square matrix")
    with mp.workprec(bits):
        row_exp = []
        for r in a:
            big = max((abs(v) for v in r), default=mpf(0))
            e = 0 if big == 0 else -mp.frexp(big)[1]
            row_exp.append(e)
        b = [[mp.ldexp(v, e) for v in r] for r, e in zip(a, row_exp)]
        col_exp = []
        for j in range(n):
            big = max(abs(b[i][j]) for i in range(n))
            col_exp.append(0 if big == 0 else -mp.frexp(big)[1])
        b = [[mp.ldexp(v, col_exp[j]) for j, v in enumerate(r)] for r in b]
        a_max = max((abs(v) for r in b for v in r), default=mpf(0))
        perm = list(range(n))
        sign = 1
        u_max = a_max
        for k in range(n):
            p = max(range(k, n), key=lambda i: abs(b[i][k]))
            if b[p][k] == 0:
                return LUFactor(tuple(tuple(r) for r in b), tuple(perm), tuple(row_exp),
                                tuple(col_exp), 0, mpf("-inf"), float("inf"), bits)
            if p != k:
                b[k], b[p] = b[p], b[k]
                perm[k], perm[p] = perm[p], perm[k]
                sign = -sign
            piv = b[k][k]
            for i in range(k + 1, n):
                f = b[i][k] / piv
                b[i][k] = f
                if f:
                    rk = b[k]
                    ri = b[i]
                    for j in range(k + 1, n):
                        ri[j] -= f * rk[j]
            u_max = max(u_max, max(abs(v) for v in b[k][k:]))
        log_abs = mpf(0)
        for k in range(n):
            if b[k][k] < 0:
                sign = -sign
            log_abs += mp.log(abs(b[k][k]))
        log_abs -= (sum(row_exp) + sum(col_exp)) * mp.ln2
        growth = float(u_max / a_max) if a_max else float("inf")
    return LUFactor(tuple(tuple(r) for r in b), tuple(perm), tuple(row_exp),
                    tuple(col_exp), sign, log_abs, growth, bits)


def det_signed_log(m, precision: PrecisionConfig | int | None = None) -> tuple[int, mpf]:
    """Return ``(sign, log|det m|)``; a singular matrix gives ``(0, -inf)``."""
    f = lu_factor(m, precision)
    return f.sign, f.log_abs


def det_value(m, precision: PrecisionConfig | int | None = None) -> mpf:
    bits = resolve_bits(precision)
    s, la = det_signed_log(m, bits)
    if s == 0:
        return mpf(0)
    with mp.workprec(bits):
        return s * mp.exp(la)


@dataclass(frozen=True)
class DetSensitivity:
    """First-order relative error budget of a determinant.

    ``condition`` is sum |A_ij (A^-1)_ji|, the relative change of det A
    under a uniform unit relative perturbation of every entry.
    """

    condition: float
    relative_error: float
    pivot_growth: float


def det_sensitivity(m, factor: LUFactor, entry_errors=None) -> DetSensitivity:
    """Relative error of ``det m`` given absolute entry errors.

    Uses d log det = sum_ij (A^-1)_ji dA_ij plus an LU backward-error term
    proportional to pivot growth.
    """
    a = _as_rows(m, factor.bits)
    n = len(a)
    if factor.sign == 0:
        return DetSensitivity(math.inf, math.inf, math.inf)
    inv = factor.inverse()
    u = 2.0 ** -factor.bits
    with mp.workprec(53):
        cond = mpf(0)
        rel = mpf(0)
        lu_err = 2 * n * u * factor.pivot_growth
        for i in range(n):
            for j in range(n):
                w = abs(inv[j][i])
                cond += abs(a[i][j]) * w
                # backward error is entrywise small in the equilibrated frame
                err = lu_err * mp.ldexp(1, -(factor.row_exp[i] + factor.col_exp[j]))
                if entry_errors is not None:
                    err += abs(entry_errors[i][j])
                rel += w * err
    return DetSensitivity(float(cond), float(rel), factor.pivot_growth)


def vandermonde(x: Sequence) -> float:
    """Vandermonde product prod_{j<k} (x_k - x_j); the empty product is 1."""
    out = 1
    for j, k in itertools.combinations(range(len(x)), 2):
        out = out * (x[k] - x[j])
    return out


def _leibniz_det(m) -> Fraction:
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i, j in itertools.combinations(range(n), 2) if perm[i] > perm[j])
        prod = Fraction(1)
        for i in range(n):
            prod *= m[i][perm[i]]
        total += -prod if inv % 2 else prod
    return total


def det_sum_identity_check(f_table, g_table, N: int, K: int, h=None,
                           exact: bool = False) -> tuple[float, float]:
    """Exhaustively evaluate both sides of the determinant-sum identity.

    ``f_table[n][i]`` holds f(x_i, n) and ``g_table[n][j]`` holds g(y_j, n)
    for n in range(K).  Returns

        lhs = sum_{n in K^N} prod h(n_i) det[f(x_i, n_j) g(y_j, n_j)]
        rhs = 1/N! sum_{n in K^N} prod h(n_i) det[f(x_i, n_j)] det[g(y_i, n_j)]

    With ``exact=True`` inputs are converted to rationals and both sides are
    summed exactly via the Leibniz expansion (small N, K only).
    """
    f = np.asarray(f_table, dtype=float)
    g = np.asarray(g_table, dtype=float)
    if f.shape != (K, N) or g.shape != (K, N):
        raise DomainError(f"tables must have shape ({K}, {N})")
    hv = np.ones(K) if h is None else np.asarray(h, dtype=float)
    if hv.shape != (K,):
        raise DomainError(f"weight vector must have length {K}")
    if exact:
        fq = [[Fraction(v) for v in row] for row in f.tolist()]
        gq = [[Fraction(v) for v in row] for row in g.tolist()]
        hq = [Fraction(v) for v in hv.tolist()]
        lhs = Fraction(0)
        rhs = Fraction(0)
        for ns in itertools.product(range(K), repeat=N):
            w = Fraction(1)
            for n in ns:
                w *= hq[n]
            mf = [[fq[ns[j]][i] for j in range(N)] for i in range(N)]
            mg = [[gq[ns[j]][i] for j in range(N)] for i in range(N)]
            mfg = [[fq[ns[j]][i] * gq[ns[j]][j] for j in range(N)] for i in range(N)]
            lhs += w * _leibniz_det(mfg)
            rhs += w * _leibniz_det(mf) * _leibniz_det(mg)
        return float(lhs), float(rhs / math.factorial(N))
    idx = np.array(list(itertools.product(range(K), repeat=N)), dtype=int)
    weights = np.prod(hv[idx], axis=1)
    # f[idx][t, j, i] = f(x_i, n_j); transpose to [t, i, j]
    mf = f[idx].transpose(0, 2, 1)
    mg = g[idx].transpose(0, 2, 1)
    gdiag = np.einsum("tjj->tj", g[idx])
    lhs_terms = weights * np.linalg.det(mf * gdiag[:, None, :])
    rhs_terms = weights * np.linalg.det(mf) * np.linalg.det(mg)
    return math.fsum(lhs_terms), math.fsum(rhs_terms) / math.factorial(N)
