"""Numeric CDF/PDF of the largest root, and the determinantal closed forms.

Routes
------
quadrature : the determinantal CDF formula with H-integral entries (entries
             by term-wise gamma series or by adaptive quadrature), and its
             x-derivative cofactor expansion for the density.
series     : evaluation of the exact truncated lam-series (fast and robust
             for small noncentrality; symmetric, so confluent lam's are
             free).
conjecture : the determinantal closed form built from hpg01 and the
             G-functions (levels 2..4), with the explicit front factor.
hgm        : Pfaffian ODE integration (in wishart_roots.hgm; dispatched
             from here).

Repeated noncentrality eigenvalues are handled by replacing the rows (or
columns) of a confluent group with derivative rows f, f'/1!, f''/2!, ...,
with the cross-group Vandermonde only in the denominator and the sign
(-1)^{r(r-1)/2} per size-r group from reordering the limit rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

from .h_integrals import HIndex, h_eval
from .series_engine import LambdaSeries, build_psi_series, cdf_det_expansion, schur_poly
from .special_fn import hpg01, pochhammer


class NumericFailure(ArithmeticError):
    """A numeric route could not produce a trustworthy value."""


@dataclass(frozen=True)
class WishartParams:
    """Degrees of freedom n, dimension m, noncentrality eigenvalues."""

    n: int
    m: int
    lambdas: Tuple[float, ...]

    def __init__(self, n: int, m: int, lambdas: Sequence[float]):
        if not (isinstance(n, int) and isinstance(m, int) and n >= m >= 1):
            raise ValueError("requires integers n >= m >= 1")
        lambdas = tuple(float(v) for v in lambdas)
        if len(lambdas) != m:
            raise ValueError("need exactly m noncentrality eigenvalues")
        if any(v < 0 for v in lambdas):
            raise ValueError("noncentrality eigenvalues must be >= 0")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "lambdas", tuple(sorted(lambdas, reverse=True)))


@dataclass
class EvalConfig:
    method: str = "quadrature"
    confluence_threshold: float = 1e-5
    series_order: int = 20
    rtol: float = 1e-10
    h_entry_method: str = "series"  # "series" or "quad" for determinant entries
    hgm_x0: float = 0.5
    hgm_rtol: float = 1e-10
    hgm_atol: float = 1e-13
    experimental_m4: bool = False

    def __post_init__(self):
        if self.confluence_threshold <= 0:
            raise ValueError("confluence_threshold must be positive")


def _group_confluent(lambdas: Sequence[float], threshold: float) -> List[Tuple[float, int]]:
    """Cluster the (descending) eigenvalues into confluent groups of
    (representative value, multiplicity)."""
    scale = 1.0 + max(lambdas, default=0.0)
    groups: List[List[float]] = []
    for v in lambdas:
        if groups and abs(groups[-1][-1] - v) < threshold * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(sum(g) / len(g), len(g)) for g in groups]


def _xk_emx(x: float, k: int) -> float:
    """x^k e^{-x}, overflow-safe for large x."""
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(x) - x)


def _det(mat: List[List[float]]) -> float:
    """LU determinant with partial pivoting (matrices here are tiny)."""
    n = len(mat)
    a = [row[:] for row in mat]
    det = 1.0
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(a[r][c]))
        if a[piv][c] == 0.0:
            return 0.0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for cc in range(c, n):
                a[r][cc] -= f * a[c][cc]
    return det


# ---------------------------------------------------------------------------
# quadrature route (the determinantal formula itself)
# ---------------------------------------------------------------------------

def _h_entry(k: int, N: int, d: int, x: float, y: float, method: str) -> float:
    """d-th y-derivative of H^k_N(x, y) divided by d!:
    H^{k+d}_{N+d}(x, y) / ((N)_d d!)."""
    val = h_eval(HIndex(k + d, 0, N + d), x, y, method=method)
    return val / (pochhammer(N, d) * math.factorial(d))


def _h_entry_dx(k: int, N: int, d: int, x: float, y: float) -> float:
    """x-derivative of the same entry: x^{k+d} e^{-x} hpg01(N+d; x y) / ((N)_d d!)."""
    return _xk_emx(x, k + d) * hpg01(N + d, x * y) / (pochhammer(N, d) * math.factorial(d))


def _front_factor(params: WishartParams, groups: List[Tuple[float, int]]) -> float:
    n, m = params.n, params.m
    lam_sum = sum(params.lambdas)
    vdm = 1.0
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            vdm *= (groups[a][0] - groups[b][0]) ** (groups[a][1] * groups[b][1])
    sign = 1.0
    for _, r in groups:
        if (r * (r - 1) // 2) % 2 == 1:
            sign = -sign
    denom = math.factorial(n - m) ** m * vdm
    return sign * math.exp(-lam_sum) / denom


def cdf_quadrature(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    n, m = params.n, params.m
    N = n - m + 1
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 0.0
    groups = _group_confluent(params.lambdas, cfg.confluence_threshold)
    rows = []
    for v, r in groups:
        for d in range(r):
            rows.append([_h_entry(n - j, N, d, x, v, cfg.h_entry_method) for j in range(1, m + 1)])
    val = _front_factor(params, groups) * _det(rows)
    return min(max(val, 0.0), 1.0)


def pdf_quadrature(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    n, m = params.n, params.m
    N = n - m + 1
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 0.0 if not (n == m == 1) else math.exp(-sum(params.lambdas))
    groups = _group_confluent(params.lambdas, cfg.confluence_threshold)
    rows = []
    rows_dx = []
    for v, r in groups:
        for d in range(r):
            rows.append([_h_entry(n - j, N, d, x, v, cfg.h_entry_method) for j in range(1, m + 1)])
            rows_dx.append([_h_entry_dx(n - j, N, d, x, v) for j in range(1, m + 1)])
    total = 0.0
    for rho in range(len(rows)):
        mat = [rows_dx[i] if i == rho else rows[i] for i in range(len(rows))]
        total += _det(mat)
    return _front_factor(params, groups) * total


# ---------------------------------------------------------------------------
# series route
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _psi_series_cached(n: int, m: int, order: int) -> LambdaSeries:
    return build_psi_series(n, m, order)


@lru_cache(maxsize=32)
def _cdf_sym_series_cached(n: int, m: int, order: int) -> LambdaSeries:
    """CDF determinant / Vandermonde as a symmetric series (no front factor)."""
    expansion = cdf_det_expansion(n, m, order + m)
    fact = Fraction((-1) ** (m * (m - 1) // 2), math.factorial(n - m) ** m)
    res = LambdaSeries(m, order, {})
    out = {}
    for q, c in expansion.items:
        sp = schur_poly(q, m)
        cc = c.scale(fact)
        for e, s in sp.items():
            if any(p > order for p in e):
                continue
            res._store(out, e, cc.scale(s))
    res.coeffs = out
    return res


def cdf_series(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 0.0
    s = _cdf_sym_series_cached(params.n, params.m, cfg.series_order)
    val = s.eval(x, list(params.lambdas)) * math.exp(-sum(params.lambdas))
    return min(max(val, 0.0), 1.0)


def pdf_series(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        x = 0.0
    s = _psi_series_cached(params.n, params.m, cfg.series_order)
    return s.eval(x, list(params.lambdas)) * math.exp(-sum(params.lambdas))


# ---------------------------------------------------------------------------
# jets in y (value plus derivatives), for the G / Y closed forms
# ---------------------------------------------------------------------------

class Jet:
    """Truncated derivative sequence [f, f', ..., f^{(K)}] at a point."""

    __slots__ = ("d",)

    def __init__(self, d: Sequence[float]):
        self.d = list(d)

    @property
    def order(self) -> int:
        return len(self.d) - 1

    def __add__(self, o: "Jet") -> "Jet":
        k = min(len(self.d), len(o.d))
        return Jet([self.d[i] + o.d[i] for i in range(k)])

    def __sub__(self, o: "Jet") -> "Jet":
        k = min(len(self.d), len(o.d))
        return Jet([self.d[i] - o.d[i] for i in range(k)])

    def __mul__(self, o):
        if isinstance(o, (int, float)):
            return Jet([c * o for c in self.d])
        k = min(len(self.d), len(o.d))
        out = []
        for r in range(k):
            out.append(sum(math.comb(r, i) * self.d[i] * o.d[r - i] for i in range(r + 1)))
        return Jet(out)

    __rmul__ = __mul__

    def deriv(self, times: int = 1) -> "Jet":
        return Jet(self.d[times:])

    def value(self) -> float:
        return self.d[0]


def jet_const(c: float, K: int) -> Jet:
    return Jet([c] + [0.0] * K)


def jet_y(y: float, K: int) -> Jet:
    d = [y] + [0.0] * K
    if K >= 1:
        d[1] = 1.0
    return Jet(d)


def jet_0f1(nu: float, x: float, y: float, K: int) -> Jet:
    """hpg01(nu; x y) as a jet in y: d-th derivative x^d hpg01(nu+d; xy)/(nu)_d."""
    return Jet([x ** d * hpg01(nu + d, x * y) / pochhammer(nu, d) for d in range(K + 1)])


def tail_weighted(n: int, x: float, y: float) -> float:
    """W(x, y) = e^y * int_y^inf e^{-t} hpg01(n+1; x t) dt, by the positive
    double series sum_k x^k e_k(y) / ((n+1)_k) with e_k(y) = sum_{i<=k} y^i/i!.
    No cancellation anywhere."""
    if x < 0 or y < 0:
        raise ValueError("tail_weighted requires x >= 0, y >= 0")
    ek = 1.0
    yterm = 1.0
    coef = 1.0
    total = ek
    ey = math.exp(y)
    for k in range(1, 100000):
        yterm *= y / k
        ek += yterm
        coef *= x / (n + k)
        term = coef * ek
        total += term
        if coef * ey < 1e-17 * total and k > x:
            return total
    raise ArithmeticError("tail_weighted did not converge")


def jet_tail_weighted(n: int, x: float, y: float, K: int) -> Jet:
    """Jet of W: W' = W - hpg01(n+1; x y)."""
    b = jet_0f1(n + 1, x, y, K)
    d = [tail_weighted(n, x, y)]
    for i in range(K):
        d.append(d[-1] - b.d[i])
    return Jet(d)


def jet_h0_weighted(N: int, x: float, y: float, K: int) -> Jet:
    """Jet of V = e^y H^0_{N+1}(y, x) (note the swapped arguments):
    V' = V + hpg01(N+1; x y)."""
    b = jet_0f1(N + 1, x, y, K)
    d = [math.exp(y) * h_eval(HIndex(0, 0, N + 1), y, x)]
    for i in range(K):
        d.append(d[-1] + b.d[i])
    return Jet(d)


def eq35_value(n: int, x: float) -> float:
    """int_0^inf e^{-t} hpg01(n+1; x t) dt = n x^{-n} e^x gamma(n, x)."""
    from .special_fn import incomplete_gamma

    return n * math.exp(x - n * math.log(x)) * incomplete_gamma(n, x)


def _l_polys(N: int, x: float, y: Jet) -> Tuple[Jet, Jet, Jet]:
    K = y.order
    one = jet_const(1.0, K)
    L2 = y + jet_const(N - 1 - x, K)
    L3 = L2 * L2 + jet_const(2 * x - N + 1, K)
    L4 = L2 * L2 * L2 + (2 * x - N + 1) * 3.0 * (L2 - one) + jet_const(-N + 1.0, K)
    return L2, L3, L4


def _closed_form_jet(N: int, M: int, x: float, y: float, K: int, tail: Jet) -> Jet:
    """Common combination of the level-M closed form over the atoms
    A = hpg01(N; xy), B = hpg01(N+1; xy) and a tail jet (V or -W)."""
    A = jet_0f1(N, x, y, K)
    B = jet_0f1(N + 1, x, y, K)
    yj = jet_y(y, K)
    L2, L3, L4 = _l_polys(N, x, yj)
    one = jet_const(1.0, K)
    if M == 2:
        return N * A + yj * B + L2 * tail
    if M == 3:
        return N * (L2 - 2.0 * one) * A + yj * (L2 - one) * B + L3 * tail
    if M == 4:
        pa = (L2 - 2.0 * one) * (L2 - 2.0 * one) + 2.0 * yj + jet_const(2 * x + 2.0, K)
        pb = (L2 - one) * (L2 - one) + yj + jet_const(3 * x - N + 2.0, K)
        return N * pa * A + yj * pb * B + L4 * tail
    raise ValueError("closed forms exist for levels 2, 3, 4")


def y_solution_jet(N: int, M: int, x: float, y: float, K: int = 0) -> Jet:
    """Y_{N,M}(x, y), a solution of Q_{N,N-M}[y] Y = 0, with derivatives."""
    if M not in (2, 3, 4):
        raise ValueError("y_solution supports M in {2, 3, 4}")
    if N < 1:
        raise ValueError("N must be a positive integer")
    V = jet_h0_weighted(N, x, y, K)
    return _closed_form_jet(N, M, x, y, K, V)


def y_solution(N: int, M: int, x: float, y: float) -> float:
    return y_solution_jet(N, M, x, y, 0).value()


def g_jet(n: int, m_level: int, x: float, y: float, K: int = 0) -> Jet:
    """G_{n, m_level}(x, y) with derivatives.

    Level 2 is the defining tail-integral form; higher levels follow the
    raising recursion  G_{n,m+1} = (-y d2 - (n-m+1) d + x + m) G_{n,m}.
    In closed form this is (-1)^{m_level} times the Y_{n,M} combination
    with the V-atom (e^y int_0^y) replaced by -W (e^y int_y^inf), so level
    3 carries a global minus sign relative to the level-3 coefficient
    tables quoted elsewhere; this is the convention under which the
    determinantal density formula holds for every m (see tests).
    """
    if m_level not in (2, 3, 4):
        raise ValueError("g_function supports levels 2, 3, 4")
    if n < m_level:
        raise ValueError("requires n >= m_level")
    if x < 0 or y < 0:
        raise ValueError("requires x >= 0 and y >= 0")
    W = jet_tail_weighted(n, x, y, K)
    jet = _closed_form_jet(n, m_level, x, y, K, jet_const(-1.0, K) * W)
    if m_level % 2 == 1:
        jet = jet * -1.0
    return jet


def g_function(n: int, m_level: int, x: float, y: float) -> float:
    return g_jet(n, m_level, x, y, 0).value()


def q_apply_jet(N: int, M: int, x: float, f: Jet) -> float:
    """Q_{N,M}[y] f at the jet's base point: y f''' + (M-y+2) f'' - (x+N+1) f' + x f.

    The jet must carry y at slot y-value via its own base; pass the y used
    to build the jet explicitly instead."""
    raise NotImplementedError("use q_residual")


def q_residual(N: int, M: int, x: float, y: float, f: Jet) -> float:
    """Residual of Q_{N,M}[y] applied to a jet built at (x, y); needs order >= 3."""
    if f.order < 3:
        raise ValueError("jet order >= 3 required")
    return y * f.d[3] + (M - y + 2) * f.d[2] - (x + N + 1) * f.d[1] + x * f.d[0]


def p_residual(M: int, x: float, y: float, f: Jet) -> float:
    """Residual of P_M[y] applied to a jet built at (x, y); needs order >= 2."""
    if f.order < 2:
        raise ValueError("jet order >= 2 required")
    return y * f.d[2] + (M + 1) * f.d[1] - x * f.d[0]


# ---------------------------------------------------------------------------
# conjecture route
# ---------------------------------------------------------------------------

def conjecture_front_factor(n: int, m: int, x: float) -> float:
    """C(x) = (n-m+1) x^{mn - m(m-1)/2 - 1} e^{-mx} / prod_k (n-k+1)^k."""
    denom = 1.0
    for k in range(1, m + 1):
        denom *= float(n - k + 1) ** k
    power = m * n - m * (m - 1) // 2 - 1
    return (n - m + 1) * math.exp(power * math.log(x) - m * x) / denom


def conjecture_R(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    """R_{n,m} via the conjectured determinant of hpg01 / G-function columns."""
    n, m = params.n, params.m
    if m > 4:
        raise ValueError("conjecture route implemented for m <= 4")
    if m == 4 and not cfg.experimental_m4:
        raise ValueError("m = 4 conjecture route is experimental; enable it explicitly")
    groups = _group_confluent(params.lambdas, cfg.confluence_threshold)
    cols = []
    for v, r in groups:
        jets = [jet_0f1(n - m + 1, x, v, r - 1)]
        for j in range(2, m + 1):
            jets.append(g_jet(n - m + j, j, x, v, r - 1))
        for d in range(r):
            cols.append([jets[row].d[d] / math.factorial(d) for row in range(m)])
    # cols currently lists columns; transpose into rows for the determinant
    mat = [[cols[c][r] for c in range(m)] for r in range(m)]
    sign = 1.0
    for _, r in groups:
        if (r * (r - 1) // 2) % 2 == 1:
            sign = -sign
    return conjecture_front_factor(n, m, x) * sign * _det(mat)


def pdf_conjecture(params: WishartParams, x: float, cfg: EvalConfig) -> float:
    n, m = params.n, params.m
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return pdf_quadrature(params, x, cfg)
    groups = _group_confluent(params.lambdas, cfg.confluence_threshold)
    lam_sum = sum(params.lambdas)
    vdm = 1.0
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            vdm *= (groups[a][0] - groups[b][0]) ** (groups[a][1] * groups[b][1])
    denom = math.factorial(n - m) ** m * vdm
    return math.exp(-lam_sum) / denom * conjecture_R(params, x, cfg)


def pdf_m2_closed(params: WishartParams, x: float) -> float:
    """The proved m = 2 closed form:

    psi_{n,2} = x^{2n-2} e^{-lam1-lam2-2x} / (n! (n-2)! (lam1-lam2))
                * det( hpg01(n-1; x lam_i) ; G_{n,2}(x, lam_i) ).
    """
    if params.m != 2:
        raise ValueError("m = 2 only")
    n = params.n
    cfg = EvalConfig()
    l1, l2 = params.lambdas
    groups = _group_confluent(params.lambdas, cfg.confluence_threshold)
    front = math.exp((2 * n - 2) * math.log(x) - l1 - l2 - 2 * x) / (
        math.factorial(n) * math.factorial(n - 2)
    )
    if len(groups) == 2:
        mat = [
            [hpg01(n - 1, x * l1), hpg01(n - 1, x * l2)],
            [g_function(n, 2, x, l1), g_function(n, 2, x, l2)],
        ]
        return front / (l1 - l2) * _det(mat)
    v = groups[0][0]
    top = jet_0f1(n - 1, x, v, 1)
    bot = g_jet(n, 2, x, v, 1)
    mat = [[top.d[0], top.d[1]], [bot.d[0], bot.d[1]]]
    return -front * _det(mat)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def cdf(params: WishartParams, x: float, cfg: EvalConfig | None = None) -> float:
    cfg = cfg or EvalConfig()
    if cfg.method in ("quadrature", "auto"):
        return cdf_quadrature(params, x, cfg)
    if cfg.method == "series":
        return cdf_series(params, x, cfg)
    if cfg.method == "hgm":
        from . import hgm

        return hgm.cdf_hgm(params, x, cfg)
    if cfg.method == "conjecture":
        raise ValueError("the conjectured closed form gives the density, not the CDF")
    raise ValueError(f"unknown method {cfg.method!r}")


def pdf(params: WishartParams, x: float, cfg: EvalConfig | None = None) -> float:
    cfg = cfg or EvalConfig()
    if cfg.method in ("quadrature", "auto"):
        return pdf_quadrature(params, x, cfg)
    if cfg.method == "series":
        return pdf_series(params, x, cfg)
    if cfg.method == "conjecture":
        return pdf_conjecture(params, x, cfg)
    if cfg.method == "hgm":
        from . import hgm

        return hgm.pdf_hgm(params, x, cfg)
    raise ValueError(f"unknown method {cfg.method!r}")
