"""Numerical checks of the closed forms and asymptotic orders.

Every routine returns plain rows (lists of dicts) or small dataclasses so the
results can be written to CSV/JSON and compared against hard-coded expected
orders in the tests.
"""
from __future__ import annotations

import csv
import functools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, interpolate

from .energy import ProblemParams, fibering_max, nehari_scale
from .grid import RadialGrid, build_grid
from .space import (RadialFunction, _bubble_funcs, bubble, cutoff, cutoff_bubble,
                    cutoff_derivative, d12_seminorm_sq, from_callable, gaussian_seq,
                    l2_norm_sq, weighted_lp)
from .special import (DomainError, best_constant, bubble_coefficient, bubble_energy,
                      crit_exponents, interpolation_constant, ps_threshold_single,
                      radial_bound_constant, sphere_area, upper_exponent)

DEFAULT_EPS = tuple(0.2 * 2.0 ** -j for j in range(7))


# ---------------------------------------------------------------- fits

@dataclass
class FitReport:
    """Log-log regression of a measured quantity against ``eps``."""

    quantity: str
    eps_values: List[float]
    measured: List[float]
    fitted_slope: float
    expected_slope: float
    slope_error: float
    r_squared: float
    log_corrected: bool = False
    sign: int = 1
    # r^2 of the model that was not selected
    alternative_r_squared: Optional[float] = None

    def __post_init__(self):
        e = np.asarray(self.eps_values)
        if e.size < 3 or np.any(np.diff(e) >= 0):
            raise ValueError("eps_values must be strictly decreasing with at least 3 points")

    def to_dict(self) -> dict:
        return asdict(self)


def _linfit(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return float(slope), min(max(r2, 0.0), 1.0)


def fit_slope(quantity: str, eps, values, expected: float, log_case: bool = False) -> FitReport:
    """Fit ``|y| = a eps^s`` and, when ``log_case``, also ``|y| = a eps^s |ln eps|``.

    In the logarithmic case the corrected model is used if its r^2 is higher.
    """
    eps = np.asarray(eps, dtype=float)
    y = np.asarray(values, dtype=float)
    if eps.size < 3:
        raise ValueError("need at least 3 eps values")
    sign = int(np.sign(np.median(y))) or 1
    ly = np.log(np.abs(y))
    lx = np.log(eps)
    s_pow, r_pow = _linfit(lx, ly)
    chosen, r_alt, corrected = (s_pow, r_pow), None, False
    if log_case:
        s_log, r_log = _linfit(lx, ly - np.log(np.abs(lx)))
        if r_log > r_pow:
            chosen, r_alt, corrected = (s_log, r_log), r_pow, True
        else:
            r_alt = r_log
    return FitReport(quantity=quantity, eps_values=[float(e) for e in eps],
                     measured=[float(v) for v in y], fitted_slope=chosen[0],
                     expected_slope=float(expected), slope_error=abs(chosen[0] - expected),
                     r_squared=chosen[1], log_corrected=corrected, sign=sign,
                     alternative_r_squared=r_alt)


# ---------------------------------------------------------------- Gaussian sequence

def _gaussian_closed_forms(N, gamma, k, q):
    om = sphere_area(N)
    qs = upper_exponent(N, gamma)
    return {
        "grad_sq": qs ** ((N - 2) / 2) * om * math.gamma((N + 2) / 2) / 2,
        "l2_sq": om / 2 * math.gamma(N / 2) * qs ** (N / 2) / k,
        "crit_moment": 2 ** ((N + gamma - 2) / 2) * om * math.gamma((N + gamma) / 2),
        "q_moment": (k ** (q * (N - 2) / 4 - (N + gamma) / 2) * om / 2
                     * (2 * qs / q) ** ((N + gamma) / 2) * math.gamma((N + gamma) / 2)),
    }


def _gaussian_rmax(N, gamma, k, tail=1e-12):
    # exp(-k r^2 / 2*) times a power stays below tail * peak well before this radius
    qs = upper_exponent(N, gamma)
    L = -math.log(tail) + 4 * (N + abs(gamma)) + 20
    return math.sqrt(qs * L / k)


def noncompactness_report(N: int, gamma: float, k_list: Sequence[int], q: Optional[float] = None,
                          n_cells: int = 400, cell_rule: int = 10) -> dict:
    """Quadrature of the concentrating Gaussian sequence against its closed forms.

    ``q`` defaults to ``2*(gamma) + 1``.  ``gamma = -2`` is allowed; the
    weight ``r^{N-3}`` is still integrable for ``N >= 3``.
    """
    crit_exponents(N, gamma)
    k_list = [int(k) for k in k_list]
    if any(k < 1 for k in k_list):
        raise DomainError(f"every k must be >= 1, got {k_list!r}")
    qs = upper_exponent(N, gamma)
    q = qs + 1.0 if q is None else float(q)
    if not q > qs:
        raise DomainError(f"q must exceed 2*(gamma) = {qs:g}, got {q!r}")
    rows = []
    for k in k_list:
        grid = build_grid(_gaussian_rmax(N, gamma, k), n_cells, cell_rule=cell_rule)
        u = gaussian_seq(grid, N, gamma, k)
        wg = grid.radial_weight(N, gamma)
        meas = {
            "grad_sq": d12_seminorm_sq(u, N),
            "l2_sq": l2_norm_sq(u, N),
            "crit_moment": float(wg @ np.abs(u.values) ** qs),
            "q_moment": float(wg @ np.abs(u.values) ** q),
        }
        exact = _gaussian_closed_forms(N, gamma, k, q)
        row = {"k": k, "r_max": grid.r_max}
        for key in meas:
            row[key] = meas[key]
            row[key + "_exact"] = exact[key]
            row[key + "_relerr"] = abs(meas[key] / exact[key] - 1)
        rows.append(row)
    ks = np.array(k_list, dtype=float)
    out = {"N": N, "gamma": gamma, "q": q, "rows": rows,
           "q_slope_expected": q * (N - 2) / 4 - (N + gamma) / 2}
    if len(k_list) >= 2:
        out["q_slope_fitted"], _ = _linfit(np.log(ks), np.log([r["q_moment"] for r in rows]))
        out["q_slope_error"] = abs(out["q_slope_fitted"] - out["q_slope_expected"])
        g = np.array([r["grad_sq"] for r in rows])
        out["grad_sq_spread"] = float((g.max() - g.min()) / g.mean())
    out["max_relerr"] = max(r[k] for r in rows for k in r if k.endswith("_relerr"))
    return out


# ---------------------------------------------------------------- bubble integrals

def _gauss_panel(a, b, n_cells, rule=10, geometric=False):
    x, w = np.polynomial.legendre.leggauss(rule)
    if geometric:
        nodes = np.geomspace(a, b, n_cells + 1)
    else:
        nodes = np.linspace(a, b, n_cells + 1)
    h = np.diff(nodes)
    pts = (nodes[:-1, None] + 0.5 * h[:, None] * (x + 1)).ravel()
    wts = (0.5 * h[:, None] * w).ravel()
    return pts, wts


def _radial_quad(N, gamma, f, a, b, n_cells=400, rule=10, geometric=False):
    """``omega_N int_a^b r^{N-1+gamma} f(r) dr`` on Gauss panels."""
    r, w = _gauss_panel(a, b, n_cells, rule, geometric)
    return sphere_area(N) * float(w @ (r ** (N - 1 + gamma) * f(r)))


def _radial_tail(N, gamma, f, a):
    """``omega_N int_a^inf r^{N-1+gamma} f(r) dr`` via the substitution ``r = a/s``."""
    def g(s):
        r = a / s
        return r ** (N - 1 + gamma) * f(r) * a / s ** 2
    # integrand is a smooth power series in s for the bubble tails used here
    val, _ = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return sphere_area(N) * val


def _concentrated_grid(eps: float, R: float, n_cells: int = 480, rule: int = 10) -> RadialGrid:
    """Mesh geometric from ``1e-6 eps`` to ``R`` and uniform on ``[R, 2R]``."""
    inner = np.geomspace(1e-6 * eps, R, n_cells // 2 + 1)
    outer = np.linspace(R, 2 * R, n_cells // 4 + 1)[1:]
    nodes = np.concatenate([[0.0], inner, outer])
    return RadialGrid(nodes, cell_rule=rule, grading=0.0)


@functools.lru_cache(maxsize=None)
def k_tilde(N: int, alpha1: float, alpha2: float) -> float:
    """``int |x|^a2 U_{1,a1}^{2*(a2)}`` over R^N by adaptive quadrature (cached)."""
    q2 = upper_exponent(N, alpha2)
    U, _ = _bubble_funcs(N, alpha1, 1.0)
    f = lambda r: U(r) ** q2
    head = integrate.quad(lambda r: r ** (N - 1 + alpha2) * f(r), 0.0, 1.0,
                          epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return sphere_area(N) * head + _radial_tail(N, alpha2, f, 1.0)


def _cutoff_bubble_point(N, alpha, beta, p, eps, R, alpha2):
    U, dU = _bubble_funcs(N, alpha, eps)
    phi = lambda r: cutoff(r, R)
    dphi = lambda r: cutoff_derivative(r, R)
    q = upper_exponent(N, alpha)
    E = bubble_energy(N, alpha)
    # what the cut-off removes, integrated over r >= R (no cancellation against E)
    grad_change = (_radial_quad(N, 0, lambda r: (dphi(r) * U(r) + phi(r) * dU(r)) ** 2
                                - dU(r) ** 2, R, 2 * R)
                   - _radial_tail(N, 0, lambda r: dU(r) ** 2, 2 * R))
    moment_loss = (_radial_quad(N, alpha, lambda r: U(r) ** q * (1 - phi(r) ** q), R, 2 * R)
                   + _radial_tail(N, alpha, lambda r: U(r) ** q, 2 * R))
    g = _concentrated_grid(eps, R)
    u = cutoff_bubble(g, N, alpha, eps, R)
    row = {
        "eps": eps,
        "grad_deficit": grad_change,
        "moment_deficit": moment_loss,
        "l2_sq": l2_norm_sq(u, N),
        "beta_moment": weighted_lp(u, N, beta, p),
        "grad_sq": E + grad_change,
        "crit_moment": E - moment_loss,
    }
    if alpha2 is not None:
        q2 = upper_exponent(N, alpha2)
        row["ktilde_deficit"] = (
            _radial_quad(N, alpha2, lambda r: U(r) ** q2 * (1 - phi(r) ** q2), R, 2 * R)
            + _radial_tail(N, alpha2, lambda r: U(r) ** q2, 2 * R))
    return row


def expected_orders(N: int, alpha: float, beta: float, p: float,
                    alpha2: Optional[float] = None) -> Dict[str, tuple]:
    """Expected exponent of each quantity and whether a ``|ln eps|`` factor is present."""
    out = {
        "grad_deficit": (N - 2.0, False),
        "moment_deficit": (N + alpha, False),
    }
    if N == 3:
        out["l2_sq"] = (1.0, False)
    elif N == 4:
        out["l2_sq"] = (2.0, True)
    else:
        out["l2_sq"] = (2.0, False)
    crit = (N + beta) / (N - 2)
    if math.isclose(p, crit, rel_tol=1e-12):
        out["beta_moment"] = ((N + beta) / 2, True)
    elif p > crit:
        out["beta_moment"] = (N + beta - p * (N - 2) / 2, False)
    else:
        # decay of U is not integrable against the weight; plain scaling of the core
        out["beta_moment"] = (p * (N - 2) / 2, False)
    if alpha2 is not None:
        out["ktilde_deficit"] = (N + alpha2, False)
    return out


def bubble_asymptotics(N: int, alpha: float, beta: float = 0.0, p: float = 4.0,
                       eps_list: Sequence[float] = DEFAULT_EPS, alpha2: Optional[float] = None,
                       R: float = 1.0, jobs: int = 1) -> List[FitReport]:
    """Measured vs expected ``eps``-orders for the cut-off bubble ``phi U_{eps,alpha}``."""
    rows = bubble_asymptotics_rows(N, alpha, beta, p, eps_list, alpha2, R, jobs)
    return fits_from_rows(rows, N, alpha, beta, p, alpha2)


def fits_from_rows(rows: Sequence[dict], N, alpha, beta, p, alpha2=None) -> List[FitReport]:
    """Slope fits for rows produced by :func:`bubble_asymptotics_rows`."""
    eps = [r["eps"] for r in rows]
    return [fit_slope(name, eps, [r[name] for r in rows], s, log_case)
            for name, (s, log_case) in expected_orders(N, alpha, beta, p, alpha2).items()]


def bubble_asymptotics_rows(N, alpha, beta=0.0, p=4.0, eps_list=DEFAULT_EPS, alpha2=None,
                            R=1.0, jobs=1) -> List[dict]:
    """Per-eps measurements behind :func:`bubble_asymptotics`, largest eps first."""
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise ValueError("eps_list needs at least 3 values")
    if any(not 0 < e <= 0.5 for e in eps):
        raise DomainError("eps values must lie in (0, 0.5]")
    eps = sorted(eps, reverse=True)
    crit_exponents(N, alpha)
    if not beta > -2 or not p > 2:
        raise DomainError(f"need beta > -2 and p > 2, got beta={beta!r}, p={p!r}")
    if alpha2 is not None and not alpha > alpha2 > -2:
        raise DomainError(f"need alpha > alpha2 > -2, got {alpha!r}, {alpha2!r}")
    return _map(_cutoff_bubble_point_star, [(N, alpha, beta, p, e, R, alpha2) for e in eps], jobs)


def _cutoff_bubble_point_star(args):
    return _cutoff_bubble_point(*args)


def _map(fn: Callable, args: list, jobs: int) -> list:
    if jobs and jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, args))
    return [fn(a) for a in args]


def bubble_rayleigh(N: int, alpha: float, eps: float = 1.0, r_max: float = 1e4,
                    n_cells: int = 4000, grading: float = 3.0) -> dict:
    """Rayleigh quotient of the pure bubble with certified truncation bounds.

    Beyond ``r_max`` the bubble obeys ``U <= C eps^{(N-2)/2} r^{-(N-2)}`` and
    ``|U'| <= (N-2) C eps^{(N-2)/2} r^{-(N-1)}``, which bound the missing
    parts of both integrals.
    """
    grid = build_grid(r_max, n_cells, grading=grading)
    U = bubble(grid, N, alpha, eps)
    q = upper_exponent(N, alpha)
    C = bubble_coefficient(N, alpha)
    om = sphere_area(N)
    G = d12_seminorm_sq(U, N)
    M = weighted_lp(U, N, alpha, q)
    tail_G = om * (N - 2) * C ** 2 * eps ** (N - 2) * r_max ** -(N - 2)
    tail_M = om * C ** q * eps ** (N + alpha) * r_max ** -(N + alpha) / (N + alpha)
    S = best_constant(N, alpha)
    lo = G / (M + tail_M) ** (2 / q)
    hi = (G + tail_G) / M ** (2 / q)
    return {"N": N, "alpha": alpha, "eps": eps, "r_max": r_max, "grad_sq": G, "moment": M,
            "tail_grad_bound": tail_G, "tail_moment_bound": tail_M,
            "rayleigh_lower": lo, "rayleigh_upper": hi, "rayleigh": G / M ** (2 / q),
            "best_constant": S,
            "max_relative_gap": max(abs(lo / S - 1), abs(hi / S - 1))}


# ---------------------------------------------------------------- inequality audit

def _spline(grid: RadialGrid, knots) -> RadialFunction:
    b = interpolate.BSpline.basis_element(np.asarray(knots, dtype=float), extrapolate=False)
    db = b.derivative()
    f = lambda r: np.nan_to_num(b(r), nan=0.0)
    df = lambda r: np.nan_to_num(db(r), nan=0.0)
    return from_callable(grid, f, df)


def _bump_sum(grid: RadialGrid, rng: np.random.Generator, R: float) -> RadialFunction:
    n = int(rng.integers(1, 4))
    c = rng.uniform(0.0, R, n)
    w = rng.uniform(0.1, 0.6, n) * R
    a = rng.uniform(0.2, 2.0, n)

    def g(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(a * np.exp(-((r - c) / w) ** 2), axis=-1)

    def dg(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(-2 * a * (r - c) / w ** 2 * np.exp(-((r - c) / w) ** 2), axis=-1)

    return from_callable(grid, lambda r: cutoff(r, R) * g(r),
                         lambda r: cutoff_derivative(r, R) * g(r) + cutoff(r, R) * dg(r))


def standard_corpus(N: int, alpha: float, seed: int = 0, n_random: int = 6,
                    grid: Optional[RadialGrid] = None) -> List[RadialFunction]:
    """Cut-off bubbles, Gaussians, random smooth bumps and a compact B-spline."""
    grid = grid or build_grid(12.0, 3000, grading=2.0)
    R = grid.r_max / 2
    rng = np.random.default_rng(seed)
    out = [cutoff_bubble(grid, N, alpha, e, R) for e in (1.0, 0.3, 0.1, 0.03)]
    out += [gaussian_seq(grid, N, alpha, k) for k in (4, 16)]
    out += [_bump_sum(grid, rng, R) for _ in range(n_random)]
    out.append(_spline(grid, [0.5, 1.0, 2.0, 2.5, 4.0]))
    return out


@dataclass
class AuditReport:
    rows: List[dict] = field(default_factory=list)
    violations: List[dict] = field(default_factory=list)
    min_slack: Dict[str, float] = field(default_factory=dict)
    # identifications the verdicts depend on
    conditions: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def interpolation_exponents(N: int, sigma: float, varsigma: float,
                            interpolation_m: Optional[float] = None):
    """``(theta, tau, interpolation_m)`` of the interpolation between weights ``sigma < varsigma``.

    ``interpolation_m`` (distinct from the ground-state level ``m``) defaults to
    half of its admissible maximum ``(2+sigma)/(2+varsigma) 2*(varsigma)``,
    which keeps ``theta > -2``.
    """
    qv = upper_exponent(N, varsigma)
    m_max = (2 + sigma) / (2 + varsigma) * qv
    m = 0.5 * m_max if interpolation_m is None else float(interpolation_m)
    if not 0 < m <= m_max:
        raise DomainError(f"need 0 < interpolation_m <= {m_max:g}, got {m!r}")
    theta = (qv * sigma - m * varsigma) / (qv - m)
    return theta, m / upper_exponent(N, sigma), m


def inequality_audit(corpus: Sequence[RadialFunction], params: ProblemParams,
                     tol: float = 1e-8, interpolation_m: Optional[float] = None) -> AuditReport:
    """Evaluate each inequality on each corpus member; report relative slack.

    Slack is ``1 - LHS/RHS`` for an inequality ``LHS <= RHS``.  Slack below
    ``-tol`` is a violation.  The two-weight inequalities run only when
    ``params.alpha2`` is set, with ``alpha1 > alpha2``.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    N, a1, a2 = params.N, params.alpha1, params.alpha2
    S1 = best_constant(N, a1)
    q1 = upper_exponent(N, a1)
    Chat = radial_bound_constant(N)
    rep = AuditReport()
    if a2 is not None:
        q2 = upper_exponent(N, a2)
        Ct = interpolation_constant(N, a1, a2)
        theta, tau, _ = interpolation_exponents(N, a2, a1, interpolation_m)
        S_theta = best_constant(N, theta)
        rep.conditions.append(
            f"interpolation: embedding constant for weight theta={theta:.17g} taken as "
            f"best_constant(N, theta) = {S_theta:.17g}")

    def record(idx, name, lhs, rhs):
        slack = 1.0 - lhs / rhs
        row = {"member": idx, "inequality": name, "lhs": lhs, "rhs": rhs, "slack": slack}
        rep.rows.append(row)
        if slack < -tol:
            rep.violations.append(row)
        rep.min_slack[name] = min(rep.min_slack.get(name, math.inf), slack)

    for i, u in enumerate(corpus):
        G = d12_seminorm_sq(u, N)
        B1 = weighted_lp(u, N, a1, q1)
        record(i, "sobolev", S1 * B1 ** (2 / q1), G)
        # pointwise radial decay bound at the nodes r > 0
        r = u.grid.nodes[1:]
        vals = np.abs(u.nodal()[1:])
        ratio = vals / (Chat * r ** (-(N - 2) / 2) * math.sqrt(G))
        record(i, "radial_bound", float(ratio.max()), 1.0)
        if a2 is not None:
            B2 = weighted_lp(u, N, a2, q2)
            record(i, "two_weight", B1, Ct * G ** ((q1 - q2) / 2) * B2)
            lhs = B2 ** (1 / q2)
            rhs = S_theta ** (-(1 - tau) / 2) * B1 ** (tau / q1) * G ** ((1 - tau) / 2)
            record(i, "interpolation", lhs, rhs)
    return rep


# ---------------------------------------------------------------- threshold escape

def threshold_escape_demo(N: int, alpha: float, eps_list: Sequence[float] = DEFAULT_EPS,
                          R: float = 1.0, contrast_p: Optional[float] = None,
                          contrast_lambda: float = 1.0) -> List[dict]:
    """Fibering maximum and L^2 mass of the projected cut-off bubble at ``lam = 0``.

    The contrast column switches on ``lam = contrast_lambda`` with a power
    ``contrast_p`` whose term outweighs the L^2 defect of the bubble, so its
    fibering maximum drops below the threshold for small eps.
    """
    if not alpha > 0:
        raise DomainError(f"the demonstration needs alpha > 0, got {alpha!r}")
    eps = sorted((float(e) for e in eps_list), reverse=True)
    thr = ps_threshold_single(N, alpha)
    pc = _contrast_power(N) if contrast_p is None else float(contrast_p)
    P0 = ProblemParams(N=N, alpha1=alpha, lam=0.0, p=pc)
    P1 = ProblemParams(N=N, alpha1=alpha, lam=contrast_lambda, p=pc)
    rows = []
    mass_first = None
    for e in eps:
        g = _concentrated_grid(e, R)
        u = cutoff_bubble(g, N, alpha, e, R)
        t = nehari_scale(u, P0)
        fm = fibering_max(u, P0)
        mass = t ** 2 * l2_norm_sq(u, N)
        mass_first = mass if mass_first is None else mass_first
        rows.append({
            "eps": e, "fibering_max": fm, "threshold": thr, "gap": fm - thr,
            "l2_mass": mass, "mass_fraction": mass / mass_first,
            "contrast_p": pc, "contrast_lambda": contrast_lambda,
            "contrast_fibering_max": fibering_max(u, P1),
        })
    return rows


def _contrast_power(N: int) -> float:
    # needs N - p(N-2)/2 below the order of the L^2 term (1 for N=3, 2 for N>=4)
    if N == 3:
        return 5.0
    if N == 4:
        return 3.5
    return 0.5 * (2 + upper_exponent(N, 0.0))


# ---------------------------------------------------------------- output

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    return x


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON; floats with 17 significant digits, non-finite as null."""
    return _emit(_clean(obj), indent, 0) + "\n"


def _emit(x, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return json.dumps(x)
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        items = [pad + _emit(v, indent, level + 1) for v in x]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def write_csv(rows: Sequence[dict], path) -> None:
    """One row per dict; columns from the first row."""
    rows = [_clean(r) for r in rows]
    if not rows:
        raise ValueError("no rows to write")
    cols = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in cols])


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return "" if v is None else v
