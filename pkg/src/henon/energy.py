"""Energy functional, Nehari constraint and fibering map.

The functional is

    Phi(u) = A/2 - B/2*(a1) - mu C/2*(a2) - lam D/p

with ``A = ||u||_{H^1}^2``, ``B = int |x|^a1 |u|^{2*(a1)}``,
``C = int |x|^a2 |u|^{2*(a2)}`` and ``D = int |x|^beta |u|^p``.  Along a ray
``t -> t u`` every term is a monomial in ``t``, so the fibering map and the
Nehari scaling only need the four scalars.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .space import (RadialFunction, _same_grid, basis_action, h1_action, h1_norm_sq,
                    h1_inner, weighted_lp)
from .special import lower_exponent, upper_exponent


class ParameterError(ValueError):
    """Exponent/coupling combination outside the admissible range."""


class FiberingDegenerate(ArithmeticError):
    """``t -> Phi(t u)`` has no positive interior maximum."""


class NotOnManifold(ValueError):
    pass


REGIMES = ("3.1i", "3.1ii", "3.1iii", "4.3", "4.7i", "4.7ii", "4.7iii")


@dataclass(frozen=True)
class ProblemParams:
    """Coefficients of ``-Δu + u = |x|^a1 |u|^{2*(a1)-2}u + mu |x|^a2 ... + lam |x|^beta |u|^{p-2}u``.

    ``alpha2``/``mu`` switch on the second critical term.  ``critical=False``
    drops the ``a1`` term, leaving a purely subcritical problem.
    """

    N: int
    alpha1: float
    beta: float = 0.0
    p: float = 4.0
    lam: float = 0.0
    alpha2: Optional[float] = None
    mu: Optional[float] = None
    critical: bool = True
    needs_eigen_bound: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.validate()
        object.__setattr__(self, "needs_eigen_bound", self.p == 2 and -2 < self.beta < 0)

    @property
    def q1(self) -> float:
        return upper_exponent(self.N, self.alpha1)

    @property
    def q2(self) -> Optional[float]:
        return None if self.alpha2 is None else upper_exponent(self.N, self.alpha2)

    @property
    def mu_value(self) -> float:
        return 0.0 if self.alpha2 is None or self.mu is None else float(self.mu)

    def with_(self, **kw) -> "ProblemParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("needs_eigen_bound")
        return d

    def validate(self) -> None:
        N, b, p = self.N, self.beta, self.p
        if int(N) != N or N < 3:
            raise ParameterError(f"N >= 3 required, got N={N!r}")
        if not self.alpha1 > -2:
            raise ParameterError(f"alpha > -2 required, got alpha={self.alpha1!r}")
        if not b > -2:
            raise ParameterError(f"beta > -2 required, got beta={b!r}")
        lo, hi = lower_exponent(N, b), upper_exponent(N, b)
        if not p < hi:
            raise ParameterError(f"p < 2*(beta) = {hi:.17g} violated (p={p!r})")
        if b >= 0 and not p > lo:
            raise ParameterError(f"p > 2_*(beta) = {lo:.17g} violated for beta >= 0 (p={p!r})")
        if b < 0 and not p >= lo:
            raise ParameterError(f"p >= 2_*(beta) = 2 violated for -2 < beta < 0 (p={p!r})")
        if (self.alpha2 is None) != (self.mu is None):
            raise ParameterError("alpha2 and mu must be given together")
        if self.alpha2 is not None:
            if not self.alpha1 > self.alpha2 > -2:
                raise ParameterError(
                    f"alpha1 > alpha2 > -2 violated (alpha1={self.alpha1!r}, alpha2={self.alpha2!r})")


def check_regime(params: ProblemParams, regime: str) -> None:
    """Raise :class:`ParameterError` naming the first hypothesis of ``regime`` that fails.

    Regimes: ``3.1i`` large lam; ``3.1ii`` any lam > 0 with the restricted
    power window; ``3.1iii`` p = 2 below the first weighted eigenvalue;
    ``4.3`` positive second coupling; ``4.7i``/``4.7ii``/``4.7iii`` negative
    second coupling (large lam / small |mu| / p = 2).
    """
    N, a1, b, p, lam = params.N, params.alpha1, params.beta, params.p, params.lam
    if regime not in REGIMES:
        raise ParameterError(f"unknown regime {regime!r}; choose from {', '.join(REGIMES)}")

    def need(cond, msg):
        if not cond:
            raise ParameterError(f"regime {regime}: {msg}")

    if regime.startswith("3.1"):
        need(params.alpha2 is None, "single critical term expected (no alpha2/mu)")
        need(params.critical, "critical term must be present")
        need(a1 > 0, f"alpha > 0 required (alpha={a1!r})")
    if regime.startswith("4."):
        need(params.alpha2 is not None, "alpha2 and mu required")
        need(params.critical, "critical term must be present")
    if regime in ("3.1i", "3.1ii", "4.3", "4.7i", "4.7ii"):
        need(lam > 0, f"lambda > 0 required (lambda={lam!r})")
        need(p > lower_exponent(N, b), f"p > 2_*(beta) = {lower_exponent(N, b):.17g} required")
    if regime == "3.1ii":
        _check_power_window(N, b, p, need)
    if regime in ("3.1iii", "4.7iii"):
        need(p == 2, f"p = 2 required (p={p!r})")
        if N == 3:
            need(-2 < b <= -1, f"-2 < beta <= -1 required for N = 3 (beta={b!r})")
        else:
            need(-2 < b < 0, f"-2 < beta < 0 required for N >= 4 (beta={b!r})")
        need(lam > 0, f"0 < lambda required (lambda={lam!r}); lambda < lambda_1beta is checked by the solver")
    if regime == "4.3":
        need(params.mu > 0, f"mu > 0 required (mu={params.mu!r})")
    if regime.startswith("4.7"):
        need(params.mu < 0, f"mu < 0 required (mu={params.mu!r})")
    if regime == "4.7i":
        q2 = upper_exponent(N, params.alpha2)
        need(p > q2, f"p > 2*(alpha2) = {q2:.17g} required (p={p!r})")
    if regime == "4.7ii":
        _check_power_window_mu_negative(N, params.alpha2, b, p, need)


def _check_power_window(N, b, p, need):
    hi = upper_exponent(N, b)
    if N == 3 and b >= -1:
        need(2 * (2 + b) < p < hi, f"2(2+beta) = {2 * (2 + b):.17g} < p < 2*(beta) required for N = 3, beta >= -1")
    elif N == 3:
        need(2 < p < hi, "2 < p < 2*(beta) required for N = 3, beta < -1")
    elif b <= 0:
        need(2 < p < hi, "2 < p < 2*(beta) required for N >= 4, -2 < beta <= 0")
    else:
        lo = 2 * (N - 2 + b) / (N - 2)
        need(lo < p < hi, f"2(N-2+beta)/(N-2) = {lo:.17g} < p < 2*(beta) required for N >= 4, beta > 0")


def _check_power_window_mu_negative(N, a2, b, p, need):
    hi = upper_exponent(N, b)
    q2 = upper_exponent(N, a2)
    if N == 3 and b >= -1:
        lo = max(2 * (3 + a2), 2 * (2 + b))
        need(lo < p < hi, f"max(2(3+alpha2), 2(2+beta)) = {lo:.17g} < p < 2*(beta) required")
    elif N == 3:
        need(6 + 2 * a2 < p < hi, f"6 + 2 alpha2 = {6 + 2 * a2:.17g} < p < 2*(beta) required")
    elif b <= 0:
        need(q2 < p < hi, f"2*(alpha2) = {q2:.17g} < p < 2*(beta) required")
    else:
        lo = max(q2, 2 * (N - 2 + b) / (N - 2))
        need(lo < p < hi, f"max(2*(alpha2), 2(N-2+beta)/(N-2)) = {lo:.17g} < p < 2*(beta) required")


@dataclass(frozen=True)
class EnergyBreakdown:
    a: float
    b: float
    c: float
    d: float
    phi: float
    nehari_residual: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Terms:
    """The four scalars plus the exponents needed to move along a ray."""

    a: float
    b: float
    c: float
    d: float
    q1: float
    q2: float
    p: float
    mu: float
    lam: float

    def phi(self, t: float = 1.0) -> float:
        return (t * t * self.a / 2 - t ** self.q1 * self.b / self.q1
                - self.mu * t ** self.q2 * self.c / self.q2 - self.lam * t ** self.p * self.d / self.p)

    def psi(self, t: float = 1.0) -> float:
        return (t * t * self.a - t ** self.q1 * self.b
                - self.mu * t ** self.q2 * self.c - self.lam * t ** self.p * self.d)

    def h(self, t: float) -> float:
        """``psi(t)/t^2``; same sign as ``d/dt Phi(t u)``."""
        return (self.a - t ** (self.q1 - 2) * self.b
                - self.mu * t ** (self.q2 - 2) * self.c - self.lam * t ** (self.p - 2) * self.d)

    def dh(self, t: float) -> float:
        return (-(self.q1 - 2) * t ** (self.q1 - 3) * self.b
                - self.mu * (self.q2 - 2) * t ** (self.q2 - 3) * self.c
                - self.lam * (self.p - 2) * t ** (self.p - 3) * self.d)


def _terms(u: RadialFunction, params: ProblemParams) -> _Terms:
    N = params.N
    a = h1_norm_sq(u, N)
    b = weighted_lp(u, N, params.alpha1, params.q1) if params.critical else 0.0
    if params.alpha2 is not None:
        c = weighted_lp(u, N, params.alpha2, params.q2)
        q2 = params.q2
    else:
        c, q2 = 0.0, 2.0 + 1.0  # inert: multiplied by mu = 0
    d = weighted_lp(u, N, params.beta, params.p)
    return _Terms(a, b, c, d, params.q1, q2, params.p, params.mu_value, params.lam)


def energy(u: RadialFunction, params: ProblemParams) -> EnergyBreakdown:
    t = _terms(u, params)
    return EnergyBreakdown(a=t.a, b=t.b, c=t.c, d=t.d, phi=t.phi(), nehari_residual=t.psi())


def _power(values: np.ndarray, q: float) -> np.ndarray:
    """``|u|^{q-2} u``."""
    if q == 2:
        return values
    return np.abs(values) ** (q - 2) * values


def _nonlinear_parts(params: ProblemParams):
    parts = []
    if params.critical:
        parts.append((1.0, params.alpha1, params.q1))
    if params.alpha2 is not None and params.mu_value != 0:
        parts.append((params.mu_value, params.alpha2, params.q2))
    if params.lam != 0:
        parts.append((params.lam, params.beta, params.p))
    return parts


def derivative_action(u: RadialFunction, v: RadialFunction, params: ProblemParams) -> float:
    """``<Phi'(u), v>``."""
    _same_grid(u, v)
    N = params.N
    out = h1_inner(u, v, N)
    for coef, gamma, q in _nonlinear_parts(params):
        out -= coef * float(u.grid.radial_weight(N, gamma) @ (_power(u.values, q) * v.values))
    return out


def gradient_action(u: RadialFunction, params: ProblemParams) -> np.ndarray:
    """``<Phi'(u), phi_i>`` for every hat basis function ``phi_i``."""
    N = params.N
    vec = h1_action(u, N)
    for coef, gamma, q in _nonlinear_parts(params):
        vec = vec - coef * basis_action(u.grid, N, gamma, _power(u.values, q))
    return vec


def nehari_value(u: RadialFunction, params: ProblemParams) -> float:
    """``Psi(u) = <Phi'(u), u> = A - B - mu C - lam D``."""
    t = _terms(u, params)
    if t.a == 0:
        raise NotOnManifold("the Nehari functional is evaluated on u = 0, which is excluded")
    return t.psi()


def _regime_hint(params: ProblemParams) -> str:
    if params.p == 2 and params.lam > 0:
        return ("p = 2: the quadratic form A - lambda*int|x|^beta u^2 is not positive; "
                "this happens for lambda >= lambda_1beta")
    if params.lam <= 0 and not params.critical:
        return "no superquadratic term with positive coefficient"
    return "parameters outside the range where the fibering map has a unique maximiser"


def _scale_from_terms(t: _Terms, params: ProblemParams) -> float:
    if t.a <= 0:
        raise NotOnManifold("u = 0 has no Nehari scaling")
    monotone = t.mu >= 0 and t.lam >= 0
    if monotone:
        if t.p == 2:
            # h(t) = (A - lam D) - t^{q1-2} B - mu t^{q2-2} C
            lead = t.a - t.lam * t.d
            if lead <= 0 or (t.b == 0 and t.c * t.mu == 0):
                raise FiberingDegenerate(_regime_hint(params))
            if t.mu == 0 or t.c == 0:
                return (lead / t.b) ** (1.0 / (t.q1 - 2))
        elif t.b == 0 and t.mu * t.c == 0 and t.lam * t.d == 0:
            raise FiberingDegenerate(_regime_hint(params))
        lo, hi = 1.0, 1.0
        while t.h(hi) > 0:
            hi *= 2.0
            if hi > 1e300:
                raise FiberingDegenerate(_regime_hint(params))
        while t.h(lo) <= 0:
            lo *= 0.5
            if lo < 1e-300:
                raise FiberingDegenerate(_regime_hint(params))
    else:
        lo, hi = _scan_bracket(t, params)
    root = _bisect(t.h, lo, hi)
    # two safeguarded Newton polish steps
    for _ in range(2):
        d = t.dh(root)
        if d >= 0 or not math.isfinite(d):
            break
        cand = root - t.h(root) / d
        if lo <= cand <= hi and abs(t.h(cand)) < abs(t.h(root)):
            root = cand
    return root


def _bisect(f, lo, hi):
    # f(lo) > 0 >= f(hi)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or (hi - lo) <= 1e-15 * hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(f(lo)) <= abs(f(hi)) else hi


def _scan_bracket(t: _Terms, params: ProblemParams, n: int = 512):
    """Locate the global maximiser of ``Phi(t u)`` on a log grid and bracket it."""
    # characteristic scale from the positive-power terms that pull Phi down
    scales = []
    if t.b > 0:
        scales.append((t.a / t.b) ** (1 / (t.q1 - 2)))
    if t.lam > 0 and t.d > 0 and t.p > 2:
        scales.append((t.a / (t.lam * t.d)) ** (1 / (t.p - 2)))
    if t.mu > 0 and t.c > 0:
        scales.append((t.a / (t.mu * t.c)) ** (1 / (t.q2 - 2)))
    if not scales:
        raise FiberingDegenerate(_regime_hint(params))
    s0 = min(scales)
    ts = s0 * np.logspace(-6, 6, n)
    vals = np.array([t.phi(x) for x in ts])
    k = int(np.argmax(vals))
    if k == 0 or k == n - 1 or not vals[k] > 0:
        raise FiberingDegenerate(_regime_hint(params))
    lo, hi = ts[k - 1], ts[k + 1]
    if not (t.h(lo) > 0 >= t.h(hi)):
        # maximiser sits between grid points with a sign change in one half
        if t.h(ts[k]) > 0:
            lo = ts[k]
        else:
            hi = ts[k]
    if not (t.h(lo) > 0 >= t.h(hi)):
        raise FiberingDegenerate(_regime_hint(params))
    return lo, hi


def nehari_scale(u: RadialFunction, params: ProblemParams) -> float:
    """``t_u > 0`` with ``t_u u`` on the Nehari manifold, the maximiser of ``t -> Phi(t u)``."""
    return _scale_from_terms(_terms(u, params), params)


def nehari_project(u: RadialFunction, params: ProblemParams) -> RadialFunction:
    return nehari_scale(u, params) * u


def fibering_max(u: RadialFunction, params: ProblemParams) -> float:
    """``max_{t >= 0} Phi(t u)``."""
    t = _terms(u, params)
    return t.phi(_scale_from_terms(t, params))


def fibering_profile(u: RadialFunction, params: ProblemParams, ts) -> np.ndarray:
    """``Phi(t u)`` for every ``t`` in ``ts``."""
    t = _terms(u, params)
    return np.array([t.phi(float(x)) for x in np.asarray(ts, dtype=float)])


def nehari_regularity(u: RadialFunction, params: ProblemParams, tol: float = 1e-8) -> float:
    """``<Psi'(u), u> = 2A - 2*(a1) B - mu 2*(a2) C - lam p D`` for ``u`` on the manifold."""
    t = _terms(u, params)
    if t.a == 0 or abs(t.psi()) > tol * t.a:
        raise NotOnManifold(f"|Psi(u)| = {abs(t.psi()):.3e} exceeds {tol:g} * A = {tol * t.a:.3e}")
    return 2 * t.a - t.q1 * t.b - t.mu * t.q2 * t.c - t.lam * t.p * t.d
