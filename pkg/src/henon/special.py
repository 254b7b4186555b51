"""Closed-form constants for weighted radial Sobolev problems.

Everything here is a pure function of its arguments: critical exponents,
the Hénon–Sobolev best constant and its extremal normalisation, the
compactness thresholds and the root ``M~`` of the double-critical
threshold equation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional


class DomainError(ValueError):
    """Argument outside the range where a formula is defined."""


@dataclass(frozen=True)
class ExponentPair:
    upper: float
    lower: float


@dataclass(frozen=True)
class ConstantsReport:
    omega_N: float
    s_alpha: float
    c_alpha_n: float
    threshold_single: float
    m_tilde: Optional[float] = None
    threshold_double: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def gamma_fn(x: float) -> float:
    """Euler's Gamma function for ``x > 0``."""
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"gamma_fn needs a finite positive argument, got {x!r}")
    return math.gamma(x)


def _check_dim(N: int) -> None:
    if int(N) != N or N < 3:
        raise DomainError(f"dimension N must be an integer >= 3, got {N!r}")


def _check_weight(alpha: float, name: str = "alpha") -> None:
    if not alpha > -2:
        raise DomainError(f"{name} must satisfy {name} > -2, got {alpha!r}")


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    _check_dim(N)
    return 2.0 * math.pi ** (N / 2) / gamma_fn(N / 2)


def upper_exponent(N: int, gamma: float) -> float:
    """``2(N+gamma)/(N-2)``."""
    return 2.0 * (N + gamma) / (N - 2)


def lower_exponent(N: int, gamma: float) -> float:
    if gamma > 0:
        return 2.0 * (N - 1 + gamma) / (N - 1)
    return 2.0


def crit_exponents(N: int, gamma: float) -> ExponentPair:
    _check_dim(N)
    if not gamma >= -2:
        raise DomainError(f"gamma must satisfy gamma >= -2, got {gamma!r}")
    return ExponentPair(upper=upper_exponent(N, gamma), lower=lower_exponent(N, gamma))


def best_constant(N: int, alpha: float) -> float:
    """Best constant ``S_alpha`` of the radial Hénon–Sobolev inequality.

    ``int |grad u|^2 >= S_alpha (int |x|^alpha |u|^{2*(alpha)})^{2/2*(alpha)}``
    for radial ``u`` in D^{1,2}(R^N).
    """
    _check_dim(N)
    _check_weight(alpha)
    a = (N + alpha) / (2 + alpha)
    inner = sphere_area(N) / (2 + alpha) * gamma_fn(a) ** 2 / gamma_fn(2 * a)
    return (N + alpha) * (N - 2) * inner ** (1.0 / a)


def talenti_constant(N: int) -> float:
    """Classical Sobolev constant ``pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}``."""
    _check_dim(N)
    return math.pi * N * (N - 2) * (gamma_fn(N / 2) / gamma_fn(N)) ** (2.0 / N)


def bubble_coefficient(N: int, alpha: float) -> float:
    _check_dim(N)
    _check_weight(alpha)
    return ((N + alpha) * (N - 2)) ** ((N - 2) / (4 + 2 * alpha))


def bubble_energy(N: int, alpha: float) -> float:
    """``S_alpha^{(N+alpha)/(2+alpha)}``: Dirichlet energy of the extremal."""
    return best_constant(N, alpha) ** ((N + alpha) / (2 + alpha))


def ps_threshold_single(N: int, alpha: float) -> float:
    """Energy level below which compactness holds with one critical term."""
    return (2 + alpha) / (2 * (N + alpha)) * bubble_energy(N, alpha)


def radial_bound_constant(N: int) -> float:
    """``C^`` in ``|u(r)| <= C^ r^{-(N-2)/2} ||grad u||_2`` for radial u."""
    return ((N - 2) * sphere_area(N)) ** -0.5


def interpolation_constant(N: int, sigma: float, varsigma: float) -> float:
    """``C~ = [(N-2) omega_N]^{(varsigma - sigma)/(N-2)}``."""
    return ((N - 2) * sphere_area(N)) ** ((varsigma - sigma) / (N - 2))


def m_tilde(N: int, alpha1: float, alpha2: float, c_tilde: Optional[float] = None) -> float:
    """Unique positive root of ``C~ t^{(2*(a1)-2)/2} + t^{(2*(a2)-2)/2} = S_{a2}^{2*(a2)/2}``.

    ``c_tilde`` overrides the coefficient ``C~`` (used to test the one-term limit).
    """
    _check_dim(N)
    _check_weight(alpha2, "alpha2")
    if not alpha1 > alpha2:
        raise DomainError(f"need alpha1 > alpha2, got alpha1={alpha1!r}, alpha2={alpha2!r}")
    f = _m_tilde_equation(N, alpha1, alpha2, c_tilde)
    target = best_constant(N, alpha2) ** (upper_exponent(N, alpha2) / 2)
    q2 = upper_exponent(N, alpha2)
    t_one_term = best_constant(N, alpha2) ** (q2 / (q2 - 2))

    lo, hi = 1e-8, 2.0 * t_one_term
    while f(hi) <= 0:
        hi *= 2.0
    if f(lo) > 0:
        raise DomainError("m_tilde: equation already positive at the lower bracket end")
    # bisection until the bracket stops shrinking in floating point
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    root = lo if abs(f(lo)) <= abs(f(hi)) else hi
    assert abs(f(root)) <= 1e-12 * target, "m_tilde residual above tolerance"
    return root


def _m_tilde_equation(N, alpha1, alpha2, c_tilde=None):
    c = interpolation_constant(N, alpha1, alpha2) if c_tilde is None else c_tilde
    e1 = (upper_exponent(N, alpha1) - 2) / 2
    e2 = (upper_exponent(N, alpha2) - 2) / 2
    target = best_constant(N, alpha2) ** (upper_exponent(N, alpha2) / 2)
    return lambda t: c * t ** e1 + t ** e2 - target


def ps_threshold_double(N: int, alpha1: float, alpha2: float) -> float:
    """Compactness level ``(2+a2)/(2(N+a2)) * M~`` for a positive second coupling."""
    return (2 + alpha2) / (2 * (N + alpha2)) * m_tilde(N, alpha1, alpha2)


def constants_report(N: int, alpha: float, alpha2: Optional[float] = None) -> ConstantsReport:
    mt = td = None
    if alpha2 is not None:
        mt = m_tilde(N, alpha, alpha2)
        td = (2 + alpha2) / (2 * (N + alpha2)) * mt
    return ConstantsReport(
        omega_N=sphere_area(N),
        s_alpha=best_constant(N, alpha),
        c_alpha_n=bubble_coefficient(N, alpha),
        threshold_single=ps_threshold_single(N, alpha),
        m_tilde=mt,
        threshold_double=td,
    )
