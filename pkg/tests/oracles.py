"""Independent reference computations used by the tests.

None of these call into the package's numerics; they only share the
formulas' inputs.
"""
from __future__ import annotations

import functools
import math

import mpmath as mp
import numpy as np
from scipy import integrate, linalg, special


def sphere_area_mp(N):
    return 2 * mp.pi ** (mp.mpf(N) / 2) / mp.gamma(mp.mpf(N) / 2)


def best_constant_mp(N, alpha, dps=40):
    """S_alpha evaluated in extended precision."""
    with mp.workdps(dps):
        a = (N + mp.mpf(alpha)) / (2 + mp.mpf(alpha))
        inner = sphere_area_mp(N) / (2 + mp.mpf(alpha)) * mp.gamma(a) ** 2 / mp.gamma(2 * a)
        return float((N + mp.mpf(alpha)) * (N - 2) * inner ** (1 / a))


def bubble_moment_beta(N, alpha1, alpha2):
    """int |x|^a2 U_{1,a1}^{2*(a2)} dx through a Beta integral (x = r^{2+a1})."""
    a = 2.0 + alpha1
    C = ((N + alpha1) * (N - 2)) ** ((N - 2) / (4 + 2 * alpha1))
    q2 = 2.0 * (N + alpha2) / (N - 2)
    b = (N + alpha2) / a
    omega = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    return omega * C ** q2 / a * special.beta(b, b)


def m_tilde_scan(N, alpha1, alpha2, levels=12, points=2001):
    """Locate the sign change of the threshold equation by nested grid scans."""
    S2 = best_constant_mp(N, alpha2)
    q1 = 2.0 * (N + alpha1) / (N - 2)
    q2 = 2.0 * (N + alpha2) / (N - 2)
    c = ((N - 2) * 2 * math.pi ** (N / 2) / math.gamma(N / 2)) ** ((alpha2 - alpha1) / (N - 2))
    target = S2 ** (q2 / 2)
    f = lambda t: c * t ** ((q1 - 2) / 2) + t ** ((q2 - 2) / 2) - target
    lo, hi = 0.0, 10 * S2 ** (q2 / (q2 - 2))
    for _ in range(levels):
        t = np.linspace(lo, hi, points)
        v = f(t)
        k = int(np.argmax(v > 0))
        lo, hi = t[k - 1], t[k]
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- shooting

def _rhs(r, y):
    u, v = y
    return [v, -2.0 / r * v + u - u ** 3]


def _shoot(a, r_end=25.0):
    r0 = 1e-6
    y0 = [a + (a - a ** 3) * r0 ** 2 / 6, (a - a ** 3) * r0 / 3]
    cross = lambda r, y: y[0]
    cross.terminal = True
    turn = lambda r, y: y[1]
    turn.terminal = True
    turn.direction = 1
    return solve_ivp_dense(y0, r0, r_end, [cross, turn])


def solve_ivp_dense(y0, r0, r_end, events):
    return integrate.solve_ivp(_rhs, [r0, r_end], y0, events=events, rtol=1e-13,
                               atol=1e-15, dense_output=True)


@functools.lru_cache(maxsize=None)
def cubic_ground_state():
    """Positive decaying solution of u'' + 2u'/r - u + u^3 = 0 in R^3.

    Returns ``(u0, r_valid, profile, energy)``: the central value, the radius
    up to which the bracketing trajectories agree to 1e-10, a callable
    profile on [0, r_valid], and the energy
    4 pi int (u'^2/2 + u^2/2 - u^4/4) r^2 dr.
    """
    lo, hi = 4.0, 4.6
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _shoot(mid).t_events[0].size:
            hi = mid
        else:
            lo = mid
    s_lo, s_hi = _shoot(lo), _shoot(hi)
    r_stop = min(s_lo.t[-1], s_hi.t[-1])
    rr = np.linspace(1e-6, r_stop, 20001)
    gap = np.abs(s_lo.sol(rr)[0] - s_hi.sol(rr)[0])
    r_valid = float(rr[np.argmax(gap > 1e-10)]) if np.any(gap > 1e-10) else float(r_stop)

    def profile(r):
        r = np.clip(np.asarray(r, dtype=float), 1e-6, None)
        return s_lo.sol(r)[0]

    def dens(r):
        u, v = s_lo.sol(r)
        return (0.5 * (v * v + u * u) - 0.25 * u ** 4) * r * r

    e, _ = integrate.quad(dens, 1e-6, r_valid, epsabs=1e-14, epsrel=1e-13, limit=500)
    return 0.5 * (lo + hi), r_valid, profile, 4 * math.pi * e


# ---------------------------------------------------------------- eigen

def dense_weighted_eigenvalue(N, beta, nodes, rule=8):
    """Smallest generalized eigenvalue of the P1 stiffness+mass pencil, dense.

    Assembled element by element here, independent of the package's sparse
    basis matrices.
    """
    x, w = np.polynomial.legendre.leggauss(rule)
    s = 0.5 * (x + 1)
    n = nodes.size
    K = np.zeros((n, n))
    Mb = np.zeros((n, n))
    omega = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    for i in range(n - 1):
        a, b = nodes[i], nodes[i + 1]
        h = b - a
        r = a + h * s
        ww = 0.5 * h * w * omega
        phi = np.stack([1 - s, s])
        dphi = np.array([-1.0 / h, 1.0 / h])
        w0 = ww * r ** (N - 1)
        wb = ww * r ** (N - 1 + beta)
        loc = np.outer(dphi, dphi) * w0.sum() + (phi * w0) @ phi.T
        K[i:i + 2, i:i + 2] += loc
        Mb[i:i + 2, i:i + 2] += (phi * wb) @ phi.T
    K, Mb = K[:-1, :-1], Mb[:-1, :-1]
    return float(linalg.eigh(K, Mb, eigvals_only=True, subset_by_index=[0, 0])[0])
