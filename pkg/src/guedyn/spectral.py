"""Eigenvalue-ensemble averages: the F(t) matrix and n-point correlators.

The Gaussian unitary eigenvalue gas has determinantal correlations built
from the Hermite kernel.  Fourier transforming the kernel yields a d x d
symmetric matrix function

    F_{mu,nu}(t) = e^{-t^2/2} sqrt(mu! nu!)
                   sum_a (it)^{mu+nu-2a} / (a! (mu-a)! (nu-a)!),

whose traces of products evaluate every exponential n-point correlator.
Entries are computed through generalized Laguerre polynomials with
log-factorial scaling rather than by expanding polynomials in t, so large
dimensions and times stay in range:

    F_{mu,nu}(t) = e^{-t^2/2} sqrt(min!/max!) (it)^{|mu-nu|}
                   L^{(|mu-nu|)}_{min}(t^2).

All public functions take plain floats and return floats; complex
intermediates are checked to be real before truncation.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, j1

from .errors import NumericalError

__all__ = [
    "f_matrix",
    "trace_f",
    "correlator",
    "chi_mean",
    "xi_mean",
    "rho_mean_coeffs",
    "purity_mean",
    "purity_limit",
    "chi_poisson",
    "xi_poisson",
    "rho_poisson_coeffs",
    "purity_poisson",
    "bessel_limit",
    "find_extrema",
]

# e^{-x/2} underflows past this point; F is flushed to the zero matrix and
# every downstream formula returns its exact asymptotic constant.
_UNDERFLOW_X = 1488.0

_I_POWERS = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


@lru_cache(maxsize=64)
def _index_tables(d: int):
    mu = np.arange(d)
    lo = np.minimum.outer(mu, mu)
    hi = np.maximum.outer(mu, mu)
    k = hi - lo
    log_ratio = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1))
    phase = _I_POWERS[k % 4]
    for arr in (lo, k, log_ratio, phase):
        arr.setflags(write=False)
    return lo, k, log_ratio, phase


def _laguerre_table(d: int, x: float) -> np.ndarray:
    """L[alpha, n] = L^(alpha)_n(x) for 0 <= alpha, n <= d-1 (recurrence)."""
    alpha = np.arange(d, dtype=float)
    table = np.empty((d, d))
    table[:, 0] = 1.0
    if d > 1:
        table[:, 1] = 1.0 + alpha - x
    for n in range(2, d):
        table[:, n] = (
            (2 * n - 1 + alpha - x) * table[:, n - 1]
            - (n - 1 + alpha) * table[:, n - 2]
        ) / n
    return table


@lru_cache(maxsize=512)
def _f_matrix_cached(d: int, t: float) -> np.ndarray:
    if t == 0.0:
        out = np.eye(d, dtype=complex)
    else:
        x = t * t
        lo, k, log_ratio, phase = _index_tables(d)
        if x > _UNDERFLOW_X:
            out = np.zeros((d, d), dtype=complex)
        else:
            lag = _laguerre_table(d, x)[k, lo]
            magnitude = np.exp(log_ratio + k * np.log(abs(t)) - 0.5 * x)
            sign = np.where(k % 2 == 1, np.sign(t), 1.0)
            out = phase * sign * magnitude * lag
    out.setflags(write=False)
    return out


def f_matrix(d: int, t: float) -> np.ndarray:
    """The d x d matrix F(t).  Symmetric; F(0) = identity.

    Entries with mu+nu even are real, odd entries purely imaginary, and
    F(-t) is the entrywise complex conjugate.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    return _f_matrix_cached(d, float(t))


def trace_f(d: int, t: float) -> float:
    """Tr F(t) = e^{-t^2/2} L^(1)_{d-1}(t^2), by the three-term recurrence."""
    if d < 1:
        raise ValueError("d must be >= 1")
    x = t * t
    if x > _UNDERFLOW_X:
        return 0.0
    prev, cur = 1.0, 2.0 - x  # L^(1)_0, L^(1)_1
    if d == 1:
        cur = prev
    else:
        for n in range(2, d):
            prev, cur = cur, ((2 * n - x) * cur - n * prev) / n
    return float(np.exp(-0.5 * x) * cur)


def _cycles_of(perm: tuple[int, ...]) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        j = perm[start]
        while j != start:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        cycles.append(tuple(cyc))
    return cycles


def _canonical_loop(cs: tuple[int, ...]) -> tuple[int, ...]:
    # Traces of loops of symmetric matrices are invariant under rotation
    # and reversal; use the lexicographic minimum as the memo key.
    best = None
    for seq in (cs, cs[::-1]):
        for r in range(len(seq)):
            cand = seq[r:] + seq[:r]
            if best is None or cand < best:
                best = cand
    return best


def correlator(coeffs, d: int, t: float) -> float:
    """Prefactored n-point exponential correlator of the eigenvalue gas:

        (d!/(d-n)!) * < prod_j exp(i c_j E_j t) >.

    Expanded over permutations of S_n; each cycle contributes the trace of
    the ordered product of F(c t) factors around it.  At t = 0 this equals
    d!/(d-n)! exactly.
    """
    coeffs = tuple(int(c) for c in coeffs)
    n = len(coeffs)
    if n < 1 or any(c == 0 for c in coeffs):
        raise ValueError("coefficients must be nonzero integers")
    if n > d:
        raise ValueError(f"need n <= d, got n={n}, d={d}")
    mats = {c: f_matrix(d, c * t) for c in set(coeffs)}

    trace_cache: dict[tuple[int, ...], float] = {}

    def loop_trace(cyc: tuple[int, ...]) -> float:
        key = _canonical_loop(tuple(coeffs[j] for j in cyc))
        if key not in trace_cache:
            prod = mats[key[0]]
            for c in key[1:]:
                prod = prod @ mats[c]
            tr = complex(np.trace(prod))
            if abs(tr.imag) > 1e-10 * max(1.0, abs(tr.real)):
                raise NumericalError(f"non-real loop trace {tr} for {key}")
            trace_cache[key] = tr.real
        return trace_cache[key]

    total = 0.0
    for perm in itertools.permutations(range(n)):
        cycles = _cycles_of(perm)
        sign = -1 if (n - len(cycles)) % 2 else 1
        term = float(sign)
        for cyc in cycles:
            term *= loop_trace(cyc)
        total += term
    return total


def chi_mean(d: int, t: float) -> float:
    """Ensemble average of chi(t) = |iota(t)|^2 over eigenvalue statistics:

        <chi(t)> = d(d-1) <e^{i(E1-E2)t}> + d
                 = (Tr F(t))^2 - Tr[F(t)F(-t)] + d.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    return correlator((1, -1), d, t) + d


def xi_mean(d: int, t: float) -> float:
    """Ensemble average of the purity phase sum xi(t).

    Decomposes into the two-point correlator at t and 2t, both three-point
    correlators, the four-point correlator and a constant:
    4 C2(2t) + 2 C3(2,-1,-1) + 2 C3(1,1,-2) + C4(1,1,-1,-1)
    + 4(d-1) C2(t) + 2d(d-1).  At t = 0 this is d^2 (d-1)(d+3); the late
    time value is 2d(d-1).
    """
    if d < 4:
        raise ValueError("d must be >= 4 (four-point correlator)")
    c2_t = correlator((1, -1), d, t)
    c2_2t = correlator((1, -1), d, 2 * t)
    c3_a = correlator((2, -1, -1), d, t)
    c3_b = correlator((1, 1, -2), d, t)
    c4 = correlator((1, 1, -1, -1), d, t)
    return 4 * c2_2t + 2 * c3_a + 2 * c3_b + c4 + 4 * (d - 1) * c2_t + 2 * d * (d - 1)


def rho_mean_coeffs(d_A: int, d_B: int, t: float) -> tuple[float, float]:
    """Coefficients of the fully averaged density matrix:

        <<rho_A>> = p1 |1_A><1_A| + pmix 1_A/d_A,
        p1 = (<chi> - 1)/(d^2 - 1),  pmix = (d^2 - <chi>)/(d^2 - 1).
    """
    d = d_A * d_B
    if d < 2:
        raise ValueError("d_A * d_B must be >= 2")
    chi = chi_mean(d, t)
    return (chi - 1) / (d * d - 1), (d * d - chi) / (d * d - 1)


def purity_mean(d_A: int, d_B: int, t: float) -> float:
    """Fully averaged subsystem purity <<gamma(t)>>.

    A trivial subsystem or bath stays exactly pure; otherwise the purity
    arbiter <xi>/(d^2(d-1)(d+3)) interpolates between 1 and the late-time
    constant.
    """
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be >= 1")
    if d_A == 1 or d_B == 1:
        return 1.0
    d = d_A * d_B
    frac = (d_A + d_B) / (d + 1)
    return xi_mean(d, t) / (d * d * (d - 1) * (d + 3)) * (1 - frac) + frac


def purity_limit(d_A: int, d_B: int) -> float:
    """Late-time purity, 2/(d(d+3)) (1 - (dA+dB)/(d+1)) + (dA+dB)/(d+1).

    Exceeds the trace-measure average (dA+dB)/(d+1) by a remnant of the
    initial purity.
    """
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be >= 1")
    d = d_A * d_B
    frac = (d_A + d_B) / (d + 1)
    return 2 / (d * (d + 3)) * (1 - frac) + frac


def chi_poisson(d: int, t: float) -> float:
    """<chi(t)> for uncorrelated (exponential-gap) energies:

        d + d(d-1) / ((d+1) t^2 + 1),

    with the gap scale matched to the Gaussian ensemble second moment.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    return d + d * (d - 1) / ((d + 1) * t * t + 1)


def xi_poisson(d: int, t: float) -> float:
    """<xi(t)> for uncorrelated energies with mu^2 = 1/(d+1)."""
    if d < 4:
        raise ValueError("d must be >= 4")
    m2 = 1.0 / (d + 1)
    t2 = t * t
    p3 = d * (d - 1) * (d - 2)
    p4 = p3 * (d - 3)
    return (
        4 * d * (d - 1) * m2 / (m2 + 4 * t2)
        + 4 * p3 * m2 * m2 * (m2 + 3 * t2) / ((m2 + t2) ** 2 * (m2 + 4 * t2))
        + p4 * (m2 / (m2 + t2)) ** 2
        + 4 * d * (d - 1) ** 2 * m2 / (m2 + t2)
        + 2 * d * (d - 1)
    )


def rho_poisson_coeffs(d_A: int, d_B: int, t: float) -> tuple[float, float]:
    """Poisson-statistics analogue of :func:`rho_mean_coeffs`."""
    d = d_A * d_B
    if d < 2:
        raise ValueError("d_A * d_B must be >= 2")
    chi = chi_poisson(d, t)
    return (chi - 1) / (d * d - 1), (d * d - chi) / (d * d - 1)


def purity_poisson(d_A: int, d_B: int, t: float) -> float:
    """Poisson-statistics analogue of :func:`purity_mean`."""
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be >= 1")
    if d_A == 1 or d_B == 1:
        return 1.0
    d = d_A * d_B
    frac = (d_A + d_B) / (d + 1)
    return xi_poisson(d, t) / (d * d * (d - 1) * (d + 3)) * (1 - frac) + frac


def bessel_limit(tau: float, power: int = 2) -> float:
    """Large-dimension scaling limit (J_1(2 tau)/tau)^power, power in {2, 4}.

    With time measured in units of 1/sqrt(d), the averaged density-matrix
    coefficient tends to the power-2 curve and the purity arbiter to the
    power-4 curve.  The tau -> 0 limit is exactly 1.
    """
    if power not in (2, 4):
        raise ValueError("power must be 2 or 4")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0.0:
        return 1.0
    return float((j1(2 * tau) / tau) ** power)


def find_extrema(fn, t_max: float, step: float = 1e-3, tol: float = 1e-8):
    """Interior extrema of a smooth curve on (0, t_max].

    Dense sampling locates slope sign changes, which are refined by
    bisection on a central-difference derivative to |dt| <= tol.  The
    boundary maximum at t = 0 is excluded.  Returns [(t, value), ...].
    """
    if t_max <= 0 or step <= 0:
        raise ValueError("t_max and step must be positive")
    ts = np.arange(0.0, t_max + 0.5 * step, step)
    fs = np.array([fn(t) for t in ts])
    diffs = np.diff(fs)
    scale = max(1.0, float(np.max(np.abs(fs))))

    h = 1e-6

    def deriv(t: float) -> float:
        return (fn(t + h) - fn(t - h)) / (2 * h)

    out = []
    for i in range(len(diffs) - 1):
        if diffs[i] * diffs[i + 1] >= 0:
            continue
        if max(abs(diffs[i]), abs(diffs[i + 1])) < 1e-12 * scale:
            continue  # flat-tail roundoff ripple, not a feature
        lo, hi = ts[i], ts[i + 2]
        g_lo = deriv(lo)
        if g_lo == 0.0:
            lo_t = lo
        else:
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                g_mid = deriv(mid)
                if g_mid == 0.0:
                    lo = hi = mid
                    break
                if (g_mid > 0) == (g_lo > 0):
                    lo = mid
                else:
                    hi = mid
            lo_t = 0.5 * (lo + hi)
        out.append((float(lo_t), float(fn(lo_t))))
    return out
