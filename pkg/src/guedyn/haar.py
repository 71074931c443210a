"""Symbolic Haar averages of reduced-density-matrix trace moments.

The average of a monomial in Haar-unitary matrix entries is a double sum
over permutation pairs,

    sum_{sigma, tau in S_q}  R_sigma * Q_tau * Wg(d, sigma tau^-1),

where ``R_sigma`` contracts the outer (row/column) index pattern and
``Q_tau`` contracts the internal indices that carry the spectral phases.
For the n-th trace moment of the reduced density matrix of an ``A``
subsystem (dimension ``d_A``) coupled to a bath (``d_B``), q = 2n and

* ``R_sigma`` is a monomial ``d_A^a d_B^b`` (free index classes),
* ``Q_tau``   is a product of spectral phase sums
  ``iota(m t) = sum_j exp(i E_j m t)``, one factor per cycle of tau, with
  ``m`` the sum of the phase coefficients around the cycle (m = 0 gives d).

Everything up to numeric evaluation is exact: coefficients are
``fractions.Fraction`` and the Weingarten values come from
:mod:`guedyn.symgroup`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NumericalError
from .symgroup import Permutation, weingarten

__all__ = [
    "MonomialSpec",
    "RValue",
    "QValue",
    "SymbolicAverage",
    "build_trace_moment_spec",
    "compute_R",
    "compute_Q",
    "haar_average_moment",
    "evaluate_average",
    "iota",
    "chi_of_spectrum",
    "xi_of_spectrum",
    "zeta_of_spectrum",
    "rho_coefficients_closed_form",
    "purity_closed_form",
    "third_moment_closed_form",
]

# A slot in the index lists is either ONE (the fixed initial-state label)
# or a composite (a_symbol, b_symbol) pair of integer symbol ids.
ONE = None


@dataclass(frozen=True)
class MonomialSpec:
    """Index pattern of a degree-q Haar monomial with spectral phases."""

    q: int
    I: tuple  # noqa: E741  (paper-facing name kept: outer V indices)
    I_prime: tuple  # outer V^dagger indices
    phase_coeffs: tuple[int, ...]  # one +-1 per internal index slot

    def __post_init__(self):
        if not (len(self.I) == len(self.I_prime) == len(self.phase_coeffs) == self.q):
            raise ValueError("slot lists must all have length q")


@dataclass(frozen=True)
class RValue:
    """Contracted outer-index factor: d_A^dA_power * d_B^dB_power.

    ``channel`` distinguishes the operator content for the n = 1 matrix
    average: "scalar" for trace moments, "proj" for |1_A><1_A| and "mix"
    for the maximally mixed operator on A.
    """

    dA_power: int
    dB_power: int
    channel: str = "scalar"

    def numeric(self, d_A: int, d_B: int) -> int:
        return d_A**self.dA_power * d_B**self.dB_power


@dataclass(frozen=True)
class QValue:
    """Contracted internal factor: product over iota(m * t), m per cycle.

    ``iota_multiples`` is the sorted multiset of cycle phase sums; an
    ``m = 0`` entry contributes a factor d (= iota(0)).
    """

    iota_multiples: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "iota_multiples", tuple(sorted(self.iota_multiples)))

    def value(self, iota_table: dict[int, complex]) -> complex:
        out = complex(1.0)
        for m in self.iota_multiples:
            out *= iota_table[m]
        return out


def build_trace_moment_spec(n: int) -> MonomialSpec:
    """Index pattern of Tr rho_A^n(t), a q = 2n monomial.

    Factor m of the cyclic product contributes slots ((a_m, b_m), ONE) to I
    and (ONE, (a_{m+1}, b_m)) to I', with a_{n+1} cyclically identified
    with a_1.  Phase coefficients alternate (-1, +1, ...).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    I, I_prime = [], []
    for m in range(1, n + 1):
        m_next = 1 if m == n else m + 1
        I.extend([(("a", m), ("b", m)), ONE])
        I_prime.extend([ONE, (("a", m_next), ("b", m))])
    coeffs = (-1, +1) * n
    return MonomialSpec(2 * n, tuple(I), tuple(I_prime), coeffs)


class _UnionFind:
    def __init__(self):
        self.parent = {}
        self.pinned = set()

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry
        if rx in self.pinned or ry in self.pinned:
            self.pinned.update((rx, ry))

    def pin(self, x):
        self.pinned.add(self.find(x))

    def is_pinned(self, x):
        return self.find(x) in self.pinned


def _contract_outer(spec: MonomialSpec, sigma: Permutation) -> _UnionFind:
    # delta_{I, sigma(I')} = prod_l delta_{I_l, I'_{sigma(l)}}
    uf = _UnionFind()
    for slot in range(1, spec.q + 1):
        left = spec.I[slot - 1]
        right = spec.I_prime[sigma(slot) - 1]
        if left is ONE and right is ONE:
            continue
        if left is ONE or right is ONE:
            comp = right if left is ONE else left
            uf.pin(comp[0])
            uf.pin(comp[1])
        else:
            uf.union(left[0], right[0])
            uf.union(left[1], right[1])
    return uf


def compute_R(spec: MonomialSpec, sigma: Permutation) -> RValue:
    """Contract the outer Kronecker deltas delta_{I, sigma(I')}.

    Symbols equated with the fixed label are pinned; every surviving free
    symbol class contributes one factor of its subsystem dimension.
    """
    if sigma.q != spec.q:
        raise ValueError("permutation size must match spec")
    uf = _contract_outer(spec, sigma)
    symbols = {s for slot in spec.I + spec.I_prime if slot is not ONE for s in slot}
    free_roots = {uf.find(s) for s in symbols if not uf.is_pinned(s)}
    a_free = sum(1 for r in free_roots if r[0] == "a")
    b_free = sum(1 for r in free_roots if r[0] == "b")
    return RValue(a_free, b_free)


def compute_Q(spec: MonomialSpec, tau: Permutation) -> QValue:
    """Contract the internal deltas delta_{J, tau(J')} with the phases.

    The internal indices are constant along cycles of tau, so each cycle
    contributes iota(m t) with m the sum of phase coefficients on it.
    """
    if tau.q != spec.q:
        raise ValueError("permutation size must match spec")
    sums = [sum(spec.phase_coeffs[slot - 1] for slot in cyc) for cyc in tau.cycles()]
    return QValue(tuple(sums))


@dataclass
class SymbolicAverage:
    """Haar average of a trace moment as exact (R, Q) -> coefficient terms."""

    n: int
    d_A: int
    d_B: int
    terms: dict[tuple[RValue, QValue], Fraction] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.d_A * self.d_B

    def _iota_table(self, spectrum, t: float) -> dict[int, complex]:
        spectrum = np.asarray(spectrum, dtype=float)
        if spectrum.shape != (self.d,):
            raise ValueError(f"spectrum must have length d = {self.d}")
        needed = {m for _, qv in self.terms for m in qv.iota_multiples}
        table = {}
        for m in needed:
            table[m] = complex(self.d) if m == 0 else complex(
                np.exp(1j * m * t * spectrum).sum()
            )
        return table

    def evaluate(self, spectrum, t: float) -> float:
        """Numeric value at a fixed spectrum and time.

        For n = 1 this is the trace of the averaged density matrix, i.e.
        exactly 1; the matrix content is in :meth:`rho_coefficients`.
        """
        table = self._iota_table(spectrum, t)
        total = complex(0.0)
        for (rv, qv), coeff in self.terms.items():
            total += float(coeff) * rv.numeric(self.d_A, self.d_B) * qv.value(table)
        return _real_or_raise(total)

    def rho_coefficients(self, spectrum, t: float) -> tuple[float, float]:
        """(p1, pmix) for n = 1: <rho_A> = p1 |1_A><1_A| + pmix 1_A/d_A."""
        if self.n != 1:
            raise ValueError("rho_coefficients is defined for n = 1 only")
        table = self._iota_table(spectrum, t)
        sums = {"proj": complex(0.0), "mix": complex(0.0)}
        for (rv, qv), coeff in self.terms.items():
            sums[rv.channel] += (
                float(coeff) * rv.numeric(self.d_A, self.d_B) * qv.value(table)
            )
        return _real_or_raise(sums["proj"]), _real_or_raise(sums["mix"])


def _real_or_raise(z: complex, tol: float = 1e-10) -> float:
    if abs(z.imag) > tol * max(1.0, abs(z.real)):
        raise NumericalError(f"non-real average: {z}")
    return z.real


def haar_average_moment(n: int, d_A: int, d_B: int) -> SymbolicAverage:
    """Exact Haar average of Tr rho_A^n(t) over the eigenbasis group U(d).

    Enumerates all (2n)!^2 permutation pairs directly.  For n = 1 the
    average is resolved into the |1_A><1_A| and 1_A/d_A operator channels
    instead of being traced.
    """
    if n < 1 or d_A < 1 or d_B < 1:
        raise ValueError("n, d_A, d_B must be positive")
    d = d_A * d_B
    if n == 1:
        return _rho_matrix_average(d_A, d_B)

    spec = build_trace_moment_spec(n)
    q = spec.q
    elements = Permutation.all_elements(q)
    n_el = len(elements)

    r_values = [compute_R(spec, s) for s in elements]
    q_values = [compute_Q(spec, t) for t in elements]

    # Intern R and Q values; aggregate pair counts per (R, Q, class) key.
    r_index: dict[RValue, int] = {}
    q_index: dict[QValue, int] = {}
    r_ids = [r_index.setdefault(r, len(r_index)) for r in r_values]
    q_ids = [q_index.setdefault(qv, len(q_index)) for qv in q_values]

    images = [p.images for p in elements]
    inv_images = [p.inverse().images for p in elements]
    perm_id = {img: i for i, img in enumerate(images)}
    class_of = [p.cycle_type() for p in elements]
    classes: dict[tuple[int, ...], int] = {}
    class_ids = [classes.setdefault(c, len(classes)) for c in class_of]
    class_list = list(classes)

    counts: dict[tuple[int, int, int], int] = {}
    rng_q = range(q)
    for i in range(n_el):
        sigma = images[i]
        ri = r_ids[i]
        for j in range(n_el):
            tau_inv = inv_images[j]
            composed = tuple(sigma[tau_inv[k] - 1] for k in rng_q)
            key = (ri, q_ids[j], class_ids[perm_id[composed]])
            counts[key] = counts.get(key, 0) + 1

    wg = {c: weingarten(d, class_list[c]) for c in range(len(class_list))}
    r_list = list(r_index)
    q_list = list(q_index)
    avg = SymbolicAverage(n, d_A, d_B)
    for (ri, qi, ci), mult in counts.items():
        key = (r_list[ri], q_list[qi])
        avg.terms[key] = avg.terms.get(key, Fraction(0)) + mult * wg[ci]
    avg.terms = {k: v for k, v in avg.terms.items() if v != 0}
    return avg


def _rho_matrix_average(d_A: int, d_B: int) -> SymbolicAverage:
    # q = 2 monomial of <rho_A> itself, with open row/column indices.
    # R_id pins everything (projector channel); R_(12) identifies the open
    # A indices and frees the bath index (mixed channel, weight d_B 1_A).
    d = d_A * d_B
    wg_id = weingarten(d, (1, 1))
    wg_swap = weingarten(d, (2,))
    chi = QValue((-1, 1))
    const = QValue((0,))
    avg = SymbolicAverage(1, d_A, d_B)
    proj = RValue(0, 0, "proj")
    # d_B * 1_A = d * (1_A / d_A): store the mixed channel as coefficient of
    # the unit-trace operator 1_A/d_A, hence one power of each dimension.
    mix = RValue(1, 1, "mix")
    avg.terms[(proj, chi)] = wg_id
    avg.terms[(proj, const)] = wg_swap
    avg.terms[(mix, chi)] = wg_swap
    avg.terms[(mix, const)] = wg_id
    return avg


def evaluate_average(avg: SymbolicAverage, spectrum, t: float) -> float:
    """Functional form of :meth:`SymbolicAverage.evaluate`."""
    return avg.evaluate(spectrum, t)


# ---------------------------------------------------------------------------
# Spectral phase sums and the closed forms they assemble into.
# ---------------------------------------------------------------------------


def iota(spectrum, t: float) -> complex:
    """iota(t) = sum_j exp(i E_j t)."""
    spectrum = np.asarray(spectrum, dtype=float)
    return complex(np.exp(1j * t * spectrum).sum())


def chi_of_spectrum(spectrum, t: float) -> float:
    """chi(t) = |iota(t)|^2, the phase sum driving <rho_A>."""
    return abs(iota(spectrum, t)) ** 2


def xi_of_spectrum(spectrum, t: float) -> float:
    """xi(t) = |iota^2(t) + iota(2t)|^2 - 4 |iota(t)|^2 (purity phase sum)."""
    i1 = iota(spectrum, t)
    i2 = iota(spectrum, 2 * t)
    return abs(i1 * i1 + i2) ** 2 - 4 * abs(i1) ** 2


def zeta_of_spectrum(spectrum, t: float) -> float:
    """zeta(t) = |iota^3 + 2 iota(3t) + 3 iota(t) iota(2t)|^2 - 36 |iota|^2."""
    i1 = iota(spectrum, t)
    i2 = iota(spectrum, 2 * t)
    i3 = iota(spectrum, 3 * t)
    return abs(i1**3 + 2 * i3 + 3 * i1 * i2) ** 2 - 36 * abs(i1) ** 2


def rho_coefficients_closed_form(
    d_A: int, d_B: int, spectrum, t: float
) -> tuple[float, float]:
    """Eigenbasis-averaged density matrix at fixed spectrum:

    <rho_A> = (chi - 1)/(d^2 - 1) |1_A><1_A| + (d^2 - chi)/(d^2 - 1) 1_A/d_A.
    """
    d = d_A * d_B
    chi = chi_of_spectrum(spectrum, t)
    return (chi - 1) / (d * d - 1), (d * d - chi) / (d * d - 1)


def purity_closed_form(d_A: int, d_B: int, spectrum, t: float) -> float:
    """Eigenbasis-averaged purity at fixed spectrum (compact closed form)."""
    d = d_A * d_B
    xi = xi_of_spectrum(spectrum, t)
    frac = (d_A + d_B) / (d + 1)
    return xi / (d * d * (d - 1) * (d + 3)) * (1 - frac) + frac


def third_moment_closed_form(d_A: int, d_B: int, spectrum, t: float) -> float:
    """Eigenbasis-averaged Tr rho_A^3 at fixed spectrum."""
    d = d_A * d_B
    s = d_A + d_B
    xi = xi_of_spectrum(spectrum, t)
    zeta = zeta_of_spectrum(spectrum, t)
    lead = (s * s + d + 1) / ((d + 1) * (d + 2))
    pref = (d + 1 - s) / (d * d * (d + 1) ** 2 * (d + 5))
    inner = (zeta - 9 * xi) * (1 - s) / ((d - 1) * (d + 2)) + s * (
        3 * xi / (d + 3) + zeta / ((d - 1) * (d + 4))
    )
    return lead + pref * inner
