"""Randomized spin-model ensembles and the dynamics-distance metric.

Seven ensembles of 2^s-dimensional Hamiltonians built from Pauli strings:
a transverse-field Ising chain and XXZ chain with one global random SO(3)
frame (TFIM, XXZ), their disordered twins with per-site frames (DTFIM,
DXXZ), a spin glass (SG), a central-spin model (CS) and a quartic Majorana
model (SYK).  Scalar couplings are standard normal; rotations are Haar on
SO(3); Pauli vectors are contracted with rows of the rotation matrices.

Chains are periodic (site j+1 taken mod s).  Spins are ordered A-major:
the first ``s_a`` spins form subsystem A, which for the central-spin model
are exactly the central spins.

Internally every term is a Pauli string in the symplectic representation
``i^k X^x Z^z`` (bit masks over sites), so Hamiltonian assembly is exact
integer phase bookkeeping; Hermiticity holds to machine precision.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, log2

import numpy as np

from . import spectral
from .sim import (
    MCResult,
    RngStream,
    mc_average,
    sample_gue,
    sample_haar_unitary,
    sample_so3,
)

__all__ = [
    "PauliString",
    "ModelSpec",
    "SPIN_FAMILIES",
    "FAMILIES",
    "jordan_wigner_majoranas",
    "build_model",
    "make_sampler",
    "rescale_energies",
    "DynamicsTrace",
    "distance_d6",
    "analytic_gue_trace",
    "analytic_poisson_trace",
    "ensemble_dynamics",
    "tfim_hamiltonian",
    "dtfim_hamiltonian",
    "xxz_hamiltonian",
    "dxxz_hamiltonian",
    "sg_hamiltonian",
    "cs_hamiltonian",
    "syk_hamiltonian",
]

SPIN_FAMILIES = ("TFIM", "DTFIM", "XXZ", "DXXZ", "SYK", "SG", "CS")
FAMILIES = SPIN_FAMILIES + ("GUE", "POISSON")


@dataclass(frozen=True)
class PauliString:
    """i^k * X^x * Z^z with x, z site bit masks (site 0 = highest bit)."""

    x: int = 0
    z: int = 0
    k: int = 0  # power of i, mod 4

    def __mul__(self, other: "PauliString") -> "PauliString":
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        k = (self.k + other.k + 2 * (self.z & other.x).bit_count()) % 4
        return PauliString(self.x ^ other.x, self.z ^ other.z, k)

    def add_into(self, ham: np.ndarray, coeff: complex) -> None:
        """Accumulate coeff * string into a dense matrix in place."""
        n = ham.shape[0]
        cols = np.arange(n)
        rows = cols ^ self.x
        parity = np.bitwise_count(cols & self.z) & 1
        ham[rows, cols] += coeff * (1j**self.k) * (1.0 - 2.0 * parity)

    def matrix(self, s: int) -> np.ndarray:
        out = np.zeros((1 << s, 1 << s), dtype=complex)
        self.add_into(out, 1.0)
        return out


def _pauli(s: int, site: int, axis: int) -> PauliString:
    # axis 1, 2, 3 = x, y, z; sigma^2 = i X Z
    bit = 1 << (s - 1 - site)
    if axis == 1:
        return PauliString(x=bit)
    if axis == 2:
        return PauliString(x=bit, z=bit, k=1)
    if axis == 3:
        return PauliString(z=bit)
    raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def _string(s: int, factors) -> PauliString:
    out = PauliString()
    for site, axis in factors:
        out = out * _pauli(s, site, axis)
    return out


def _assemble(s: int, terms) -> np.ndarray:
    ham = np.zeros((1 << s, 1 << s), dtype=complex)
    for coeff, factors in terms:
        if coeff != 0.0:
            _string(s, factors).add_into(ham, coeff)
    return ham


def _majorana_strings(s: int) -> list[PauliString]:
    # One-to-two mapping: site j carries modes 2j and 2j+1, with a Z string
    # on all earlier sites enforcing anticommutation across sites.
    strings = []
    for j in range(s):
        tail = PauliString()
        for k in range(j):
            tail = tail * _pauli(s, k, 3)
        strings.append(tail * _pauli(s, j, 1))
        strings.append(tail * _pauli(s, j, 2))
    return strings


def jordan_wigner_majoranas(s: int) -> list[np.ndarray]:
    """2s Majorana operators on s spins as dense 2^s x 2^s matrices.

    Mode 2j is Z_0..Z_{j-1} X_j and mode 2j+1 is Z_0..Z_{j-1} Y_j; they
    satisfy {f_a, f_b} = 2 delta_ab and f_a^2 = identity.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    return [p.matrix(s) for p in _majorana_strings(s)]


# ---------------------------------------------------------------------------
# Hamiltonian builders.  Each takes its random inputs explicitly so tests
# can pin them; build_model draws them from a stream in a fixed order.
# ---------------------------------------------------------------------------


def _bond_terms(s, j, rot_row_a, rot_row_b, coeff):
    # coeff * (rot_row_a . sigma_j)(rot_row_b . sigma_{j+1})
    nxt = (j + 1) % s
    return [
        (coeff * rot_row_a[a] * rot_row_b[b], [(j, a + 1), (nxt, b + 1)])
        for a in range(3)
        for b in range(3)
    ]


def _field_terms(j, rot_row, coeff):
    return [(coeff * rot_row[a], [(j, a + 1)]) for a in range(3)]


def tfim_hamiltonian(s, J, rotation, g) -> np.ndarray:
    """Ising chain along a random axis with a transverse random field:

    sum_j (n1.sigma_j)(n1.sigma_{j+1}) + J g (n3.sigma_j),
    n1, n3 the first and third rows of one global rotation.
    """
    terms = []
    for j in range(s):
        terms += _bond_terms(s, j, rotation[0], rotation[0], 1.0)
        terms += _field_terms(j, rotation[2], J * g)
    return _assemble(s, terms)


def dtfim_hamiltonian(s, J, rotations_x, rotations_y, g) -> np.ndarray:
    """Disordered twin of the Ising chain: per-site frames and fields."""
    terms = []
    for j in range(s):
        terms += _bond_terms(s, j, rotations_x[j][0], rotations_x[j][0], 1.0)
        terms += _field_terms(j, rotations_y[j][2], J * g[j])
    return _assemble(s, terms)


def xxz_hamiltonian(s, B, J, rotation, g, h) -> np.ndarray:
    """XXZ chain in one random frame with anisotropy J g and field B h."""
    terms = []
    for j in range(s):
        terms += _bond_terms(s, j, rotation[0], rotation[0], 1.0)
        terms += _bond_terms(s, j, rotation[1], rotation[1], 1.0)
        terms += _bond_terms(s, j, rotation[2], rotation[2], J * g)
        terms += _field_terms(j, rotation[2], B * h)
    return _assemble(s, terms)


def dxxz_hamiltonian(s, B, J, rotations_x, rotations_y, g, h) -> np.ndarray:
    """Disordered twin of the XXZ chain: per-site frames, scalars g_j, h_j."""
    terms = []
    for j in range(s):
        rx = rotations_x[j]
        terms += _bond_terms(s, j, rx[0], rx[0], 1.0)
        terms += _bond_terms(s, j, rx[1], rx[1], 1.0)
        terms += _bond_terms(s, j, rx[2], rx[2], J * g[j])
        terms += _field_terms(j, rotations_y[j][2], B * h[j])
    return _assemble(s, terms)


def sg_hamiltonian(s, J1, J2, J3, h_diag, h_shared, h_site, g_shared, g_site):
    """Spin glass: bonds (h^a delta_ab + J1 h^ab + J2 h_j^ab) sigma^a sigma^b
    plus fields (g^a + J3 g_j^a) sigma^a."""
    terms = []
    for j in range(s):
        nxt = (j + 1) % s
        for a in range(3):
            for b in range(3):
                coeff = (
                    (h_diag[a] if a == b else 0.0)
                    + J1 * h_shared[a, b]
                    + J2 * h_site[j, a, b]
                )
                terms.append((coeff, [(j, a + 1), (nxt, b + 1)]))
        for a in range(3):
            terms.append((g_shared[a] + J3 * g_site[j, a], [(j, a + 1)]))
    return _assemble(s, terms)


def cs_hamiltonian(s_a, s_b, B, J, g, h_central, h_bath) -> np.ndarray:
    """Central-spin model: local z fields on the s_a central spins, random
    Heisenberg-type coupling inside the central block (strength J) and unit
    random coupling of every central spin to every bath spin."""
    s = s_a + s_b
    terms = []
    for j in range(s_a):
        terms.append((B * g[j], [(j, 3)]))
    for j in range(s_a):
        for k in range(s_a):
            for a in range(3):
                terms.append((J * h_central[j, k, a], [(j, a + 1), (k, a + 1)]))
    for j in range(s_a):
        for k in range(s_b):
            for a in range(3):
                terms.append((h_bath[j, k, a], [(j, a + 1), (s_a + k, a + 1)]))
    return _assemble(s, terms)


def syk_hamiltonian(s, J2, couplings) -> np.ndarray:
    """Quartic Majorana model J2 sum_{i<j<k<l} g_{ijkl} f_i f_j f_k f_l.

    ``couplings`` is a flat array over 4-subsets of the 2s modes in
    lexicographic order.
    """
    if s < 2:
        raise ValueError("need at least 4 Majorana modes (s >= 2)")
    modes = _majorana_strings(s)
    n_terms = comb(2 * s, 4)
    couplings = np.asarray(couplings, dtype=float)
    if couplings.shape != (n_terms,):
        raise ValueError(f"expected {n_terms} couplings, got {couplings.shape}")
    ham = np.zeros((1 << s, 1 << s), dtype=complex)
    for coeff, (i, j, k, l) in zip(
        couplings, itertools.combinations(range(2 * s), 4)
    ):
        string = modes[i] * modes[j] * modes[k] * modes[l]
        string.add_into(ham, J2 * coeff)
    return ham


@dataclass(frozen=True)
class ModelSpec:
    """Reproducible description of one Hamiltonian ensemble.

    ``d_a`` and ``d_b`` are the subsystem dimensions; spin families require
    both to be powers of two (s_a = log2 d_a spins belong to A).  Couplings
    not named by the family are ignored.
    """

    family: str
    d_a: int
    d_b: int
    couplings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.d_a < 1 or self.d_b < 1:
            raise ValueError("subsystem dimensions must be >= 1")
        if self.family in SPIN_FAMILIES:
            for dim in (self.d_a, self.d_b):
                if dim & (dim - 1):
                    raise ValueError(
                        f"{self.family} needs power-of-two dimensions, got {dim}"
                    )
            if self.family == "SYK" and self.n_spins < 2:
                raise ValueError("SYK needs at least 2 spins (4 Majorana modes)")
            if self.family == "CS" and self.s_a < 1:
                raise ValueError("CS needs at least one central spin")

    @property
    def d(self) -> int:
        return self.d_a * self.d_b

    @property
    def s_a(self) -> int:
        return int(log2(self.d_a))

    @property
    def s_b(self) -> int:
        return int(log2(self.d_b))

    @property
    def n_spins(self) -> int:
        return self.s_a + self.s_b

    def coupling(self, name: str, default: float = 1.0) -> float:
        return float(self.couplings.get(name, default))


def build_model(spec: ModelSpec, rng) -> np.ndarray:
    """Draw one Hamiltonian of the ensemble.

    Stochastic inputs are drawn from ``rng`` in a fixed documented order
    (rotations first, then scalar coupling blocks), so a given stream state
    always produces the same Hamiltonian.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    fam = spec.family
    s = spec.n_spins
    if fam == "GUE":
        return sample_gue(spec.d, spec.coupling("lambda", 1.0), gen)
    if fam == "POISSON":
        energies = gen.exponential(np.sqrt(spec.d + 1), size=spec.d)
        basis = sample_haar_unitary(spec.d, gen)
        return (basis * energies) @ basis.conj().T
    if fam == "TFIM":
        rot = sample_so3(gen)
        return tfim_hamiltonian(s, spec.coupling("J"), rot, gen.normal())
    if fam == "DTFIM":
        rx = [sample_so3(gen) for _ in range(s)]
        ry = [sample_so3(gen) for _ in range(s)]
        return dtfim_hamiltonian(s, spec.coupling("J"), rx, ry, gen.normal(size=s))
    if fam == "XXZ":
        rot = sample_so3(gen)
        return xxz_hamiltonian(
            s, spec.coupling("B"), spec.coupling("J"), rot, gen.normal(), gen.normal()
        )
    if fam == "DXXZ":
        rx = [sample_so3(gen) for _ in range(s)]
        ry = [sample_so3(gen) for _ in range(s)]
        return dxxz_hamiltonian(
            s,
            spec.coupling("B"),
            spec.coupling("J"),
            rx,
            ry,
            gen.normal(size=s),
            gen.normal(size=s),
        )
    if fam == "SG":
        return sg_hamiltonian(
            s,
            spec.coupling("J1"),
            spec.coupling("J2"),
            spec.coupling("J3"),
            gen.normal(size=3),
            gen.normal(size=(3, 3)),
            gen.normal(size=(s, 3, 3)),
            gen.normal(size=3),
            gen.normal(size=(s, 3)),
        )
    if fam == "CS":
        s_a, s_b = spec.s_a, spec.s_b
        return cs_hamiltonian(
            s_a,
            s_b,
            spec.coupling("B"),
            spec.coupling("J"),
            gen.normal(size=s_a),
            gen.normal(size=(s_a, s_a, 3)),
            gen.normal(size=(s_a, s_b, 3)) if s_b else np.zeros((s_a, 0, 3)),
        )
    if fam == "SYK":
        n_terms = comb(2 * s, 4)
        return syk_hamiltonian(s, spec.coupling("J2"), gen.normal(size=n_terms))
    raise AssertionError(fam)


def make_sampler(spec: ModelSpec):
    """Sampler callable for :func:`guedyn.sim.mc_average`."""
    return lambda gen: build_model(spec, gen)


def rescale_energies(spectra) -> float:
    """Multiplicative energy scale matching the Gaussian-ensemble spread.

    Returns the single factor c such that the pooled ensemble average of
    (c E_i - c E_j)^2 over distinct pairs equals 2(d+1).
    """
    spectra = np.asarray(spectra, dtype=float)
    if spectra.ndim == 1:
        spectra = spectra[None, :]
    n, d = spectra.shape
    if d < 2:
        raise ValueError("spectra need at least 2 levels")
    sq = (spectra**2).sum(axis=1)
    tot = spectra.sum(axis=1)
    pair_mean = (2 * d * sq - 2 * tot**2).sum() / (n * d * (d - 1))
    if pair_mean <= 0:
        raise ValueError("degenerate ensemble: zero pair second moment")
    return float(np.sqrt(2 * (d + 1) / pair_mean))


@dataclass
class DynamicsTrace:
    """Time series of ensemble-averaged reduced density matrices."""

    times: np.ndarray
    rho: np.ndarray  # (T, d_A, d_A)

    @classmethod
    def from_mc(cls, result: MCResult) -> "DynamicsTrace":
        return cls(result.times, result.rho_mean)


def analytic_gue_trace(d_a: int, d_b: int, times) -> DynamicsTrace:
    """Closed-form averaged rho_A(t) for the Gaussian unitary ensemble."""
    return _coeff_trace(d_a, times, [spectral.rho_mean_coeffs(d_a, d_b, t) for t in times])


def analytic_poisson_trace(d_a: int, d_b: int, times) -> DynamicsTrace:
    """Closed-form averaged rho_A(t) for Poisson level statistics."""
    return _coeff_trace(
        d_a, times, [spectral.rho_poisson_coeffs(d_a, d_b, t) for t in times]
    )


def _coeff_trace(d_a, times, coeffs) -> DynamicsTrace:
    times = np.asarray(times, dtype=float)
    rho = np.zeros((times.size, d_a, d_a), dtype=complex)
    for idx, (p1, pmix) in enumerate(coeffs):
        rho[idx] = pmix * np.eye(d_a) / d_a
        rho[idx, 0, 0] += p1
    return DynamicsTrace(times, rho)


def distance_d6(a: DynamicsTrace, b: DynamicsTrace) -> float:
    """Time integral of the spectral norm of the trace difference.

    Trapezoidal rule on the common grid (the standard window is [0, 6]);
    the norm is the largest singular value of rho_a(t) - rho_b(t).
    """
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValueError("traces must share an identical time grid")
    norms = np.linalg.svd(a.rho - b.rho, compute_uv=False)[:, 0]
    return float(np.trapezoid(norms, a.times))


def ensemble_dynamics(
    spec: ModelSpec,
    times,
    n_samples: int,
    rng: RngStream,
    threads: int = 1,
    scramble: bool = False,
    stream_offset: int = 0,
) -> MCResult:
    """Averaged subsystem dynamics of one ensemble.

    Spin-model families are first rescaled by one ensemble-global energy
    factor, estimated from a pilot pass over the same per-sample streams so
    that pooled <(E_i - E_j)^2> = 2(d+1); the Gaussian and Poisson
    baselines are calibrated analytically and skip the pilot pass.
    """
    times = np.asarray(times, dtype=float)
    sampler = make_sampler(spec)
    scale = 1.0
    if spec.family in SPIN_FAMILIES:
        spectra = [
            np.linalg.eigvalsh(
                sampler(RngStream(rng.master_seed, stream_offset + i).generator())
            )
            for i in range(n_samples)
        ]
        scale = rescale_energies(spectra)
    return mc_average(
        sampler,
        spec.d_a,
        spec.d_b,
        times,
        n_samples,
        rng,
        scramble=scramble,
        energy_scale=scale,
        threads=threads,
        stream_offset=stream_offset,
    )
