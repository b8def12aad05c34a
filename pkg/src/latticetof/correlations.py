"""First- and second-order spatial correlations of the expanded atomic field.

Each occupied lattice site j maps onto one plane-wave detector mode with
wavenumber k_j = j * dk, dk = 2*pi*w'/L^2. For single-occupancy Fock states
the normally ordered detector expectations reduce to closed forms:

    g1(sep) = (1/R) * sum_{j occupied} exp(i * k_j * sep)
    g2(sep) = ((R-1)/R) * (1 +/- m(sep)),
    m(sep)  = (2/(R(R-1))) * sum_pairs cos((k_a - k_b) * sep)

with + for Bosons and - for Fermions. Detector separations are quantized so
the ensemble relations become exact discrete Fourier pairs: the g1 grid uses
dk*dx = 2*pi/N (N samples, l = 0..N-1) and the g2 grid the half-step
dk*dx2 = pi/N on the symmetric range l = -N..N-1. Inverse normalizations are
1/N and 1/(2N) respectively, which is what makes the forward/inverse pairs
round-trip to machine precision.

fock_oracle.py provides the brute-force operator evaluation these closed
forms are validated against.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .lattice import Occupancy, Statistics

IMAG_RESIDUE_HARD = 1e-6    # above this the inversion input is inconsistent


@dataclass(frozen=True)
class ModeBasis:
    """Detector-plane mode geometry for an N-site lattice.

    delta_k: mode spacing 2*pi*w'/L^2 in 1/m
    dx:      slit-spacing quantum of the g1 grid, dk*dx = 2*pi/N exactly
    dx2:     half quantum of the symmetric g2 grid, dk*dx2 = pi/N exactly
    """

    n_modes: int
    delta_k: float
    dx: float
    dx2: float

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValueError("need at least two modes")
        if self.delta_k <= 0:
            raise ValueError("delta_k must be positive")
        if abs(self.delta_k * self.dx * self.n_modes / (2 * np.pi) - 1) > 1e-12:
            raise ValueError("dx is not on the exact 2*pi/N grid")
        if abs(self.dx2 - self.dx / 2) > 1e-18 * abs(self.dx):
            raise ValueError("dx2 must be half of dx")

    @classmethod
    def from_geometry(cls, n_modes: int, lattice_const: float,
                      l_squared: float) -> "ModeBasis":
        dk = 2 * np.pi * lattice_const / l_squared
        dx = 2 * np.pi / (n_modes * dk)
        return cls(n_modes=n_modes, delta_k=dk, dx=dx, dx2=dx / 2)

    @property
    def mode_wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_modes) * self.delta_k

    def g1_separations(self) -> np.ndarray:
        return np.arange(self.n_modes) * self.dx

    def g2_ells(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes)

    def g2_separations(self) -> np.ndarray:
        return self.g2_ells() * self.dx2


@dataclass
class FieldState:
    """Single-occupancy Fock state of the detector modes."""

    occupations: np.ndarray     # bool per mode
    statistics: Statistics
    atom_count: int

    def __post_init__(self):
        self.occupations = np.asarray(self.occupations, dtype=bool)
        if self.atom_count != int(self.occupations.sum()):
            raise ValueError("atom_count does not match occupations")

    @classmethod
    def from_occupancy(cls, occ: Occupancy,
                       statistics: Statistics = Statistics.BOSON) -> "FieldState":
        return cls(occupations=occ.sites.copy(), statistics=statistics,
                   atom_count=occ.atom_count)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.occupations)


def _sign(statistics: Statistics) -> float:
    return 1.0 if statistics is Statistics.BOSON else -1.0


def g1_of_state(state: FieldState, basis: ModeBasis, separation: float) -> complex:
    """Complex degree of coherence of one Fock state at a detector separation.

    Identical for Bosons and Fermions; the diagonal mode expectations carry no
    exchange sign.
    """
    if state.atom_count == 0:
        raise ValueError("empty field: g1 undefined for zero atoms")
    phases = state.indices * (basis.delta_k * separation)
    return complex(np.exp(1j * phases).mean())


def g2_of_state(state: FieldState, basis: ModeBasis, separation: float) -> float:
    """Normalized coincidence rate of one Fock state at a detector separation.

    Evaluates the pair sum over occupied modes of 1 +/- cos((k_a - k_b)*sep),
    normalized by the product of single-detector rates.
    """
    r = state.atom_count
    if r < 2:
        raise ValueError("need two atoms for coincidences")
    counts = kernels.pair_counts(state.indices, basis.n_modes)
    seps = np.arange(basis.n_modes)
    mod = counts @ np.cos(seps * (basis.delta_k * separation))
    mod *= 2.0 / (r * (r - 1))
    return (r - 1) / r * (1.0 + _sign(state.statistics) * mod)


# ---------------------------------------------------------------------------
# discrete Fourier pairs (Van Cittert-Zernike analogs)
# ---------------------------------------------------------------------------

def g1_from_p1(p1: np.ndarray, basis: ModeBasis) -> np.ndarray:
    """Ensemble g1 profile from a normalized site distribution.

    g1[l] = sum_j p1[j] exp(2i*pi*j*l/N) on the exact dk*dx = 2*pi/N grid.
    """
    p1 = np.asarray(p1, dtype=float)
    if p1.size != basis.n_modes:
        raise ValueError("p1 length does not match the mode basis")
    if abs(p1.sum() - 1.0) > 1e-9:
        raise ValueError("p1 must be normalized to 1 (see ProbabilityVectors "
                         "normalization flag)")
    return np.fft.ifft(p1) * basis.n_modes


def p1_from_g1_with_residue(g1: np.ndarray):
    """Invert a sampled g1 profile; returns (p1, discarded imaginary residue)."""
    g1 = np.asarray(g1, dtype=complex)
    n = g1.size
    spec = np.fft.fft(g1) / n
    residue = float(np.max(np.abs(spec.imag)))
    if residue > IMAG_RESIDUE_HARD:
        raise ValueError(
            f"inconsistent g1 samples: imaginary residue {residue:.3e} "
            f"exceeds {IMAG_RESIDUE_HARD:.0e}")
    return np.ascontiguousarray(spec.real), residue


def p1_from_g1(g1: np.ndarray) -> np.ndarray:
    """Site distribution from g1 sampled at l = 0..N-1 on the exact grid.

    p1[j] = (1/N) sum_l g1[l] exp(-2i*pi*j*l/N). The imaginary part of the
    inversion is discarded; residues above 1e-6 raise instead.
    """
    p1, _ = p1_from_g1_with_residue(g1)
    return p1


def _wrap_to_dft_order(linear):
    """Reorder l = -N..N-1 (ascending) into DFT index order l mod 2N."""
    n = linear.size // 2
    return np.concatenate([linear[n:], linear[:n]])


def _unwrap_from_dft_order(wrapped):
    n = wrapped.size // 2
    return np.concatenate([wrapped[n:], wrapped[:n]])


def g2_from_p2(p2: np.ndarray, atom_count: int, basis: ModeBasis,
               statistics: Statistics = Statistics.BOSON) -> np.ndarray:
    """Ensemble g2 profile on the symmetric half-step grid l = -N..N-1.

    (R^2/(R(R-1))) * g2[l] - 1 = +/- sum_j p2[j] cos(pi*j*l/N), evaluated via
    the even extension of p2 (full weight at j = 0, zero at j = -N) so the
    transform pair with p2_from_g2 is exact.
    """
    p2 = np.asarray(p2, dtype=float)
    n = basis.n_modes
    r = int(atom_count)
    if p2.size != n:
        raise ValueError("p2 length does not match the mode basis")
    if r < 2:
        raise ValueError("need two atoms for coincidences")
    if abs(p2.sum() - 1.0) > 1e-9:
        raise ValueError("p2 must be normalized to 1")
    if p2[0] != 0.0:
        raise ValueError("p2[0] must be zero: a single-occupancy lattice has "
                         "no pairs at zero separation")
    even = np.zeros(2 * n)
    even[0] = p2[0]
    even[1:n] = p2[1:] / 2.0
    even[n + 1:] = p2[1:][::-1] / 2.0
    h_wrapped = np.fft.ifft(even).real * (2 * n)
    h = _unwrap_from_dft_order(h_wrapped)
    return (r - 1) / r * (1.0 + _sign(statistics) * h)


def p2_from_g2(g2: np.ndarray, atom_count: int) -> np.ndarray:
    """Recover the pair-separation distribution from a symmetric g2 profile.

    Input is sampled at l = -N..N-1 in ascending order on the dk*dx2 = pi/N
    grid with Boson normalization. The 2N-point inverse transform of
    (R^2/(R(R-1))) * g2 - 1 is folded back onto j = 0..N-1, restoring full
    weight at the j = 0 edge, so p2_from_g2(g2_from_p2(p)) == p to 1e-12.
    """
    g2 = np.asarray(g2, dtype=float)
    if g2.size % 2:
        raise ValueError("g2 must have even length 2N")
    n = g2.size // 2
    r = int(atom_count)
    if r < 2:
        raise ValueError("need two atoms for coincidences")
    # index n + l holds separation +l, index n - l holds -l
    asym = float(np.max(np.abs(g2[n + 1:] - g2[1:n][::-1])))
    if asym > 1e-8:
        raise ValueError(
            f"g2 samples are not symmetric under reflection: max "
            f"|g2[l] - g2[-l]| = {asym:.3e}")
    h = (r / (r - 1)) * g2 - 1.0
    q = np.fft.fft(_wrap_to_dft_order(h)) / (2 * n)
    p2 = np.concatenate([[q[0].real], 2.0 * q[1:n].real])
    if p2[0] > 1e-6:
        warnings.warn(
            f"reconstructed p2 has mass {p2[0]:.3e} at zero separation, "
            "which is unphysical for single occupancy", stacklevel=2)
    return p2


def fermion_transform(g2: np.ndarray) -> np.ndarray:
    """Map a Boson coincidence profile to the Fermion one: g2 -> 2 - g2.

    Acts at the normalized modulation level where the uncorrelated plateau is
    1, i.e. on ghat = (R^2/(R(R-1))) * g2 (for two atoms, ghat = 2*g2). At
    that level the exchange flip (ghat - 1) -> -(ghat - 1) is exact for every
    atom number; it is an involution with fixed point 1.
    """
    return 2.0 - np.asarray(g2, dtype=float)


class SiegertResult(NamedTuple):
    residual: np.ndarray     # per-l residual g2 - 1 - |g1|^2 on the g2 grid
    max_abs: float


def siegert_check(g1: np.ndarray, g2: np.ndarray) -> SiegertResult:
    """Residual of the Gaussian-statistics relation g2 = 1 + |g1|^2.

    g1 is sampled on the l = 0..N-1 grid and g2 on the symmetric half-step
    grid; g1 is brought onto the g2 grid by exact re-evaluation (invert to the
    site distribution, then evaluate the phasor sum at the half-step
    separations), never by interpolation. Pass g2 normalized so its
    uncorrelated plateau is 1.
    """
    g1 = np.asarray(g1, dtype=complex)
    g2 = np.asarray(g2, dtype=float)
    n = g1.size
    if g2.size != 2 * n:
        raise ValueError(
            f"grid mismatch: g2 has {g2.size} samples, expected {2 * n}")
    p1 = p1_from_g1(g1)
    padded = np.zeros(2 * n, dtype=complex)
    padded[:n] = p1
    g1_half_wrapped = np.fft.ifft(padded) * (2 * n)
    g1_half = _unwrap_from_dft_order(g1_half_wrapped)
    residual = g2 - 1.0 - np.abs(g1_half) ** 2
    return SiegertResult(residual=residual, max_abs=float(np.max(np.abs(residual))))


# ---------------------------------------------------------------------------
# per-shot profiles over the full grids
# ---------------------------------------------------------------------------

@dataclass
class CorrelationProfile:
    """Sampled g1 (l = 0..N-1) and g2 (l = -N..N-1) profiles.

    g2 is None for single-atom states, which admit no coincidences.
    """

    basis: ModeBasis
    g1: np.ndarray                       # complex, length N
    g2: "np.ndarray | None"              # real, length 2N

    @property
    def visibility(self) -> np.ndarray:
        return np.abs(self.g1)


def g2_profile_from_counts(counts: np.ndarray, atom_count: int, n_modes: int,
                           statistics: Statistics = Statistics.BOSON) -> np.ndarray:
    """Coincidence profile on the symmetric grid from a pair-separation histogram."""
    r = int(atom_count)
    if r < 2:
        raise ValueError("need two atoms for coincidences")
    table = kernels.g2_cos_table(n_modes)
    mod = kernels.batch_g2_mod(counts[None, :], table, r * (r - 1) / 2)[0]
    half = (r - 1) / r * (1.0 + _sign(statistics) * mod)   # l = 0..N
    return np.concatenate([half[:0:-1], half[:-1]])


def profile_of_state(state: FieldState, basis: ModeBasis) -> CorrelationProfile:
    """Exact g1/g2 profiles of one Fock state over both canonical grids."""
    if state.atom_count == 0:
        raise ValueError("empty field: profiles undefined for zero atoms")
    idx = state.indices[None, :]
    g1 = kernels.batch_g1(idx, basis.n_modes)[0]
    if state.atom_count >= 2:
        counts = kernels.pair_counts(state.indices, basis.n_modes)
        g2 = g2_profile_from_counts(counts, state.atom_count, basis.n_modes,
                                    state.statistics)
    else:
        g2 = None
    return CorrelationProfile(basis=basis, g1=g1, g2=g2)


def write_profile_csv(path, profile: CorrelationProfile,
                      header_lines=()) -> None:
    """CSV export on the g2 index grid; g1 columns filled where sampled.

    Rows run over l = -N..N-1 at separations l*dx2. Even nonnegative l
    coincides with the g1 grid point l/2, where the g1 columns are populated.
    """
    basis = profile.basis
    n = basis.n_modes
    ells = basis.g2_ells()
    seps = basis.g2_separations()
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("ell,separation_m,re_g1,im_g1,visibility,g2\n")
        for i, ell in enumerate(ells):
            if ell >= 0 and ell % 2 == 0:
                z = profile.g1[ell // 2]
                g1_cols = f"{z.real:.17g},{z.imag:.17g},{abs(z):.17g}"
            else:
                g1_cols = ",,"
            g2_col = "" if profile.g2 is None else f"{profile.g2[i]:.17g}"
            fh.write(f"{ell},{seps[i]:.17g},{g1_cols},{g2_col}\n")
