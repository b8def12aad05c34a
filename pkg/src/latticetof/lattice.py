"""Lattice geometry, occupancy statistics, and shot generation.

A "shot" is one realization of the lattice filling: a boolean vector with at
most one atom per site and a fixed atom number R = floor(fill * N). Four
distribution models generate shots (uniform random, bunched clusters around a
seed site, anti-bunched with a minimum pairwise gap, and a super-lattice comb
under a Gaussian envelope). Estimators recover the single-site occupation
probabilities P1 and the pair-separation distribution P2 from shot ensembles,
plus the algebraic relations linking them (Bayes factorization, stationary
statistics, autocorrelation for independent sites).

Separation statistics use hard lattice edges throughout: sums over site pairs
truncate at the boundary instead of wrapping. Cluster *placement* in the
bunched model is toroidal (offsets are taken mod N) so that a uniformly random
seed makes the single-site marginal exactly uniform.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels


class Statistics(Enum):
    BOSON = "boson"
    FERMION = "fermion"


class SeedMode(Enum):
    FIXED = "fixed"
    RANDOM_UNIFORM = "random"


@dataclass(frozen=True)
class LatticeConfig:
    """Static lattice geometry and target filling.

    n_sites: number of lattice sites N (>= 2)
    lattice_const: site spacing w' in meters
    fill_factor: fraction of sites occupied per shot, in [0, 1]
    statistics: exchange statistics of the trapped atoms
    """

    n_sites: int
    lattice_const: float
    fill_factor: float
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.lattice_const <= 0:
            raise ValueError("lattice_const must be positive")
        if not 0.0 <= self.fill_factor <= 1.0:
            raise ValueError(
                f"fill_factor out of range [0, 1]: {self.fill_factor}")

    @property
    def atoms_per_shot(self) -> int:
        return int(np.floor(self.fill_factor * self.n_sites))


@dataclass
class Occupancy:
    """One shot of the lattice filling; at most one atom per site."""

    sites: np.ndarray          # bool vector, length N
    atom_count: int            # cached popcount of sites

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=bool)
        if self.sites.ndim != 1:
            raise ValueError("sites must be a 1D boolean vector")
        if self.atom_count != int(self.sites.sum()):
            raise ValueError("atom_count does not match sites")

    @classmethod
    def from_sites(cls, sites) -> "Occupancy":
        sites = np.asarray(sites, dtype=bool)
        return cls(sites=sites, atom_count=int(sites.sum()))

    @classmethod
    def from_indices(cls, indices, n_sites) -> "Occupancy":
        sites = np.zeros(n_sites, dtype=bool)
        sites[np.asarray(indices, dtype=np.int64)] = True
        return cls.from_sites(sites)

    @property
    def n_sites(self) -> int:
        return self.sites.size

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.sites)


# ---------------------------------------------------------------------------
# distribution models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomModel:
    """Uniformly random R-subset of sites."""

    target_fill: float

    def __post_init__(self):
        _check_fill(self.target_fill)


@dataclass(frozen=True)
class BunchedModel:
    """Atoms cluster around a seed site.

    Candidate sites follow the discretized Gaussian conditional density
    exp(-2*((x - x_seed)/(2*tau))**2), i.e. standard deviation tau, with
    already occupied sites rejected and redrawn until R atoms are placed.
    That rejection scheme is realized exactly (same law, bounded runtime)
    by Gumbel-top-R sampling without replacement on the site weights.
    Offsets from the seed are taken mod N, so a uniformly random seed
    translates the cluster around a torus and leaves the single-site
    marginal flat.
    """

    target_fill: float
    tau: float                                  # cluster width in meters
    seed_mode: SeedMode = SeedMode.FIXED
    seed_site: Optional[int] = None

    def __post_init__(self):
        _check_fill(self.target_fill)
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.seed_mode is SeedMode.FIXED and self.seed_site is None:
            raise ValueError("fixed seed mode requires seed_site")


@dataclass(frozen=True)
class AntiBunchedModel:
    """Uniform placement conditioned on pairwise gap >= min_gap.

    Sampled by the exact order-statistics bijection (choose R sorted values
    from the contracted range, then re-expand), which is uniform over all
    admissible configurations and never degrades into long rejection loops.
    """

    target_fill: float
    min_gap: int

    def __post_init__(self):
        _check_fill(self.target_fill)
        if self.min_gap < 1:
            raise ValueError("min_gap must be >= 1")


@dataclass(frozen=True)
class SuperLatticeModel:
    """Occupancy concentrated on sites = 0 (mod period) under a Gaussian envelope."""

    target_fill: float
    period: int
    envelope_width: float                       # meters

    def __post_init__(self):
        _check_fill(self.target_fill)
        if self.period < 2:
            raise ValueError("period must be >= 2")
        if self.envelope_width <= 0:
            raise ValueError("envelope_width must be positive")


DistributionModel = Union[RandomModel, BunchedModel, AntiBunchedModel,
                          SuperLatticeModel]


def _check_fill(fill):
    if not 0.0 <= fill <= 1.0:
        raise ValueError(f"fill_factor out of range [0, 1]: {fill}")


class InfeasibleModelError(ValueError):
    """Raised when a model cannot place the requested atom number."""


def validate_model(model: DistributionModel, config: LatticeConfig) -> None:
    """Check model feasibility against a lattice; raises on violation."""
    n = config.n_sites
    r = int(np.floor(model.target_fill * n))
    if isinstance(model, BunchedModel):
        if model.seed_mode is SeedMode.FIXED and not 0 <= model.seed_site < n:
            raise InfeasibleModelError(
                f"seed_site {model.seed_site} outside 0..{n - 1}")
    elif isinstance(model, AntiBunchedModel):
        if r >= 2 and (r - 1) * model.min_gap + 1 > n:
            raise InfeasibleModelError(
                f"cannot place {r} atoms with pairwise gap >= "
                f"{model.min_gap} on {n} sites")
    elif isinstance(model, SuperLatticeModel):
        if n % model.period != 0 or n // model.period < 2:
            raise InfeasibleModelError(
                f"period {model.period} must divide {n} sites at least twice")
        if r > n // model.period:
            raise InfeasibleModelError(
                f"cannot place {r} atoms on {n // model.period} comb sites")


def _gumbel_top_r(log_weights, r, rng):
    # Gumbel perturbation turns top-r selection into sampling without
    # replacement proportional to the weights (successive sampling), which is
    # exactly the law of iid candidate draws with occupied sites redrawn.
    keys = log_weights + rng.gumbel(size=log_weights.size)
    if r == log_weights.size:
        return np.arange(log_weights.size)
    part = np.argpartition(keys, log_weights.size - r)
    return part[log_weights.size - r:]


def sample_occupancy(model: DistributionModel, config: LatticeConfig,
                     rng: np.random.Generator) -> Occupancy:
    """Draw one shot from a distribution model.

    The generator should come from streams.shot_stream so that shots are
    reproducible and independent of scheduling. Raises InfeasibleModelError
    rather than ever returning a partial fill.
    """
    validate_model(model, config)
    n = config.n_sites
    r = int(np.floor(model.target_fill * n))
    if r == 0:
        return Occupancy.from_sites(np.zeros(n, dtype=bool))

    if isinstance(model, RandomModel):
        idx = rng.choice(n, size=r, replace=False)

    elif isinstance(model, BunchedModel):
        if model.seed_mode is SeedMode.FIXED:
            seed = int(model.seed_site)
        else:
            seed = int(rng.integers(n))
        tau_sites = model.tau / config.lattice_const
        offsets = (np.arange(n) - seed + n // 2) % n - n // 2
        log_w = -0.5 * (offsets / tau_sites) ** 2
        idx = _gumbel_top_r(log_w, r, rng)

    elif isinstance(model, AntiBunchedModel):
        gap = model.min_gap
        contracted = n - (r - 1) * (gap - 1)
        if contracted < r:
            raise InfeasibleModelError(
                f"cannot place {r} atoms with pairwise gap >= {gap} "
                f"on {n} sites")
        base = np.sort(rng.choice(contracted, size=r, replace=False))
        idx = base + np.arange(r) * (gap - 1)

    elif isinstance(model, SuperLatticeModel):
        comb = np.arange(0, n, model.period)
        if r > comb.size:
            raise InfeasibleModelError(
                f"cannot place {r} atoms on {comb.size} comb sites")
        width_sites = model.envelope_width / config.lattice_const
        center = (n - 1) / 2.0
        log_w = -0.5 * ((comb - center) / width_sites) ** 2
        idx = comb[_gumbel_top_r(log_w, r, rng)]

    else:
        raise TypeError(f"unknown distribution model {type(model).__name__}")

    return Occupancy.from_indices(np.sort(idx), n)


# ---------------------------------------------------------------------------
# estimators and algebraic relations
# ---------------------------------------------------------------------------

def empirical_p1(shots: Sequence[Occupancy]) -> np.ndarray:
    """Per-site occupation frequency over shots.

    Sums to the mean atom number per shot, not to 1; normalize explicitly
    before feeding the Fourier inversion boundary.
    """
    if not shots:
        raise ValueError("empirical_p1 needs at least one shot")
    mat = np.stack([s.sites for s in shots])
    return mat.mean(axis=0)


def empirical_p2(shots: Sequence[Occupancy]) -> np.ndarray:
    """Pair-separation distribution over shots, normalized to sum 1.

    Counts all unordered occupied pairs of each shot binned by |a - b| in
    lattice constants; shots with fewer than two atoms are not counted.
    The j = 0 bin is structurally zero (single occupancy).
    """
    counted = [s for s in shots if s.atom_count >= 2]
    if not counted:
        raise ValueError("empirical_p2 needs at least one shot with two atoms")
    n = counted[0].n_sites
    total = np.zeros(n, dtype=np.int64)
    for s in counted:
        if s.n_sites != n:
            raise ValueError("shots have inconsistent lattice sizes")
        total += kernels.pair_counts(s.indices, n)
    return total / total.sum()


def p2_from_bayes(p1: np.ndarray, conditional: np.ndarray) -> np.ndarray:
    """Pair-separation vector from the Bayes factorization.

    P2[j] = sum_l P1[l] * conditional[l, l + j], with terms falling outside
    the lattice contributing zero (hard edges, no wraparound). `conditional`
    rows are distributions over the partner site given an atom at l; edge
    truncation may make them sub-normalized. The result is returned raw, not
    renormalized.
    """
    p1 = np.asarray(p1, dtype=float)
    conditional = np.asarray(conditional, dtype=float)
    n = p1.size
    if conditional.shape != (n, n):
        raise ValueError(
            f"conditional must be {n}x{n}, got {conditional.shape}")
    if np.any(conditional < -1e-12):
        raise ValueError("conditional entries must be nonnegative")
    if np.any(conditional.sum(axis=1) > 1.0 + 1e-9):
        raise ValueError("conditional rows must not exceed unit mass")
    p2 = np.empty(n)
    for j in range(n):
        p2[j] = np.dot(p1[:n - j], np.diagonal(conditional, offset=j))
    return p2


def autocorrelation_p2(p1: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Pair-separation vector for statistically independent sites.

    P2[j] = sum_l P1[l] * P1[l + j] with hard edges. Note the j = 0 term
    carries the self mass sum(P1^2); it is retained here and is unphysical
    for single-occupancy pair statistics, so callers comparing against
    measured pair separations should drop it and renormalize.
    """
    p1 = np.asarray(p1, dtype=float)
    if np.any(p1 < 0):
        raise ValueError("p1 must be nonnegative")
    raw = np.correlate(p1, p1, mode="full")[p1.size - 1:]
    total = raw.sum()
    if total <= 0:
        raise ValueError("autocorrelation of an all-zero p1 is undefined")
    return raw / total if normalize else raw


def stationary_conditional(n_sites: int, kernel) -> np.ndarray:
    """Build a conditional matrix P(x | x_l) = f(x - x_l) with hard edges.

    `kernel` maps an integer offset array to nonnegative weights; rows are
    truncated at the lattice boundary (no renormalization), matching the
    stationary-statistics case where P2[j] reduces to f(j * w').
    """
    offsets = np.arange(n_sites)
    cond = np.zeros((n_sites, n_sites))
    for ell in range(n_sites):
        rel = offsets - ell
        cond[ell] = kernel(rel)
    if np.any(cond < 0):
        raise ValueError("kernel produced negative weights")
    return cond


# ---------------------------------------------------------------------------
# shot archive I/O
# ---------------------------------------------------------------------------

def write_shot_archive(path, shots: Sequence[Occupancy],
                       config: LatticeConfig) -> None:
    """Plain-text shot archive: header line, then one 0/1 row per shot."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"N={config.n_sites} w={config.lattice_const!r} "
                 f"fill={config.fill_factor!r}\n")
        for s in shots:
            if s.n_sites != config.n_sites:
                raise ValueError("shot length does not match header")
            fh.write("".join("1" if b else "0" for b in s.sites) + "\n")


def read_shot_archive(path):
    """Read a shot archive; returns (header dict, list of Occupancy)."""
    with open(path, "r", encoding="ascii") as fh:
        header_line = fh.readline().strip()
        fields = dict(item.split("=", 1) for item in header_line.split())
        if set(fields) != {"N", "w", "fill"}:
            raise ValueError(f"malformed archive header: {header_line!r}")
        header = {"n_sites": int(fields["N"]),
                  "lattice_const": float(fields["w"]),
                  "fill_factor": float(fields["fill"])}
        shots = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if len(line) != header["n_sites"] or set(line) - {"0", "1"}:
                raise ValueError(f"malformed shot line: {line[:40]!r}...")
            bits = np.frombuffer(line.encode("ascii"), dtype=np.uint8) == ord("1")
            shots.append(Occupancy.from_sites(bits))
    return header, shots
