"""Ensemble-averaged gedanken experiments and distribution reconstruction.

One experiment: draw `runs` independent lattice shots, evaluate each shot's
exact g1/g2 profiles over the canonical detector grids, ensemble-average with
compensated summation, then invert the discrete Fourier relations to
reconstruct the single-site distribution P1 and the pair-separation
distribution P2. Ground truths come from the same shots via the direct
estimators, so reconstruction-vs-truth comparisons probe the transform
machinery and the statistics of the model, not detector noise (count noise is
a documented extension hook, not part of the core).

Shots use counter-based per-run streams: results are bit-identical for a
fixed master seed regardless of worker count or scheduling.
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace, field
from typing import Dict, NamedTuple, Optional

import numpy as np

from . import backend, kernels
from .constants import DEFAULT_BUNCHED_TAU_SITES
from .correlations import ModeBasis, p1_from_g1_with_residue, p2_from_g2
from .lattice import (AntiBunchedModel, BunchedModel, DistributionModel,
                      LatticeConfig, RandomModel, SeedMode, Statistics,
                      SuperLatticeModel, sample_occupancy)
from .streams import derive_seed, shot_stream
from .wavepacket import ExpansionParams

ALL_OUTPUTS = frozenset({"p1_recon", "p2_recon", "raw_profiles", "ground_truth"})
DEFAULT_OUTPUTS = frozenset({"p1_recon", "p2_recon", "ground_truth"})


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: LatticeConfig
    model: DistributionModel
    expansion: ExpansionParams
    master_seed: int
    runs: int = 500
    outputs: frozenset = DEFAULT_OUTPUTS
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        unknown = set(self.outputs) - ALL_OUTPUTS
        if unknown:
            raise ValueError(f"unknown output products: {sorted(unknown)}")


@dataclass
class ExperimentResult:
    """Averaged profiles, reconstructions, truths, and diagnostics."""

    config: ExperimentConfig
    basis: ModeBasis
    atom_count: int
    mean_g1: np.ndarray            # complex, l = 0..N-1
    se_g1: np.ndarray              # per-l standard error of the complex mean
    mean_g2: Optional[np.ndarray]  # real, l = -N..N-1 (None when R < 2)
    se_g2: Optional[np.ndarray]
    p1_recon: np.ndarray           # distribution over sites (sums to ~1)
    p2_recon: Optional[np.ndarray]
    p1_truth: np.ndarray           # occupation frequency (sums to ~R)
    se_p1: np.ndarray
    p2_truth: Optional[np.ndarray]
    se_p2: Optional[np.ndarray]
    diagnostics: Dict[str, float] = field(default_factory=dict)
    raw_g1: Optional[np.ndarray] = None
    raw_g2: Optional[np.ndarray] = None

    @property
    def p1_truth_normalized(self) -> np.ndarray:
        return self.p1_truth / self.p1_truth.sum()


def _simulate_chunk(args):
    """Generate shots and per-shot profiles for a contiguous run range."""
    master_seed, start, stop, model, lattice_cfg = args
    n = lattice_cfg.n_sites
    r = lattice_cfg.atoms_per_shot
    idx = np.empty((stop - start, r), dtype=np.int64)
    for i, run in enumerate(range(start, stop)):
        occ = sample_occupancy(model, lattice_cfg, shot_stream(master_seed, run))
        idx[i] = occ.indices
    g1_rows = kernels.batch_g1(idx, n)
    if r >= 2:
        counts = kernels.batch_pair_counts(idx, n)
        mod_rows = kernels.batch_g2_mod(counts, kernels.g2_cos_table(n),
                                        r * (r - 1) / 2)
    else:
        counts = np.zeros((stop - start, n), dtype=np.int64)
        mod_rows = None
    return start, idx, counts, g1_rows, mod_rows


def _mean_and_se(rows: np.ndarray):
    """Column mean (compensated, fixed order) and standard error."""
    runs = rows.shape[0]
    mean = kernels.kahan_sum_rows(rows) / runs
    if runs == 1:
        return mean, np.zeros(rows.shape[1])
    dev2 = np.abs(rows - mean) ** 2
    var = kernels.kahan_sum_rows(dev2) / (runs - 1)
    return mean, np.sqrt(var / runs)


def _half_to_linear(half: np.ndarray) -> np.ndarray:
    """Map values on |l| = 0..N onto the ascending grid l = -N..N-1."""
    return np.concatenate([half[:0:-1], half[:-1]])


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the full ensemble experiment described by `config`.

    Deterministic for a fixed master seed: per-run streams are counter-based
    and the final reduction runs in fixed run order, so the result is
    bit-identical for any worker count.
    """
    t0 = time.perf_counter()
    lattice_cfg = config.lattice
    n = lattice_cfg.n_sites
    r = lattice_cfg.atoms_per_shot
    if r < 1:
        raise ValueError("experiment needs at least one atom per shot")
    basis = ModeBasis.from_geometry(n, lattice_cfg.lattice_const,
                                    config.expansion.l_squared)

    idx = np.empty((config.runs, r), dtype=np.int64)
    counts = np.empty((config.runs, n), dtype=np.int64)
    g1_rows = np.empty((config.runs, n), dtype=np.complex128)
    mod_rows = np.empty((config.runs, n + 1)) if r >= 2 else None

    chunks = _split_runs(config.runs, config.workers)
    payloads = [(config.master_seed, a, b, config.model, lattice_cfg)
                for a, b in chunks]
    if config.workers == 1:
        results = map(_simulate_chunk, payloads)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_simulate_chunk, payloads))
    for start, idx_c, counts_c, g1_c, mod_c in results:
        stop = start + idx_c.shape[0]
        idx[start:stop] = idx_c
        counts[start:stop] = counts_c
        g1_rows[start:stop] = g1_c
        if mod_rows is not None:
            mod_rows[start:stop] = mod_c

    sign = 1.0 if lattice_cfg.statistics is Statistics.BOSON else -1.0

    mean_g1, se_g1 = _mean_and_se(g1_rows)
    p1_recon_raw, residue = p1_from_g1_with_residue(mean_g1)
    p1_clip = float(np.maximum(-p1_recon_raw, 0.0).sum())
    p1_recon = np.clip(p1_recon_raw, 0.0, None)

    occupation = np.bincount(idx.ravel(), minlength=n).astype(float)
    p1_truth = occupation / config.runs
    se_p1 = np.sqrt(np.clip(p1_truth * (1 - p1_truth), 0, None) / config.runs)

    if r >= 2:
        mean_mod, se_mod = _mean_and_se(mod_rows)
        g2_half = (r - 1) / r * (1.0 + sign * mean_mod)
        se_half = (r - 1) / r * se_mod
        mean_g2 = _half_to_linear(g2_half)
        se_g2 = _half_to_linear(se_half)
        boson_equiv = mean_g2 if sign > 0 else 2 * (r - 1) / r - mean_g2
        p2_recon_raw = p2_from_g2(boson_equiv, r)
        p2_clip = float(np.maximum(-p2_recon_raw, 0.0).sum())
        p2_recon = np.clip(p2_recon_raw, 0.0, None)

        n_pairs = r * (r - 1) / 2
        p2_rows = counts / n_pairs
        p2_truth = counts.sum(axis=0) / (n_pairs * config.runs)
        se_p2 = p2_rows.std(axis=0, ddof=1) / np.sqrt(config.runs) \
            if config.runs > 1 else np.zeros(n)
    else:
        mean_g2 = se_g2 = p2_recon = p2_truth = se_p2 = None
        p2_clip = 0.0

    diagnostics = {
        "imag_residue": residue,
        "p1_clip_mass": p1_clip,
        "p2_clip_mass": p2_clip,
        "backend": backend.ACTIVE,
        "workers": config.workers,
        "runtime_s": time.perf_counter() - t0,
    }

    result = ExperimentResult(
        config=config, basis=basis, atom_count=r,
        mean_g1=mean_g1, se_g1=se_g1, mean_g2=mean_g2, se_g2=se_g2,
        p1_recon=p1_recon, p2_recon=p2_recon,
        p1_truth=p1_truth, se_p1=se_p1, p2_truth=p2_truth, se_p2=se_p2,
        diagnostics=diagnostics)
    if "raw_profiles" in config.outputs:
        result.raw_g1 = g1_rows
        if r >= 2:
            raw_half = (r - 1) / r * (1.0 + sign * mod_rows)
            result.raw_g2 = np.stack([_half_to_linear(row) for row in raw_half])
    return result


def _split_runs(runs: int, workers: int):
    n_chunks = 1 if workers == 1 else min(runs, workers * 4)
    edges = np.linspace(0, runs, n_chunks + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class CompareMetrics(NamedTuple):
    l1: float
    cosine_similarity: float
    max_abs: float


def compare_distributions(a: np.ndarray, b: np.ndarray) -> CompareMetrics:
    """L1 distance, cosine similarity, and sup distance of two distributions.

    Both vectors are renormalized to sum 1 first; zero vectors are rejected.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("distributions must have equal length")
    if a.sum() <= 0 or b.sum() <= 0:
        raise ValueError("cannot compare a zero vector")
    a = a / a.sum()
    b = b / b.sum()
    return CompareMetrics(
        l1=float(np.abs(a - b).sum()),
        cosine_similarity=float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b))),
        max_abs=float(np.abs(a - b).max()))


def default_figure6_models(lattice_cfg: LatticeConfig) -> Dict[str, DistributionModel]:
    """The four canonical occupancy statistics at shared lattice parameters."""
    fill = lattice_cfg.fill_factor
    w = lattice_cfg.lattice_const
    return {
        "random": RandomModel(target_fill=fill),
        "bunched": BunchedModel(target_fill=fill,
                                tau=DEFAULT_BUNCHED_TAU_SITES * w,
                                seed_mode=SeedMode.RANDOM_UNIFORM),
        "antibunched": AntiBunchedModel(target_fill=fill, min_gap=4),
        "superlattice": SuperLatticeModel(target_fill=fill, period=8,
                                          envelope_width=lattice_cfg.n_sites * w / 8),
    }


def figure6_suite(base: ExperimentConfig,
                  models: Optional[Dict[str, DistributionModel]] = None
                  ) -> Dict[str, ExperimentResult]:
    """Run one experiment per occupancy model with derived per-model seeds."""
    if models is None:
        models = default_figure6_models(base.lattice)
    out = {}
    for k, (name, model) in enumerate(models.items()):
        cfg = replace(base, model=model,
                      master_seed=derive_seed(base.master_seed, k))
        out[name] = run_experiment(cfg)
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _model_meta(model: DistributionModel) -> Dict:
    meta = {"kind": type(model).__name__, "target_fill": model.target_fill}
    if isinstance(model, BunchedModel):
        meta.update(tau=model.tau, seed_mode=model.seed_mode.value,
                    seed_site=model.seed_site)
    elif isinstance(model, AntiBunchedModel):
        meta.update(min_gap=model.min_gap)
    elif isinstance(model, SuperLatticeModel):
        meta.update(period=model.period, envelope_width=model.envelope_width)
    return meta


def result_metadata(result: ExperimentResult) -> Dict:
    cfg = result.config
    return {
        "n_sites": cfg.lattice.n_sites,
        "lattice_const": cfg.lattice.lattice_const,
        "fill_factor": cfg.lattice.fill_factor,
        "statistics": cfg.lattice.statistics.value,
        "atom_count": result.atom_count,
        "model": _model_meta(cfg.model),
        "mass": cfg.expansion.mass,
        "flight_time": cfg.expansion.flight_time,
        "l_squared": cfg.expansion.l_squared,
        "runs": cfg.runs,
        "master_seed": cfg.master_seed,
        "workers": cfg.workers,
        "p1_truth_normalization": "occupation_frequency",
        "p1_recon_normalization": "distribution",
    }


def write_result_json(path, result: ExperimentResult) -> None:
    """JSON document with full resolved metadata plus all result arrays."""
    doc = {"format": "latticetof-experiment/1",
           "metadata": result_metadata(result),
           "diagnostics": result.diagnostics}
    arrays = {
        "mean_g1_re": result.mean_g1.real, "mean_g1_im": result.mean_g1.imag,
        "se_g1": result.se_g1, "p1_recon": result.p1_recon,
        "p1_truth": result.p1_truth, "se_p1": result.se_p1,
    }
    if result.mean_g2 is not None:
        arrays.update(mean_g2=result.mean_g2, se_g2=result.se_g2,
                      p2_recon=result.p2_recon, p2_truth=result.p2_truth,
                      se_p2=result.se_p2)
    doc["arrays"] = {k: np.asarray(v).tolist() for k, v in arrays.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _meta_header_lines(result: ExperimentResult):
    meta = result_metadata(result)
    lines = [f"{k} = {v}" for k, v in meta.items()]
    return ["latticetof experiment output"] + lines


def write_p1_csv(path, result: ExperimentResult) -> None:
    """Site distribution panel: reconstruction next to ground truth."""
    truth = result.p1_truth_normalized
    with open(path, "w", encoding="utf-8") as fh:
        for line in _meta_header_lines(result):
            fh.write(f"# {line}\n")
        fh.write("site,p1_recon,p1_truth,se_p1\n")
        se = result.se_p1 / result.p1_truth.sum()
        for j in range(truth.size):
            fh.write(f"{j},{result.p1_recon[j]:.17g},{truth[j]:.17g},"
                     f"{se[j]:.17g}\n")


def write_p2_csv(path, result: ExperimentResult) -> None:
    """Pair-separation panel: reconstruction next to ground truth."""
    if result.p2_recon is None:
        raise ValueError("experiment had fewer than two atoms per shot")
    with open(path, "w", encoding="utf-8") as fh:
        for line in _meta_header_lines(result):
            fh.write(f"# {line}\n")
        fh.write("separation_sites,p2_recon,p2_truth,se_p2\n")
        for j in range(result.p2_recon.size):
            fh.write(f"{j},{result.p2_recon[j]:.17g},"
                     f"{result.p2_truth[j]:.17g},{result.se_p2[j]:.17g}\n")
