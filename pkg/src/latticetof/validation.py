"""Self-check suites behind the `latticetof validate` command.

Four suites, each designed to finish in seconds at reduced scale:

  operator-oracle   closed-form g1/g2 vs brute-force Fock-space evaluation
  transform-pairs   forward/inverse round trips on both detector grids
  siegert           Gaussian-statistics residual of a dilute random ensemble
  washout           seed-fixed vs seed-randomized cluster reconstruction

Every suite reports (name, passed, detail); validate exits nonzero when any
fails.
"""

import time
from dataclasses import replace
from typing import List, NamedTuple

import numpy as np
from scipy import stats

from .correlations import (ModeBasis, g1_from_p1, g1_of_state, g2_from_p2,
                           g2_of_state, p1_from_g1, p2_from_g2, siegert_check,
                           FieldState)
from .ensemble import (CompareMetrics, ExperimentConfig, compare_distributions,
                       run_experiment)
from .fock_oracle import oracle_g1, oracle_g2
from .lattice import (BunchedModel, LatticeConfig, RandomModel, SeedMode,
                      Statistics)
from .wavepacket import ExpansionParams


class SuiteReport(NamedTuple):
    name: str
    passed: bool
    detail: str


def _test_basis(n_modes: int) -> ModeBasis:
    # cesium-like geometry; only the grid ratios matter for these checks
    return ModeBasis.from_geometry(n_modes, 0.5e-6, 3.0e-9)


def oracle_suite(max_modes: int = 6, tol: float = 1e-10) -> SuiteReport:
    """Closed forms vs literal operator algebra over every Fock state."""
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    for n in range(4, max_modes + 1):
        basis = _test_basis(n)
        seps = np.concatenate([basis.g1_separations(),
                               basis.g2_separations()[::3]])
        for stat in (Statistics.BOSON, Statistics.FERMION):
            for index in range(2 ** n):
                occ = np.array([(index >> j) & 1 == 1 for j in range(n)])
                r = int(occ.sum())
                if r == 0:
                    continue
                state = FieldState(occupations=occ, statistics=stat,
                                   atom_count=r)
                for sep in seps:
                    got = g1_of_state(state, basis, sep)
                    ref = oracle_g1(occ, basis, stat, sep)
                    worst = max(worst, abs(got - ref))
                    if r >= 2:
                        got2 = g2_of_state(state, basis, sep)
                        ref2 = oracle_g2(occ, basis, stat, sep)
                        worst = max(worst, abs(got2 - ref2))
                    checked += 1
    dt = time.perf_counter() - t0
    return SuiteReport(
        "operator-oracle", worst < tol,
        f"{checked} expectations, max deviation {worst:.2e} "
        f"(tol {tol:.0e}), {dt:.1f} s")


def transform_suite(n_sites: int = 256, trials: int = 50,
                    tol: float = 1e-12, seed: int = 7070) -> SuiteReport:
    """Round trips p1 -> g1 -> p1 and p2 -> g2 -> p2 on random distributions."""
    rng = np.random.default_rng(seed)
    basis = _test_basis(n_sites)
    worst = 0.0
    for _ in range(trials):
        p1 = rng.random(n_sites)
        p1 /= p1.sum()
        worst = max(worst, float(np.max(np.abs(
            p1_from_g1(g1_from_p1(p1, basis)) - p1))))
        p2 = rng.random(n_sites)
        p2[0] = 0.0
        p2 /= p2.sum()
        g2 = g2_from_p2(p2, 25, basis)
        worst = max(worst, float(np.max(np.abs(p2_from_g2(g2, 25) - p2))))
    return SuiteReport(
        "transform-pairs", worst < tol,
        f"{trials} random vectors each way, max round-trip error "
        f"{worst:.2e} (tol {tol:.0e})")


def siegert_suite(n_sites: int = 64, atoms: int = 2, shots: int = 3000,
                  seed: int = 411) -> SuiteReport:
    """g2 = 1 + |g1|^2 residual for dilute uniformly random filling.

    Works at the normalized coincidence level (per-shot R^2/(R(R-1)) applied),
    where the relation holds up to a hard-edge systematic of order 1/N that
    must stay below five standard errors of the ensemble estimate.
    """
    lattice_cfg = LatticeConfig(n_sites=n_sites, lattice_const=0.5e-6,
                                fill_factor=atoms / n_sites)
    expansion = ExpansionParams.from_time(2.2069e-25, 1.0)
    config = ExperimentConfig(lattice=lattice_cfg,
                              model=RandomModel(atoms / n_sites),
                              expansion=expansion, master_seed=seed,
                              runs=shots, outputs=frozenset({"raw_profiles"}))
    result = run_experiment(config)
    r = result.atom_count
    scale = r / (r - 1)
    norm_g2 = scale * result.mean_g2
    se_norm = scale * result.se_g2
    check = siegert_check(result.mean_g1, norm_g2)

    # the |mean g1|^2 term also fluctuates; fold its error in
    g1_half = np.sqrt(np.clip(norm_g2 - 1.0 - check.residual, 0, None))
    se_g1_half = np.interp(np.abs(result.basis.g2_separations()),
                           result.basis.g1_separations(), result.se_g1)
    se_resid = np.sqrt(se_norm ** 2 + (2 * g1_half * se_g1_half) ** 2)
    z = np.abs(check.residual) / np.maximum(se_resid, 1e-300)
    worst = float(z.max())
    return SuiteReport(
        "siegert", worst < 5.0,
        f"{shots} shots of {r} atoms on {n_sites} sites, max residual "
        f"{check.max_abs:.2e} = {worst:.2f} standard errors (limit 5)")


def washout_suite(n_sites: int = 64, runs: int = 200,
                  seed: int = 2024) -> SuiteReport:
    """Fixed-seed cluster localizes P1; random seed flattens it, P2 survives."""
    lattice_cfg = LatticeConfig(n_sites=n_sites, lattice_const=0.5e-6,
                                fill_factor=0.1)
    expansion = ExpansionParams.from_time(2.2069e-25, 1.0)
    tau = 4 * lattice_cfg.lattice_const
    center = n_sites // 2
    fixed = BunchedModel(target_fill=0.1, tau=tau, seed_mode=SeedMode.FIXED,
                         seed_site=center)
    roaming = BunchedModel(target_fill=0.1, tau=tau,
                           seed_mode=SeedMode.RANDOM_UNIFORM)
    base = ExperimentConfig(lattice=lattice_cfg, model=fixed,
                            expansion=expansion, master_seed=seed, runs=runs)
    res_fixed = run_experiment(base)
    res_roaming = run_experiment(replace(base, model=roaming,
                                         master_seed=seed + 1))

    peak = int(np.argmax(res_fixed.p1_recon))
    peak_ok = abs(peak - center) <= 3

    counts = res_roaming.p1_truth * runs
    expected = runs * res_roaming.atom_count / n_sites
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    p_value = float(stats.chi2.sf(chi2, df=n_sites - 1))
    flat_ok = p_value > 0.01

    metrics: CompareMetrics = compare_distributions(res_fixed.p2_recon,
                                                    res_roaming.p2_recon)
    p2_ok = metrics.cosine_similarity >= 0.9

    passed = peak_ok and flat_ok and p2_ok
    return SuiteReport(
        "washout", passed,
        f"fixed-seed peak at {peak} (target {center}), uniformity "
        f"p = {p_value:.3f}, p2 cosine {metrics.cosine_similarity:.3f}")


def run_all(verbose_print=print) -> List[SuiteReport]:
    reports = [oracle_suite(), transform_suite(), siegert_suite(),
               washout_suite()]
    for rep in reports:
        verbose_print(f"{rep.name:16s} {'PASS' if rep.passed else 'FAIL'}  "
                      f"{rep.detail}")
    return reports
