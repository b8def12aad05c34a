"""Time-of-flight spatial correlation diagnostics for 1D optical lattices.

Shot-by-shot lattice occupancies, exact first- and second-order detector
correlations of the expanded atomic field, ensemble averaging, and discrete
Fourier inversion back to single-site and pair-separation distributions.
"""

__version__ = "0.1.0"

from .backend import ACTIVE as active_backend, NUMBA_AVAILABLE
from .correlations import (CorrelationProfile, FieldState, ModeBasis,
                           fermion_transform, g1_from_p1, g1_of_state,
                           g2_from_p2, g2_of_state, p1_from_g1, p2_from_g2,
                           profile_of_state, siegert_check)
from .ensemble import (CompareMetrics, ExperimentConfig, ExperimentResult,
                       compare_distributions, figure6_suite, run_experiment)
from .lattice import (AntiBunchedModel, BunchedModel, InfeasibleModelError,
                      LatticeConfig, Occupancy, RandomModel, SeedMode,
                      Statistics, SuperLatticeModel, autocorrelation_p2,
                      empirical_p1, empirical_p2, p2_from_bayes,
                      sample_occupancy)
from .streams import derive_seed, shot_stream
from .wavepacket import (DetectionGrid, DoubleWellState, ExpansionParams,
                         FringeFit, LocalWavepacket, double_well_density,
                         extract_fringe_params, free_expand,
                         gravity_delay_map, resolution_figures, tof_density)

__all__ = [
    "active_backend", "NUMBA_AVAILABLE",
    "CorrelationProfile", "FieldState", "ModeBasis", "fermion_transform",
    "g1_from_p1", "g1_of_state", "g2_from_p2", "g2_of_state", "p1_from_g1",
    "p2_from_g2", "profile_of_state", "siegert_check",
    "CompareMetrics", "ExperimentConfig", "ExperimentResult",
    "compare_distributions", "figure6_suite", "run_experiment",
    "AntiBunchedModel", "BunchedModel", "InfeasibleModelError",
    "LatticeConfig", "Occupancy", "RandomModel", "SeedMode", "Statistics",
    "SuperLatticeModel", "autocorrelation_p2", "empirical_p1", "empirical_p2",
    "p2_from_bayes", "sample_occupancy",
    "derive_seed", "shot_stream",
    "DetectionGrid", "DoubleWellState", "ExpansionParams", "FringeFit",
    "LocalWavepacket", "double_well_density", "extract_fringe_params",
    "free_expand", "gravity_delay_map", "resolution_figures", "tof_density",
]
