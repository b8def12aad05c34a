"""Physical constants and default geometry used across the package.

All quantities are SI. The effective length that converts lattice-plane
coordinates to detection-plane scales is L^2 = h*(flight time)/mass with the
unreduced Planck constant; for cesium falling 1 s from a 0.5 um lattice this
gives coincidence period and fringe envelope both of order 1 cm.
"""

PLANCK_H = 6.62607015e-34  # J s, exact SI value

# Local gravitational acceleration used by the detection-delay mapping.
EARTH_GRAVITY = 9.81  # m/s^2

# Atom masses in kg.
SPECIES_MASS = {
    "cesium": 2.2069e-25,
    "rubidium": 1.44316060e-25,
    "sodium": 3.81754e-26,
    "lithium": 1.16503486e-26,
    "metastable_helium": 6.64647907e-27,
    "metastable_neon": 3.32272e-26,
}

# Default lattice geometry for the resolution figures.
DEFAULT_LATTICE_CONST = 0.5e-6   # m
DEFAULT_PACKET_WIDTH = 30e-9     # m, ground-state wave packet width

# Default cluster width of the bunched distribution, in lattice constants.
# Recorded into every resolved config; nothing downstream hard-codes it.
DEFAULT_BUNCHED_TAU_SITES = 8.0
