"""Brute-force Fock-space evaluation of detector correlations.

For small mode counts (N <= 6 is comfortable) the full occupation-number
basis has dimension 2^N and the normally ordered detector expectations can be
computed literally from annihilation-operator matrices:

    G1(x1, x2) = <b(x1) psi, b(x2) psi>
    G2(x1, x2) = || b(x2) b(x1) psi ||^2
    b(x) = (1/sqrt(N)) sum_j a_j exp(i k_j x)

Fermionic a_j carry Jordan-Wigner string signs; only annihilation is needed,
so single-occupancy states stay inside the 2^N space. This module is the
independent oracle the closed forms in correlations.py are tested against,
and it can dump plain-text Fock tables for use as frozen fixtures.
"""

from functools import lru_cache

import numpy as np

from .correlations import ModeBasis
from .lattice import Statistics


@lru_cache(maxsize=32)
def annihilation_operators(n_modes: int, statistics: Statistics):
    """Dense a_j matrices on the 2^n occupation basis (bit j of the index)."""
    dim = 2 ** n_modes
    ops = []
    for j in range(n_modes):
        mat = np.zeros((dim, dim))
        bit = 1 << j
        low_mask = bit - 1
        for m in range(dim):
            if m & bit:
                if statistics is Statistics.FERMION:
                    sign = -1.0 if bin(m & low_mask).count("1") % 2 else 1.0
                else:
                    sign = 1.0
                mat[m ^ bit, m] = sign
        ops.append(mat)
    return tuple(ops)


@lru_cache(maxsize=8192)
def detector_operator(basis: ModeBasis, x: float,
                      statistics: Statistics) -> np.ndarray:
    """Position-space annihilation operator b(x) on the full Fock space.

    Cached per (basis, x, statistics); treat the returned array as read-only.
    """
    ops = annihilation_operators(basis.n_modes, statistics)
    phases = np.exp(1j * basis.mode_wavenumbers * x)
    b = np.zeros((2 ** basis.n_modes,) * 2, dtype=complex)
    for j, a in enumerate(ops):
        b += phases[j] * a
    return b / np.sqrt(basis.n_modes)


def state_vector(occupations, n_modes: int) -> np.ndarray:
    """Basis vector of the Fock state with the given boolean occupations."""
    index = 0
    for j, filled in enumerate(occupations):
        if filled:
            index |= 1 << j
    psi = np.zeros(2 ** n_modes, dtype=complex)
    psi[index] = 1.0
    return psi


def oracle_g1(occupations, basis: ModeBasis, statistics: Statistics,
              separation: float) -> complex:
    """g1 at symmetric detectors -sep/2, +sep/2 by literal operator algebra."""
    psi = state_vector(occupations, basis.n_modes)
    b1 = detector_operator(basis, -separation / 2, statistics)
    b2 = detector_operator(basis, +separation / 2, statistics)
    v1 = b1 @ psi
    v2 = b2 @ psi
    g11 = np.vdot(v1, v1).real
    g22 = np.vdot(v2, v2).real
    if g11 <= 0 or g22 <= 0:
        raise ValueError("empty field: g1 undefined for zero atoms")
    return complex(np.vdot(v1, v2) / np.sqrt(g11 * g22))


def oracle_g2(occupations, basis: ModeBasis, statistics: Statistics,
              separation: float) -> float:
    """g2 at symmetric detectors by literal operator algebra."""
    psi = state_vector(occupations, basis.n_modes)
    b1 = detector_operator(basis, -separation / 2, statistics)
    b2 = detector_operator(basis, +separation / 2, statistics)
    v1 = b1 @ psi
    v2 = b2 @ psi
    g11 = np.vdot(v1, v1).real
    g22 = np.vdot(v2, v2).real
    if g11 <= 0 or g22 <= 0:
        raise ValueError("need two atoms for coincidences")
    v12 = b2 @ v1
    return float(np.vdot(v12, v12).real / (g11 * g22))


def write_fock_table(path, n_modes: int, statistics: Statistics,
                     basis: ModeBasis, ells=(0, 1, 2, 3)) -> None:
    """Dump oracle values for every Fock state as a plain-text table.

    One row per (state bitmask, separation index); separations are ell * dx2
    on the coincidence grid. States without enough atoms get 'nan' in the
    undefined columns.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# fock table n_modes={n_modes} "
                 f"statistics={statistics.value}\n")
        fh.write(f"# delta_k={basis.delta_k!r} dx2={basis.dx2!r}\n")
        fh.write("state ell re_g1 im_g1 g2\n")
        for index in range(2 ** n_modes):
            occ = [(index >> j) & 1 == 1 for j in range(n_modes)]
            r = sum(occ)
            for ell in ells:
                sep = ell * basis.dx2
                if r >= 1:
                    z = oracle_g1(occ, basis, statistics, sep)
                    re, im = z.real, z.imag
                else:
                    re = im = float("nan")
                g2 = (oracle_g2(occ, basis, statistics, sep)
                      if r >= 2 else float("nan"))
                fh.write(f"{index} {ell} {re!r} {im!r} {g2!r}\n")


def read_fock_table(path):
    """Read a table written by write_fock_table.

    Returns dict mapping (state index, ell) -> (g1 complex, g2 float).
    """
    entries = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("state"):
                continue
            idx, ell, re, im, g2 = line.split()
            entries[(int(idx), int(ell))] = (
                complex(float(re), float(im)), float(g2))
    return entries
