"""Single-atom sector: free TOF expansion, mixed-state densities, fringes.

After a flight time t the detection plane sees the Fourier transform of the
released wave function, scaled by the effective length L^2 = h*t/M (unreduced
Planck constant). The full complex field is

    Psi(x) = (sqrt(-i)/L) * exp[i*(2*pi/L^2)*(x^2/2 + x*x_i)] * F[Phi](x/L^2)

with F the forward transform with kernel exp(-2i*pi*u*x'), Phi the packet
centered on its lattice site x_i, and the sqrt(-i)/L prefactor keeping the
1/L^2 density measure. Densities only need |F|^2 and are computed without the
quadratic phase, so they work at any physical parameters; the complex field
additionally checks that the quadratic phase is sampled finely enough to be
meaningful between grid points.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from .constants import PLANCK_H
from .lattice import LatticeConfig


@dataclass(frozen=True)
class ExpansionParams:
    """Free-flight geometry: mass, flight time, and L^2 = h*t/M."""

    mass: float
    flight_time: float
    l_squared: float

    def __post_init__(self):
        if self.l_squared <= 0:
            raise ValueError("l_squared must be positive")
        expected = PLANCK_H * self.flight_time / self.mass
        if abs(self.l_squared - expected) > 1e-12 * expected:
            raise ValueError(
                "l_squared inconsistent with mass and flight_time: "
                f"{self.l_squared!r} vs h*t/M = {expected!r}")

    @classmethod
    def from_time(cls, mass: float, flight_time: float) -> "ExpansionParams":
        if mass <= 0 or flight_time <= 0:
            raise ValueError("mass and flight_time must be positive")
        return cls(mass=mass, flight_time=flight_time,
                   l_squared=PLANCK_H * flight_time / mass)

    @property
    def effective_length(self) -> float:
        return np.sqrt(self.l_squared)


@dataclass
class LocalWavepacket:
    """Sampled local wave function on a uniform power-of-two grid.

    `amplitudes[m]` is Phi(grid[m]); the packet physically sits around
    `center`, and the grid must extend at least 8 widths past the center on
    each side so transforms are not truncated.
    """

    grid: np.ndarray
    amplitudes: np.ndarray
    center: float
    width: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        m = self.grid.size
        if m < 2 or m & (m - 1):
            raise ValueError("grid length must be a power of two")
        steps = np.diff(self.grid)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if (self.center - self.grid[0] < 8 * self.width
                or self.grid[-1] - self.center < 8 * self.width):
            raise ValueError("grid must span >= 8 widths beyond the center")
        norm = np.sum(np.abs(self.amplitudes) ** 2) * self.dx
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"amplitudes not normalized: integral {norm!r}")

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def gaussian(cls, center: float, width: float, span_widths: float = 16.0,
                 points_per_width: float = 4.0) -> "LocalWavepacket":
        """Normalized Gaussian packet; |Phi|^2 has standard deviation `width`."""
        dy = width / points_per_width
        m = 1 << int(np.ceil(np.log2(2 * span_widths * points_per_width)))
        grid = center + (np.arange(m) - m // 2) * dy
        amp = np.exp(-((grid - center) ** 2) / (4 * width ** 2))
        amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2) * dy)
        return cls(grid=grid, amplitudes=amp.astype(complex),
                   center=center, width=width)


@dataclass(frozen=True)
class DoubleWellState:
    """Two-Gaussian superposition c1|L> + e^{i phi} c2|R> in one double well."""

    c1: float
    c2: float
    phi: float
    well_separation: float
    packet_width: float

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("amplitudes must be nonnegative")
        if abs(self.c1 ** 2 + self.c2 ** 2 - 1.0) > 1e-10:
            raise ValueError("amplitudes must satisfy c1^2 + c2^2 = 1")
        if self.well_separation <= 0 or self.packet_width <= 0:
            raise ValueError("lengths must be positive")


@dataclass(frozen=True)
class DetectionGrid:
    """Detector positions and the matching reciprocal coordinate u = x/L^2."""

    positions: np.ndarray
    reciprocal: np.ndarray

    @classmethod
    def from_positions(cls, x, l_squared: float) -> "DetectionGrid":
        x = np.asarray(x, dtype=float)
        return cls(positions=x, reciprocal=x / l_squared)


class ExpandedWave(NamedTuple):
    grid: DetectionGrid
    values: np.ndarray


class SampledDensity(NamedTuple):
    x: np.ndarray
    values: np.ndarray


def _centered_transform(packet: LocalWavepacket, u: np.ndarray) -> np.ndarray:
    """F[Phi](u) of the packet re-centered on its site, by direct summation."""
    y = packet.grid - packet.center
    kernel = np.exp(-2j * np.pi * np.outer(u, y))
    return kernel @ (packet.amplitudes * packet.dx)


def far_field_ratio(packet: LocalWavepacket, params: ExpansionParams) -> float:
    """Source extent over finest fringe scale; > 0.1 is marginal far field."""
    amag = np.abs(packet.amplitudes)
    support = amag > 1e-8 * amag.max()
    extent = float(packet.grid[support][-1] - packet.grid[support][0])
    return extent * extent / params.l_squared


def free_expand(packet: LocalWavepacket, params: ExpansionParams,
                pad_factor: int = 4) -> ExpandedWave:
    """Full complex detection-plane field of one released packet.

    Returns the field on the natural FFT grid (pad_factor controls reciprocal
    resolution). Raises when the quadratic phase advances more than pi/4
    between neighboring samples anywhere the field carries amplitude; at that
    point the sampled field stops being a faithful discretization.
    """
    ratio = far_field_ratio(packet, params)
    if ratio > 0.1:
        warnings.warn(
            f"far-field approximation marginal: extent^2/L^2 = {ratio:.3g}",
            stacklevel=2)
    m_pad = packet.grid.size * int(pad_factor)
    dy = packet.dx
    y0 = packet.grid[0] - packet.center
    spectrum = np.fft.fft(packet.amplitudes, n=m_pad)
    u = np.fft.fftfreq(m_pad, d=dy)
    transform = dy * np.exp(-2j * np.pi * u * y0) * spectrum
    order = np.argsort(u)
    u = u[order]
    transform = transform[order]
    x = u * params.l_squared

    mag = np.abs(transform)
    live = mag > 1e-6 * mag.max()
    x_live = np.abs(x[live])
    if x_live.size:
        dx_out = x[1] - x[0]
        max_step = 2 * np.pi * x_live.max() * dx_out / params.l_squared
        if max_step > np.pi / 4:
            raise ValueError(
                "detection grid too coarse for the quadratic phase: step "
                f"{max_step:.3g} rad > pi/4; refine the packet grid or "
                "increase pad_factor")

    length = params.effective_length
    phase = np.exp(1j * (2 * np.pi / params.l_squared)
                   * (x ** 2 / 2 + x * packet.center))
    # sqrt(-i) = exp(-i pi/4); together with 1/L this keeps the 1/L^2 measure
    values = (np.exp(-1j * np.pi / 4) / length) * phase * transform
    return ExpandedWave(DetectionGrid.from_positions(x, params.l_squared),
                        values)


def tof_density(components: Sequence[Tuple[float, LocalWavepacket]],
                params: ExpansionParams,
                x: Optional[np.ndarray] = None,
                n_points: int = 4096) -> SampledDensity:
    """Mixed-state TOF density n(x) = sum_j p_j (1/L^2) |F[Phi_j](x/L^2)|^2.

    Packets are transformed about their own centers, so components identical
    up to translation contribute identical densities. Weights must be
    nonnegative and sum to 1.
    """
    if not components:
        raise ValueError("tof_density needs at least one component")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    if x is None:
        sigma_max = max(params.l_squared / (4 * np.pi * p.width)
                        for _, p in components)
        x = np.linspace(-8 * sigma_max, 8 * sigma_max, n_points)
    x = np.asarray(x, dtype=float)
    u = x / params.l_squared
    density = np.zeros_like(x)
    for w, packet in components:
        if w == 0.0:
            continue
        density += w * np.abs(_centered_transform(packet, u)) ** 2
    return SampledDensity(x=x, values=density / params.l_squared)


def double_well_density(state: DoubleWellState, params: ExpansionParams,
                        x: Optional[np.ndarray] = None,
                        n_points: int = 4096,
                        span_sigmas: float = 8.0) -> SampledDensity:
    """Detection-plane fringe pattern of a released double-well state.

    Gaussian envelope of width sigma = L^2/(4*pi*sigma') times
    1 + 2 c1 c2 cos(2*pi*x*dxi/L^2 + phi); fringe spacing is L^2/dxi. The
    envelope is the unit-integral normal density, so the pattern integrates
    to 1 up to exponentially small fringe corrections.
    """
    sigma = params.l_squared / (4 * np.pi * state.packet_width)
    if x is None:
        x = np.linspace(-span_sigmas * sigma, span_sigmas * sigma, n_points)
    x = np.asarray(x, dtype=float)
    contrast = 2 * state.c1 * state.c2
    fringe_freq = state.well_separation / params.l_squared
    envelope = np.exp(-x ** 2 / (2 * sigma ** 2)) / np.sqrt(2 * np.pi * sigma ** 2)
    fringes = 1.0 + contrast * np.cos(2 * np.pi * x * fringe_freq + state.phi)
    # exact unit integral: the fringe term integrates against the envelope
    # to contrast * cos(phi) * exp(-2 pi^2 sigma^2 / d_f^2)
    total = 1.0 + contrast * np.cos(state.phi) * np.exp(
        -2 * np.pi ** 2 * (sigma * fringe_freq) ** 2)
    return SampledDensity(x=x, values=envelope * fringes / total)


class FringeFit(NamedTuple):
    contrast: float          # recovered 2*c1*c2
    phase: float             # recovered phi in [0, 2*pi); nan when undefined
    phase_defined: bool
    residual: float          # relative rms misfit


def extract_fringe_params(density: SampledDensity, params: ExpansionParams,
                          well_separation: float,
                          residual_tol: float = 1e-3) -> FringeFit:
    """Recover fringe contrast and phase from a sampled double-well density.

    Fits A * exp(-x^2/(2 sigma^2)) * (1 + C cos(2 pi x dxi/L^2 + phi)) by
    nonlinear least squares, seeded by a linear fit at the known fringe
    frequency. Raises "model mismatch" when the relative rms residual exceeds
    residual_tol; zero-contrast input returns contrast ~ 0 with the phase
    flagged undefined.
    """
    x = np.asarray(density.x, dtype=float)
    n = np.asarray(density.values, dtype=float)
    if np.any(n < 0):
        raise ValueError("density must be nonnegative")
    peak = float(n.max())
    if peak <= 0:
        raise ValueError("density is identically zero")

    theta = 2 * np.pi * x * well_separation / params.l_squared
    total = n.sum()
    sigma0 = float(np.sqrt(np.sum(x ** 2 * n) / total
                           - (np.sum(x * n) / total) ** 2))
    env0 = np.exp(-x ** 2 / (2 * sigma0 ** 2))
    design = np.column_stack([env0, env0 * np.cos(theta), env0 * np.sin(theta)])
    (a0, b0, c0), *_ = np.linalg.lstsq(design, n, rcond=None)
    contrast0 = float(np.hypot(b0, c0) / a0) if a0 > 0 else 0.0
    phase0 = float(np.arctan2(-c0, b0))

    if contrast0 < 1e-8:
        model = a0 * env0
        residual = float(np.sqrt(np.mean((model - n) ** 2)) / peak)
        if residual > residual_tol:
            raise ValueError(
                f"model mismatch: relative residual {residual:.3e}")
        return FringeFit(contrast=max(contrast0, 0.0), phase=float("nan"),
                         phase_defined=False, residual=residual)

    def model_fn(xv, amp, sig, con, ph):
        th = 2 * np.pi * xv * well_separation / params.l_squared
        return amp * np.exp(-xv ** 2 / (2 * sig ** 2)) * (1 + con * np.cos(th + ph))

    p0 = (max(a0, 1e-300), sigma0, min(max(contrast0, 1e-6), 1.2), phase0)
    popt, _ = curve_fit(model_fn, x, n, p0=p0,
                        bounds=([0, sigma0 / 10, 0, -2 * np.pi],
                                [np.inf, sigma0 * 10, 1.5, 2 * np.pi]),
                        maxfev=20000)
    amp, sig, con, ph = popt
    residual = float(np.sqrt(np.mean((model_fn(x, *popt) - n) ** 2)) / peak)
    if residual > residual_tol:
        raise ValueError(f"model mismatch: relative residual {residual:.3e}")
    phase_defined = con > 1e-6
    phase = float(np.mod(ph, 2 * np.pi))
    if phase > 2 * np.pi - 1e-12:
        phase = 0.0
    return FringeFit(contrast=float(con),
                     phase=phase if phase_defined else float("nan"),
                     phase_defined=bool(phase_defined),
                     residual=residual)


class ResolutionFigures(NamedTuple):
    coincidence_period: float    # Lambda = L^2 / w'
    envelope_width: float        # sigma = L^2 / (4 pi sigma')


def resolution_figures(config: LatticeConfig, packet_width: float,
                       params: ExpansionParams) -> ResolutionFigures:
    """Practical resolution scales of the coincidence detection scheme."""
    if packet_width <= 0:
        raise ValueError("packet_width must be positive")
    return ResolutionFigures(
        coincidence_period=params.l_squared / config.lattice_const,
        envelope_width=params.l_squared / (4 * np.pi * packet_width))


def gravity_delay_map(flight_time: float, g: float, delta_t: float) -> float:
    """First-order detector spacing equivalent to a detection delay delta_t.

    Along the fall direction, spatial separations map onto temporal ones via
    dx = g * t * dt.
    """
    if flight_time <= 0:
        raise ValueError("flight_time must be positive")
    return g * flight_time * delta_t


def write_wave_csv(path, x, values, header_lines=()) -> None:
    """CSV with columns x, Re, Im, |.|^2; real inputs get Im = 0."""
    values = np.asarray(values)
    x = np.asarray(x, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("x,re,im,mag2\n")
        for xi, v in zip(x, values):
            z = complex(v)
            fh.write(f"{xi:.17g},{z.real:.17g},{z.imag:.17g},"
                     f"{abs(z) ** 2:.17g}\n")
