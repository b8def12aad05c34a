"""Free expansion, mixed-state densities, fringe synthesis and inversion."""

import numpy as np
import pytest

from latticetof import (DoubleWellState, ExpansionParams, LatticeConfig,
                        LocalWavepacket, double_well_density,
                        extract_fringe_params, free_expand, gravity_delay_map,
                        resolution_figures, tof_density)
from latticetof.constants import PLANCK_H, SPECIES_MASS
from latticetof.wavepacket import SampledDensity, far_field_ratio, write_wave_csv

CESIUM = ExpansionParams.from_time(SPECIES_MASS["cesium"], 1.0)

# synthetic geometry with L^2 = 1 m^2 keeps the quadratic phase resolvable
UNIT = ExpansionParams.from_time(mass=PLANCK_H, flight_time=1.0)


def test_expansion_params_consistency():
    assert UNIT.l_squared == pytest.approx(1.0)
    # frozen: h * 1 s / (2.2069e-25 kg), computed by hand
    assert CESIUM.l_squared == pytest.approx(3.002433e-9, rel=1e-6)
    with pytest.raises(ValueError, match="inconsistent"):
        ExpansionParams(mass=SPECIES_MASS["cesium"], flight_time=1.0,
                        l_squared=1e-9)
    with pytest.raises(ValueError):
        ExpansionParams.from_time(mass=-1.0, flight_time=1.0)


def test_wavepacket_invariants():
    with pytest.raises(ValueError, match="power of two"):
        LocalWavepacket(grid=np.linspace(-1, 1, 100),
                        amplitudes=np.ones(100), center=0.0, width=0.01)
    packet = LocalWavepacket.gaussian(center=0.0, width=0.01)
    m = packet.grid.size
    assert m & (m - 1) == 0
    assert np.sum(np.abs(packet.amplitudes) ** 2) * packet.dx == pytest.approx(
        1.0, abs=1e-12)
    with pytest.raises(ValueError, match="8 widths"):
        LocalWavepacket(grid=packet.grid, amplitudes=packet.amplitudes,
                        center=packet.grid[-1], width=0.01)
    bad = packet.amplitudes * 2.0
    with pytest.raises(ValueError, match="normalized"):
        LocalWavepacket(grid=packet.grid, amplitudes=bad, center=0.0,
                        width=0.01)


def test_free_expand_matches_analytic_gaussian():
    # envelope and quadratic phase against the closed-form expansion of a
    # Gaussian packet, pointwise wherever the field is above 1e-6 of peak
    width = 0.01
    packet = LocalWavepacket.gaussian(center=0.0, width=width)
    wave = free_expand(packet, UNIT, pad_factor=2048)
    x = wave.grid.positions
    sigma = UNIT.l_squared / (4 * np.pi * width)
    envelope = (2 * np.pi * sigma ** 2) ** (-0.25) * np.exp(-(x / (2 * sigma)) ** 2)
    mag = np.abs(wave.values)
    live = mag > 1e-6 * mag.max()
    assert np.max(np.abs(mag[live] - envelope[live]) / envelope[live]) < 1e-6

    expected_phase = -np.pi / 4 + np.pi * x ** 2 / UNIT.l_squared
    mismatch = np.angle(wave.values[live] * np.exp(-1j * expected_phase[live]))
    assert np.max(np.abs(mismatch)) < 1e-6


def test_free_expand_preserves_norm():
    for width in (0.01, 0.012):
        packet = LocalWavepacket.gaussian(center=0.0, width=width)
        wave = free_expand(packet, UNIT, pad_factor=2048)
        dx = wave.grid.positions[1] - wave.grid.positions[0]
        norm = np.sum(np.abs(wave.values) ** 2) * dx
        assert norm == pytest.approx(1.0, abs=1e-8)


def test_free_expand_shift_theorem():
    width = 0.01
    ref = free_expand(LocalWavepacket.gaussian(0.0, width), UNIT,
                      pad_factor=2048)
    shifted = free_expand(LocalWavepacket.gaussian(0.05, width), UNIT,
                          pad_factor=2048)
    mag_ref = np.abs(ref.values)
    assert np.max(np.abs(np.abs(shifted.values) - mag_ref)) < 1e-12

    x = ref.grid.positions
    live = mag_ref > 1e-6 * mag_ref.max()
    linear = np.angle(shifted.values[live] * np.conj(ref.values[live])
                      * np.exp(-2j * np.pi * x[live] * 0.05 / UNIT.l_squared))
    assert np.max(np.abs(linear)) < 1e-8


def test_free_expand_rejects_coarse_phase_sampling():
    packet = LocalWavepacket.gaussian(center=0.0, width=0.01)
    with pytest.raises(ValueError, match="quadratic phase"):
        free_expand(packet, UNIT, pad_factor=4)


def test_far_field_warning_is_computed():
    fat = LocalWavepacket.gaussian(center=0.0, width=0.05)
    assert far_field_ratio(fat, UNIT) > 0.1
    with pytest.warns(UserWarning, match="far-field"):
        free_expand(fat, UNIT, pad_factor=64)


def test_tof_density_translation_drops_out():
    # R identical packets at distinct sites: the mixed density equals the
    # single-packet momentum density exactly
    width = 30e-9
    packets = [LocalWavepacket.gaussian(center=i * 0.5e-6, width=width)
               for i in range(4)]
    mixed = tof_density([(0.25, p) for p in packets], CESIUM)
    single = tof_density([(1.0, packets[0])], CESIUM, x=mixed.x)
    assert np.max(np.abs(mixed.values - single.values)) < 1e-12 * single.values.max()


def test_tof_density_mixture_linearity_and_width():
    w1, w2 = 30e-9, 60e-9
    p_narrow = LocalWavepacket.gaussian(0.0, w1)
    p_wide = LocalWavepacket.gaussian(0.0, w2)
    mixed = tof_density([(0.5, p_narrow), (0.5, p_wide)], CESIUM)

    def analytic(x, width):
        sigma = CESIUM.l_squared / (4 * np.pi * width)
        return np.exp(-x ** 2 / (2 * sigma ** 2)) / np.sqrt(2 * np.pi * sigma ** 2)

    expected = 0.5 * analytic(mixed.x, w1) + 0.5 * analytic(mixed.x, w2)
    assert np.max(np.abs(mixed.values - expected)) < 1e-9 * expected.max()

    single = tof_density([(1.0, p_narrow)], CESIUM)
    total = np.trapezoid(single.values, single.x)
    mean = np.trapezoid(single.x * single.values, single.x) / total
    var = np.trapezoid(single.x ** 2 * single.values, single.x) / total - mean ** 2
    assert np.sqrt(var) == pytest.approx(CESIUM.l_squared / (4 * np.pi * w1),
                                         rel=1e-6)


def test_tof_density_validates_weights():
    packet = LocalWavepacket.gaussian(0.0, 30e-9)
    with pytest.raises(ValueError):
        tof_density([], CESIUM)
    with pytest.raises(ValueError, match="sum to 1"):
        tof_density([(0.7, packet)], CESIUM)


def test_free_expand_density_matches_double_well_formula():
    # the analytic fringe pattern is exactly the FFT route's |Psi|^2
    state = DoubleWellState(c1=0.8, c2=0.6, phi=1.1, well_separation=0.4,
                            packet_width=0.01)
    base = LocalWavepacket.gaussian(0.0, 0.01, span_widths=60.0)
    grid = base.grid
    amp = (0.8 * np.exp(-(grid - 0.2) ** 2 / (4 * 0.01 ** 2))
           + 0.6 * np.exp(1j * 1.1) * np.exp(-(grid + 0.2) ** 2 / (4 * 0.01 ** 2)))
    amp /= np.sqrt(np.sum(np.abs(amp) ** 2) * base.dx)
    packet = LocalWavepacket(grid=grid, amplitudes=amp, center=0.0, width=0.01)
    with pytest.warns(UserWarning, match="far-field"):
        wave = free_expand(packet, UNIT, pad_factor=512)
    density = np.abs(wave.values) ** 2
    formula = double_well_density(state, UNIT, x=wave.grid.positions)
    mask = formula.values > 1e-8 * formula.values.max()
    assert np.max(np.abs(density[mask] - formula.values[mask])
                  / formula.values.max()) < 1e-6


def test_double_well_fringe_structure():
    full = DoubleWellState(c1=2 ** -0.5, c2=2 ** -0.5, phi=0.0,
                           well_separation=0.5e-6, packet_width=30e-9)
    dens = double_well_density(full, CESIUM)
    sigma = CESIUM.l_squared / (4 * np.pi * 30e-9)
    spacing = CESIUM.l_squared / 0.5e-6
    mid = np.argmin(np.abs(dens.x))
    assert dens.values[mid] == pytest.approx(dens.values.max(), rel=1e-3)
    # neighboring maxima sit one fringe apart (envelope pulls them slightly in)
    peak_region = np.abs(dens.x - spacing) < spacing / 4
    local_peak = dens.x[peak_region][np.argmax(dens.values[peak_region])]
    assert local_peak == pytest.approx(spacing, rel=5e-2)
    assert np.trapezoid(dens.values, dens.x) == pytest.approx(1.0, abs=1e-6)

    bare = DoubleWellState(c1=1.0, c2=0.0, phi=0.0, well_separation=0.5e-6,
                           packet_width=30e-9)
    flat = double_well_density(bare, CESIUM, x=dens.x)
    envelope = np.exp(-dens.x ** 2 / (2 * sigma ** 2)) / np.sqrt(
        2 * np.pi * sigma ** 2)
    assert np.max(np.abs(flat.values - envelope)) < 1e-12 * envelope.max()

    flipped = DoubleWellState(c1=2 ** -0.5, c2=2 ** -0.5, phi=np.pi,
                              well_separation=0.5e-6, packet_width=30e-9)
    dark = double_well_density(flipped, CESIUM, x=np.array([0.0]))
    assert dark.values[0] < 1e-10 * dens.values.max()


def test_fringe_round_trip_example():
    state = DoubleWellState(c1=2 ** -0.5, c2=2 ** -0.5, phi=0.7,
                            well_separation=0.2e-6, packet_width=30e-9)
    dens = double_well_density(state, CESIUM)
    fit = extract_fringe_params(dens, CESIUM, state.well_separation)
    assert fit.contrast == pytest.approx(1.0, abs=1e-6)
    assert fit.phase == pytest.approx(0.7, abs=1e-6)
    assert fit.phase_defined


@pytest.mark.parametrize("c1c2", [0.025, 0.05, 0.1, 0.25, 0.5])
def test_fringe_round_trip_contrast_sweep(c1c2):
    c1 = np.sqrt((1 + np.sqrt(1 - 4 * c1c2 ** 2)) / 2)
    c2 = c1c2 / c1
    state = DoubleWellState(c1=c1, c2=c2, phi=2.4, well_separation=0.2e-6,
                            packet_width=30e-9)
    dens = double_well_density(state, CESIUM)
    fit = extract_fringe_params(dens, CESIUM, state.well_separation)
    assert fit.contrast == pytest.approx(2 * c1c2, abs=1e-4)
    assert fit.phase == pytest.approx(2.4, abs=1e-4)


def test_fringe_fit_degenerate_and_mismatch():
    bare = DoubleWellState(c1=1.0, c2=0.0, phi=0.0, well_separation=0.2e-6,
                           packet_width=30e-9)
    dens = double_well_density(bare, CESIUM)
    fit = extract_fringe_params(dens, CESIUM, bare.well_separation)
    assert fit.contrast == pytest.approx(0.0, abs=1e-8)
    assert not fit.phase_defined
    assert np.isnan(fit.phase)

    # clearly non-Gaussian-fringe input must be rejected
    x = dens.x
    sigma = CESIUM.l_squared / (4 * np.pi * 30e-9)
    lorentz = 1.0 / (1.0 + (x / sigma) ** 2)
    with pytest.raises(ValueError, match="model mismatch"):
        extract_fringe_params(SampledDensity(x=x, values=lorentz), CESIUM,
                              bare.well_separation)


def test_resolution_figures_cesium_and_scalings():
    lattice = LatticeConfig(n_sites=256, lattice_const=0.5e-6,
                            fill_factor=0.1)
    fig = resolution_figures(lattice, 30e-9, CESIUM)
    # frozen from L^2 = 3.002433e-9 m^2: both of order 1 cm
    assert fig.coincidence_period == pytest.approx(6.004866e-3, rel=1e-6)
    assert fig.envelope_width == pytest.approx(7.964202e-3, rel=1e-6)

    doubled = resolution_figures(lattice, 30e-9,
                                 ExpansionParams.from_time(
                                     SPECIES_MASS["cesium"], 2.0))
    assert doubled.coincidence_period == pytest.approx(
        2 * fig.coincidence_period)
    assert doubled.envelope_width == pytest.approx(2 * fig.envelope_width)

    halved = LatticeConfig(n_sites=256, lattice_const=0.25e-6, fill_factor=0.1)
    fig_h = resolution_figures(halved, 30e-9, CESIUM)
    assert fig_h.coincidence_period == pytest.approx(
        2 * fig.coincidence_period)
    assert fig_h.envelope_width == pytest.approx(fig.envelope_width)


def test_gravity_delay_map():
    assert gravity_delay_map(1.0, 9.81, 1e-3) == pytest.approx(9.81e-3)
    assert gravity_delay_map(1.0, 9.81, 0.0) == 0.0
    assert gravity_delay_map(2.0, 9.81, 3e-3) == pytest.approx(
        3 * gravity_delay_map(2.0, 9.81, 1e-3))
    with pytest.raises(ValueError):
        gravity_delay_map(0.0, 9.81, 1e-3)


def test_write_wave_csv(tmp_path):
    x = np.array([0.0, 1.0])
    vals = np.array([1 + 2j, 3.0])
    path = tmp_path / "wave.csv"
    write_wave_csv(path, x, vals, header_lines=["demo"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# demo"
    assert lines[1] == "x,re,im,mag2"
    row = [float(v) for v in lines[2].split(",")]
    assert row == pytest.approx([0.0, 1.0, 2.0, 5.0])
