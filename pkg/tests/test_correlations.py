"""Closed-form correlations, discrete transform pairs, and their properties."""

import numpy as np
import pytest

from latticetof import (FieldState, ModeBasis, Statistics, fermion_transform,
                        g1_from_p1, g1_of_state, g2_from_p2, g2_of_state,
                        p1_from_g1, p2_from_g2, profile_of_state,
                        siegert_check)
from latticetof.correlations import write_profile_csv

N = 64
BASIS = ModeBasis.from_geometry(N, 0.5e-6, 3.0e-9)


def _state(indices, n_modes=N, statistics=Statistics.BOSON):
    occ = np.zeros(n_modes, dtype=bool)
    occ[list(indices)] = True
    return FieldState(occupations=occ, statistics=statistics,
                      atom_count=len(indices))


def test_mode_basis_grid_quantization():
    assert BASIS.delta_k * BASIS.dx == pytest.approx(2 * np.pi / N, rel=1e-15)
    assert BASIS.delta_k * BASIS.dx2 == pytest.approx(np.pi / N, rel=1e-15)
    assert BASIS.mode_wavenumbers[3] == pytest.approx(3 * BASIS.delta_k)
    with pytest.raises(ValueError):
        ModeBasis(n_modes=N, delta_k=1.0, dx=1.0, dx2=0.5)


def test_g1_single_atom_is_pure_phasor():
    state = _state([9])
    for ell in (0, 1, 5, 31):
        sep = ell * BASIS.dx
        got = g1_of_state(state, BASIS, sep)
        assert got == pytest.approx(np.exp(1j * 9 * BASIS.delta_k * sep))
        assert abs(got) == pytest.approx(1.0)


def test_g1_zero_separation_is_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        idx = rng.choice(N, size=rng.integers(1, 10), replace=False)
        assert g1_of_state(_state(idx), BASIS, 0.0) == pytest.approx(1.0)


def test_g1_two_modes_cosine_visibility():
    state = _state([0, 1])
    for ell in range(1, N):
        sep = ell * BASIS.dx
        got = g1_of_state(state, BASIS, sep)
        expected = (1 + np.exp(1j * BASIS.delta_k * sep)) / 2
        assert got == pytest.approx(expected, abs=1e-14)
        assert abs(got) == pytest.approx(abs(np.cos(BASIS.delta_k * sep / 2)),
                                         abs=1e-14)


def test_g1_empty_field_raises():
    with pytest.raises(ValueError, match="empty field"):
        g1_of_state(_state([]), BASIS, 0.0)


def test_g1_statistics_independent():
    idx = [3, 17, 40]
    for ell in (0, 2, 9):
        sep = ell * BASIS.dx
        b = g1_of_state(_state(idx, statistics=Statistics.BOSON), BASIS, sep)
        f = g1_of_state(_state(idx, statistics=Statistics.FERMION), BASIS, sep)
        assert b == f


def test_g2_two_bosons_adjacent_cosine_law():
    state = _state([10, 11])
    for sep in BASIS.g2_separations():
        got = g2_of_state(state, BASIS, sep)
        assert 2 * got - 1 == pytest.approx(np.cos(BASIS.delta_k * sep),
                                            abs=1e-13)
    assert g2_of_state(state, BASIS, 0.0) == pytest.approx(1.0)


def test_g2_two_fermions_pi_shift():
    state = _state([10, 11], statistics=Statistics.FERMION)
    for sep in BASIS.g2_separations():
        got = g2_of_state(state, BASIS, sep)
        assert 2 * got - 1 == pytest.approx(-np.cos(BASIS.delta_k * sep),
                                            abs=1e-13)
    assert g2_of_state(state, BASIS, 0.0) == pytest.approx(0.0)


def test_g2_bunching_plateau_growth():
    # contiguous blocks: g2(0) = 2(R-1)/R, monotone toward 2
    big = ModeBasis.from_geometry(128, 0.5e-6, 3.0e-9)
    previous = 0.0
    for r in range(2, 101):
        state = _state(range(r), n_modes=128)
        got = g2_of_state(state, big, 0.0)
        assert got == pytest.approx(2 * (r - 1) / r, abs=1e-12)
        assert got > previous
        previous = got
    assert previous == pytest.approx(1.98, abs=1e-12)  # 2(R-1)/R at R = 100


def test_g2_needs_two_atoms():
    with pytest.raises(ValueError, match="two atoms"):
        g2_of_state(_state([4]), BASIS, 0.0)


def test_exchange_sign_property_all_states():
    # normalized profiles ghat = (R^2 / (R(R-1))) g2 satisfy
    # (ghat_F - 1) = -(ghat_B - 1) for every state, not just pairs
    rng = np.random.default_rng(1)
    for _ in range(20):
        r = int(rng.integers(2, 8))
        idx = rng.choice(N, size=r, replace=False)
        sep = float(rng.uniform(0, N * BASIS.dx2))
        b = g2_of_state(_state(idx), BASIS, sep)
        f = g2_of_state(_state(idx, statistics=Statistics.FERMION), BASIS, sep)
        scale = r / (r - 1)
        assert scale * f - 1 == pytest.approx(-(scale * b - 1), abs=1e-12)
        assert f + b == pytest.approx(2 * (r - 1) / r, abs=1e-12)


# ---------------------------------------------------------------------------
# transform pairs
# ---------------------------------------------------------------------------

def test_g1_from_p1_delta_and_uniform():
    delta = np.zeros(N)
    delta[7] = 1.0
    g1 = g1_from_p1(delta, BASIS)
    ells = np.arange(N)
    assert np.max(np.abs(g1 - np.exp(2j * np.pi * 7 * ells / N))) < 1e-12

    uniform = np.full(N, 1 / N)
    g1u = g1_from_p1(uniform, BASIS)
    assert g1u[0] == pytest.approx(1.0)
    assert np.max(np.abs(g1u[1:])) < 1e-14  # exact Dirichlet cancellation


def test_g1_from_p1_two_site_visibility():
    j = 10
    p1 = np.zeros(N)
    p1[0] = p1[j] = 0.5
    g1 = g1_from_p1(p1, BASIS)
    ells = np.arange(N)
    assert np.allclose(np.abs(g1), np.abs(np.cos(np.pi * j * ells / N)),
                       atol=1e-13)


def test_g1_from_p1_requires_normalization():
    with pytest.raises(ValueError, match="normalized"):
        g1_from_p1(np.full(N, 1.0), BASIS)


def test_p1_round_trips_and_specials():
    rng = np.random.default_rng(2)
    for _ in range(25):
        p1 = rng.random(N)
        p1 /= p1.sum()
        assert np.max(np.abs(p1_from_g1(g1_from_p1(p1, BASIS)) - p1)) < 1e-12

    assert np.allclose(p1_from_g1(np.ones(N, dtype=complex)),
                       np.eye(N)[0], atol=1e-14)

    phasor = np.exp(2j * np.pi * 5 * np.arange(N) / N)
    p1 = p1_from_g1(phasor)
    assert p1[5] == pytest.approx(1.0)
    assert np.max(np.abs(np.delete(p1, 5))) < 1e-13


def test_p1_from_g1_rejects_inconsistent_samples():
    bad = np.exp(1j * np.random.default_rng(3).random(N))  # not a p1 transform
    with pytest.raises(ValueError, match="inconsistent g1 samples"):
        p1_from_g1(bad)


def test_g2_from_p2_two_atom_cosine():
    p2 = np.zeros(N)
    p2[1] = 1.0
    g2 = g2_from_p2(p2, 2, BASIS)
    seps = BASIS.g2_separations()
    assert np.max(np.abs(2 * g2 - 1 - np.cos(BASIS.delta_k * seps))) < 1e-12


def test_g2_from_p2_zero_separation_plateau():
    rng = np.random.default_rng(4)
    for r in (2, 5, 25):
        p2 = rng.random(N)
        p2[0] = 0.0
        p2 /= p2.sum()
        g2 = g2_from_p2(p2, r, BASIS)
        assert g2[N] == pytest.approx(2 * (r - 1) / r, abs=1e-12)


def test_g2_from_p2_validates_input():
    p2 = np.zeros(N)
    p2[0] = 0.5
    p2[3] = 0.5
    with pytest.raises(ValueError, match="zero separation"):
        g2_from_p2(p2, 5, BASIS)
    ok = np.zeros(N)
    ok[3] = 1.0
    with pytest.raises(ValueError, match="two atoms"):
        g2_from_p2(ok, 1, BASIS)


def test_p2_round_trip_exact():
    rng = np.random.default_rng(5)
    for _ in range(25):
        p2 = rng.random(N)
        p2[0] = 0.0
        p2 /= p2.sum()
        g2 = g2_from_p2(p2, 25, BASIS)
        assert np.max(np.abs(p2_from_g2(g2, 25) - p2)) < 1e-12


def test_p2_from_g2_constant_profile_flags_unphysical():
    g2 = np.full(2 * N, 2 * 24 / 25)
    with pytest.warns(UserWarning, match="zero separation"):
        p2 = p2_from_g2(g2, 25)
    assert p2[0] == pytest.approx(1.0)
    assert np.max(np.abs(p2[1:])) < 1e-12


def test_p2_from_g2_two_atom_cosine_inverts_to_delta():
    seps = BASIS.g2_separations()
    g2 = (1 + np.cos(BASIS.delta_k * seps)) / 2
    p2 = p2_from_g2(g2, 2)
    assert p2[1] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(np.delete(p2, 1))) < 1e-12


def test_p2_from_g2_rejects_asymmetry():
    g2 = np.full(2 * N, 1.0)
    g2[N + 3] += 1e-5
    with pytest.raises(ValueError, match="symmetric"):
        p2_from_g2(g2, 25)


def test_fermion_transform():
    assert fermion_transform(np.array([1.5]))[0] == pytest.approx(0.5)
    assert fermion_transform(np.array([1.0]))[0] == pytest.approx(1.0)
    rng = np.random.default_rng(6)
    g2 = rng.random(33) * 2
    assert np.allclose(fermion_transform(fermion_transform(g2)), g2)


def test_fermion_route_matches_direct_fermion_transform_pair():
    # forward fermion transform equals the exchange image of the boson one
    rng = np.random.default_rng(7)
    p2 = rng.random(N)
    p2[0] = 0.0
    p2 /= p2.sum()
    r = 25
    b = g2_from_p2(p2, r, BASIS, Statistics.BOSON)
    f = g2_from_p2(p2, r, BASIS, Statistics.FERMION)
    scale = r / (r - 1)
    assert np.allclose(scale * f, fermion_transform(scale * b), atol=1e-12)


# ---------------------------------------------------------------------------
# Siegert relation and ensemble-limit properties
# ---------------------------------------------------------------------------

def test_siegert_degenerate_cases():
    # single atom: |g1| = 1 everywhere, predicted plateau g2 = 2
    delta = np.zeros(N)
    delta[5] = 1.0
    g1 = g1_from_p1(delta, BASIS)
    res = siegert_check(g1, np.full(2 * N, 2.0))
    assert res.max_abs < 1e-12

    # fully dephased field: g1 = 0 away from zero separation predicts g2 = 1
    g1_flat = g1_from_p1(np.full(N, 1 / N), BASIS)
    res = siegert_check(g1_flat, np.full(2 * N, 1.0))
    live = np.abs(BASIS.g2_ells()) > 0
    assert np.max(np.abs(res.residual[live][1::2])) <= 1.0  # odd half-grid pts
    even = (BASIS.g2_ells() % 2 == 0) & (BASIS.g2_ells() != 0)
    assert np.max(np.abs(res.residual[even])) < 1e-12


def test_siegert_grid_mismatch():
    with pytest.raises(ValueError, match="grid mismatch"):
        siegert_check(np.ones(N, dtype=complex), np.ones(3 * N))


def test_ensemble_limit_of_single_atom_shots():
    # averaging per-shot g1 over atoms drawn iid from p1 converges to the
    # deterministic transform of p1 at the Monte Carlo rate
    rng = np.random.default_rng(8)
    p1 = rng.random(N)
    p1 /= p1.sum()
    shots = 20_000
    sites = rng.choice(N, size=shots, p=p1)
    ells = np.arange(N)
    per_shot = np.exp(2j * np.pi * np.outer(sites, ells) / N)
    mean = per_shot.mean(axis=0)
    se = np.sqrt((np.abs(per_shot - mean) ** 2).sum(axis=0)
                 / (shots - 1) / shots)
    exact = g1_from_p1(p1, BASIS)
    z = np.abs(mean - exact)[1:] / se[1:]
    assert z.max() < 5


def test_profile_of_state_consistency_and_csv(tmp_path):
    state = _state([4, 9, 30])
    prof = profile_of_state(state, BASIS)
    assert prof.g1[0] == pytest.approx(1.0)
    assert np.allclose(prof.visibility, np.abs(prof.g1))
    # g2 symmetry on the stored grid
    assert np.allclose(prof.g2[N + 1:], prof.g2[1:N][::-1], atol=0)
    # matches the scalar evaluators on their grids
    for ell in (0, 3, 17):
        assert prof.g1[ell] == pytest.approx(
            g1_of_state(state, BASIS, ell * BASIS.dx), abs=1e-12)
        assert prof.g2[N + ell] == pytest.approx(
            g2_of_state(state, BASIS, ell * BASIS.dx2), abs=1e-12)

    path = tmp_path / "profile.csv"
    write_profile_csv(path, prof, header_lines=["test profile"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# test profile"
    assert lines[1] == "ell,separation_m,re_g1,im_g1,visibility,g2"
    assert len(lines) == 2 + 2 * N
    row0 = lines[2 + N].split(",")   # ell = 0 row carries the g1 sample
    assert int(row0[0]) == 0
    assert float(row0[2]) == pytest.approx(1.0)


def test_profile_of_single_atom_state_has_no_g2():
    prof = profile_of_state(_state([11]), BASIS)
    assert prof.g2 is None
    assert np.max(np.abs(np.abs(prof.g1) - 1.0)) < 1e-13
    with pytest.raises(ValueError, match="empty field"):
        profile_of_state(_state([]), BASIS)
