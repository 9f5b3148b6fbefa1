import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltakick import classical, phasespace as ps
from deltakick.params import make_params


def test_coherent_overlap_center():
    lam = 3.0
    c = ps.coherent_overlap(1.5, 0.0, 1.5, lam)
    assert c.imag == 0
    assert c.real == pytest.approx((math.pi * lam) ** -0.25, rel=1e-15)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-5, 5), st.floats(0.1, 20))
def test_coherent_overlap_modulus_independent_of_position(z1, z2, dp, lam):
    a = ps.coherent_overlap(dp, z1, 0.0, lam)
    b = ps.coherent_overlap(dp, z2, 0.0, lam)
    assert abs(a) == pytest.approx(abs(b), rel=1e-12, abs=1e-300)


def test_coherent_overlap_one_width():
    lam = 2.5
    c = ps.coherent_overlap(math.sqrt(2 * lam), 0.7, 0.0, lam)
    assert abs(c) == pytest.approx((math.pi * lam) ** -0.25 * math.exp(-1), rel=1e-14)


def test_plane_wave_husimi(fig1):
    q0 = 37
    q = np.arange(q0 - 200, q0 + 201)
    amps = np.where(q == q0, 1.0 + 0j, 0)
    grid = ps.GridSpec(0, 4 * math.pi, 40, 10, 30, 50)
    H = ps.husimi_map(q, amps, fig1, grid)
    p0 = q0 * float(fig1.ladder_step) + float(fig1.beta_raw)
    lam = fig1.lam
    want = np.exp(-(p0 - grid.p) ** 2 / lam) / math.sqrt(math.pi * lam)
    assert np.allclose(H.values, want[:, None], rtol=1e-12, atol=1e-300)


def test_global_phase_invariance(fig1, fig1_states):
    grid = ps.GridSpec(0, 2 * math.pi, 16, 0, 40, 16)
    s = fig1_states[3]
    q, a = ps.eigenstate_ladder(s, fig1, 0.0, grid.p0, grid.p1)
    H1 = ps.husimi_map(q, a, fig1, grid).values
    H2 = ps.husimi_map(q, a * np.exp(0.77j), fig1, grid).values
    assert np.max(np.abs(H1 - H2)) < 1e-13 * H1.max()


def test_truncation_warning(fig1):
    q = np.arange(0, 10)
    amps = np.ones(10, dtype=complex) / math.sqrt(10)
    with pytest.warns(UserWarning):
        ps.husimi_map(q, amps, fig1, ps.GridSpec(0, 1, 4, 0, 5, 4))


def test_fold_examples(fig1):
    assert ps.fold_to_torus(0.0, 0.0, fig1) == (0.0, 0.0)
    th, J = ps.fold_to_torus(0.0, fig1.N * fig1.S, fig1)
    assert min(J, 2 * math.pi - J) < 1e-12
    th, J = ps.fold_to_torus(2 * math.pi, 0.0, fig1)
    assert th == 0.0


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_fold_idempotent(z, p):
    params = make_params(1, 80, 1, 2, k=5)
    th, J = ps.fold_to_torus(z, p, params)
    th2, J2 = ps.fold_to_torus(th, J / params.T, params)
    assert 0 <= th < 2 * math.pi and 0 <= J < 2 * math.pi
    assert abs(th2 - th) < 1e-9 and ps.torus_distance(0, J2, 0, J) < 1e-9


def test_cell_grid(fig1):
    g = ps.cell_grid(fig1)
    assert (g.nz, g.np_) == (512, 512)
    assert g.z1 == pytest.approx(fig1.cell_z)
    assert g.p1 == pytest.approx(fig1.cell_p)
    g = ps.cell_grid(make_params(29, 30, 1, 2))
    assert g.nz == 2048


@pytest.fixture(scope="module")
def fig1_husimis(fig1, fig1_states):
    grid = ps.cell_grid(fig1, per_copy=48)
    return grid, [ps.eigenstate_husimi(s, fig1, grid, 0.0) for s in fig1_states[::16]]


def test_husimi_nonnegative(fig1_husimis):
    _, hs = fig1_husimis
    assert all(np.all(h.values >= 0) for h in hs)


def test_normalization_constant_across_states(fig1, fig1_husimis):
    _, hs = fig1_husimis
    vals = np.array([h.integral() for h in hs])
    assert np.max(np.abs(vals / vals[0] - 1)) < 0.01
    # the analytic value: one Bloch cell of a unit-norm state carries M*S
    assert vals[0] == pytest.approx(fig1.M * fig1.S, rel=1e-6)


@pytest.mark.parametrize("pre_kick", [True, False])
def test_cell_periodicity(fig1, fig1_states, pre_kick):
    grid = ps.GridSpec(0.3, 5.0, 24, 3.0, 30.0, 24)
    for s in fig1_states[::40]:
        base = ps.eigenstate_husimi(s, fig1, grid, 0.0, pre_kick).values
        for shift in ({"dz": fig1.cell_z}, {"dp": fig1.cell_p}, {"dz": -fig1.cell_z, "dp": fig1.cell_p}):
            other = ps.eigenstate_husimi(s, fig1, grid.shifted(**shift), 0.0, pre_kick).values
            assert np.max(np.abs(other - base)) < 1e-8


def test_bloch_angle_changes_nothing_in_periodicity(fig1):
    from deltakick import floquet
    states = floquet.diagonalize(floquet.build_block(fig1, 1.3))
    grid = ps.GridSpec(0.0, 3.0, 12, 0.0, 20.0, 12)
    base = ps.eigenstate_husimi(states[7], fig1, grid, 1.3).values
    other = ps.eigenstate_husimi(states[7], fig1, grid.shifted(dp=fig1.cell_p), 1.3).values
    assert np.max(np.abs(other - base)) < 1e-8


def test_island_state_has_two_blobs(fig1, fig1_states):
    """The state most concentrated on the period-2 islands puts its
    half-maximum region at the two orbit points."""
    mp = classical.MapParams.classical(fig1.K, fig1.Omega)
    orbit = classical.find_accel_orbit(2, 1, mp)
    grid = ps.cell_grid(fig1, per_copy=48)
    best = max(fig1_states, key=lambda s: ps.mass_near(
        ps.eigenstate_husimi(s, fig1, grid, 0.0), fig1, orbit.points, 0.5))
    H = ps.eigenstate_husimi(best, fig1, grid, 0.0)
    zz, pp = np.meshgrid(H.z, H.p)
    th, J = ps.map_torus(zz, pp, fig1)
    hot = H.values >= 0.5 * H.values.max()
    d = np.stack([ps.torus_distance(th[hot], J[hot], t, j) for t, j in orbit.points])
    nearest = d.argmin(axis=0)
    assert np.all(d.min(axis=0) < 0.8)
    assert set(nearest) == {0, 1}
