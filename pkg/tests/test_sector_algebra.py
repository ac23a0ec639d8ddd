import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from app.common.exceptions import NonIntegerFractionError
from app.common.models import SpinSector
from app.services import sector_algebra as sa
from app.services import spectra


@pytest.mark.parametrize("N, c, n_up, n_dn, d", [
    (10, 0.7, 7, 3, 32),
    (10, 1.0, 10, 0, 11),
    (50, 0.9, 45, 5, 276),
])
def test_build_sector_dimensions(N, c, n_up, n_dn, d):
    sector = sa.build_sector(N, c)
    assert (sector.N_up, sector.N_dn, sector.d) == (n_up, n_dn, d)


def test_build_sector_rejects_non_integer_up_count():
    with pytest.raises(NonIntegerFractionError) as exc:
        sa.build_sector(10, 0.75)
    assert exc.value.N == 10


@pytest.mark.parametrize("N, c", [(1, 1.0), (10, 0.0), (10, 1.2)])
def test_build_sector_rejects_bad_arguments(N, c):
    with pytest.raises(ValueError):
        sa.build_sector(N, c)


def test_sector_counts_must_add_up():
    with pytest.raises(ValidationError):
        SpinSector(N=5, N_up=3, N_dn=3)


def test_sector_hamming_distance_and_magnetization(sector_n10):
    assert sector_n10.hamming_distance == 3
    assert sector_n10.initial_magnetization == pytest.approx(0.4)


def test_spin_half_ladder():
    sz, sx = sa.spin_ladder(1)
    assert_allclose(sx, 0.5 * np.array([[0, 1], [1, 0]]))
    assert_allclose(sz, np.diag([0.5, -0.5]))


def test_spin_one_ladder_descending():
    sz, _ = sa.spin_ladder(2)
    assert_allclose(sz, np.diag([1.0, 0.0, -1.0]))


def test_collective_ops_on_different_ladders_commute(sector_n10):
    ops = sa.collective_ops(sector_n10)
    A, B = ops["Sxu"], ops["Szd"]
    assert_allclose(A @ B - B @ A, 0.0, atol=1e-12)


def test_collective_ops_satisfy_spin_algebra(sector_n10):
    ops = sa.collective_ops(sector_n10)
    sx, sz = ops["Sxu"], ops["Szu"]
    j = sector_n10.j_up
    assert np.trace(sx @ sx) == pytest.approx(np.trace(sz @ sz))
    assert np.trace(sz @ sz) / (sector_n10.N_dn + 1) == pytest.approx(j * (j + 1) * (2 * j + 1) / 3)


def test_hp_two_spins():
    hp = sa.build_hp(sa.build_sector(2, 1.0), p=3)
    assert_allclose(np.diag(hp), [-2.0, 0.0, 2.0])


def test_hp_entry_and_ground_state(sector_n10):
    hp = sa.build_hp(sector_n10, p=3)
    assert hp[sector_n10.index(0, 3), sector_n10.index(0, 3)] == pytest.approx(-0.64)
    diag = np.diag(hp)
    assert diag.min() == pytest.approx(-10.0)
    assert np.argmin(diag) == sector_n10.index(0, 0)
    assert np.sum(np.isclose(diag, -10.0)) == 1


@pytest.mark.parametrize("p", [2, 1, 4])
def test_hp_rejects_even_or_small_p(sector_n10, p):
    with pytest.raises(ValueError):
        sa.build_hp(sector_n10, p)


def test_h0_spectrum_bounds(sector_n10):
    diag = np.diag(sa.build_h0(sector_n10))
    assert diag.min() == pytest.approx(-10.0)
    assert diag.max() == pytest.approx(10.0)


def test_h0_single_ladder_is_minus_two_szu():
    sector = sa.build_sector(6, 1.0)
    assert_allclose(sa.build_h0(sector), -2 * sa.collective_ops(sector)["Szu"])


def test_vtf_single_spin():
    assert_allclose(sa.build_vtf(sa.ladder(1), 1.0), -np.array([[0, 1], [1, 0]]))


def test_vtf_zero_diagonal_and_spectrum(sector_n10):
    v = sa.build_vtf(sector_n10, 1.5)
    assert_array_equal(np.diag(v), 0.0)
    E = np.linalg.eigvalsh(v)
    assert E[0] == pytest.approx(-15.0)
    assert E[-1] == pytest.approx(15.0)


def test_ara_hamiltonian_corners(sector_n10):
    h0, hp, v = sa.build_h0(sector_n10), sa.build_hp(sector_n10, 3), sa.build_vtf(sector_n10, 1.0)
    assert_allclose(sa.ara_hamiltonian(sector_n10, 0, 0, 3, 1.0), h0)
    assert_allclose(sa.ara_hamiltonian(sector_n10, 1, 1, 3, 1.0), hp)
    assert_allclose(sa.ara_hamiltonian(sector_n10, 1, 0, 3, 1.0), v)


@pytest.mark.parametrize("lam, s", [(0.3, 0.7), (0.5, 0.5), (0.91, 0.02)])
def test_ara_hamiltonian_rebuilds_from_corners(sector_n10, lam, s):
    corner = {(a, b): sa.ara_hamiltonian(sector_n10, a, b, 3, 1.3) for a in (0, 1) for b in (0, 1)}
    rebuilt = ((1 - lam) * (1 - s) * corner[0, 0] + lam * (1 - s) * corner[1, 0]
               + (1 - lam) * s * corner[0, 1] + lam * s * corner[1, 1])
    direct = sa.ara_hamiltonian(sector_n10, lam, s, 3, 1.3)
    assert np.abs(rebuilt - direct).max() <= 1e-12 * np.abs(direct).max()


def test_ara_hamiltonian_rejects_out_of_range(sector_n10):
    with pytest.raises(ValueError):
        sa.ara_hamiltonian(sector_n10, 1.2, 0.5, 3, 1.0)


def test_qa_hamiltonian_ends():
    assert np.linalg.eigvalsh(sa.qa_hamiltonian(8, 1.0, 3, 1.0))[0] == pytest.approx(-8.0)
    assert np.linalg.eigvalsh(sa.qa_hamiltonian(8, 0.0, 3, 2.0))[0] == pytest.approx(-16.0)


def test_qa_hamiltonian_midpoint_two_spins():
    E = np.linalg.eigvalsh(sa.qa_hamiltonian(2, 0.5, 3, 1.0))
    assert_allclose(E, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_initial_and_target_states(sector_n10):
    psi0, target = sa.initial_state(sector_n10), sa.target_state(sector_n10)
    h0, hp = sa.build_h0(sector_n10), sa.build_hp(sector_n10, 3)
    assert np.vdot(psi0, h0 @ psi0).real == pytest.approx(-10.0)
    assert np.vdot(target, hp @ target).real == pytest.approx(-10.0)
    assert np.vdot(psi0, target) == 0


@pytest.mark.parametrize("N, c", [(4, 0.5), (10, 0.7), (10, 0.9), (12, 0.75)])
def test_eigensolver_ground_states_are_initial_and_target(N, c):
    sector = sa.build_sector(N, c)
    for H, state in ((sa.build_h0(sector), sa.initial_state(sector)),
                     (sa.build_hp(sector, 3), sa.target_state(sector))):
        E, V = spectra.eig_symmetric(H)
        assert E[1] - E[0] > 1e-6
        assert abs(np.vdot(V[:, 0], state)) == pytest.approx(1.0, abs=1e-12)


def test_initial_state_is_target_when_all_up():
    sector = sa.build_sector(10, 1.0)
    assert_array_equal(sa.initial_state(sector), sa.target_state(sector))


def test_qa_initial_state_amplitudes():
    assert_allclose(sa.qa_initial_state(1), [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert_allclose(sa.qa_initial_state(2), [0.5, 1 / np.sqrt(2), 0.5])


@pytest.mark.parametrize("N", [3, 7, 12])
def test_qa_initial_state_is_transverse_field_ground_state(N):
    E, V = np.linalg.eigh(sa.build_vtf(sa.ladder(N), 1.0))
    assert E[1] - E[0] > 1e-6
    assert abs(np.vdot(V[:, 0], sa.qa_initial_state(N))) == pytest.approx(1.0)


@hyp_settings(max_examples=25, deadline=None)
@given(N=st.integers(2, 12), n_up=st.integers(0, 12), lam=st.floats(0, 1), s=st.floats(0, 1))
def test_ara_hamiltonian_real_symmetric(N, n_up, lam, s):
    n_up = min(n_up, N)
    sector = SpinSector(N=N, N_up=n_up, N_dn=N - n_up)
    H = sa.ara_hamiltonian(sector, lam, s, 3, 1.0)
    assert H.dtype == np.float64
    assert_array_equal(H, H.T)
