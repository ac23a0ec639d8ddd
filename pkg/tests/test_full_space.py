import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.common.exceptions import DimensionTooLargeError
from app.common.models import Protocol
from app.services import full_space as fs
from app.services import sector_algebra as sa
from app.services.dynamics import evolve, evolve_qa
from app.services.spectra import gap


@pytest.mark.parametrize("N, c", [(4, 0.5), (5, 0.6), (6, 1.0)])
def test_embedding_is_isometry(N, c):
    W = fs.embed_sector_basis(sa.build_sector(N, c))
    assert_allclose(W.T @ W, np.eye(W.shape[1]), atol=1e-12)


@pytest.mark.parametrize("N, c", [(4, 0.5), (5, 0.6)])
def test_full_space_operators_restrict_to_sector(N, c, params):
    sector = sa.build_sector(N, c)
    W = fs.embed_sector_basis(sector)
    assert_allclose(W.T @ fs.full_vtf(N, 1.3) @ W, sa.build_vtf(sector, 1.3), atol=1e-12)
    assert_allclose(W.T @ fs.full_hp(N, 3) @ W, sa.build_hp(sector, 3), atol=1e-12)
    assert_allclose(W.T @ fs.full_h0(N, sector.N_up) @ W, sa.build_h0(sector), atol=1e-12)


def test_initial_states_embed(params):
    sector = sa.build_sector(5, 0.6)
    path = fs.full_space_path(5, 0.6, params)
    W = fs.embed_sector_basis(sector)
    assert_allclose(W @ sa.initial_state(sector), path.psi0, atol=1e-12)
    assert_allclose(W @ sa.target_state(sector), path.target, atol=1e-12)


def test_qa_initial_state_embeds(params):
    W = fs.embed_sector_basis(sa.ladder(4))
    path = fs.full_space_path(4, None, params.with_(protocol=Protocol.QA))
    assert_allclose(W @ sa.qa_initial_state(4), path.psi0, atol=1e-12)


@pytest.mark.parametrize("N, c", [(4, 0.5), (6, 0.5)])
def test_sector_matches_full_space_fidelity(N, c, params):
    sector_run = evolve(sa.build_sector(N, c), params)
    full_run = fs.evolve_full_space(N, c, params)
    assert full_run.p_gs == pytest.approx(sector_run.p_gs, abs=1e-8)


def test_qa_matches_full_space(params):
    p = params.with_(protocol=Protocol.QA, tau=2.0)
    assert fs.evolve_full_space(5, None, p).p_gs == pytest.approx(evolve_qa(5, p).p_gs, abs=1e-8)


def test_interior_gap_matches_full_space(params):
    sector = sa.build_sector(6, 0.5)
    path = fs.full_space_path(6, 0.5, params)
    W = fs.embed_sector_basis(sector)
    for lam, s in [(0.3, 0.4), (0.8, 0.6)]:
        restricted = W.T @ path.hamiltonian_at(lam, s) @ W
        E = np.linalg.eigvalsh(restricted)
        assert gap(sector, lam, s, params) == pytest.approx(E[1] - E[0], abs=1e-9)


def test_full_space_size_limit(params):
    with pytest.raises(DimensionTooLargeError):
        fs.evolve_full_space(10, 0.5, params)
