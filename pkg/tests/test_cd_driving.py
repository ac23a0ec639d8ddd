import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.common.exceptions import DegenerateSpectrumError
from app.common.models import NormKind
from app.services import cd_driving as cd
from app.services.annealing_path import AnnealingPath
from app.services.sector_algebra import ara_hamiltonian

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def test_nested_commutator_pauli():
    assert_allclose(cd.nested_commutator(SIGMA_Z, SIGMA_X, 1), [[0.0, 2.0], [-2.0, 0.0]])
    assert_allclose(cd.nested_commutator(SIGMA_Z, SIGMA_X, 2), 4 * SIGMA_X)


def test_nested_commutator_commuting(make_symmetric):
    H = make_symmetric(6)
    assert_allclose(cd.nested_commutator(H, H, 1), 0.0, atol=1e-12)
    assert_allclose(cd.nested_commutator(np.diag([1.0, 2.0, 3.0]), np.diag([4.0, 5.0, 6.0]), 3), 0.0)


def test_nested_commutator_rejects_zero_order():
    with pytest.raises(ValueError):
        cd.nested_commutator(SIGMA_Z, SIGMA_X, 0)


def test_zero_derivative_gives_zero_gauge(make_symmetric):
    expansion = cd.variational_coefficients(make_symmetric(5), np.zeros((5, 5)), 2)
    assert expansion.degenerate
    assert expansion.alphas == [0.0, 0.0]
    assert not np.any(expansion.generator)


def test_two_level_first_order_is_exact(make_symmetric):
    H, dH = make_symmetric(2), make_symmetric(2)
    expansion = cd.variational_coefficients(H, dH, 1)
    exact = cd.exact_gauge_potential(H, dH)
    assert expansion.residual_norm == pytest.approx(cd.gauge_residual(H, dH, exact), abs=1e-10)
    assert cd.gauge_residual(H, dH, expansion.gauge) == pytest.approx(expansion.residual_norm, abs=1e-10)


def test_residual_nonincreasing_in_order(small_sector, params):
    path = AnnealingPath.for_sector(small_sector, params)
    for theta in (0.2, 0.5, 0.8):
        residuals = [cd.cd_expansion(path, theta, K).residual_norm for K in (1, 2, 3)]
        assert residuals[1] <= residuals[0] * (1 + 1e-9)
        assert residuals[2] <= residuals[1] * (1 + 1e-9)
        assert residuals[0] <= np.linalg.norm(path.derivative(theta))


def test_normal_equations_orthogonality(small_sector, params):
    path = AnnealingPath.for_sector(small_sector, params)
    H, dH = path.hamiltonian(0.5), path.derivative(0.5)
    expansion = cd.variational_coefficients(H, dH, 2)
    even = [cd.nested_commutator(H, dH, 2 * k) for k in (1, 2)]
    G = dH + sum(a * e for a, e in zip(expansion.alphas, even))
    assert np.linalg.norm(G) == pytest.approx(expansion.residual_norm, rel=1e-8)
    for e in even:
        overlap = cd.frobenius_inner(G, e) / (np.linalg.norm(G) * np.linalg.norm(e))
        assert abs(overlap) < 1e-8


def test_generator_is_real_antisymmetric(small_sector, params):
    path = AnnealingPath.for_sector(small_sector, params)
    X = cd.cd_expansion(path, 0.4, 3).generator
    assert X.dtype == np.float64
    assert_allclose(X, -X.T, atol=1e-12)


def test_exact_gauge_solves_defining_equation(small_sector, params):
    path = AnnealingPath.for_sector(small_sector, params)
    H, dH = path.hamiltonian(0.5), path.derivative(0.5)
    A = cd.exact_gauge_potential(H, dH)
    G = dH + 1j * (A @ H - H @ A)
    assert np.linalg.norm(G @ H - H @ G) < 1e-8


def test_exact_gauge_commuting_derivative():
    H = np.diag([1.0, 2.0, 4.0])
    assert_allclose(cd.exact_gauge_potential(H, np.diag([0.5, -1.0, 2.0])), 0.0, atol=1e-14)


def test_exact_gauge_degenerate_spectrum():
    H = np.diag([1.0, 1.0, 2.0])
    dH = np.ones((3, 3))
    with pytest.raises(DegenerateSpectrumError):
        cd.exact_gauge_potential(H, dH)
    X = cd.exact_gauge_generator(H, dH, strict=False)
    assert_allclose(X[:2, :2], 0.0, atol=1e-14)


def test_dh_vanishes_at_boundaries(sector_n10, params):
    for theta in (0.0, 1.0):
        assert not np.any(cd.dh_dtheta(sector_n10, theta, params))


def test_dh_matches_finite_difference(sector_n10, params):
    path = AnnealingPath.for_sector(sector_n10, params)
    h = 1e-5
    fd = (path.hamiltonian(0.5 + h) - path.hamiltonian(0.5 - h)) / (2 * h)
    assert_allclose(path.derivative(0.5), fd, atol=1e-7)


def test_path_hamiltonian_matches_ara_builder(sector_n10, params):
    path = AnnealingPath.for_sector(sector_n10, params)
    pt = path.sample(0.3)
    assert_allclose(path.hamiltonian(0.3), ara_hamiltonian(sector_n10, pt.lam, pt.s, 3, 1.0), atol=1e-12)


def test_cd_term_boundaries_and_scaling(sector_n10, params):
    for theta in (0.0, 1.0):
        assert not np.any(cd.cd_term(sector_n10, theta, params, K=2))
    term = cd.cd_term(sector_n10, 0.45, params, K=2, tau=1.0)
    assert_allclose(cd.cd_term(sector_n10, 0.45, params, K=2, tau=2.0), term / 2, atol=1e-14)
    assert_allclose(term, term.conj().T, atol=1e-12)


def test_cd_term_requires_order(sector_n10, params):
    with pytest.raises(ValueError):
        cd.cd_term(sector_n10, 0.5, params, K=0)


def test_norm_trace_endpoints(small_sector, params):
    trace = cd.norm_trace(small_sector, params, K=1, tau=1.0, grid=201)
    assert trace[0].frob_norm == 0.0 and trace[-1].frob_norm == 0.0
    assert all(pt.trace_norm >= pt.frob_norm - 1e-12 for pt in trace)
    assert max(pt.frob_norm for pt in trace) > 0


def test_cd_cost(small_sector, params):
    assert cd.cd_cost(small_sector, params, K=0, tau=1.0) == 0.0
    frob = cd.cd_cost(small_sector, params, K=1, tau=1.0)
    trace = cd.cd_cost(small_sector, params, K=1, tau=1.0, norm_kind=NormKind.TRACE)
    assert 0 < frob <= trace
    assert cd.cd_cost(small_sector, params, K=1, tau=2.0) == pytest.approx(frob / 2)
    with pytest.raises(ValueError):
        cd.cd_cost(small_sector, params, K=1, tau=1.0, grid=100)
