import numpy as np
import pytest

from app.common.exceptions import NonConvergedError
from app.common.models import GaugeKind, Protocol
from app.services import dynamics
from app.services.annealing_path import AnnealingPath
from app.services.sector_algebra import build_sector


def test_resolve_gauge(params):
    assert dynamics.resolve_gauge(params) is GaugeKind.NONE
    assert dynamics.resolve_gauge(params.with_(K=2)) is GaugeKind.VARIATIONAL
    assert dynamics.resolve_gauge(params, "exact") is GaugeKind.EXACT


def test_rk4_constant_generator_is_accurate():
    M = -1j * np.diag([1.0, -1.0])
    psi, drift = dynamics.rk4(lambda theta: M, np.array([1.0, 1.0]) / np.sqrt(2), 400)
    exact = np.exp(-1j * np.array([1.0, -1.0])) / np.sqrt(2)
    np.testing.assert_allclose(psi, exact, atol=1e-10)
    assert drift < 1e-10


def test_evolve_conserves_norm(small_sector, params):
    result = dynamics.evolve(small_sector, params)
    assert result.norm_drift < 1e-8
    assert abs(np.linalg.norm(result.final_state) - 1) < 1e-8
    assert 0 <= result.p_gs <= 1


def test_evolve_with_cd_improves_fidelity(sector_n10, params):
    bare = dynamics.evolve(sector_n10, params)
    assisted = dynamics.evolve(sector_n10, params.with_(K=1))
    assert assisted.gauge is GaugeKind.VARIATIONAL
    assert assisted.p_gs > bare.p_gs


def test_evolve_records_norm_trace(small_sector, params):
    result = dynamics.evolve(small_sector, params.with_(K=1), record_norms=True, norm_grid=201)
    assert len(result.norm_trace) == 201
    assert result.norm_trace[0].frob_norm == 0.0


def test_exact_gauge_transport_is_adiabatic(params):
    sector = build_sector(4, 0.5)
    result = dynamics.evolve(sector, params.with_(tau=0.1), gauge=GaugeKind.EXACT)
    assert result.p_gs >= 1 - 1e-6


@pytest.mark.parametrize("c", [0.7, 0.9])
def test_exact_gauge_transport_at_ten_spins(params, c):
    result = dynamics.evolve(build_sector(10, c), params.with_(tau=0.1), gauge=GaugeKind.EXACT)
    assert result.p_gs >= 1 - 1e-6
    assert result.norm_drift < 1e-8


@pytest.mark.slow
def test_adiabatic_check_ten_spins(params):
    result = dynamics.adiabatic_check(build_sector(10, 0.9), params.with_(tau=500.0))
    assert result.gauge is GaugeKind.NONE
    assert result.p_gs > 0.99


def test_long_anneal_is_adiabatic(params):
    result = dynamics.adiabatic_check(build_sector(4, 0.75), params.with_(tau=50.0))
    assert result.p_gs > 0.99


def test_trivial_sector_stays_in_target(params):
    sector = build_sector(6, 1.0)
    result = dynamics.evolve(sector, params.with_(tau=20.0))
    assert result.p_gs > 0.99


def test_evolve_qa_small(params):
    result = dynamics.evolve_qa(6, params.with_(tau=0.01))
    assert result.params.protocol is Protocol.QA
    assert result.c is None
    assert result.p_gs == pytest.approx(2.0 ** -6, rel=0.2)


def test_propagate_reports_non_convergence(small_sector, params, monkeypatch):
    monkeypatch.setattr(dynamics.settings, "MAX_HALVINGS", 0)
    path = AnnealingPath.for_sector(small_sector, params)
    with pytest.raises(NonConvergedError):
        dynamics.propagate(path, 1.0, 0, GaugeKind.NONE)


def test_initial_steps_grow_with_tau(small_sector, params):
    path = AnnealingPath.for_sector(small_sector, params)
    assert dynamics.initial_steps(path, 100.0) > dynamics.initial_steps(path, 1.0)
    assert dynamics.initial_steps(path, 0.01) >= dynamics.settings.MIN_STEPS
