from __future__ import annotations

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC_ROOT = REPO_ROOT / "src"
if str(SRC_ROOT) not in sys.path:
    sys.path.insert(0, str(SRC_ROOT))

from heat_transport import collision_engine  # noqa: E402
from heat_transport.collision_engine import (  # noqa: E402
    classify_work_ratio,
    first_law_audit,
    heat_current_correlation,
    round_superoperator,
    run_round,
    run_to_steady_state,
)
from heat_transport.model import CouplingForm, ModelParams, SimulationMode  # noqa: E402
from heat_transport.tensor_algebra import DensityMatrix, InvalidStateError  # noqa: E402

KET11 = DensityMatrix.from_ket([0, 0, 0, 1])


def _random_density(seed: int) -> DensityMatrix:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho))


def _params(**overrides: object) -> ModelParams:
    values: dict[str, object] = {"delta": 0.5, "gamma": 0.5, "tau": 0.1, "T1": 5.0, "T2": 1.0}
    values.update(overrides)
    return ModelParams(**values)


def test_round_output_is_valid_density_matrix() -> None:
    for mode in SimulationMode:
        rho_out, ledger = run_round(_random_density(1), _params(mode=mode))
        rho_out.validate()
        for state in (ledger.rho_prime, ledger.rho_dprime, ledger.rho_tprime):
            state.validate()
        assert rho_out is ledger.rho_tprime


def test_round_rejects_wrong_dimension() -> None:
    with pytest.raises(ValueError):
        run_round(DensityMatrix.maximally_mixed(2), _params())


@pytest.mark.parametrize("mode", list(SimulationMode))
@pytest.mark.parametrize("sys_coupling", list(CouplingForm))
def test_first_law_holds_for_any_state(mode: SimulationMode, sys_coupling: CouplingForm) -> None:
    params = _params(delta=0.8, gamma=0.6, sys_coupling=sys_coupling, bath_coupling=CouplingForm.XX, omega1=2.0,
                     mode=mode)
    _, ledger = run_round(_random_density(2), params)
    assert ledger.W1 == pytest.approx(ledger.dE_S1 + ledger.dQ_E1, abs=1e-10)
    assert ledger.W2 == pytest.approx(ledger.dE_S2 + ledger.dQ_E2, abs=1e-10)
    audit = first_law_audit(ledger, params)
    assert audit.first_law_ok is True
    if mode is SimulationMode.FULL:
        assert audit.energy_preserving is None
        assert audit.heat_balance_ok is None


def test_local_energy_preserving_collision_does_no_work() -> None:
    params = _params(mode=SimulationMode.LOCAL_APPROX)
    _, ledger = run_round(_random_density(3), params)
    assert ledger.W1 == pytest.approx(0.0, abs=1e-12)
    assert ledger.W2 == pytest.approx(0.0, abs=1e-12)
    assert ledger.dE_S1 + ledger.dQ_E1 == pytest.approx(0.0, abs=1e-12)
    assert ledger.dE_S2 + ledger.dQ_E2 == pytest.approx(0.0, abs=1e-12)
    audit = first_law_audit(ledger, params)
    assert audit.energy_preserving is True
    assert audit.switching_work_ok is True
    assert audit.heat_balance_ok is True
    assert audit.first_law_ok is True


def test_local_audit_skips_balance_for_non_preserving_collision() -> None:
    params = _params(omega1=2.0, sys_coupling="ZZ", bath_coupling="XX", mode=SimulationMode.LOCAL_APPROX)
    _, ledger = run_round(KET11, params)
    audit = first_law_audit(ledger, params)
    assert audit.energy_preserving is False
    assert audit.heat_balance_ok is None
    assert audit.switching_work_ok is None
    assert audit.first_law_ok is True


def test_local_ledger_leaves_out_system_coupling_energy() -> None:
    params = _params(delta=1.5, mode=SimulationMode.LOCAL_APPROX)
    _, ledger = run_round(_random_density(6), params)
    h_0 = np.diag([1.0, 0.0, 0.0, -1.0]).astype(complex)
    diff = ledger.rho_dprime.matrix - ledger.rho_prime.matrix
    assert ledger.dE_S1 == pytest.approx(float(np.real(np.trace(h_0 @ diff))), abs=1e-12)
    assert ledger.dV_S1 != pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("delta", [0.5, 2.0])
def test_local_ancilla_current_equals_energy_current(delta: float) -> None:
    report = run_to_steady_state(KET11, _params(delta=delta, mode=SimulationMode.LOCAL_APPROX), tol=1e-12)
    assert report.converged
    assert report.J_h_energy > 0.0
    assert report.J_h_ancilla == pytest.approx(report.J_h_energy, abs=1e-10)


def test_free_step_energy_is_booked_only_when_local_ledger_misses_it() -> None:
    full = _params(omega1=2.0, sys_coupling="ZX", bath_coupling="XX")
    _, ledger = run_round(_random_density(7), full)
    assert ledger.dE_free == pytest.approx(0.0, abs=1e-12)
    _, ledger = run_round(_random_density(7), full.with_mode(SimulationMode.LOCAL_APPROX))
    assert abs(ledger.dE_free) > 1e-6


@pytest.mark.parametrize("mode", list(SimulationMode))
def test_steady_residual_vanishes_with_non_commuting_system_coupling(mode: SimulationMode) -> None:
    params = _params(omega1=2.0, sys_coupling="ZX", bath_coupling="XX", mode=mode)
    report = run_to_steady_state(KET11, params, tol=1e-12)
    assert report.converged
    assert report.steady_residual == pytest.approx(0.0, abs=1e-9)


def test_negative_eigenvalue_is_caught_in_the_round_it_appears(monkeypatch: pytest.MonkeyPatch) -> None:
    bad = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
    fake = np.outer(bad.reshape(-1), np.eye(4, dtype=complex).reshape(-1))
    monkeypatch.setattr(collision_engine, "round_superoperator", lambda p: fake)
    with pytest.raises(InvalidStateError, match="after round 1"):
        run_to_steady_state(KET11, _params(), max_rounds=50)


def _z_expectations(rho: DensityMatrix) -> tuple[float, float]:
    z1 = np.diag([1.0, 1.0, -1.0, -1.0])
    z2 = np.diag([1.0, -1.0, 1.0, -1.0])
    return float(np.real(np.trace(z1 @ rho.matrix))), float(np.real(np.trace(z2 @ rho.matrix)))


@pytest.mark.parametrize("mode", list(SimulationMode))
def test_zz_coupling_moves_each_population_in_its_own_collision_only(mode: SimulationMode) -> None:
    params = _params(omega1=2.0, gamma=0.3, T1=10.0, T2=0.1, sys_coupling="ZZ", bath_coupling="XX", mode=mode)
    rho = _random_density(8)
    _, ledger = run_round(rho, params)
    z1_in, z2_in = _z_expectations(rho)
    z1_p, z2_p = _z_expectations(ledger.rho_prime)
    z1_pp, z2_pp = _z_expectations(ledger.rho_dprime)
    z1_ppp, _ = _z_expectations(ledger.rho_tprime)
    assert (z1_p, z2_p) == pytest.approx((z1_in, z2_in), abs=1e-12)
    assert z2_pp == pytest.approx(z2_p, abs=1e-12)
    assert z1_ppp == pytest.approx(z1_pp, abs=1e-12)


def test_zz_steady_current_is_the_coupling_energy_exchanged_in_collision_one() -> None:
    params = _params(omega1=2.0, gamma=0.3, T1=10.0, T2=0.1, sys_coupling="ZZ", bath_coupling="XX")
    report = run_to_steady_state(KET11, params, tol=1e-13)
    assert report.converged
    assert report.J_h_energy == pytest.approx(report.final_ledger.dV_S1, abs=1e-10)
    np.testing.assert_allclose(report.steady_rho.matrix, np.diag(np.diag(report.steady_rho.matrix)), atol=1e-12)


def test_superoperator_matches_explicit_round() -> None:
    for mode in SimulationMode:
        params = _params(omega1=2.0, sys_coupling="ZX", bath_coupling="XX", mode=mode)
        rho = _random_density(4)
        explicit, _ = run_round(rho, params)
        via_superop = (round_superoperator(params) @ rho.matrix.reshape(-1)).reshape(4, 4)
        np.testing.assert_allclose(via_superop, explicit.matrix, atol=1e-12)


def test_superoperator_is_read_only() -> None:
    with pytest.raises(ValueError):
        round_superoperator(_params())[0, 0] = 0.0


@pytest.mark.parametrize("mode", list(SimulationMode))
def test_uncoupled_systems_carry_no_current(mode: SimulationMode) -> None:
    report = run_to_steady_state(KET11, _params(delta=0.0, mode=mode), tol=1e-12)
    assert report.converged
    assert report.J_h_energy == pytest.approx(0.0, abs=1e-9)


def test_full_and_local_agree_without_system_coupling() -> None:
    full = run_to_steady_state(KET11, _params(delta=0.0), tol=1e-12)
    local = run_to_steady_state(KET11, _params(delta=0.0, mode=SimulationMode.LOCAL_APPROX), tol=1e-12)
    np.testing.assert_allclose(full.steady_rho.matrix, local.steady_rho.matrix, atol=1e-9)
    assert full.J_h_energy == pytest.approx(local.J_h_energy, abs=1e-9)


def test_local_equal_temperatures_give_no_current() -> None:
    params = _params(T1=2.0, T2=2.0, mode=SimulationMode.LOCAL_APPROX)
    report = run_to_steady_state(KET11, params, tol=1e-12)
    assert report.converged
    assert report.J_h_energy == pytest.approx(0.0, abs=1e-9)


def test_local_zz_system_with_xx_bath_carries_no_current() -> None:
    params = _params(omega1=2.0, gamma=0.3, T1=10.0, T2=0.1, sys_coupling="ZZ", bath_coupling="XX",
                     mode=SimulationMode.LOCAL_APPROX)
    report = run_to_steady_state(KET11, params, tol=1e-12)
    assert report.converged
    assert report.J_h_energy == pytest.approx(0.0, abs=1e-9)


def test_hot_to_cold_current_is_positive_in_resonant_exchange() -> None:
    report = run_to_steady_state(KET11, _params(T1=5.0, T2=1.0))
    assert report.converged
    assert report.J_h_energy > 0.0
    assert report.steady_residual == pytest.approx(0.0, abs=1e-8)


def test_steady_report_fields_are_consistent() -> None:
    report = run_to_steady_state(KET11, _params())
    assert report.J_h_energy == report.final_ledger.dE_S1
    assert report.J_h_ancilla == -report.final_ledger.dQ_E1
    assert report.W_sw == pytest.approx(report.final_ledger.W1 + report.final_ledger.W2)
    assert report.last_step_distance < 1e-9
    report.steady_rho.validate()


def test_single_round_budget_runs_exactly_one_round() -> None:
    report = run_to_steady_state(KET11, _params(), max_rounds=1)
    assert report.rounds_used == 1
    assert report.converged is False


def test_long_runs_stay_valid(caplog: pytest.LogCaptureFixture) -> None:
    params = _params(omega1=2.0, sys_coupling="ZX", bath_coupling="XX")
    with caplog.at_level(logging.WARNING, logger="heat_transport"):
        report = run_to_steady_state(_random_density(5), params, tol=1e-300, max_rounds=10_000)
    assert report.rounds_used == 10_000
    assert report.converged is False
    report.steady_rho.validate()
    assert abs(np.trace(report.steady_rho.matrix) - 1.0) < 1e-10
    assert "event=not_converged" in caplog.text


def test_steady_state_rejects_bad_arguments() -> None:
    with pytest.raises(ValueError):
        run_to_steady_state(KET11, _params(), tol=0.0)
    with pytest.raises(ValueError):
        run_to_steady_state(KET11, _params(), max_rounds=0)
    with pytest.raises(ValueError):
        run_to_steady_state(DensityMatrix.maximally_mixed(2), _params())
    assert issubclass(InvalidStateError, ValueError)




@pytest.mark.parametrize("diagonal", [(0.0, 0.0, 0.0, 1.0), (0.1, 0.2, 0.3, 0.4), (0.4, 0.3, 0.2, 0.1)])
def test_correlation_current_matches_energy_ledger(diagonal: tuple[float, ...]) -> None:
    params = _params(delta=0.7)
    rho = DensityMatrix(np.diag(diagonal).astype(complex))
    _, ledger = run_round(rho, params)
    assert heat_current_correlation(params, rho) == pytest.approx(ledger.dE_S1, abs=1e-7)


@pytest.mark.parametrize("delta", [0.1, 0.5, 1.0])
def test_correlation_current_at_steady_state_matches_energy_current(delta: float) -> None:
    params = _params(delta=delta)
    report = run_to_steady_state(KET11, params, tol=1e-12)
    assert report.converged
    assert heat_current_correlation(params, report.steady_rho, tol=1e-14) == pytest.approx(report.J_h_energy, rel=1e-6)


def test_correlation_current_argument_checks() -> None:
    with pytest.raises(ValueError):
        heat_current_correlation(_params(mode=SimulationMode.LOCAL_APPROX), KET11)
    with pytest.raises(ValueError):
        heat_current_correlation(_params(), KET11, quadrature_steps=201)
    assert heat_current_correlation(_params(gamma=0.0), KET11) == 0.0


def test_work_ratio_classes() -> None:
    assert classify_work_ratio(None) == "undefined"
    assert classify_work_ratio(0.05) == "negligible"
    assert classify_work_ratio(0.1) == "comparable"
    assert classify_work_ratio(10.0) == "comparable"
    assert classify_work_ratio(10.5) == "dominant"
