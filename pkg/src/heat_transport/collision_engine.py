from __future__ import annotations  # 型注釈の前方参照を許可し、循環参照を避けるため

"""
Round execution, energy ledger and steady-state search for the collision model.

Round n
- joint = rho ⊗ eta1 ⊗ eta2 on S1 ⊗ S2 ⊗ E1 ⊗ E2 (fresh thermal ancillas every round)
- free evolution U_sys, then collision V1 (S1-E1), then collision V2 (S2-E2)
- rho', rho'', rho''': reduced system states after each step

Ledger
- H_L: system energy operator of the mode; H_sys in Full, H_0 in LocalApprox
- dE_S_i = Tr[H_L (rho_after - rho_before)] across collision i
- dE_free = Tr[H_L (rho' - rho)]; zero in Full, and in LocalApprox when [H_0, H_int^{S1,S2}] = 0
- dQ_E_i = Tr[H_E (eta~_i - eta_i)]
- W_i = <H_int^{S_i,E_i}> before collision i - <H_int^{S_i,E_i}> after it
- first law of each collision, both modes: W_i = dE_S_i + dQ_E_i
- J_h (energy through the system) = dE_S1;  J_h (ancilla) = -dQ_E1

Units
- all energies per round, in units of omega0
"""

from collections import deque  # 収束判定の直近履歴を保持するため
from dataclasses import dataclass  # 結果を不変で扱うため
from functools import lru_cache  # 同一パラメータの演算子を再利用するため

import numpy as np  # 行列演算に使うため
from scipy.integrate import simpson  # 相関積分の数値積分に使うため

from .log import get_logger  # 非収束などを警告するため
from .model import (  # ハミルトニアンとユニタリの構築を再利用するため
    ModelParams,
    SimulationMode,
    ancilla_hamiltonian,
    bath_interaction_full,
    collision_unitary,
    energy_commutator_defect,
    full_collision_generator,
    interaction_hamiltonian,
    ledger_hamiltonian,
    system_hamiltonian,
    system_unitary,
    thermal_state,
)
from .tensor_algebra import (  # 行列カーネル
    E1,
    E2,
    ROUND_LAYOUT,
    S1,
    S2,
    ComplexMatrix,
    DensityMatrix,
    InvalidStateError,
    check_density_matrix,
    embed_operator,
    hermitize,
    kron,
    partial_trace_matrix,
)

logger = get_logger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ROUNDS = 200_000
CONFIRMATION_WINDOW = 10
ROUND_EIGEN_TOL = 1e-9
DEFAULT_QUADRATURE_STEPS = 200
QUADRATURE_TOL = 1e-8


@dataclass(frozen=True, eq=False)  # 1ラウンド分のエネルギー収支をまとめる
class RoundLedger:
    """
    Energy bookkeeping of one round.

    Units
    - all energy fields: energy per round (omega0 units)
    - dE_S_i: measured with the mode's system energy operator (H_sys in Full, H_0 in LocalApprox)
    - dV_S_i: change of <H_int^{S1,S2}> across collision i (part of dE_S_i in Full only)
    """

    dE_S1: float  # 衝突1でのSのエネルギー変化
    dE_S2: float  # 衝突2でのSのエネルギー変化
    dQ_E1: float  # アンシラ1のエネルギー変化
    dQ_E2: float  # アンシラ2のエネルギー変化
    W1: float  # 衝突1のスイッチング仕事
    W2: float  # 衝突2のスイッチング仕事
    dV_S1: float  # 衝突1での系間相互作用エネルギーの変化
    dV_S2: float  # 衝突2での系間相互作用エネルギーの変化
    dE_free: float  # 自由発展でのSのエネルギー変化
    rho_prime: DensityMatrix  # 自由発展後
    rho_dprime: DensityMatrix  # 衝突1の後
    rho_tprime: DensityMatrix  # 衝突2の後

    @property
    def W_sw(self) -> float:
        return self.W1 + self.W2


@dataclass(frozen=True, eq=False)  # 定常状態探索の結果をまとめる
class SteadyStateReport:
    """
    Result of iterating rounds until the state stops changing.

    Units
    - J_h_energy, J_h_ancilla, W_sw: energy per round (omega0 units)
    - last_step_distance: trace distance between the last two round states
    """

    steady_rho: DensityMatrix
    rounds_used: int
    converged: bool
    final_ledger: RoundLedger
    J_h_energy: float
    J_h_ancilla: float
    W_sw: float
    last_step_distance: float
    non_monotone_tail: bool

    @property
    def steady_residual(self) -> float:
        """System energy change over the whole final round; zero at a steady state."""
        ledger = self.final_ledger
        return ledger.dE_free + ledger.dE_S1 + ledger.dE_S2


@dataclass(frozen=True, eq=False)
class RoundOperators:
    """Round-space (16-dim) operators for one parameter set."""

    u_free: ComplexMatrix
    v1: ComplexMatrix
    v2: ComplexMatrix
    h_ledger: ComplexMatrix
    h_int_sys: ComplexMatrix
    h_e: ComplexMatrix
    h_int_1: ComplexMatrix
    h_int_2: ComplexMatrix
    eta1: ComplexMatrix
    eta2: ComplexMatrix


_COLLISION_SLOTS = {
    SimulationMode.FULL: ((S1, S2, E1), (S1, S2, E2)),
    SimulationMode.LOCAL_APPROX: ((S1, E1), (S2, E2)),
}


@lru_cache(maxsize=128)
def round_operators(p: ModelParams) -> RoundOperators:
    bath = interaction_hamiltonian(p.bath_coupling, p.gamma)
    slots1, slots2 = _COLLISION_SLOTS[p.mode]
    return RoundOperators(
        u_free=embed_operator(system_unitary(p), (S1, S2), ROUND_LAYOUT),
        v1=embed_operator(collision_unitary(p, 1), slots1, ROUND_LAYOUT),
        v2=embed_operator(collision_unitary(p, 2), slots2, ROUND_LAYOUT),
        h_ledger=np.array(ledger_hamiltonian(p)),
        h_int_sys=interaction_hamiltonian(p.sys_coupling, p.delta),
        h_e=ancilla_hamiltonian(p),
        h_int_1=embed_operator(bath, (S1, E1), ROUND_LAYOUT),
        h_int_2=embed_operator(bath, (S2, E2), ROUND_LAYOUT),
        eta1=np.array(thermal_state(p.T1, p.omega0).matrix),
        eta2=np.array(thermal_state(p.T2, p.omega0).matrix),
    )


def _expect(op: ComplexMatrix, rho: ComplexMatrix) -> float:
    return float(np.real(np.trace(op @ rho)))


def _conjugate(u: ComplexMatrix, rho: ComplexMatrix) -> ComplexMatrix:
    return u @ rho @ u.conj().T


def _reduced_state(joint: ComplexMatrix, keep: tuple[int, ...], label: str) -> DensityMatrix:
    reduced = hermitize(partial_trace_matrix(joint, keep, ROUND_LAYOUT))
    try:
        check_density_matrix(reduced, eigen_tol=ROUND_EIGEN_TOL)
    except InvalidStateError as exc:
        raise InvalidStateError(f"Numerical fault in round ({label}): {exc}") from exc
    return DensityMatrix.trusted(reduced)


def run_round(rho: DensityMatrix, p: ModelParams) -> tuple[DensityMatrix, RoundLedger]:
    """
    Apply one round (free evolution, S1-E1 collision, S2-E2 collision) to ``rho``.

    Returns the reduced system state after the round and its ledger.
    """
    if rho.dim != 4:
        raise ValueError(f"run_round expects a two-qubit state, got dimension {rho.dim}.")
    ops = round_operators(p)

    joint0 = kron(kron(rho.matrix, ops.eta1), ops.eta2)  # 新しいアンシラと直積を作る
    joint1 = _conjugate(ops.u_free, joint0)  # 系の自由発展
    joint2 = _conjugate(ops.v1, joint1)  # S1-E1 衝突
    joint3 = _conjugate(ops.v2, joint2)  # S2-E2 衝突

    rho_p = _reduced_state(joint1, (S1, S2), "free evolution")
    rho_pp = _reduced_state(joint2, (S1, S2), "collision 1")
    rho_ppp = _reduced_state(joint3, (S1, S2), "collision 2")
    eta1_out = partial_trace_matrix(joint3, (E1,), ROUND_LAYOUT)
    eta2_out = partial_trace_matrix(joint3, (E2,), ROUND_LAYOUT)

    diff1 = rho_pp.matrix - rho_p.matrix
    diff2 = rho_ppp.matrix - rho_pp.matrix
    ledger = RoundLedger(
        dE_S1=_expect(ops.h_ledger, diff1),
        dE_S2=_expect(ops.h_ledger, diff2),
        dQ_E1=_expect(ops.h_e, eta1_out - ops.eta1),
        dQ_E2=_expect(ops.h_e, eta2_out - ops.eta2),
        W1=_expect(ops.h_int_1, joint1 - joint2),
        W2=_expect(ops.h_int_2, joint2 - joint3),
        dV_S1=_expect(ops.h_int_sys, diff1),
        dV_S2=_expect(ops.h_int_sys, diff2),
        dE_free=_expect(ops.h_ledger, rho_p.matrix - rho.matrix),
        rho_prime=rho_p,
        rho_dprime=rho_pp,
        rho_tprime=rho_ppp,
    )
    return rho_ppp, ledger


@lru_cache(maxsize=128)
def round_superoperator(p: ModelParams) -> ComplexMatrix:
    """
    16x16 matrix M of the round map: vec(rho_out) = M @ vec(rho_in), row-major vec.
    """
    ops = round_operators(p)
    total = ops.v2 @ ops.v1 @ ops.u_free
    env = kron(ops.eta1, ops.eta2)
    columns = []
    for k in range(16):
        basis = np.zeros(16, dtype=complex)
        basis[k] = 1.0
        joint = kron(basis.reshape(4, 4), env)
        out = partial_trace_matrix(_conjugate(total, joint), (S1, S2), ROUND_LAYOUT)
        columns.append(out.reshape(-1))
    superop = np.stack(columns, axis=1)
    superop.setflags(write=False)
    return superop


def _step_distance(a: ComplexMatrix, b: ComplexMatrix) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))


def _has_increase(distances: deque[float]) -> bool:
    values = list(distances)
    return any(later > earlier * (1.0 + 1e-9) + 1e-14 for earlier, later in zip(values, values[1:]))


def run_to_steady_state(
    rho0: DensityMatrix,
    p: ModelParams,
    tol: float = DEFAULT_TOL,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> SteadyStateReport:
    """
    Iterate rounds until successive states are closer than ``tol`` (trace distance)
    for ``CONFIRMATION_WINDOW`` consecutive rounds, or ``max_rounds`` is reached.

    Every round state is checked for unit trace and for eigenvalues below
    ``-ROUND_EIGEN_TOL``; either raises InvalidStateError. The final round
    is replayed with ``run_round`` so the report carries its ledger.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}.")
    if int(max_rounds) < 1:
        raise ValueError(f"max_rounds must be at least 1, got {max_rounds}.")
    if rho0.dim != 4:
        raise ValueError(f"Initial state must be a two-qubit state, got dimension {rho0.dim}.")

    superop = round_superoperator(p)
    current = np.array(rho0.matrix)
    recent: deque[float] = deque(maxlen=CONFIRMATION_WINDOW + 1)
    consecutive = 0
    converged = False
    rounds = 0

    while rounds < int(max_rounds) - 1:  # 最終ラウンドは台帳付きで実行する
        nxt = hermitize((superop @ current.reshape(-1)).reshape(4, 4))
        rounds += 1
        trace_err = abs(complex(np.trace(nxt)) - 1.0)
        if trace_err > 1e-10:
            raise InvalidStateError(f"Trace drifted by {trace_err:.3e} after round {rounds}.")
        min_eig = float(np.linalg.eigvalsh(nxt)[0])
        if min_eig < -ROUND_EIGEN_TOL:
            raise InvalidStateError(f"Eigenvalue {min_eig:.3e} below -{ROUND_EIGEN_TOL:g} after round {rounds}.")
        last_distance = _step_distance(nxt, current)
        recent.append(last_distance)
        current = nxt
        consecutive = consecutive + 1 if last_distance < tol else 0
        if consecutive >= CONFIRMATION_WINDOW:
            converged = True
            break

    state_before = DensityMatrix.trusted(current)
    steady, ledger = run_round(state_before, p)
    rounds += 1
    final_distance = _step_distance(steady.matrix, current)
    if not converged and final_distance < tol and consecutive + 1 >= CONFIRMATION_WINDOW:
        converged = True
    recent.append(final_distance)

    non_monotone = _has_increase(recent)
    if not converged:
        logger.warning(
            "event=not_converged rounds=%d last_distance=%.3e tol=%.1e mode=%s delta=%g gamma=%g",
            rounds, final_distance, tol, p.mode.value, p.delta, p.gamma,
        )
    elif non_monotone:
        logger.warning(
            "event=non_monotone_tail rounds=%d mode=%s delta=%g gamma=%g",
            rounds, p.mode.value, p.delta, p.gamma,
        )

    return SteadyStateReport(
        steady_rho=steady,
        rounds_used=rounds,
        converged=converged,
        final_ledger=ledger,
        J_h_energy=ledger.dE_S1,
        J_h_ancilla=-ledger.dQ_E1,
        W_sw=ledger.W_sw,
        last_step_distance=final_distance,
        non_monotone_tail=non_monotone,
    )


def _correlation_integrand(
    p: ModelParams,
    rho_prime: ComplexMatrix,
    times: np.ndarray,
) -> np.ndarray:
    eta1 = thermal_state(p.T1, p.omega0).matrix
    rho0 = kron(rho_prime, eta1)  # (S1, S2, E1)
    evals, evecs = np.linalg.eigh(full_collision_generator(p, 1))
    rho0_eig = evecs.conj().T @ rho0 @ evecs
    gaps = evals[:, None] - evals[None, :]
    phases = np.exp(-1j * gaps[None, :, :] * times[:, None, None])
    rho_t = evecs[None, :, :] @ (rho0_eig[None, :, :] * phases) @ evecs.conj().T[None, :, :]

    blocks = rho_t.reshape(-1, 4, 2, 4, 2)
    rho_s = np.einsum("nabcb->nac", blocks)
    rho_e = np.einsum("nabad->nbd", blocks)
    product = np.einsum("nac,nbd->nabcd", rho_s, rho_e).reshape(-1, 8, 8)
    correlations = rho_t - product  # C12(t)

    h_s = kron(system_hamiltonian(p), np.eye(2, dtype=complex))
    h_int = bath_interaction_full(p, 1)
    commutator = h_s @ h_int - h_int @ h_s
    values = -1j * np.einsum("ij,nji->n", commutator, correlations)
    return np.real(values)


def heat_current_correlation(
    p: ModelParams,
    steady_rho: DensityMatrix,
    quadrature_steps: int = DEFAULT_QUADRATURE_STEPS,
    *,
    tol: float = QUADRATURE_TOL,
    max_refinements: int = 8,
) -> float:
    """
    Heat current of the S1-E1 collision from system-ancilla correlations.

    -i ∫_0^tau Tr{[H_sys ⊗ I, H_int^{S1,E1}] C12(t)} dt with
    C12(t) = rho_SE1(t) - rho_S(t) ⊗ rho_E1(t) under the Full collision generator,
    starting from U_sys rho U_sys† ⊗ eta1. Composite Simpson; the interval count
    doubles until successive estimates agree within ``tol``.
    """
    if p.mode is not SimulationMode.FULL:
        raise ValueError("heat_current_correlation requires Full mode parameters.")
    steps = int(quadrature_steps)
    if steps < 2 or steps % 2:
        raise ValueError(f"quadrature_steps must be a positive even integer, got {quadrature_steps}.")
    if steady_rho.dim != 4:
        raise ValueError(f"steady_rho must be a two-qubit state, got dimension {steady_rho.dim}.")
    if p.gamma == 0.0:
        return 0.0

    u = system_unitary(p)
    rho_prime = _conjugate(u, steady_rho.matrix)

    def _estimate(n: int) -> float:
        times = np.linspace(0.0, p.tau, n + 1)
        return float(simpson(_correlation_integrand(p, rho_prime, times), x=times))

    estimate = _estimate(steps)
    for _ in range(max_refinements):
        steps *= 2
        refined = _estimate(steps)
        if abs(refined - estimate) <= tol:
            return refined
        estimate = refined
    logger.warning("event=quadrature_not_converged steps=%d", steps)
    return estimate


WORK_NEGLIGIBLE = 0.1
WORK_COMPARABLE = 10.0


def classify_work_ratio(ratio: float | None) -> str:
    """negligible (< 0.1), comparable ([0.1, 10]), dominant (> 10) or undefined."""
    if ratio is None:
        return "undefined"
    if ratio < WORK_NEGLIGIBLE:
        return "negligible"
    if ratio <= WORK_COMPARABLE:
        return "comparable"
    return "dominant"


@dataclass(frozen=True)
class FirstLawAudit:
    """
    Consistency checks of one ledger.

    - first_law_*: W_i = dE_S_i + dQ_E_i (both modes)
    - energy_preserving: both local collisions commute with H_S_i + H_E (LocalApprox; None in Full)
    - switching_work_ok: |W_i| <= tol for energy-preserving local collisions
    - heat_balance_ok: dE_S_i = -dQ_E_i for energy-preserving local collisions
    - ancilla_gaps: dE_S_i + dQ_E_i
    """

    mode: SimulationMode
    first_law_residuals: tuple[float, float]
    first_law_ok: bool
    energy_preserving: bool | None
    switching_work_ok: bool | None
    heat_balance_ok: bool | None
    ancilla_gaps: tuple[float, float]
    work_ratio: float | None
    work_class: str


def first_law_audit(ledger: RoundLedger, p: ModelParams, tol: float = 1e-10) -> FirstLawAudit:
    ancilla_gaps = (ledger.dE_S1 + ledger.dQ_E1, ledger.dE_S2 + ledger.dQ_E2)
    residuals = (ledger.W1 - ancilla_gaps[0], ledger.W2 - ancilla_gaps[1])
    ratio = abs(ledger.W_sw) / abs(ledger.dE_S1) if ledger.dE_S1 != 0.0 else None

    preserving: bool | None = None
    work_ok: bool | None = None
    balance_ok: bool | None = None
    if p.mode is SimulationMode.LOCAL_APPROX:
        preserving = all(
            energy_commutator_defect(p, SimulationMode.LOCAL_APPROX, which) <= 1e-12 for which in (1, 2)
        )
        if preserving:
            work_ok = abs(ledger.W1) <= tol and abs(ledger.W2) <= tol
            balance_ok = all(abs(gap) <= tol for gap in ancilla_gaps)

    return FirstLawAudit(
        mode=p.mode,
        first_law_residuals=residuals,
        first_law_ok=all(abs(r) <= tol for r in residuals),
        energy_preserving=preserving,
        switching_work_ok=work_ok,
        heat_balance_ok=balance_ok,
        ancilla_gaps=ancilla_gaps,
        work_ratio=ratio,
        work_class=classify_work_ratio(ratio),
    )
