from __future__ import annotations  # 型注釈の前方参照を許可し、循環参照を避けるため

"""
Hamiltonians, thermal ancillas and round unitaries of the two-qubit collision model.

Notation
- S1, S2: system qubits with gaps omega1, omega2
- E: one ancilla qubit with gap omega0 (both baths)
- H_S_i = omega_i / 2 * sigma_z, H_E = omega0 / 2 * sigma_z
- H_0 = H_S1 + H_S2, H_sys = H_0 + H_int^{S1,S2}
- Full collision i:  exp[-i (H_S1 + H_S2 + H_E + H_int^{S1,S2} + H_int^{S_i,E}) tau]  on (S1, S2, E)
- Local collision i: exp[-i (H_S_i + H_E + H_int^{S_i,E}) tau]                      on (S_i, E)

Basis
- (|0>, |1>) with sigma_z = diag(1, -1); |1> is the single-qubit ground state.
"""

from dataclasses import dataclass, replace  # パラメータを不変で扱うため
from enum import Enum  # 結合形とモードを列挙するため
from functools import lru_cache  # 同一パラメータのユニタリ再計算を避けるため
import math  # 温度の無限大判定に使うため

import numpy as np  # 行列構築に使うため

from .tensor_algebra import (  # 行列カーネルを共通化するため
    ComplexMatrix,
    DensityMatrix,
    expm_hermitian,
    embed_operator,
    kron,
    qubit_layout,
)


class CouplingForm(str, Enum):  # 相互作用ハミルトニアンの形
    XX_YY = "XX_YY"
    XX_YY_ZZ = "XX_YY_ZZ"
    ZZ = "ZZ"
    XX = "XX"
    ZX = "ZX"


class SimulationMode(str, Enum):  # 衝突ユニタリの選択
    FULL = "Full"
    LOCAL_APPROX = "LocalApprox"


@dataclass(frozen=True)  # 計算中に変更されないよう不変にする
class ModelParams:
    """
    Scalars of the collision model.

    Units
    - omega0, omega1, omega2, delta, gamma, T1, T2: energy, in units of omega0 (k = hbar = 1)
    - tau: time, 1 / energy; the same duration for free evolution and each collision
    """

    omega0: float = 1.0  # アンシラのギャップ
    omega1: float = 1.0  # S1のギャップ
    omega2: float = 1.0  # S2のギャップ
    delta: float = 0.0  # 系間結合の強さ
    gamma: float = 0.5  # 系-アンシラ結合の強さ
    tau: float = 0.1  # 衝突と自由発展の時間
    T1: float = 5.0  # 浴1の温度
    T2: float = 1.0  # 浴2の温度
    sys_coupling: CouplingForm = CouplingForm.XX_YY  # S1-S2の結合形
    bath_coupling: CouplingForm = CouplingForm.XX_YY  # S_i-E の結合形
    mode: SimulationMode = SimulationMode.FULL  # 衝突ユニタリのモード

    def __post_init__(self) -> None:
        object.__setattr__(self, "sys_coupling", CouplingForm(self.sys_coupling))
        object.__setattr__(self, "bath_coupling", CouplingForm(self.bath_coupling))
        object.__setattr__(self, "mode", SimulationMode(self.mode))
        for name in ("omega0", "omega1", "omega2", "tau", "T1", "T2"):
            value = float(getattr(self, name))
            if not value > 0.0 or math.isnan(value):
                raise ValueError(f"{name} must be positive, got {value}.")
            object.__setattr__(self, name, value)
        for name in ("delta", "gamma"):
            value = float(getattr(self, name))
            if not value >= 0.0 or math.isinf(value):
                raise ValueError(f"{name} must be finite and non-negative, got {value}.")
            object.__setattr__(self, name, value)

    def with_mode(self, mode: SimulationMode) -> ModelParams:
        return replace(self, mode=SimulationMode(mode))

    def reversed_temperatures(self) -> ModelParams:
        return replace(self, T1=self.T2, T2=self.T1)


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _matrix in _PAULI.values():
    _matrix.setflags(write=False)

IDENTITY2 = np.eye(2, dtype=complex)


def pauli(axis: str) -> ComplexMatrix:
    key = str(axis).lower()
    if key not in _PAULI:
        raise ValueError(f"Unknown Pauli axis: {axis}")
    return _PAULI[key].copy()


def free_hamiltonian(omega: float) -> ComplexMatrix:
    """(omega / 2) sigma_z."""
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}.")
    return 0.5 * float(omega) * pauli("z")


_COUPLING_TERMS: dict[CouplingForm, tuple[tuple[str, str], ...]] = {
    CouplingForm.XX_YY: (("x", "x"), ("y", "y")),
    CouplingForm.XX_YY_ZZ: (("x", "x"), ("y", "y"), ("z", "z")),
    CouplingForm.ZZ: (("z", "z"),),
    CouplingForm.XX: (("x", "x"),),
    CouplingForm.ZX: (("z", "x"),),  # 第1因子は先に挙げた側（S1 または S_i）
}


def interaction_hamiltonian(form: CouplingForm, strength: float) -> ComplexMatrix:
    """strength * Σ σ_a ⊗ σ_b for the terms of ``form``; first factor on the first-listed party."""
    if strength < 0.0:
        raise ValueError(f"strength must be non-negative, got {strength}.")
    terms = _COUPLING_TERMS[CouplingForm(form)]
    h = np.zeros((4, 4), dtype=complex)
    for first, second in terms:
        h += kron(pauli(first), pauli(second))
    return float(strength) * h


def thermal_state(T: float, omega0: float) -> DensityMatrix:
    """
    Gibbs state exp(-H_E / T) / Z of an ancilla with H_E = (omega0 / 2) sigma_z.

    ``T = math.inf`` gives I/2; populations are ordered (excited, ground).
    """
    if not T > 0.0:
        raise ValueError(f"Temperature must be positive, got {T}.")
    beta = 0.0 if math.isinf(T) else 1.0 / float(T)
    polarization = math.tanh(0.5 * beta * float(omega0))  # p_ground - p_excited
    excited = 0.5 * (1.0 - polarization)
    ground = 0.5 * (1.0 + polarization)
    return DensityMatrix(np.diag([excited, ground]).astype(complex))


def _frozen(matrix: ComplexMatrix) -> ComplexMatrix:
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=256)
def bare_system_hamiltonian(p: ModelParams) -> ComplexMatrix:
    """H_0 = H_S1 + H_S2 on (S1, S2)."""
    h = kron(free_hamiltonian(p.omega1), IDENTITY2) + kron(IDENTITY2, free_hamiltonian(p.omega2))
    return _frozen(h)


@lru_cache(maxsize=256)
def system_hamiltonian(p: ModelParams) -> ComplexMatrix:
    """H_S1 + H_S2 + H_int^{S1,S2} on (S1, S2)."""
    return _frozen(bare_system_hamiltonian(p) + interaction_hamiltonian(p.sys_coupling, p.delta))


def ledger_hamiltonian(p: ModelParams) -> ComplexMatrix:
    """
    System energy operator seen by the collisions of ``p.mode``.

    Full collisions evolve under H_sys, LocalApprox collisions under H_S_i only,
    so the local ledger counts H_0 and leaves H_int^{S1,S2} out.
    """
    if p.mode is SimulationMode.FULL:
        return system_hamiltonian(p)
    return bare_system_hamiltonian(p)


def ancilla_hamiltonian(p: ModelParams) -> ComplexMatrix:
    return free_hamiltonian(p.omega0)


def _check_which(which: int) -> int:
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}.")
    return which


@lru_cache(maxsize=256)
def bath_interaction_full(p: ModelParams, which: int) -> ComplexMatrix:
    """H_int^{S_i,E} embedded on (S1, S2, E)."""
    which = _check_which(which)
    layout = qubit_layout(3)
    return _frozen(embed_operator(interaction_hamiltonian(p.bath_coupling, p.gamma), (which - 1, 2), layout))


@lru_cache(maxsize=256)
def full_collision_generator(p: ModelParams, which: int) -> ComplexMatrix:
    """H_S1 + H_S2 + H_E + H_int^{S1,S2} + H_int^{S_i,E} on (S1, S2, E)."""
    which = _check_which(which)
    h = kron(system_hamiltonian(p), IDENTITY2) + kron(np.eye(4, dtype=complex), ancilla_hamiltonian(p))
    return _frozen(h + bath_interaction_full(p, which))


@lru_cache(maxsize=256)
def local_collision_generator(p: ModelParams, which: int) -> ComplexMatrix:
    """H_S_i + H_E + H_int^{S_i,E} on (S_i, E); independent of delta."""
    which = _check_which(which)
    omega = p.omega1 if which == 1 else p.omega2
    h = kron(free_hamiltonian(omega), IDENTITY2) + kron(IDENTITY2, ancilla_hamiltonian(p))
    return _frozen(h + interaction_hamiltonian(p.bath_coupling, p.gamma))


@lru_cache(maxsize=256)
def system_unitary(p: ModelParams) -> ComplexMatrix:
    """Free evolution exp[-i H_sys tau] on (S1, S2)."""
    return _frozen(expm_hermitian(system_hamiltonian(p), p.tau))


@lru_cache(maxsize=256)
def collision_unitary_full(p: ModelParams, which: int) -> ComplexMatrix:
    """8x8 collision unitary on (S1, S2, E_which)."""
    return _frozen(expm_hermitian(full_collision_generator(p, which), p.tau))


@lru_cache(maxsize=256)
def collision_unitary_local(p: ModelParams, which: int) -> ComplexMatrix:
    """4x4 collision unitary on (S_which, E_which)."""
    return _frozen(expm_hermitian(local_collision_generator(p, which), p.tau))


def collision_unitary(p: ModelParams, which: int) -> ComplexMatrix:
    """Collision unitary of ``p.mode``: 8x8 on (S1, S2, E) or 4x4 on (S_which, E)."""
    if p.mode is SimulationMode.FULL:
        return collision_unitary_full(p, which)
    return collision_unitary_local(p, which)


def energy_commutator_defect(p: ModelParams, mode: SimulationMode, which: int) -> float:
    """
    max |[V, H_ref]| entrywise.

    - LocalApprox: H_ref = H_S_i + H_E on (S_i, E)
    - Full: H_ref = H_S1 + H_S2 + H_int^{S1,S2} + H_E on (S1, S2, E)
    """
    which = _check_which(which)
    params = p.with_mode(mode)
    if params.mode is SimulationMode.LOCAL_APPROX:
        omega = params.omega1 if which == 1 else params.omega2
        h_ref = kron(free_hamiltonian(omega), IDENTITY2) + kron(IDENTITY2, ancilla_hamiltonian(params))
        v = collision_unitary_local(params, which)
    else:
        h_ref = kron(system_hamiltonian(params), IDENTITY2) + kron(
            np.eye(4, dtype=complex), ancilla_hamiltonian(params)
        )
        v = collision_unitary_full(params, which)
    return float(np.max(np.abs(v @ h_ref - h_ref @ v)))
