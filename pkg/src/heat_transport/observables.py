from __future__ import annotations  # 型注釈の前方参照を許可するため

"""
State-comparison and correlation measures of two-qubit steady states.

Notation
- measurement on S1 along n(theta, phi): Pi_± = (I ± n·sigma) / 2
- B0 = Tr_1[rho] = rho_S2,  B_j = Tr_1[(sigma_j ⊗ I) rho]
- unnormalized post-measurement S2 state: M_± = (B0 ± n·B) / 2, p_± = Tr M_±

Units
- entropies, mutual information and discord in bits
"""

from dataclasses import dataclass  # 結果を不変で扱うため
import math  # 角度の正規化に使うため

import numpy as np  # ベクトル化したグリッド評価に使うため
from scipy.optimize import minimize  # 測定方向の局所最適化に使うため
from scipy.special import xlogy  # 0·log0 を安全に扱うため

from .tensor_algebra import (  # 行列カーネル
    SYSTEM_LAYOUT,
    ComplexMatrix,
    DensityMatrix,
    partial_trace,
    partial_trace_matrix,
    trace_norm,
    von_neumann_entropy,
)

COARSE_THETA_POINTS = 64
COARSE_PHI_POINTS = 128
REFINE_TOL = 1e-8
REFINE_STARTS = 4

_SIGMAS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class UndefinedRectificationError(ValueError):
    """Raised when both forward and backward currents vanish."""


@dataclass(frozen=True)  # 測定方向
class MeasurementDirection:
    """Bloch direction of a rank-one projective measurement on S1."""

    theta: float  # 極角 [0, pi]
    phi: float  # 方位角 [0, 2pi)

    @property
    def bloch_vector(self) -> np.ndarray:
        return np.array(
            [
                math.sin(self.theta) * math.cos(self.phi),
                math.sin(self.theta) * math.sin(self.phi),
                math.cos(self.theta),
            ]
        )

    def projectors(self) -> tuple[ComplexMatrix, ComplexMatrix]:
        n_sigma = sum(component * sigma for component, sigma in zip(self.bloch_vector, _SIGMAS))
        eye = np.eye(2, dtype=complex)
        return 0.5 * (eye + n_sigma), 0.5 * (eye - n_sigma)

    @classmethod
    def normalized(cls, theta: float, phi: float) -> MeasurementDirection:
        """Map arbitrary angles onto theta in [0, pi], phi in [0, 2pi)."""
        theta = math.fmod(theta, 2.0 * math.pi)
        if theta < 0.0:
            theta += 2.0 * math.pi
        if theta > math.pi:
            theta = 2.0 * math.pi - theta
            phi += math.pi
        phi = math.fmod(phi, 2.0 * math.pi)
        if phi < 0.0:
            phi += 2.0 * math.pi
        return cls(theta=theta, phi=phi)


@dataclass(frozen=True)
class DiscordResult:
    """
    Discord of a two-qubit state with measurement on S1.

    Units
    - value, mutual_info: bits
    """

    value: float
    argmin: MeasurementDirection
    mutual_info: float


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """½‖a − b‖₁, clipped to [0, 1]."""
    if a.dim != b.dim:
        raise ValueError(f"trace_distance requires equal dimensions, got {a.dim} and {b.dim}.")
    value = 0.5 * trace_norm(a.matrix - b.matrix)
    return float(min(1.0, max(0.0, value)))


def _check_two_qubit(rho: DensityMatrix) -> None:
    if rho.dim != 4:
        raise ValueError(f"Expected a two-qubit state, got dimension {rho.dim}.")


def mutual_information(rho: DensityMatrix) -> float:
    """S(rho_S1) + S(rho_S2) − S(rho)."""
    _check_two_qubit(rho)
    s1 = von_neumann_entropy(partial_trace(rho, (0,), SYSTEM_LAYOUT))
    s2 = von_neumann_entropy(partial_trace(rho, (1,), SYSTEM_LAYOUT))
    return max(0.0, s1 + s2 - von_neumann_entropy(rho))


@dataclass(frozen=True)
class _DiscordTerms:
    a: np.ndarray  # Tr(B0 sigma_k)
    b: np.ndarray  # Tr(B_j sigma_k), 行 j
    c: np.ndarray  # Tr(B_j)
    offset: float  # I − S(rho_S2)
    mutual_info: float


def _discord_terms(rho: DensityMatrix) -> _DiscordTerms:
    _check_two_qubit(rho)
    b0 = partial_trace_matrix(rho.matrix, (1,), SYSTEM_LAYOUT)
    blocks = [
        partial_trace_matrix(np.kron(sigma, np.eye(2)) @ rho.matrix, (1,), SYSTEM_LAYOUT)
        for sigma in _SIGMAS
    ]
    a = np.array([np.real(np.trace(b0 @ s)) for s in _SIGMAS])
    b = np.array([[np.real(np.trace(block @ s)) for s in _SIGMAS] for block in blocks])
    c = np.array([np.real(np.trace(block)) for block in blocks])
    mi = mutual_information(rho)
    s2 = von_neumann_entropy(partial_trace(rho, (1,), SYSTEM_LAYOUT))
    return _DiscordTerms(a=a, b=b, c=c, offset=mi - s2, mutual_info=mi)


def _binary_entropy(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return -(xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)) / math.log(2.0)


def _discord_objective(terms: _DiscordTerms, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """I − S(rho_S2) + Σ_± p_± S(rho_S2|±) for every (theta, phi) pair."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
        axis=-1,
    )
    nc = n @ terms.c
    nb = n @ terms.b
    conditional = np.zeros(theta.shape)
    for sign in (1.0, -1.0):
        p = 0.5 * (1.0 + sign * nc)
        v = 0.5 * (terms.a + sign * nb)
        radius = np.linalg.norm(v, axis=-1)
        safe_p = np.where(p > 1e-15, p, 1.0)
        r = np.where(p > 1e-15, np.clip(radius / safe_p, 0.0, 1.0), 0.0)
        conditional = conditional + np.where(p > 1e-15, p * _binary_entropy(0.5 * (1.0 + r)), 0.0)
    return terms.offset + conditional


def _grid_values(
    terms: _DiscordTerms, n_theta: int, n_phi: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if n_theta < 2 or n_phi < 1:
        raise ValueError("grid needs n_theta >= 2 and n_phi >= 1.")
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    theta_grid, phi_grid = np.meshgrid(thetas, phis, indexing="ij")
    return thetas, phis, _discord_objective(terms, theta_grid, phi_grid)


def discord_on_grid(
    rho: DensityMatrix,
    n_theta: int = COARSE_THETA_POINTS,
    n_phi: int = COARSE_PHI_POINTS,
) -> DiscordResult:
    """
    Discord minimized over an n_theta × n_phi direction grid only.

    theta = linspace(0, pi, n_theta), phi = linspace(0, 2pi, n_phi, endpoint=False);
    ties go to the smallest theta, then the smallest phi.
    """
    terms = _discord_terms(rho)
    thetas, phis, values = _grid_values(terms, n_theta, n_phi)
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    return DiscordResult(
        value=max(0.0, float(values[i, j])),
        argmin=MeasurementDirection(theta=float(thetas[i]), phi=float(phis[j])),
        mutual_info=terms.mutual_info,
    )


def quantum_discord(rho: DensityMatrix) -> DiscordResult:
    """
    Discord of ``rho`` with rank-one projective measurements on S1.

    Coarse 64×128 grid, then Nelder–Mead from each of the ``REFINE_STARTS``
    lowest grid points; the best of the refined and grid values is kept, so
    the result never exceeds the grid value.
    """
    terms = _discord_terms(rho)
    thetas, phis, values = _grid_values(terms, COARSE_THETA_POINTS, COARSE_PHI_POINTS)

    def _objective(x: np.ndarray) -> float:
        return float(_discord_objective(terms, np.array(x[0]), np.array(x[1])))

    order = np.argsort(values, axis=None, kind="stable")[:REFINE_STARTS]
    i, j = np.unravel_index(int(order[0]), values.shape)
    value = float(values[i, j])
    direction = MeasurementDirection(theta=float(thetas[i]), phi=float(phis[j]))
    for flat in order:
        i, j = np.unravel_index(int(flat), values.shape)
        refined = minimize(
            _objective,
            x0=np.array([thetas[i], phis[j]]),
            method="Nelder-Mead",
            options={"xatol": REFINE_TOL, "fatol": REFINE_TOL, "maxiter": 2000},
        )
        if float(refined.fun) < value:
            value = float(refined.fun)
            direction = MeasurementDirection.normalized(float(refined.x[0]), float(refined.x[1]))
    return DiscordResult(
        value=max(0.0, value),
        argmin=direction,
        mutual_info=terms.mutual_info,
    )


def rectification_factor(J_fwd: float, J_bwd: float) -> float:
    """|J_fwd + J_bwd| / max(|J_fwd|, |J_bwd|), in [0, 2]."""
    scale = max(abs(J_fwd), abs(J_bwd))
    if scale == 0.0:
        raise UndefinedRectificationError("Rectification is undefined when both currents are zero.")
    return abs(J_fwd + J_bwd) / scale
