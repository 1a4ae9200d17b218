from __future__ import annotations

"""Brute-force reference values and the plain-text state file format."""

import math
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from .model import pauli
from .tensor_algebra import SYSTEM_LAYOUT, DensityMatrix, partial_trace, von_neumann_entropy

MIN_ORACLE_GRID = 100

_PAULI_STACK = np.stack([pauli(axis) for axis in ("x", "y", "z")])


def _measured_conditional_entropy(rho4: np.ndarray, theta: float, phis: np.ndarray) -> np.ndarray:
    """Σ_± p_± S(rho_S2|±) in bits for the directions (theta, phis), from explicit projectors."""
    n = np.stack(
        [math.sin(theta) * np.cos(phis), math.sin(theta) * np.sin(phis), np.full_like(phis, math.cos(theta))],
        axis=-1,
    )
    n_sigma = np.einsum("nk,kij->nij", n, _PAULI_STACK)
    eye = np.eye(2, dtype=complex)
    total = np.zeros(len(phis))
    for sign in (1.0, -1.0):
        proj = 0.5 * (eye + sign * n_sigma)
        post = np.einsum("nxa,abcd,ncx->nbd", proj, rho4, proj)  # Tr_1[(P⊗I) rho (P⊗I)]
        post = 0.5 * (post + np.conj(np.swapaxes(post, 1, 2)))
        eigs = np.clip(np.linalg.eigvalsh(post), 0.0, None)
        p = eigs.sum(axis=1)
        total += (xlogy(p, p) - xlogy(eigs, eigs).sum(axis=1)) / math.log(2.0)
    return total


def discord_grid_oracle(rho: DensityMatrix, grid_n: int = 500) -> float:
    """
    Discord by exhaustive search over a grid_n × 2·grid_n (theta, phi) grid.

    Each direction builds Pi_± = (I ± n·sigma) / 2, measures S1 and diagonalizes
    the post-measurement S2 states. No refinement, so the value bounds the true
    discord from above.
    """
    if int(grid_n) < MIN_ORACLE_GRID:
        raise ValueError(f"grid_n must be at least {MIN_ORACLE_GRID}, got {grid_n}.")
    if rho.dim != 4:
        raise ValueError(f"Expected a two-qubit state, got dimension {rho.dim}.")
    rho4 = rho.matrix.reshape(2, 2, 2, 2)
    thetas = np.linspace(0.0, math.pi, int(grid_n))
    phis = np.linspace(0.0, 2.0 * math.pi, 2 * int(grid_n), endpoint=False)
    best = min(float(np.min(_measured_conditional_entropy(rho4, float(theta), phis))) for theta in thetas)
    s1 = von_neumann_entropy(partial_trace(rho, (0,), SYSTEM_LAYOUT))
    return max(0.0, s1 - von_neumann_entropy(rho) + best)


def parse_state_text(text: str) -> DensityMatrix:
    """16 complex entries, row-major, as whitespace-separated real/imag pairs."""
    try:
        values = [float(token) for token in text.split()]
    except ValueError as exc:
        raise ValueError(f"State file contains a non-numeric token: {exc}") from exc
    if len(values) != 32:
        raise ValueError(f"State file must hold 32 numbers (16 real/imag pairs), got {len(values)}.")
    pairs = np.array(values).reshape(16, 2)
    return DensityMatrix((pairs[:, 0] + 1j * pairs[:, 1]).reshape(4, 4))


def read_state_file(path: Path) -> DensityMatrix:
    return parse_state_text(path.read_text(encoding="utf-8"))


def write_state_file(path: Path, rho: DensityMatrix) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        " ".join(f"{entry.real:.17g} {entry.imag:.17g}" for entry in row)
        for row in rho.matrix
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
