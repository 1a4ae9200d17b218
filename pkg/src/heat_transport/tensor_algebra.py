from __future__ import annotations  # 型注釈の前方参照を許可するため

"""
Dense complex matrix kernel for small multi-qubit spaces.

Notation
- slot: one tensor factor of a composite Hilbert space (S1, S2, E1, E2)
- layout: ordered subsystem dimensions, e.g. (2, 2, 2, 2) for S1 ⊗ S2 ⊗ E1 ⊗ E2
- U = exp(-i h t) is built from the Hermitian eigendecomposition of h

All matrices are numpy ``complex128`` arrays; entropies are in bits.
"""

from dataclasses import dataclass  # 不変な状態とレイアウトを表すため
import math  # 次元計算に使うため
from typing import Sequence  # スロット列の型注釈のため

import numpy as np  # 複素行列演算の本体

ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGEN_TOL = 1e-10
UNITARY_TOL = 1e-10


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid density matrix within tolerance."""


@dataclass(frozen=True)
class TensorLayout:
    """
    Ordered subsystem dimensions of a composite space.

    The round space is always ``S1 ⊗ S2 ⊗ E1 ⊗ E2``.
    """

    slot_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.slot_dims or any(int(d) < 1 for d in self.slot_dims):
            raise ValueError("slot_dims must be a non-empty list of positive integers.")

    @property
    def dim(self) -> int:
        return math.prod(self.slot_dims)

    @property
    def n_slots(self) -> int:
        return len(self.slot_dims)

    def check_slots(self, slots: Sequence[int]) -> tuple[int, ...]:
        checked = tuple(int(s) for s in slots)
        for slot in checked:
            if slot < 0 or slot >= self.n_slots:
                raise ValueError(f"Invalid slot index {slot} for {self.n_slots} slots.")
        if len(set(checked)) != len(checked):
            raise ValueError(f"Duplicate slots: {list(checked)}")
        return checked


ROUND_LAYOUT = TensorLayout((2, 2, 2, 2))
SYSTEM_LAYOUT = TensorLayout((2, 2))
S1, S2, E1, E2 = 0, 1, 2, 3


def qubit_layout(n_qubits: int) -> TensorLayout:
    return TensorLayout((2,) * n_qubits)


def _as_square(a: ComplexMatrix, what: str = "matrix") -> ComplexMatrix:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{what} must be square, got shape {arr.shape}.")
    return arr


def is_hermitian(a: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    arr = _as_square(a)
    return bool(np.max(np.abs(arr - arr.conj().T), initial=0.0) <= tol)


def hermitize(a: ComplexMatrix) -> ComplexMatrix:
    return 0.5 * (a + a.conj().T)


def check_density_matrix(
    matrix: ComplexMatrix,
    *,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    eigen_tol: float = EIGEN_TOL,
) -> None:
    """Raise InvalidStateError unless ``matrix`` is Hermitian, unit-trace and PSD."""
    arr = _as_square(matrix, "density matrix")
    dim = arr.shape[0]
    if dim & (dim - 1):
        raise InvalidStateError(f"Density matrix dimension must be a power of 2, got {dim}.")
    herm_err = float(np.max(np.abs(arr - arr.conj().T)))
    if herm_err > hermitian_tol:
        raise InvalidStateError(f"Density matrix is not Hermitian (max deviation {herm_err:.3e}).")
    trace_err = abs(complex(np.trace(arr)) - 1.0)
    if trace_err > trace_tol:
        raise InvalidStateError(f"Density matrix trace deviates from 1 by {trace_err:.3e}.")
    min_eig = float(np.linalg.eigvalsh(hermitize(arr))[0])
    if min_eig < -eigen_tol:
        raise InvalidStateError(f"Density matrix has negative eigenvalue {min_eig:.3e}.")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, unit-trace, positive-semidefinite state.

    Construction validates; use ``DensityMatrix.trusted`` for results of
    operations that preserve validity by construction.
    """

    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=complex)
        check_density_matrix(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def trusted(cls, matrix: ComplexMatrix) -> DensityMatrix:
        arr = np.array(matrix, dtype=complex)
        arr.setflags(write=False)
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", arr)
        return obj

    @classmethod
    def from_ket(cls, ket: Sequence[complex]) -> DensityMatrix:
        vec = np.asarray(ket, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("ket must be non-zero.")
        vec = vec / norm
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def validate(self, *, eigen_tol: float = EIGEN_TOL) -> None:
        check_density_matrix(self.matrix, eigen_tol=eigen_tol)


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(ops: Sequence[ComplexMatrix]) -> ComplexMatrix:
    result = np.eye(1, dtype=complex)
    for op in ops:
        result = kron(result, op)
    return result


def embed_operator(
    op: ComplexMatrix,
    target_slots: Sequence[int],
    layout: TensorLayout,
) -> ComplexMatrix:
    """
    Lift ``op`` acting on ``target_slots`` (in the given order) to the full layout.

    Identity acts on every other slot; non-adjacent targets are handled by an
    axis permutation of ``op ⊗ I``.
    """
    targets = layout.check_slots(target_slots)
    arr = _as_square(op, "operator")
    target_dim = math.prod(layout.slot_dims[s] for s in targets)
    if arr.shape[0] != target_dim:
        raise ValueError(
            f"Operator dimension {arr.shape[0]} does not match target slots dimension {target_dim}."
        )
    rest = [s for s in range(layout.n_slots) if s not in targets]
    order = list(targets) + rest  # op ⊗ I の軸順
    rest_dim = math.prod(layout.slot_dims[s] for s in rest)
    big = np.kron(arr, np.eye(rest_dim, dtype=complex))

    n = layout.n_slots
    shape = [layout.slot_dims[s] for s in order]
    perm = [order.index(slot) for slot in range(n)]
    tensor = big.reshape(shape + shape).transpose(perm + [p + n for p in perm])
    return tensor.reshape(layout.dim, layout.dim)


def partial_trace_matrix(
    matrix: ComplexMatrix,
    keep_slots: Sequence[int],
    layout: TensorLayout,
) -> ComplexMatrix:
    keep = layout.check_slots(keep_slots)
    arr = np.asarray(matrix, dtype=complex)
    if arr.shape != (layout.dim, layout.dim):
        raise ValueError(f"Matrix shape {arr.shape} does not match layout dimension {layout.dim}.")
    n = layout.n_slots
    traced = [s for s in range(n) if s not in keep]
    dims = list(layout.slot_dims)
    keep_dim = math.prod(dims[s] for s in keep)
    traced_dim = math.prod(dims[s] for s in traced)

    tensor = arr.reshape(dims + dims)
    axes = list(keep) + traced
    tensor = tensor.transpose(axes + [a + n for a in axes])
    tensor = tensor.reshape(keep_dim, traced_dim, keep_dim, traced_dim)
    return np.trace(tensor, axis1=1, axis2=3)


def partial_trace(
    rho: DensityMatrix,
    keep_slots: Sequence[int],
    layout: TensorLayout,
) -> DensityMatrix:
    """Reduced state on ``keep_slots``; trace and positivity are inherited from ``rho``."""
    if rho.dim != layout.dim:
        raise ValueError(f"State dimension {rho.dim} does not match layout dimension {layout.dim}.")
    reduced = partial_trace_matrix(rho.matrix, keep_slots, layout)
    return DensityMatrix.trusted(hermitize(reduced))


def expm_hermitian(h: ComplexMatrix, t: float) -> ComplexMatrix:
    """
    U = exp(-i h t) via ``numpy.linalg.eigh``.

    Unitary by construction; rejects non-Hermitian generators.
    """
    arr = _as_square(h, "generator")
    if not is_hermitian(arr):
        raise ValueError("expm_hermitian requires a Hermitian generator.")
    evals, evecs = np.linalg.eigh(hermitize(arr))
    phases = np.exp(-1j * evals * float(t))
    return (evecs * phases) @ evecs.conj().T


def is_unitary(u: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    arr = _as_square(u, "unitary")
    eye = np.eye(arr.shape[0], dtype=complex)
    return bool(np.max(np.abs(arr.conj().T @ arr - eye)) <= tol)


def evolve(rho: DensityMatrix, u: ComplexMatrix) -> DensityMatrix:
    """U ρ U†."""
    arr = _as_square(u, "unitary")
    if arr.shape[0] != rho.dim:
        raise ValueError(f"Unitary dimension {arr.shape[0]} does not match state dimension {rho.dim}.")
    if not is_unitary(arr):
        raise ValueError("evolve requires a unitary operator.")
    return DensityMatrix.trusted(hermitize(arr @ rho.matrix @ arr.conj().T))


def trace_norm(a: ComplexMatrix) -> float:
    arr = _as_square(a)
    if is_hermitian(arr):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(arr)))))
    return float(np.sum(np.linalg.svd(arr, compute_uv=False)))


def clamp_spectrum(evals: np.ndarray, tol: float = EIGEN_TOL) -> np.ndarray:
    """Clamp eigenvalues in [-tol, 0) to 0 and above-one rounding to 1."""
    values = np.asarray(evals, dtype=float)
    if values.size and values.min() < -tol:
        raise InvalidStateError(f"Eigenvalue {values.min():.3e} is below -{tol:g}.")
    return np.clip(values, 0.0, 1.0)


def entropy_bits(evals: np.ndarray) -> float:
    values = clamp_spectrum(evals)
    nonzero = values[values > 0.0]
    return float(max(0.0, -np.sum(nonzero * np.log2(nonzero))))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Σ λ log2 λ with 0·log 0 := 0."""
    return entropy_bits(np.linalg.eigvalsh(hermitize(rho.matrix)))
