"""The two-qubit states under study: the singlet and the Werner family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ComplexMatrix,
    hermiticity_defect,
    min_eigenvalue_hermitian,
    trace,
)

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGENVALUE_ATOL = 1e-10

VISIBILITY_MIN = -1.0 / 3.0
VISIBILITY_MAX = 1.0
_VISIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class Visibility:
    """Singlet weight of the Werner mixture; admissible exactly on [-1/3, 1]."""

    p: float

    def __post_init__(self) -> None:
        if not (VISIBILITY_MIN - _VISIBILITY_SLACK <= self.p <= VISIBILITY_MAX + _VISIBILITY_SLACK):
            raise ValueError(
                f"visibility p={self.p!r} outside [{VISIBILITY_MIN!r}, {VISIBILITY_MAX!r}]: "
                "the state would not be positive semidefinite"
            )


@dataclass(frozen=True)
class StateDiagnostics:
    """How far a candidate 4x4 matrix is from being a valid density matrix.

    ``min_eigenvalue`` is computed on the Hermitian part so the report stays
    meaningful even when the hermiticity check itself fails.
    """

    hermiticity_error: float
    trace_error: float
    min_eigenvalue: float

    @property
    def hermitian_ok(self) -> bool:
        return self.hermiticity_error <= HERMITIAN_ATOL

    @property
    def trace_ok(self) -> bool:
        return self.trace_error <= TRACE_ATOL

    @property
    def positive_ok(self) -> bool:
        return self.min_eigenvalue >= -EIGENVALUE_ATOL

    @property
    def is_valid(self) -> bool:
        return self.hermitian_ok and self.trace_ok and self.positive_ok


def validate(matrix: ComplexMatrix) -> StateDiagnostics:
    """Diagnose a candidate two-qubit state without raising on failure."""
    if matrix.dim != 4:
        raise ValueError("a two-qubit state must be 4x4")
    hermitian_part = ComplexMatrix((matrix.entries + matrix.entries.conj().T) / 2)
    return StateDiagnostics(
        hermiticity_error=hermiticity_defect(matrix),
        trace_error=abs(trace(matrix) - 1.0),
        min_eigenvalue=min_eigenvalue_hermitian(hermitian_part),
    )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated two-qubit state: Hermitian, unit trace, positive semidefinite."""

    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        diag = validate(self.matrix)
        if not diag.is_valid:
            raise ValueError(
                "invalid density matrix: "
                f"hermiticity error {diag.hermiticity_error:.3e}, "
                f"trace error {diag.trace_error:.3e}, "
                f"min eigenvalue {diag.min_eigenvalue:.3e}"
            )


_SINGLET_ENTRIES = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, -0.5, 0.0],
        [0.0, -0.5, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]
)


def make_singlet() -> DensityMatrix:
    """Projector onto (ud - du)/sqrt(2) in the (uu, ud, du, dd) basis."""
    return DensityMatrix(ComplexMatrix(_SINGLET_ENTRIES))


def werner_matrix(p: float) -> ComplexMatrix:
    """Raw Werner combination p * singlet + (1-p)/4 * identity, unvalidated.

    Useful for probing out-of-range ``p`` with :func:`validate`; use
    :func:`make_werner` to obtain a guaranteed state.
    """
    return ComplexMatrix(p * _SINGLET_ENTRIES + (1.0 - p) / 4.0 * np.eye(4))


def make_werner(p: float) -> DensityMatrix:
    """Werner state with visibility ``p``.

    For p in [0, 1] this is the probabilistic mixture of the singlet with
    white noise (identity/4); the full positivity range extends down to -1/3.
    Out-of-range ``p`` raises instead of being clamped.
    """
    return DensityMatrix(werner_matrix(Visibility(p).p))
