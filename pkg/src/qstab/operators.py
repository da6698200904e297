"""Finite-dimensional complex operator algebra.

Operators are plain ``numpy`` complex matrices; this module supplies the
adjoint/commutator arithmetic, the spectral norm, guarded Hermitian
eigenvalue computation, positivity tests and state expectations that the
rest of the library builds on.  Everything here is a pure function of its
inputs and safe for concurrent use.

Conventions
-----------
* The operator norm is the matrix spectral norm (largest singular value).
* Eigenvalues of nominally Hermitian matrices are always computed with a
  symmetric solver on the Hermitized matrix ``(X + X†)/2``; an asymmetry
  beyond tolerance is an error, never silently repaired.
* Default absolute tolerance on eigenvalues and norms is ``DEFAULT_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidOperatorError,
    InvalidStateError,
    NonHermitianError,
)

DEFAULT_TOL = 1e-9


def as_operator(entries) -> np.ndarray:
    """Coerce ``entries`` to a read-only square complex128 matrix.

    Raises
    ------
    InvalidOperatorError
        If the array is not square, not two-dimensional, empty, or contains
        non-finite entries.
    """
    x = np.array(entries, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidOperatorError(f"operator must be a square matrix, got shape {x.shape}")
    if x.shape[0] < 1:
        raise InvalidOperatorError("operator dimension must be at least 1")
    if not np.all(np.isfinite(x)):
        raise InvalidOperatorError("operator entries must be finite")
    x.flags.writeable = False
    return x


def require_same_dim(*ops: np.ndarray) -> int:
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimensionMismatchError(f"operators have mismatched dimensions {sorted(dims)}")
    return dims.pop()


def adjoint(x: np.ndarray) -> np.ndarray:
    """Conjugate transpose.  An exact involution: adjoint(adjoint(X)) == X."""
    return np.asarray(x).conj().T


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """[X, Y] = XY - YX.  Anti-Hermitian when X and Y are Hermitian."""
    require_same_dim(x, y)
    return x @ y - y @ x


def anticommutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """{X, Y} = XY + YX.  Hermitian when X and Y are Hermitian."""
    require_same_dim(x, y)
    return x @ y + y @ x


def spectral_norm(x: np.ndarray) -> float:
    """Largest singular value; equals max |eigenvalue| for normal matrices."""
    return float(np.linalg.norm(np.asarray(x), ord=2))


def hermitize(x: np.ndarray) -> np.ndarray:
    """Hermitian part (X + X†)/2."""
    return (x + adjoint(x)) / 2.0


def hermiticity_defect(x: np.ndarray) -> float:
    """Spectral-norm distance from X to its Hermitian part, ||X - X†||."""
    return spectral_norm(x - adjoint(x))


def hermitian_eigenvalues(x: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix via a symmetric solver.

    The input is Hermitized before the eigen-solve; an asymmetry larger
    than ``tol`` raises :class:`NonHermitianError` instead of being fixed.
    """
    defect = hermiticity_defect(x)
    if defect > tol:
        raise NonHermitianError(f"matrix is not Hermitian within tolerance: defect {defect:.3e} > {tol:.3e}")
    return np.linalg.eigvalsh(hermitize(x))


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive-semidefiniteness test with its margin."""

    is_psd: bool
    min_eigenvalue: float
    hermiticity_defect: float

    def __bool__(self) -> bool:
        return self.is_psd


def is_psd(x: np.ndarray, tol: float = DEFAULT_TOL) -> PsdReport:
    """Test X >= 0 for a Hermitian X, reporting the minimum eigenvalue.

    The matrix is Hermitized before the eigen-test and the asymmetry is
    reported; asymmetry beyond ``tol`` is rejected with
    :class:`NonHermitianError`.  Passes iff the minimum eigenvalue is at
    least ``-tol``.
    """
    defect = hermiticity_defect(x)
    if defect > tol:
        raise NonHermitianError(f"is_psd requires a Hermitian input: defect {defect:.3e} > {tol:.3e}")
    min_eig = float(np.linalg.eigvalsh(hermitize(x))[0])
    return PsdReport(is_psd=min_eig >= -tol, min_eigenvalue=min_eig, hermiticity_defect=defect)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A density operator: Hermitian, positive semidefinite, unit trace.

    Validation happens at construction with per-invariant tolerances; the
    stored matrix is an immutable copy.
    """

    rho: np.ndarray
    tol_herm: float = field(default=DEFAULT_TOL)
    tol_psd: float = field(default=DEFAULT_TOL)
    tol_trace: float = field(default=DEFAULT_TOL)

    def __post_init__(self):
        rho = as_operator(self.rho)
        defect = hermiticity_defect(rho)
        if defect > self.tol_herm:
            raise InvalidStateError(f"state is not Hermitian: defect {defect:.3e} > {self.tol_herm:.3e}")
        min_eig = float(np.linalg.eigvalsh(hermitize(rho))[0])
        if min_eig < -self.tol_psd:
            raise InvalidStateError(f"state is not positive semidefinite: min eigenvalue {min_eig:.3e}")
        trace_err = abs(np.trace(rho) - 1.0)
        if trace_err > self.tol_trace:
            raise InvalidStateError(f"state trace differs from 1 by {trace_err:.3e}")
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def from_vector(cls, psi, **tols) -> "QuantumState":
        """Pure state |psi><psi| from a (not necessarily normalized) vector."""
        v = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise InvalidStateError("state vector must be nonzero")
        v = v / norm
        return cls(np.outer(v, v.conj()), **tols)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "QuantumState":
        return cls(np.eye(dim, dtype=complex) / dim)

    def pure_vector(self, tol: float = 1e-9) -> np.ndarray:
        """Extract |psi> from a pure state; error if the state is mixed.

        Purity is checked as ||rho^2 - rho|| <= tol.  The returned vector's
        global phase follows the eigen-solver and is physically irrelevant.
        """
        defect = spectral_norm(self.rho @ self.rho - self.rho)
        if defect > tol:
            raise InvalidStateError(f"state is not pure: ||rho^2 - rho|| = {defect:.3e}")
        vals, vecs = np.linalg.eigh(hermitize(self.rho))
        return np.ascontiguousarray(vecs[:, -1])


def expectation(rho, x: np.ndarray) -> complex:
    """Expectation Tr(rho X) of X in the state rho.

    ``rho`` may be a :class:`QuantumState` or a plain density matrix.  The
    value is real (up to roundoff) for Hermitian X, bounded by ||X|| in
    modulus, and nonnegative for positive semidefinite X.
    """
    r = rho.rho if isinstance(rho, QuantumState) else np.asarray(rho, dtype=complex)
    x = np.asarray(x, dtype=complex)
    require_same_dim(r, x)
    return complex(np.trace(r @ x))
