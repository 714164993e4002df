"""Dense complex Hermitian linear algebra.

Generic operators are plain complex ``numpy`` arrays (row-major ``d x d``).
:class:`HermitianOperator` adds a Hermiticity check and a race-free, lazily
computed spectral decomposition; :class:`DiagonalOperator` stores operators
that are diagonal in the computational basis as a real vector, which keeps
k-body rate evaluations at ``O(2**n)`` cost instead of ``O(4**n)``.
:class:`DensityState` holds a state either as a pure vector or as a mixed
density matrix.

All tolerances below are defaults and can be overridden per call; matrix
comparisons are made relative to the spectral norm so they are scale-free.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, HermiticityError, NumericalError

HERMITICITY_RTOL = 1e-12
EIG_RESIDUAL_RTOL = 1e-10
UNITARITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Return ``U diag(E) U^dagger``."""
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


class HermitianOperator:
    """A dense Hermitian matrix with an optional cached eigendecomposition.

    The matrix must satisfy ``max|X - X^dagger| <= tol * max(1, max|X|)``.
    Instances are treated as immutable; the spectral cache is filled at most
    once under a lock, so sharing across threads is safe.
    """

    __slots__ = ("matrix", "_spectral", "_lock")

    def __init__(self, matrix: np.ndarray, *, tol: float = HERMITICITY_RTOL,
                 validate: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("matrix entries must be finite")
        if validate:
            scale = max(1.0, float(np.abs(m).max()))
            dev = float(np.abs(m - m.conj().T).max())
            if dev > tol * scale:
                raise HermiticityError(
                    f"max|X - X^dagger| = {dev:.3e} exceeds {tol:.1e} * {scale:.3e}")
        self.matrix = m
        self._spectral: SpectralData | None = None
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectral(self) -> SpectralData:
        """Eigendecomposition, computed once on first access."""
        if self._spectral is None:
            with self._lock:
                if self._spectral is None:
                    self._spectral = eig_hermitian(self.matrix, validate=False)
        return self._spectral


class DiagonalOperator:
    """A Hermitian operator diagonal in the computational basis."""

    __slots__ = ("diagonal",)

    def __init__(self, diagonal: np.ndarray):
        d = np.asarray(diagonal, dtype=float)
        if d.ndim != 1:
            raise ValueError("diagonal must be a one-dimensional real vector")
        self.diagonal = d

    @property
    def dim(self) -> int:
        return self.diagonal.shape[0]

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal.astype(complex))


Operator = HermitianOperator | DiagonalOperator | np.ndarray


def as_matrix(op: Operator) -> np.ndarray:
    """Dense complex matrix view of an operator argument."""
    if isinstance(op, HermitianOperator):
        return op.matrix
    if isinstance(op, DiagonalOperator):
        return op.to_dense()
    return np.asarray(op, dtype=complex)


def operator_dim(op: Operator) -> int:
    if isinstance(op, (HermitianOperator, DiagonalOperator)):
        return op.dim
    return np.asarray(op).shape[0]


def apply_operator(op: Operator, vecs: np.ndarray) -> np.ndarray:
    """Apply an operator to a vector or to a batch of row vectors.

    For a batch argument of shape ``(m, d)`` the operator acts on each row.
    """
    if isinstance(op, DiagonalOperator):
        return vecs * op.diagonal
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    if vecs.ndim == 1:
        return m @ vecs
    return vecs @ m.T


class DensityState:
    """Quantum state stored either as a pure vector or a mixed density matrix.

    Invariants checked on construction: unit trace (or unit norm), Hermiticity
    and positive semidefiniteness of the mixed form.
    """

    __slots__ = ("vector", "rho")

    def __init__(self, *, vector: np.ndarray | None = None,
                 rho: np.ndarray | None = None, validate: bool = True):
        if (vector is None) == (rho is None):
            raise ValueError("provide exactly one of vector= or rho=")
        if vector is not None:
            v = np.asarray(vector, dtype=complex)
            if v.ndim != 1:
                raise ValueError("pure state must be a one-dimensional vector")
            if validate:
                nrm = float(np.linalg.norm(v))
                if abs(nrm - 1.0) > TRACE_ATOL:
                    raise ValueError(f"pure state norm {nrm} is not 1")
            self.vector = v
            self.rho = None
        else:
            r = np.asarray(rho, dtype=complex)
            if validate:
                if np.abs(r - r.conj().T).max() > HERMITICITY_RTOL * max(1.0, np.abs(r).max()):
                    raise HermiticityError("density matrix is not Hermitian")
                tr = complex(np.trace(r)).real
                if abs(tr - 1.0) > TRACE_ATOL:
                    raise ValueError(f"density matrix trace {tr} is not 1")
                if np.linalg.eigvalsh(r).min() < -PSD_ATOL:
                    raise ValueError("density matrix is not positive semidefinite")
            self.vector = None
            self.rho = r

    @classmethod
    def pure(cls, vector: np.ndarray, *, normalize: bool = False) -> "DensityState":
        v = np.asarray(vector, dtype=complex)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(vector=v)

    @classmethod
    def mixed(cls, rho: np.ndarray, *, validate: bool = True) -> "DensityState":
        return cls(rho=rho, validate=validate)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls(rho=np.eye(dim, dtype=complex) / dim, validate=False)

    @classmethod
    def thermal(cls, energies: np.ndarray, beta: float,
                eigenvectors: np.ndarray | None = None) -> "DensityState":
        """Gibbs state of the given spectrum, diagonal in the supplied basis."""
        e = np.asarray(energies, dtype=float)
        w = np.exp(-beta * (e - e.min()))
        w /= w.sum()
        if eigenvectors is None:
            rho = np.diag(w.astype(complex))
        else:
            u = np.asarray(eigenvectors, dtype=complex)
            rho = (u * w) @ u.conj().T
        return cls(rho=rho, validate=False)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return self.vector.shape[0] if self.is_pure else self.rho.shape[0]

    def matrix(self) -> np.ndarray:
        """Density matrix form regardless of the internal representation."""
        if self.is_pure:
            return np.outer(self.vector, self.vector.conj())
        return self.rho


def as_density(state: DensityState | np.ndarray) -> DensityState:
    """Coerce an array argument (vector -> pure, matrix -> mixed) to a state."""
    if isinstance(state, DensityState):
        return state
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        return DensityState(vector=a)
    return DensityState(rho=a)


def eig_hermitian(h: Operator, *, validate: bool = True,
                  tol: float = HERMITICITY_RTOL,
                  residual_rtol: float = EIG_RESIDUAL_RTOL) -> SpectralData:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in ascending order.  The residual contract
    ``||H v_k - E_k v_k||_2 <= residual_rtol * d * ||H||`` and the unitarity
    of the eigenvector matrix are verified; a violation raises
    :class:`NumericalError`.
    """
    if isinstance(h, DiagonalOperator):
        order = np.argsort(h.diagonal, kind="stable")
        vecs = np.zeros((h.dim, h.dim), dtype=complex)
        vecs[order, np.arange(h.dim)] = 1.0
        return SpectralData(h.diagonal[order].copy(), vecs)
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    if validate:
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > tol * scale:
            raise HermiticityError("eig_hermitian requires a Hermitian matrix")
    vals, vecs = np.linalg.eigh(m)
    d = m.shape[0]
    norm = float(np.abs(vals).max()) if d else 0.0
    resid = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    if norm > 0 and resid.max() > residual_rtol * d * norm:
        raise NumericalError(f"eigendecomposition residual {resid.max():.3e} out of contract")
    if np.abs(vecs.conj().T @ vecs - np.eye(d)).max() > UNITARITY_ATOL:
        raise NumericalError("eigenvector matrix failed the unitarity check")
    return SpectralData(vals, vecs)


def purity(rho: DensityState | np.ndarray) -> float:
    """tr(rho^2); equals 1 for a pure state and 1/d for the maximally mixed one."""
    state = as_density(rho)
    if state.is_pure:
        return 1.0
    return float(np.sum(np.abs(state.rho) ** 2))


def variance(rho: DensityState | np.ndarray, x: Operator) -> float:
    """Ordinary variance  tr(rho X^2) - tr(rho X)^2  of a Hermitian observable."""
    state = as_density(rho)
    if state.dim != operator_dim(x):
        raise DimensionMismatchError("state and operator dimensions differ")
    if state.is_pure:
        if isinstance(x, DiagonalOperator):
            p = np.abs(state.vector) ** 2
            m = float(x.diagonal @ p)
            return float((x.diagonal ** 2) @ p) - m * m
        w = apply_operator(x, state.vector)
        return float(np.vdot(w, w).real) - float(np.vdot(state.vector, w).real) ** 2
    if isinstance(x, DiagonalOperator):
        p = np.real(np.diag(state.rho))
        m = float(x.diagonal @ p)
        return float((x.diagonal ** 2) @ p) - m * m
    xm = as_matrix(x)
    rx = state.rho @ xm
    return float(np.trace(rx @ xm).real) - float(np.trace(rx).real) ** 2


def modified_covariance(rho: DensityState | np.ndarray, x: Operator,
                        y: Operator) -> complex:
    """Covariance-like functional  tr(rho^2 X Y) - tr(rho X rho Y).

    Real and nonnegative for X = Y Hermitian; on a pure state it reduces to
    the ordinary covariance <XY> - <X><Y>.
    """
    state = as_density(rho)
    if not (state.dim == operator_dim(x) == operator_dim(y)):
        raise DimensionMismatchError("state and operator dimensions differ")
    if state.is_pure:
        v = state.vector
        if isinstance(x, DiagonalOperator) and isinstance(y, DiagonalOperator):
            p = np.abs(v) ** 2
            return complex((x.diagonal * y.diagonal) @ p
                           - (x.diagonal @ p) * (y.diagonal @ p))
        xv = apply_operator(x, v)
        yv = apply_operator(y, v)
        return complex(np.vdot(xv, yv) - np.vdot(v, xv) * np.vdot(v, yv))
    r = state.rho
    if isinstance(x, DiagonalOperator) and isinstance(y, DiagonalOperator):
        r2diag = np.real(np.einsum("ij,ji->i", r, r))
        t1 = complex((r2diag * x.diagonal) @ y.diagonal)
        t2 = complex(np.einsum("ij,j,ji,i->", r, x.diagonal + 0j, r, y.diagonal + 0j))
        return t1 - t2
    xm, ym = as_matrix(x), as_matrix(y)
    rx = r @ xm
    return complex(np.trace(r @ rx @ ym) - np.trace(rx @ r @ ym))


def spectral_norm(x: Operator) -> float:
    """Largest absolute eigenvalue of a Hermitian operator."""
    if isinstance(x, DiagonalOperator):
        return float(np.abs(x.diagonal).max())
    if isinstance(x, HermitianOperator):
        return float(np.abs(x.spectral.eigenvalues).max())
    return float(np.abs(np.linalg.eigvalsh(np.asarray(x, dtype=complex))).max())
